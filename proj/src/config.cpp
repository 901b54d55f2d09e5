#include "sparse_minimax/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sparse_minimax {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void reject_unknown(const KeyValueConfig& kv, const std::set<std::string>& known, const char* what) {
  for (const auto& [key, value] : kv.entries) {
    if (!known.count(key)) {
      throw ConfigError(std::string("unknown ") + what + " config key '" + key + "'");
    }
  }
}

}  // namespace

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return std::nullopt;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries.emplace_back(key, value);
}

KeyValueConfig parse_key_values(const std::string& text) {
  KeyValueConfig kv;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    kv.set(key, value);
  }
  return kv;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ExperimentConfig experiment_from(const KeyValueConfig& kv) {
  reject_unknown(kv,
                 {"n", "p", "k", "sigma", "eps", "estimator", "estimators", "amplitudes", "amplitude_multipliers",
                  "reps", "master_seed", "seed", "slope_q", "q", "random_support", "noiseless", "enumeration_cap",
                  "sre_restarts", "threads", "max_flagged_share"},
                 "experiment");
  ExperimentConfig c;
  if (auto v = kv.get("n")) c.n = to_int("n", *v);
  if (auto v = kv.get("p")) c.p = to_int("p", *v);
  if (auto v = kv.get("k")) c.k = to_int("k", *v);
  if (auto v = kv.get("sigma")) c.sigma = to_double("sigma", *v);
  if (auto v = kv.get("eps")) c.eps = to_double("eps", *v);
  for (const char* key : {"estimator", "estimators"}) {
    if (auto v = kv.get(key)) {
      c.estimators.clear();
      for (const auto& name : split_list(*v)) {
        try {
          c.estimators.push_back(parse_estimator(name));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
      }
    }
  }
  if (auto v = kv.get("reps")) c.reps = static_cast<int>(to_int("reps", *v));
  if (auto v = kv.get("seed")) c.master_seed = to_u64("seed", *v);
  if (auto v = kv.get("master_seed")) c.master_seed = to_u64("master_seed", *v);
  if (auto v = kv.get("q")) c.slope_q = to_double("q", *v);
  if (auto v = kv.get("slope_q")) c.slope_q = to_double("slope_q", *v);
  if (auto v = kv.get("random_support")) c.random_support = to_bool("random_support", *v);
  if (auto v = kv.get("noiseless")) c.noiseless = to_bool("noiseless", *v);
  if (auto v = kv.get("enumeration_cap")) c.enumeration_cap = to_double("enumeration_cap", *v);
  if (auto v = kv.get("sre_restarts")) c.sre_restarts = static_cast<int>(to_int("sre_restarts", *v));
  if (auto v = kv.get("threads")) c.threads = static_cast<int>(to_int("threads", *v));
  if (auto v = kv.get("max_flagged_share")) c.max_flagged_share = to_double("max_flagged_share", *v);

  const auto abs_list = kv.get("amplitudes");
  const auto mult_list = kv.get("amplitude_multipliers");
  if (abs_list && mult_list) throw ConfigError("config: give either amplitudes or amplitude_multipliers, not both");
  if (abs_list) {
    for (const auto& a : split_list(*abs_list)) c.amplitudes.push_back(to_double("amplitudes", a));
    if (c.amplitudes.empty()) throw ConfigError("config key 'amplitudes': empty list");
  }
  if (mult_list) {
    if (c.k < 1 || c.p <= c.k || c.n < 1) {
      throw ConfigError("config: amplitude_multipliers need 1 <= k < p and n >= 1");
    }
    const double unit = c.sigma * std::sqrt(2.0 * std::log(static_cast<double>(c.p) / static_cast<double>(c.k)) /
                                            static_cast<double>(c.n));
    for (const auto& m : split_list(*mult_list)) c.amplitudes.push_back(to_double("amplitude_multipliers", m) * unit);
    if (c.amplitudes.empty()) throw ConfigError("config key 'amplitude_multipliers': empty list");
  }
  return c;
}

ProofRunConfig proof_run_from(const KeyValueConfig& kv) {
  reject_unknown(kv,
                 {"n", "p", "k", "sigma", "eps", "amplitude_multiplier", "k_star", "reps", "seed", "master_seed",
                  "threads", "delta0", "delta1", "delta2", "delta3", "u_random"},
                 "lemma");
  ProofRunConfig c;
  if (auto v = kv.get("n")) c.n = to_int("n", *v);
  if (auto v = kv.get("p")) c.p = to_int("p", *v);
  if (auto v = kv.get("k")) c.k = to_int("k", *v);
  if (auto v = kv.get("sigma")) c.sigma = to_double("sigma", *v);
  if (auto v = kv.get("eps")) c.eps = to_double("eps", *v);
  if (auto v = kv.get("amplitude_multiplier")) c.amplitude_multiplier = to_double("amplitude_multiplier", *v);
  if (auto v = kv.get("k_star")) c.k_star = to_int("k_star", *v);
  if (auto v = kv.get("reps")) c.reps = static_cast<int>(to_int("reps", *v));
  if (auto v = kv.get("seed")) c.seed = to_u64("seed", *v);
  if (auto v = kv.get("master_seed")) c.seed = to_u64("master_seed", *v);
  if (auto v = kv.get("threads")) c.threads = static_cast<int>(to_int("threads", *v));
  if (auto v = kv.get("delta0")) c.stochastic.delta0 = to_double("delta0", *v);
  if (auto v = kv.get("delta1")) c.stochastic.delta1 = to_double("delta1", *v);
  if (auto v = kv.get("delta2")) c.stochastic.delta2 = to_double("delta2", *v);
  if (auto v = kv.get("delta3")) c.stochastic.delta3 = to_double("delta3", *v);
  if (auto v = kv.get("u_random")) c.u_random = static_cast<int>(to_int("u_random", *v));
  return c;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "n = " << c.n << '\n'
      << "p = " << c.p << '\n'
      << "k = " << c.k << '\n'
      << "sigma = " << format_double(c.sigma) << '\n'
      << "eps = " << format_double(c.eps) << '\n';
  out << "estimators = ";
  for (std::size_t i = 0; i < c.estimators.size(); ++i) out << (i ? "," : "") << to_string(c.estimators[i]);
  out << '\n';
  const auto amps = c.resolved_amplitudes();
  out << "amplitudes = ";
  for (std::size_t i = 0; i < amps.size(); ++i) out << (i ? "," : "") << format_double(amps[i]);
  out << '\n'
      << "reps = " << c.reps << '\n'
      << "master_seed = " << c.master_seed << '\n'
      << "slope_q = " << format_double(c.slope_q) << '\n'
      << "random_support = " << (c.random_support ? "true" : "false") << '\n'
      << "noiseless = " << (c.noiseless ? "true" : "false") << '\n'
      << "enumeration_cap = " << format_double(c.enumeration_cap) << '\n'
      << "sre_restarts = " << c.sre_restarts << '\n'
      << "max_flagged_share = " << format_double(c.max_flagged_share) << '\n';
  return out.str();
}

std::string to_config_text(const ProofRunConfig& c) {
  std::ostringstream out;
  out << "n = " << c.n << '\n'
      << "p = " << c.p << '\n'
      << "k = " << c.k << '\n'
      << "sigma = " << format_double(c.sigma) << '\n'
      << "eps = " << format_double(c.eps) << '\n'
      << "amplitude_multiplier = " << format_double(c.amplitude_multiplier) << '\n'
      << "k_star = " << c.resolved_k_star() << '\n'
      << "reps = " << c.reps << '\n'
      << "seed = " << c.seed << '\n'
      << "delta0 = " << format_double(c.stochastic.delta0) << '\n'
      << "delta1 = " << format_double(c.stochastic.delta1) << '\n'
      << "delta2 = " << format_double(c.stochastic.delta2) << '\n'
      << "delta3 = " << format_double(c.stochastic.delta3) << '\n'
      << "u_random = " << c.u_random << '\n';
  return out.str();
}

}  // namespace sparse_minimax
