#include "cvqkd/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cvqkd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad numeric value for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v) || std::fabs(v) > 2147483647.0) {
    throw std::runtime_error("config: '" + key + "' must be an integer, got " + value);
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos, 0);  // base 0: decimal or 0x hex
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad seed value for '" + key + "': " + value);
  }
}

// Lists are comma-separated scalars; each element may also be a
// start:stop:step range (inclusive stop, within half a step).
std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::runtime_error("config: empty element in '" + key + "'");
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(parse_double(key, item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) {
      throw std::runtime_error("config: range in '" + key + "' needs start:stop:step");
    }
    const double start = parse_double(key, trim(item.substr(0, c1)));
    const double stop = parse_double(key, trim(item.substr(c1 + 1, c2 - c1 - 1)));
    const double step = parse_double(key, trim(item.substr(c2 + 1)));
    if (step <= 0.0 || stop < start) {
      throw std::runtime_error("config: bad range in '" + key + "': " + item);
    }
    const long count = std::lround(std::floor((stop - start) / step + 0.5 + 1e-12));
    for (long i = 0; i <= count; ++i) {
      const double v = start + static_cast<double>(i) * step;
      if (v <= stop + 0.5 * step) out.push_back(std::min(v, stop));
    }
    if (!out.empty() && out.back() < stop - 1e-9 * std::max(1.0, std::fabs(stop))) {
      out.push_back(stop);
    }
  }
  if (out.empty()) throw std::runtime_error("config: '" + key + "' is empty");
  return out;
}

std::string list_to_string(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_double(v[i]);
  }
  return s;
}

std::uint64_t fnv1a64(const std::string& data, std::uint64_t h = 1469598103934665603ULL) {
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string u64_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {
std::string hex16(std::uint64_t v) { return u64_hex(v); }
}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ChannelParams ExperimentConfig::channel_at_distance(double d_km) const {
  return ChannelParams::from_distance(v_a, xi, eta_eff, d_km, mu);
}

SecurityParams ExperimentConfig::security(std::size_t n_total) const {
  SecurityParams sp;
  sp.n_total = n_total;
  const auto m = static_cast<std::size_t>(std::llround(fraction_est * static_cast<double>(n_total)));
  if (m >= n_total) throw std::runtime_error("config: fraction_est leaves no key rounds");
  sp.n_key = n_total - m;
  sp.eps_pe = eps_pe;
  sp.eps_cor = eps_cor;
  sp.eps_bar = eps_bar;
  sp.eps_pa = eps_pa;
  sp.beta = beta;
  sp.p_ec = p_ec;
  sp.dim_hx = dim_hx;
  sp.validate();
  return sp;
}

std::pair<double, double> ExperimentConfig::gain_range() const {
  const double t_hi = std::sqrt(transmittance_from_distance(d_min, eta_eff));
  const double t_lo = std::sqrt(transmittance_from_distance(d_max, eta_eff));
  return {t_lo, t_hi};
}

void ExperimentConfig::validate() const {
  if (!seed_set) throw std::runtime_error("config: master_seed is required");
  if (v_a <= 0.0) throw std::runtime_error("config: v_a must be positive");
  if (xi < 0.0) throw std::runtime_error("config: xi must be non-negative");
  if (eta_eff <= 0.0 || eta_eff > 1.0) throw std::runtime_error("config: eta_eff must be in (0,1]");
  if (mu != 1 && mu != 2) throw std::runtime_error("config: mu must be 1 or 2");
  if (beta < 0.0 || beta > 1.0) throw std::runtime_error("config: beta must be in [0,1]");
  if (p_ec <= 0.0 || p_ec > 1.0) throw std::runtime_error("config: p_ec must be in (0,1]");
  if (dim_hx < 2) throw std::runtime_error("config: dim_hx must be at least 2");
  if (fraction_est <= 0.0 || fraction_est >= 1.0) {
    throw std::runtime_error("config: fraction_est must be in (0,1)");
  }
  for (const double e : {eps_pe, eps_cor, eps_bar, eps_pa}) {
    if (e <= 0.0 || e >= 1.0) throw std::runtime_error("config: epsilons must be in (0,1)");
  }
  if (experiment != "single_trial" && experiment != "rmse_vs_m" &&
      experiment != "keyrate_vs_distance" && experiment != "keyrate_vs_n") {
    throw std::runtime_error("config: unknown experiment '" + experiment + "'");
  }
  if (estimator != "mle" && estimator != "nn" && estimator != "both") {
    throw std::runtime_error("config: estimator must be mle, nn or both");
  }
  for (const double m : m_list) {
    if (m < 3.0 || m != std::floor(m)) throw std::runtime_error("config: m_list entries must be integers >= 3");
  }
  for (const double n : n_list) {
    if (n < 4.0 || n != std::floor(n)) throw std::runtime_error("config: n_list entries must be integers >= 4");
  }
  for (const double d : distance_grid) {
    if (d < 0.0) throw std::runtime_error("config: distances must be non-negative");
  }
  if (fixed_transmittance <= 0.0 || fixed_transmittance > 1.0) {
    throw std::runtime_error("config: fixed_transmittance must be in (0,1]");
  }
  if (distance_km < 0.0) throw std::runtime_error("config: distance_km must be non-negative");
  if (trial_count < 1) throw std::runtime_error("config: trial_count must be positive");
  if (train_trials < 10) throw std::runtime_error("config: train_trials must be at least 10");
  if (m_train < 3.0 || m_train != std::floor(m_train)) {
    throw std::runtime_error("config: m_train must be an integer >= 3");
  }
  if (learning_rate <= 0.0) throw std::runtime_error("config: learning_rate must be positive");
  if (weight_decay < 0.0) throw std::runtime_error("config: weight_decay must be non-negative");
  if (batch_size < 1) throw std::runtime_error("config: batch_size must be positive");
  if (epochs < 1) throw std::runtime_error("config: epochs must be positive");
  if (patience < 1) throw std::runtime_error("config: patience must be positive");
  if (val_fraction <= 0.0 || val_fraction >= 0.5) {
    throw std::runtime_error("config: val_fraction must be in (0,0.5)");
  }
  if (amplification <= 1.0) throw std::runtime_error("config: amplification must exceed 1");
  if (d_min < 0.0 || d_max <= d_min) throw std::runtime_error("config: need 0 <= d_min < d_max");
  if (n_cal < 2) throw std::runtime_error("config: n_cal must be at least 2");
  if (interval_form != "eq24" && interval_form != "eq25") {
    throw std::runtime_error("config: interval_form must be eq24 or eq25");
  }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  bool distance_grid_set = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key or value");
    }

    if (key == "v_a") cfg.v_a = parse_double(key, value);
    else if (key == "xi") cfg.xi = parse_double(key, value);
    else if (key == "eta_eff") cfg.eta_eff = parse_double(key, value);
    else if (key == "mu") cfg.mu = parse_int(key, value);
    else if (key == "beta") cfg.beta = parse_double(key, value);
    else if (key == "p_ec") cfg.p_ec = parse_double(key, value);
    else if (key == "dim_hx") cfg.dim_hx = parse_int(key, value);
    else if (key == "fraction_est") cfg.fraction_est = parse_double(key, value);
    else if (key == "eps_pe") cfg.eps_pe = parse_double(key, value);
    else if (key == "eps_cor") cfg.eps_cor = parse_double(key, value);
    else if (key == "eps_bar") cfg.eps_bar = parse_double(key, value);
    else if (key == "eps_pa") cfg.eps_pa = parse_double(key, value);
    else if (key == "experiment") cfg.experiment = value;
    else if (key == "master_seed") { cfg.master_seed = parse_u64(key, value); cfg.seed_set = true; }
    else if (key == "estimator") cfg.estimator = value;
    else if (key == "m_list") cfg.m_list = parse_list(key, value);
    else if (key == "n_list") cfg.n_list = parse_list(key, value);
    else if (key == "distance_grid") { cfg.distance_grid = parse_list(key, value); distance_grid_set = true; }
    else if (key == "fixed_transmittance") cfg.fixed_transmittance = parse_double(key, value);
    else if (key == "distance_km") cfg.distance_km = parse_double(key, value);
    else if (key == "trial_count") cfg.trial_count = parse_int(key, value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "model_path") cfg.model_path = value;
    else if (key == "calibration_path") cfg.calibration_path = value;
    else if (key == "train_trials") cfg.train_trials = parse_int(key, value);
    else if (key == "m_train") cfg.m_train = parse_double(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
    else if (key == "weight_decay") cfg.weight_decay = parse_double(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
    else if (key == "epochs") cfg.epochs = parse_int(key, value);
    else if (key == "patience") cfg.patience = parse_int(key, value);
    else if (key == "val_fraction") cfg.val_fraction = parse_double(key, value);
    else if (key == "amplification") cfg.amplification = parse_double(key, value);
    else if (key == "d_min") cfg.d_min = parse_double(key, value);
    else if (key == "d_max") cfg.d_max = parse_double(key, value);
    else if (key == "n_cal") cfg.n_cal = parse_int(key, value);
    else if (key == "ridge") cfg.ridge = parse_double(key, value);
    else if (key == "interval_form") cfg.interval_form = value;
    else {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!distance_grid_set) {
    cfg.distance_grid.clear();
    for (double d = 0.0; d <= 100.0 + 1e-9; d += 2.0) cfg.distance_grid.push_back(d);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string canonical_config(const ExperimentConfig& config) {
  std::map<std::string, std::string> kv;
  kv["v_a"] = format_double(config.v_a);
  kv["xi"] = format_double(config.xi);
  kv["eta_eff"] = format_double(config.eta_eff);
  kv["mu"] = std::to_string(config.mu);
  kv["beta"] = format_double(config.beta);
  kv["p_ec"] = format_double(config.p_ec);
  kv["dim_hx"] = std::to_string(config.dim_hx);
  kv["fraction_est"] = format_double(config.fraction_est);
  kv["eps_pe"] = format_double(config.eps_pe);
  kv["eps_cor"] = format_double(config.eps_cor);
  kv["eps_bar"] = format_double(config.eps_bar);
  kv["eps_pa"] = format_double(config.eps_pa);
  kv["experiment"] = config.experiment;
  // 0x prefix keeps the canonical text reparseable by the base-0 reader.
  kv["master_seed"] = "0x" + hex16(config.master_seed);
  kv["estimator"] = config.estimator;
  kv["m_list"] = list_to_string(config.m_list);
  kv["n_list"] = list_to_string(config.n_list);
  kv["distance_grid"] = list_to_string(config.distance_grid);
  kv["fixed_transmittance"] = format_double(config.fixed_transmittance);
  kv["distance_km"] = format_double(config.distance_km);
  kv["trial_count"] = std::to_string(config.trial_count);
  kv["train_trials"] = std::to_string(config.train_trials);
  kv["m_train"] = format_double(config.m_train);
  kv["learning_rate"] = format_double(config.learning_rate);
  kv["weight_decay"] = format_double(config.weight_decay);
  kv["batch_size"] = std::to_string(config.batch_size);
  kv["epochs"] = std::to_string(config.epochs);
  kv["patience"] = std::to_string(config.patience);
  kv["val_fraction"] = format_double(config.val_fraction);
  kv["amplification"] = format_double(config.amplification);
  kv["d_min"] = format_double(config.d_min);
  kv["d_max"] = format_double(config.d_max);
  kv["n_cal"] = std::to_string(config.n_cal);
  kv["ridge"] = format_double(config.ridge);
  kv["interval_form"] = config.interval_form;
  // output_dir / model_path / calibration_path are locations, not physics;
  // they stay out of the hash so moving artifacts does not invalidate them.
  std::string s;
  for (const auto& [k, v] : kv) {
    s += k;
    s += "=";
    s += v;
    s += "\n";
  }
  return s;
}

std::string config_hash_hex(const ExperimentConfig& config) {
  return hex16(fnv1a64(canonical_config(config)));
}

// Training artifacts depend only on the generative model and the training
// recipe, so e.g. changing trial_count must not retrain.
std::string train_config_hash_hex(const ExperimentConfig& config) {
  std::string s;
  s += "v_a=" + format_double(config.v_a) + "\n";
  s += "xi=" + format_double(config.xi) + "\n";
  s += "eta_eff=" + format_double(config.eta_eff) + "\n";
  s += "mu=" + std::to_string(config.mu) + "\n";
  s += "master_seed=0x" + hex16(config.master_seed) + "\n";
  s += "train_trials=" + std::to_string(config.train_trials) + "\n";
  s += "m_train=" + format_double(config.m_train) + "\n";
  s += "learning_rate=" + format_double(config.learning_rate) + "\n";
  s += "weight_decay=" + format_double(config.weight_decay) + "\n";
  s += "batch_size=" + std::to_string(config.batch_size) + "\n";
  s += "epochs=" + std::to_string(config.epochs) + "\n";
  s += "patience=" + std::to_string(config.patience) + "\n";
  s += "val_fraction=" + format_double(config.val_fraction) + "\n";
  s += "amplification=" + format_double(config.amplification) + "\n";
  s += "d_min=" + format_double(config.d_min) + "\n";
  s += "d_max=" + format_double(config.d_max) + "\n";
  return hex16(fnv1a64(s));
}

std::string calibration_config_hash_hex(const ExperimentConfig& config, std::size_t m) {
  std::string s = "model=" + train_config_hash_hex(config) + "\n";
  s += "n_cal=" + std::to_string(config.n_cal) + "\n";
  s += "ridge=" + format_double(config.ridge) + "\n";
  s += "m=" + std::to_string(m) + "\n";
  return hex16(fnv1a64(s));
}

}  // namespace cvqkd
