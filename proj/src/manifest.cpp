// SPDX-License-Identifier: Apache-2.0
#include "ttsa/manifest.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ttsa {

using nlohmann::json;

namespace {

// Typed access to one JSON object with key-path aware errors and a check for
// unknown keys.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ManifestError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ManifestError(sub(key), "missing required key");
    return j_.at(key);
  }

  std::string str(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ManifestError(sub(key), "expected a string");
    return v.get<std::string>();
  }

  double num(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ManifestError(sub(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ManifestError(sub(key), "must be finite");
    return d;
  }

  std::uint64_t uint(const std::string& key) { return as_uint(at(key), sub(key)); }

  double num_or(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }
  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) { return has(key) ? uint(key) : fallback; }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  static std::uint64_t as_uint(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      if (v.get<std::int64_t>() < 0) throw ManifestError(path, "must be non-negative");
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0 && d < 0x1.0p63 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
    throw ManifestError(path, "expected a non-negative integer");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ManifestError(sub(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> num_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ManifestError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      throw ManifestError(fmt::format("{}[{}]", path, i), "expected a finite number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

ProblemConstants parse_constants(const json& j) {
  Reader r(j, "constants");
  ProblemConstants c;
  c.mu_F = r.num("mu_F");
  c.mu_G = r.num("mu_G");
  c.L_F = r.num("L_F");
  c.L_H = r.num("L_H");
  c.L_Gx = r.num("L_Gx");
  c.L_Gy = r.num("L_Gy");
  c.delta_F = r.num("delta_F");
  c.delta_G = r.num("delta_G");
  c.delta_H = r.num("delta_H");
  c.S_H = r.num("S_H");
  c.S_BF = r.num("S_BF");
  c.S_BG = r.num("S_BG");
  r.finish();
  if (auto v = check_constants(c); !v.empty()) throw ManifestError("constants", v.front());
  return c;
}

json constants_json(const ProblemConstants& c) {
  return {{"mu_F", c.mu_F},     {"mu_G", c.mu_G},       {"L_F", c.L_F},         {"L_H", c.L_H},
          {"L_Gx", c.L_Gx},     {"L_Gy", c.L_Gy},       {"delta_F", c.delta_F}, {"delta_G", c.delta_G},
          {"delta_H", c.delta_H}, {"S_H", c.S_H},       {"S_BF", c.S_BF},       {"S_BG", c.S_BG}};
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

SlopeWindow ExperimentManifest::window_for(const std::string& metric) const {
  if (auto it = slope_windows.find(metric); it != slope_windows.end()) return it->second;
  return {static_cast<double>(horizon) / 10.0, static_cast<double>(horizon)};
}

std::vector<std::uint64_t> ExperimentManifest::checkpoints() const {
  return checkpoint_list.empty() ? default_checkpoints(horizon, checkpoint_count) : checkpoint_list;
}

ExperimentManifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError("<root>", std::string("invalid JSON: ") + e.what());
  }
  Reader r(j, "");
  ExperimentManifest m;
  m.name = r.str("name");
  if (m.name.empty()) throw ManifestError("name", "must be non-empty");
  m.problem = r.str("problem");
  if (r.has("constants")) m.constants = parse_constants(r.at("constants"));

  {
    Reader s(r.at("schedule"), "schedule");
    m.alpha0 = s.num("alpha0");
    m.beta0 = s.num("beta0");
    m.T0 = s.uint_or("T0", 1);
    const json& rates = s.at("rates");
    if (!rates.is_array() || rates.empty()) throw ManifestError("schedule.rates", "expected a non-empty array of [a, b]");
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const auto pair = num_array(rates[i], fmt::format("schedule.rates[{}]", i));
      if (pair.size() != 2) throw ManifestError(fmt::format("schedule.rates[{}]", i), "expected [a, b]");
      m.rates.emplace_back(pair[0], pair[1]);
    }
    s.finish();
    for (std::size_t i = 0; i < m.rates.size(); ++i) {
      try {
        StepSchedule(m.alpha0, m.rates[i].first, m.beta0, m.rates[i].second, m.T0);
      } catch (const std::invalid_argument& e) {
        throw ManifestError(fmt::format("schedule.rates[{}]", i), e.what());
      }
    }
  }

  {
    Reader n(r.at("noise"), "noise");
    try {
      m.noise.kind = noise_kind_from_string(n.str("kind"));
    } catch (const ManifestError&) {
      throw;
    } catch (const ConfigError& e) {
      throw ManifestError("noise.kind", e.what());
    }
    m.noise.sigma_xi = n.num("sigma_xi");
    m.noise.sigma_psi = n.num("sigma_psi");
    m.noise.bias_scale = n.num_or("bias_scale", 0.0);
    n.finish();
    try {
      validate_noise(m.noise);
    } catch (const ConfigError& e) {
      throw ManifestError("noise", e.what());
    }
  }

  m.horizon = r.uint("horizon");
  m.replications = r.uint("replications");
  if (m.replications < 1) throw ManifestError("replications", "must be >= 1");
  m.seed = r.uint_or("seed", 0);
  if (r.has("mode")) {
    try {
      m.mode = update_mode_from_string(r.str("mode"));
    } catch (const ManifestError&) {
      throw;
    } catch (const ConfigError& e) {
      throw ManifestError("mode", e.what());
    }
  }

  if (r.has("checkpoints")) {
    Reader c(r.at("checkpoints"), "checkpoints");
    m.checkpoint_count = c.uint_or("count", 100);
    if (m.checkpoint_count < 1) throw ManifestError("checkpoints.count", "must be >= 1");
    if (c.has("list")) {
      const json& list = c.at("list");
      if (!list.is_array() || list.empty()) throw ManifestError("checkpoints.list", "expected a non-empty array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        m.checkpoint_list.push_back(Reader::as_uint(list[i], fmt::format("checkpoints.list[{}]", i)));
        if (i > 0 && m.checkpoint_list[i] <= m.checkpoint_list[i - 1]) {
          throw ManifestError(fmt::format("checkpoints.list[{}]", i), "must be strictly increasing");
        }
      }
      if (m.checkpoint_list.back() > m.horizon) throw ManifestError("checkpoints.list", "exceeds horizon");
    }
    c.finish();
  }

  if (r.has("x0")) m.x0 = Vec(num_array(r.at("x0"), "x0"));
  if (r.has("y0")) m.y0 = Vec(num_array(r.at("y0"), "y0"));

  if (r.has("grid_search")) {
    Reader g(r.at("grid_search"), "grid_search");
    GridSearchSpec gs;
    if (g.has("alpha0_grid")) gs.alpha0_grid = num_array(g.at("alpha0_grid"), "grid_search.alpha0_grid");
    if (g.has("beta0_grid")) gs.beta0_grid = num_array(g.at("beta0_grid"), "grid_search.beta0_grid");
    gs.search_horizon = g.uint_or("search_horizon", gs.search_horizon);
    gs.search_reps = g.uint_or("search_reps", gs.search_reps);
    if (g.has("constraint")) {
      const std::string c = g.str("constraint");
      if (c != kBetaConstraint) {
        throw ManifestError("grid_search.constraint", fmt::format("only \"{}\" is supported", kBetaConstraint));
      }
      gs.beta0_at_least_one_when_b_is_one = true;
    }
    g.finish();
    if (gs.alpha0_grid.empty()) throw ManifestError("grid_search.alpha0_grid", "must be non-empty");
    if (gs.beta0_grid.empty()) throw ManifestError("grid_search.beta0_grid", "must be non-empty");
    for (double v : gs.alpha0_grid) {
      if (!(v > 0)) throw ManifestError("grid_search.alpha0_grid", "entries must be > 0");
    }
    for (double v : gs.beta0_grid) {
      if (!(v > 0)) throw ManifestError("grid_search.beta0_grid", "entries must be > 0");
    }
    if (gs.search_reps < 1) throw ManifestError("grid_search.search_reps", "must be >= 1");
    m.grid_search = gs;
  }

  if (r.has("slopes")) {
    Reader s(r.at("slopes"), "slopes");
    if (s.has("metrics")) {
      const json& ms = s.at("metrics");
      if (!ms.is_array()) throw ManifestError("slopes.metrics", "expected an array of metric names");
      m.slope_metrics.clear();
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const std::string path = fmt::format("slopes.metrics[{}]", i);
        if (!ms[i].is_string()) throw ManifestError(path, "expected a string");
        try {
          metric_from_string(ms[i].get<std::string>());
        } catch (const ConfigError& e) {
          throw ManifestError(path, e.what());
        }
        m.slope_metrics.push_back(ms[i].get<std::string>());
      }
    }
    if (s.has("windows")) {
      const json& ws = s.at("windows");
      if (!ws.is_object()) throw ManifestError("slopes.windows", "expected an object");
      for (auto it = ws.begin(); it != ws.end(); ++it) {
        const std::string path = "slopes.windows." + it.key();
        try {
          metric_from_string(it.key());
        } catch (const ConfigError& e) {
          throw ManifestError(path, e.what());
        }
        const auto w = num_array(it.value(), path);
        if (w.size() != 2 || !(w[0] < w[1])) throw ManifestError(path, "expected [lo, hi] with lo < hi");
        m.slope_windows[it.key()] = {w[0], w[1]};
      }
    }
    s.finish();
  }

  if (r.has("output_dir")) m.output_dir = r.str("output_dir");
  r.finish();
  return m;
}

ExperimentManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("<file>", fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::string serialize_manifest(const ExperimentManifest& m) {
  json j;
  j["name"] = m.name;
  j["problem"] = m.problem;
  if (m.constants) j["constants"] = constants_json(*m.constants);
  json rates = json::array();
  for (const auto& [a, b] : m.rates) rates.push_back({a, b});
  j["schedule"] = {{"alpha0", m.alpha0}, {"beta0", m.beta0}, {"T0", m.T0}, {"rates", rates}};
  j["noise"] = {{"kind", to_string(m.noise.kind)},
                {"sigma_xi", m.noise.sigma_xi},
                {"sigma_psi", m.noise.sigma_psi},
                {"bias_scale", m.noise.bias_scale}};
  j["horizon"] = m.horizon;
  j["replications"] = m.replications;
  j["seed"] = m.seed;
  j["mode"] = to_string(m.mode);
  j["checkpoints"] = {{"count", m.checkpoint_count}};
  if (!m.checkpoint_list.empty()) j["checkpoints"]["list"] = m.checkpoint_list;
  if (m.x0) j["x0"] = vec_json(*m.x0);
  if (m.y0) j["y0"] = vec_json(*m.y0);
  if (m.grid_search) {
    const auto& g = *m.grid_search;
    j["grid_search"] = {{"alpha0_grid", g.alpha0_grid},
                        {"beta0_grid", g.beta0_grid},
                        {"search_horizon", g.search_horizon},
                        {"search_reps", g.search_reps},
                        {"constraint", g.beta0_at_least_one_when_b_is_one ? json(kBetaConstraint) : json(nullptr)}};
  }
  json windows = json::object();
  for (const auto& [k, w] : m.slope_windows) windows[k] = {w.lo, w.hi};
  j["slopes"] = {{"metrics", m.slope_metrics}, {"windows", windows}};
  j["output_dir"] = m.output_dir;
  return j.dump(2) + "\n";
}

std::string manifest_hash(const ExperimentManifest& m) {
  const std::string text = serialize_manifest(m);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace ttsa
