// SPDX-License-Identifier: Apache-2.0
#include "matwalk/config.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

namespace matwalk {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw std::invalid_argument(path + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (allowed.find(key) == allowed.end())
      throw std::invalid_argument(path + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

void check_range(double v, double lo, double hi, const std::string& what) {
  if (!(v >= lo && v <= hi))
    throw std::invalid_argument(what + " out of range [" +
                                std::to_string(lo) + ", " + std::to_string(hi) +
                                "]: " + std::to_string(v));
}

ScalarLaw parse_scalar_law(const json& obj, const std::string& path) {
  require_keys(obj, path, {"dist", "a", "b", "p"});
  const std::string dist = obj.at("dist").get<std::string>();
  const double a = get_or(obj, "a", 0.0);
  const double b = get_or(obj, "b", 0.0);
  const double p = get_or(obj, "p", 0.5);
  if (dist == "constant") return ScalarLaw::constant(a);
  if (dist == "two-point") {
    check_range(p, 0.0, 1.0, path + ".p");
    return ScalarLaw::two_point(a, b, p);
  }
  if (dist == "uniform") {
    if (!(b > a)) throw std::invalid_argument(path + ": uniform needs b > a");
    return ScalarLaw::uniform(a, b);
  }
  if (dist == "normal") {
    if (!(b >= 0.0)) throw std::invalid_argument(path + ": normal needs sd >= 0");
    return ScalarLaw::normal(a, b);
  }
  throw std::invalid_argument(path + ": unknown dist '" + dist + "'");
}

json scalar_law_to_json(const ScalarLaw& s) {
  json j;
  switch (s.kind) {
    case ScalarLaw::Kind::Constant: j["dist"] = "constant"; j["a"] = s.a; break;
    case ScalarLaw::Kind::TwoPoint:
      j["dist"] = "two-point";
      j["a"] = s.a;
      j["b"] = s.b;
      j["p"] = s.p;
      break;
    case ScalarLaw::Kind::Uniform:
      j["dist"] = "uniform";
      j["a"] = s.a;
      j["b"] = s.b;
      break;
    case ScalarLaw::Kind::Normal:
      j["dist"] = "normal";
      j["a"] = s.a;
      j["b"] = s.b;
      break;
  }
  return j;
}

struct ParsedLaw {
  MatrixLaw law;
  RecenterMode recenter;
  json canonical;
};

ParsedLaw parse_law(const json& obj, const std::string& path) {
  require_keys(obj, path,
               {"d", "kind", "atoms", "angle", "log_sv", "log_gain", "delta0",
                "recenter"});
  const std::string kind = obj.at("kind").get<std::string>();
  const double delta0 = obj.at("delta0").get<double>();
  check_range(delta0, 1e-6, 64.0, path + ".delta0");

  RecenterMode rec = RecenterMode::ExactZero;
  const std::string rec_s = get_or<std::string>(obj, "recenter", "exact-zero");
  if (rec_s == "none") rec = RecenterMode::None;
  else if (rec_s == "exact-zero") rec = RecenterMode::ExactZero;
  else if (rec_s == "estimate") rec = RecenterMode::Estimate;
  else throw std::invalid_argument(path + ".recenter: unknown mode '" + rec_s + "'");

  json canon;
  canon["kind"] = kind;
  canon["delta0"] = delta0;
  canon["recenter"] = rec_s;

  if (kind == "finite-support") {
    if (!obj.contains("atoms"))
      throw std::invalid_argument(path + ": finite-support needs atoms");
    std::vector<std::pair<Eigen::MatrixXd, double>> support;
    json atoms_j = json::array();
    int d = 0;
    for (const auto& atom : obj.at("atoms")) {
      require_keys(atom, path + ".atoms[]", {"matrix", "prob"});
      const auto rows = atom.at("matrix");
      if (!rows.is_array() || rows.empty())
        throw std::invalid_argument(path + ".atoms[].matrix: bad shape");
      const int n = static_cast<int>(rows.size());
      if (n > 8) throw std::invalid_argument(path + ": dimension cap is 8");
      if (d == 0) d = n;
      if (n != d) throw std::invalid_argument(path + ": mixed atom dimensions");
      Eigen::MatrixXd m(n, n);
      for (int r = 0; r < n; ++r) {
        const auto& row = rows.at(r);
        if (!row.is_array() || static_cast<int>(row.size()) != n)
          throw std::invalid_argument(path + ".atoms[].matrix: not square");
        for (int c = 0; c < n; ++c) m(r, c) = row.at(c).get<double>();
      }
      const double prob = atom.at("prob").get<double>();
      support.emplace_back(std::move(m), prob);
      atoms_j.push_back(atom);
    }
    canon["atoms"] = atoms_j;
    return {MatrixLaw::finite_support(support, delta0), rec, canon};
  }
  if (kind == "rotation-diagonal") {
    if (!obj.contains("angle") || !obj.contains("log_sv"))
      throw std::invalid_argument(path + ": rotation-diagonal needs angle and log_sv");
    const ScalarLaw angle = parse_scalar_law(obj.at("angle"), path + ".angle");
    const ScalarLaw logsv = parse_scalar_law(obj.at("log_sv"), path + ".log_sv");
    canon["angle"] = scalar_law_to_json(angle);
    canon["log_sv"] = scalar_law_to_json(logsv);
    return {MatrixLaw::rotation_diagonal(angle, logsv, delta0), rec, canon};
  }
  if (kind == "gl1-scalar") {
    if (!obj.contains("log_gain"))
      throw std::invalid_argument(path + ": gl1-scalar needs log_gain");
    const ScalarLaw lg = parse_scalar_law(obj.at("log_gain"), path + ".log_gain");
    canon["log_gain"] = scalar_law_to_json(lg);
    return {MatrixLaw::gl1(lg, delta0), rec, canon};
  }
  throw std::invalid_argument(path + ".kind: unknown kind '" + kind + "'");
}

const std::set<std::string> kTopKeys = {
    "schema_version", "preset",  "law",     "master_seed", "threads",
    "out_dir",        "stages",  "budgets", "c_delta_half"};

const std::set<std::string> kBudgetKeys = {
    "moment_samples", "lyapunov", "stationary", "contraction",
    "sigma2",         "banach",   "spectral",   "conditioned"};

void parse_budgets(const json& b, ExperimentConfig& cfg) {
  require_keys(b, "budgets", kBudgetKeys);
  if (b.contains("moment_samples")) {
    cfg.moment_samples = b.at("moment_samples").get<std::size_t>();
    check_range(static_cast<double>(cfg.moment_samples), 1000, 1e7,
                "budgets.moment_samples");
  }
  if (b.contains("lyapunov")) {
    const auto& j = b.at("lyapunov");
    require_keys(j, "budgets.lyapunov", {"n_steps", "n_paths", "burn_in"});
    cfg.lyapunov.n_steps = get_or<std::size_t>(j, "n_steps", cfg.lyapunov.n_steps);
    cfg.lyapunov.n_paths = get_or<std::size_t>(j, "n_paths", cfg.lyapunov.n_paths);
    cfg.lyapunov.burn_in = get_or<std::size_t>(j, "burn_in", cfg.lyapunov.burn_in);
    check_range(static_cast<double>(cfg.lyapunov.n_steps), 1, 1e7,
                "budgets.lyapunov.n_steps");
    check_range(static_cast<double>(cfg.lyapunov.n_paths), 1, 1e6,
                "budgets.lyapunov.n_paths");
    check_range(static_cast<double>(cfg.lyapunov.burn_in), 0, 1e6,
                "budgets.lyapunov.burn_in");
  }
  if (b.contains("stationary")) {
    const auto& j = b.at("stationary");
    require_keys(j, "budgets.stationary", {"burn_in", "n_samples"});
    cfg.stationary.burn_in = get_or<std::size_t>(j, "burn_in", cfg.stationary.burn_in);
    cfg.stationary.n_samples =
        get_or<std::size_t>(j, "n_samples", cfg.stationary.n_samples);
    check_range(static_cast<double>(cfg.stationary.n_samples), 100, 2e6,
                "budgets.stationary.n_samples");
    check_range(static_cast<double>(cfg.stationary.burn_in), 0, 1e6,
                "budgets.stationary.burn_in");
  }
  if (b.contains("contraction")) {
    const auto& j = b.at("contraction");
    require_keys(j, "budgets.contraction", {"eps", "n_max", "n_pairs", "n_reps"});
    cfg.contraction.eps = get_or<double>(j, "eps", cfg.contraction.eps);
    cfg.contraction.n_max = get_or<std::size_t>(j, "n_max", cfg.contraction.n_max);
    cfg.contraction.n_pairs =
        get_or<std::size_t>(j, "n_pairs", cfg.contraction.n_pairs);
    cfg.contraction.n_reps = get_or<std::size_t>(j, "n_reps", cfg.contraction.n_reps);
    check_range(cfg.contraction.eps, 0.0, 1.0, "budgets.contraction.eps");
    check_range(static_cast<double>(cfg.contraction.n_max), 8, 200,
                "budgets.contraction.n_max");
    check_range(static_cast<double>(cfg.contraction.n_pairs), 2, 256,
                "budgets.contraction.n_pairs");
    check_range(static_cast<double>(cfg.contraction.n_reps), 1, 1e5,
                "budgets.contraction.n_reps");
  }
  if (b.contains("sigma2")) {
    const auto& j = b.at("sigma2");
    require_keys(j, "budgets.sigma2",
                 {"n_lo_exp", "n_hi_exp", "n_paths_growth", "n_paths_cov",
                  "max_lag"});
    cfg.sigma2.n_lo_exp = get_or<unsigned>(j, "n_lo_exp", cfg.sigma2.n_lo_exp);
    cfg.sigma2.n_hi_exp = get_or<unsigned>(j, "n_hi_exp", cfg.sigma2.n_hi_exp);
    cfg.sigma2.n_paths_growth =
        get_or<std::size_t>(j, "n_paths_growth", cfg.sigma2.n_paths_growth);
    cfg.sigma2.n_paths_cov =
        get_or<std::size_t>(j, "n_paths_cov", cfg.sigma2.n_paths_cov);
    cfg.sigma2.max_lag = get_or<std::size_t>(j, "max_lag", cfg.sigma2.max_lag);
    check_range(cfg.sigma2.n_hi_exp, cfg.sigma2.n_lo_exp + 1.0, 16,
                "budgets.sigma2.n_hi_exp");
    check_range(static_cast<double>(cfg.sigma2.n_paths_growth), 64, 1e6,
                "budgets.sigma2.n_paths_growth");
    check_range(static_cast<double>(cfg.sigma2.n_paths_cov), 64, 1e6,
                "budgets.sigma2.n_paths_cov");
    check_range(static_cast<double>(cfg.sigma2.max_lag), 2, 4096,
                "budgets.sigma2.max_lag");
  }
  if (b.contains("banach")) {
    const auto& j = b.at("banach");
    require_keys(j, "budgets.banach",
                 {"n_points", "n_pairs", "t_values", "l_grid", "nu_samples",
                  "iterate_n_grid", "iterate_reps"});
    cfg.banach.n_points = get_or<std::size_t>(j, "n_points", cfg.banach.n_points);
    cfg.banach.n_pairs = get_or<std::size_t>(j, "n_pairs", cfg.banach.n_pairs);
    cfg.banach.t_values =
        get_or<std::vector<double>>(j, "t_values", cfg.banach.t_values);
    cfg.banach.l_grid = get_or<std::vector<double>>(j, "l_grid", cfg.banach.l_grid);
    cfg.banach.nu_samples =
        get_or<std::size_t>(j, "nu_samples", cfg.banach.nu_samples);
    cfg.banach.iterate_n_grid = get_or<std::vector<std::size_t>>(
        j, "iterate_n_grid", cfg.banach.iterate_n_grid);
    cfg.banach.iterate_reps =
        get_or<std::size_t>(j, "iterate_reps", cfg.banach.iterate_reps);
    check_range(static_cast<double>(cfg.banach.n_points), 16, 1e5,
                "budgets.banach.n_points");
    check_range(static_cast<double>(cfg.banach.n_pairs), 16, 1e5,
                "budgets.banach.n_pairs");
    check_range(static_cast<double>(cfg.banach.iterate_reps), 8, 4096,
                "budgets.banach.iterate_reps");
    for (double t : cfg.banach.t_values)
      check_range(std::fabs(t), 0.0, 16.0, "budgets.banach.t_values[]");
    for (double l : cfg.banach.l_grid)
      check_range(l, 1.0, 1e6, "budgets.banach.l_grid[]");
  }
  if (b.contains("spectral")) {
    const auto& j = b.at("spectral");
    require_keys(j, "budgets.spectral", {"m", "t_values", "n_power"});
    cfg.spectral.m = get_or<int>(j, "m", cfg.spectral.m);
    cfg.spectral.t_values =
        get_or<std::vector<double>>(j, "t_values", cfg.spectral.t_values);
    cfg.spectral.n_power = get_or<int>(j, "n_power", cfg.spectral.n_power);
    check_range(cfg.spectral.m, 8, 1024, "budgets.spectral.m");
    check_range(cfg.spectral.n_power, 1, 256, "budgets.spectral.n_power");
  }
  if (b.contains("conditioned")) {
    const auto& j = b.at("conditioned");
    require_keys(j, "budgets.conditioned",
                 {"y_scales", "n_grid_max_exp", "n_paths", "gammas",
                  "n0_budget", "ks_n", "ks_paths"});
    cfg.conditioned.y_scales =
        get_or<std::vector<double>>(j, "y_scales", cfg.conditioned.y_scales);
    cfg.conditioned.n_grid_max_exp =
        get_or<unsigned>(j, "n_grid_max_exp", cfg.conditioned.n_grid_max_exp);
    cfg.conditioned.n_paths =
        get_or<std::size_t>(j, "n_paths", cfg.conditioned.n_paths);
    cfg.conditioned.gammas =
        get_or<std::vector<double>>(j, "gammas", cfg.conditioned.gammas);
    cfg.conditioned.n0_budget =
        get_or<std::size_t>(j, "n0_budget", cfg.conditioned.n0_budget);
    cfg.conditioned.ks_n = get_or<std::size_t>(j, "ks_n", cfg.conditioned.ks_n);
    cfg.conditioned.ks_paths =
        get_or<std::size_t>(j, "ks_paths", cfg.conditioned.ks_paths);
    check_range(cfg.conditioned.n_grid_max_exp, 4, 20,
                "budgets.conditioned.n_grid_max_exp");
    check_range(static_cast<double>(cfg.conditioned.n_paths), 64, 1e8,
                "budgets.conditioned.n_paths");
    check_range(static_cast<double>(cfg.conditioned.ks_paths), 64, 1e8,
                "budgets.conditioned.ks_paths");
    check_range(static_cast<double>(cfg.conditioned.ks_n), 16, 1e6,
                "budgets.conditioned.ks_n");
  }
}

}  // namespace

bool ExperimentConfig::stage_enabled(const std::string& name) const {
  return std::find(stages.begin(), stages.end(), name) != stages.end();
}

const MatrixLaw& ExperimentConfig::resolved_law() const {
  if (!law) throw std::logic_error("config has no resolved law");
  return *law;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  require_keys(j, "$", kTopKeys);

  ExperimentConfig cfg;
  if (!j.contains("schema_version"))
    throw std::invalid_argument("$.schema_version is required");
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != kSchemaVersion)
    throw std::invalid_argument("unsupported schema_version " +
                                std::to_string(cfg.schema_version) +
                                " (expected " + std::to_string(kSchemaVersion) +
                                ")");

  if (j.contains("preset")) {
    cfg.preset_name = j.at("preset").get<std::string>();
    const Preset& p = preset_by_name(cfg.preset_name);
    cfg.law = p.law;
    cfg.recenter = p.recenter;
    cfg.c_delta_half = p.c_delta_half;
  }
  if (j.contains("law")) {
    auto parsed = parse_law(j.at("law"), "$.law");
    cfg.law = std::move(parsed.law);
    cfg.recenter = parsed.recenter;
  }
  if (!cfg.law)
    throw std::invalid_argument("config needs either $.preset or $.law");

  cfg.c_delta_half = get_or<double>(j, "c_delta_half", cfg.c_delta_half);
  cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", cfg.master_seed);
  cfg.threads = get_or<int>(j, "threads", cfg.threads);
  check_range(cfg.threads, 0, 64, "$.threads");
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);
  if (j.contains("stages")) {
    cfg.stages = j.at("stages").get<std::vector<std::string>>();
    for (const auto& s : cfg.stages) {
      if (s != "ergodic" && s != "banach" && s != "spectral" &&
          s != "conditioned")
        throw std::invalid_argument("$.stages: unknown stage '" + s + "'");
    }
  }
  if (j.contains("budgets")) parse_budgets(j.at("budgets"), cfg);
  return cfg;
}

ExperimentConfig config_for_preset(const std::string& preset) {
  const Preset& p = preset_by_name(preset);
  ExperimentConfig cfg;
  cfg.preset_name = p.name;
  cfg.law = p.law;
  cfg.recenter = p.recenter;
  cfg.c_delta_half = p.c_delta_half;
  return cfg;
}

std::string ExperimentConfig::canonical_dump() const {
  // out_dir and threads are excluded: neither may influence the numbers,
  // so runs that differ only in them share a config hash
  json j;
  j["schema_version"] = schema_version;
  j["preset"] = preset_name;
  j["master_seed"] = master_seed;
  j["stages"] = stages;
  j["c_delta_half"] = c_delta_half;
  // law described structurally so inline laws and presets hash alike
  json lj;
  const MatrixLaw& l = resolved_law();
  lj["d"] = l.dim();
  lj["delta0"] = l.delta0();
  lj["shift"] = l.shift();
  lj["kind"] = l.is_gl1() ? "gl1-scalar"
               : l.is_finite_support() ? "finite-support"
                                       : "rotation-diagonal";
  switch (recenter) {
    case RecenterMode::None: lj["recenter"] = "none"; break;
    case RecenterMode::ExactZero: lj["recenter"] = "exact-zero"; break;
    case RecenterMode::Estimate: lj["recenter"] = "estimate"; break;
  }
  if (l.is_finite_support()) {
    json atoms = json::array();
    for (std::size_t i = 0; i < l.finite().atoms.size(); ++i) {
      json a;
      const auto& m = l.finite().atoms[i].matrix();
      std::vector<std::vector<double>> rows(m.rows(),
                                            std::vector<double>(m.cols()));
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
      a["matrix"] = rows;
      a["prob"] = l.finite().probs[i];
      atoms.push_back(a);
    }
    lj["atoms"] = atoms;
  }
  j["law"] = lj;

  json budgets;
  budgets["moment_samples"] = moment_samples;
  budgets["lyapunov"] = {{"n_steps", lyapunov.n_steps},
                         {"n_paths", lyapunov.n_paths},
                         {"burn_in", lyapunov.burn_in}};
  budgets["stationary"] = {{"burn_in", stationary.burn_in},
                           {"n_samples", stationary.n_samples}};
  budgets["contraction"] = {{"eps", contraction.eps},
                            {"n_max", contraction.n_max},
                            {"n_pairs", contraction.n_pairs},
                            {"n_reps", contraction.n_reps}};
  budgets["sigma2"] = {{"n_lo_exp", sigma2.n_lo_exp},
                       {"n_hi_exp", sigma2.n_hi_exp},
                       {"n_paths_growth", sigma2.n_paths_growth},
                       {"n_paths_cov", sigma2.n_paths_cov},
                       {"max_lag", sigma2.max_lag}};
  budgets["banach"] = {{"n_points", banach.n_points},
                       {"n_pairs", banach.n_pairs},
                       {"t_values", banach.t_values},
                       {"l_grid", banach.l_grid},
                       {"nu_samples", banach.nu_samples},
                       {"iterate_n_grid", banach.iterate_n_grid},
                       {"iterate_reps", banach.iterate_reps}};
  budgets["spectral"] = {{"m", spectral.m},
                         {"t_values", spectral.t_values},
                         {"n_power", spectral.n_power}};
  budgets["conditioned"] = {{"y_scales", conditioned.y_scales},
                            {"n_grid_max_exp", conditioned.n_grid_max_exp},
                            {"n_paths", conditioned.n_paths},
                            {"gammas", conditioned.gammas},
                            {"n0_budget", conditioned.n0_budget},
                            {"ks_n", conditioned.ks_n},
                            {"ks_paths", conditioned.ks_paths}};
  j["budgets"] = budgets;
  return j.dump(2);
}

std::string config_schema_text() {
  return R"(Configuration schema (JSON, schema_version 1)

$.schema_version   int, required, must equal 1
$.preset           string, one of the built-in presets (list-presets)
$.law              object, overrides the preset law:
    d              implied by the atoms (finite-support)
    kind           "finite-support" | "rotation-diagonal" | "gl1-scalar"
    atoms          [{matrix: [[...]], prob: p}, ...]   (finite-support)
    angle, log_sv  scalar laws                          (rotation-diagonal)
    log_gain       scalar law                           (gl1-scalar)
    delta0         declared moment exponent, > 0
    recenter       "none" | "exact-zero" | "estimate"
  scalar law: {dist: "constant"|"two-point"|"uniform"|"normal", a, b, p}
$.c_delta_half     frozen sandwich constant for the harmonic estimate
$.master_seed      u64
$.threads          0 = auto, else 1..64
$.out_dir          output directory
$.stages           subset of ["ergodic", "banach", "spectral", "conditioned"]
$.budgets          per-stage budget tables (see README); unknown keys rejected,
                   all budgets capped.

Unknown keys anywhere are an error.
)";
}

}  // namespace matwalk
