#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "ceo_rd/ceo_rd.hpp"
#include "csv.hpp"

namespace ceo_rd::cli {
namespace {

using json = nlohmann::ordered_json;

// Simulation comparisons: values at 3 standard errors.
constexpr double kValueGate = 3.0;

SourceModel build_model(const RunConfig& cfg) {
  return validate(SymmetricSpec{cfg.gamma_x, cfg.rho_x, cfg.ell},
                  SymmetricSpec{cfg.gamma_z, cfg.rho_z, cfg.ell});
}

double require_dk(const RunConfig& cfg) {
  if (!cfg.dk) throw DomainError("--dk is required for this command");
  return *cfg.dk;
}

double rate_scale(const RunConfig& cfg) { return cfg.bits ? 1.0 / std::numbers::ln2 : 1.0; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json header(const std::string& command, const RunConfig& cfg, const SourceModel& model) {
  return json{
      {"schema_version", kSchemaVersion},
      {"command", command},
      {"units", cfg.bits ? "bits" : "nats"},
      {"model",
       {{"gamma_x", model.x.gamma},
        {"rho_x", model.x.rho},
        {"gamma_z", model.z.gamma},
        {"rho_z", model.z.rho},
        {"gamma_s", model.s.gamma},
        {"rho_s", model.s.rho},
        {"ell", model.ell()}}},
  };
}

json condition_json(const ConditionValue& c) {
  return json{{"verdict", std::string(to_string(c.verdict))},
              {"value", std::isnan(c.value) ? json(nullptr) : json(c.value)}};
}

json regime_json(const RegimeReport& r) {
  json out{{"regime", std::string(to_string(r.regime))},
           {"branch", r.branch == RatioBranch::mu ? "mu" : "nu"},
           {"quadratic_coeff", r.quadratic_coeff},
           {"constant_term", r.constant_term},
           {"limit_ratio", r.limit_ratio},
           {"roots", nullptr}};
  if (r.roots) out["roots"] = json::array({r.roots->first, r.roots->second});
  return out;
}

json conditions_json(const ConditionReport& rep) {
  json nu_kj = json::array();
  json cond3 = json::array();
  json cond4 = json::array();
  for (std::size_t i = 0; i < rep.cond3.size(); ++i) {
    const int j = rep.k + static_cast<int>(i);
    nu_kj.push_back({{"j", j}, {"value", optional_number(rep.nu_kj[i])}});
    json c3 = condition_json(rep.cond3[i]);
    c3["j"] = j;
    cond3.push_back(c3);
    json c4 = condition_json(rep.cond4[i]);
    c4["j"] = j;
    cond4.push_back(c4);
  }
  json profile = json::array();
  for (int j = rep.k; j < rep.k + static_cast<int>(rep.cond3.size()); ++j) {
    profile.push_back({{"j", j}, {"matches", rep.profile_matches(j)}});
  }
  return json{{"mu", optional_number(rep.mu)},
              {"nu", optional_number(rep.nu)},
              {"nu_kj", nu_kj},
              {"rho_s_nonnegative", rep.rho_s_nonnegative},
              {"rho_s_nonpositive", rep.rho_s_nonpositive},
              {"cond1", condition_json(rep.cond1)},
              {"cond2", condition_json(rep.cond2)},
              {"cond3", cond3},
              {"cond4", cond4},
              {"rate_matches", rep.rate_matches()},
              {"profile_matches", profile},
              {"regime", regime_json(rep.regime)}};
}

std::string bool_field(bool b) { return b ? "true" : "false"; }

bool all_profile_matches(const ConditionReport& rep) {
  for (int j = rep.k; j < rep.k + static_cast<int>(rep.cond3.size()); ++j) {
    if (!rep.profile_matches(j)) return false;
  }
  return true;
}

std::vector<std::string> frontier_header(int k, int ell) {
  std::vector<std::string> h{"d_k", "lambda_q", "rate"};
  for (int j = k; j <= ell; ++j) h.push_back("d_" + std::to_string(j));
  for (const char* c : {"cond1", "cond2", "rate_matches", "profile_matches"}) h.emplace_back(c);
  return h;
}

struct FrontierRow {
  RDPoint point;
  ConditionReport conditions;
};

FrontierRow frontier_row(const SourceModel& model, int k, double d_k) {
  check_distortion_interval(model, k, d_k);
  FrontierRow row;
  row.point.k = k;
  row.point.d_k = d_k;
  row.point.lambda_q = solve_lambda_q(model, k, d_k);
  row.point.rate = rate_bar(model, k, d_k);
  row.point.profile = distortion_profile(model, k, d_k);
  row.conditions = check_conditions(model, k, d_k);
  return row;
}

std::vector<std::string> frontier_csv(const FrontierRow& row, double scale) {
  std::vector<std::string> r{csv_number(row.point.d_k), csv_number(row.point.lambda_q),
                             csv_number(row.point.rate * scale)};
  for (double d : row.point.profile) r.push_back(csv_number(d));
  r.emplace_back(to_string(row.conditions.cond1.verdict));
  r.emplace_back(to_string(row.conditions.cond2.verdict));
  r.push_back(bool_field(row.conditions.rate_matches()));
  r.push_back(bool_field(all_profile_matches(row.conditions)));
  return r;
}

json frontier_json(const FrontierRow& row, double scale) {
  json profile = json::array();
  for (std::size_t i = 0; i < row.point.profile.size(); ++i) {
    profile.push_back({{"j", row.point.k + static_cast<int>(i)}, {"d_j", row.point.profile[i]}});
  }
  return json{{"k", row.point.k},
              {"d_k", row.point.d_k},
              {"lambda_q", row.point.lambda_q},
              {"rate", row.point.rate * scale},
              {"profile", profile}};
}

Format format_for(const std::string& command, const RunConfig& cfg) {
  if (cfg.format) return *cfg.format;
  return command == "sweep" || command == "region" ? Format::csv : Format::json;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

CommandResult cmd_point(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  const FrontierRow row = frontier_row(model, cfg.k, require_dk(cfg));
  CommandResult res;
  if (format_for("point", cfg) == Format::csv) {
    CsvTable table(frontier_header(cfg.k, model.ell()));
    table.add_row(frontier_csv(row, rate_scale(cfg)));
    res.output = table.str();
  } else {
    json out = header("point", cfg, model);
    out["d_min_k"] = d_min(model, cfg.k);
    out["point"] = frontier_json(row, rate_scale(cfg));
    out["conditions"] = conditions_json(row.conditions);
    res.output = dump(out);
  }
  return res;
}

std::vector<double> sweep_grid(const RunConfig& cfg, const SourceModel& model) {
  if (cfg.steps < 1) throw DomainError("--steps must be >= 1");
  if (!cfg.dk_min && !cfg.dk_max) {
    if (cfg.dk) return {*cfg.dk};
    // Interior points of the open interval (d_min^(k), gamma_x).
    const double lo = d_min(model, cfg.k);
    const double hi = model.gamma_x();
    std::vector<double> grid;
    for (int i = 1; i <= cfg.steps; ++i) grid.push_back(lo + (hi - lo) * i / (cfg.steps + 1.0));
    return grid;
  }
  if (!cfg.dk_min || !cfg.dk_max) throw DomainError("--dk-min and --dk-max must be given together");
  const double lo = *cfg.dk_min;
  const double hi = *cfg.dk_max;
  if (cfg.steps == 1) return {lo};
  std::vector<double> grid;
  for (int i = 0; i < cfg.steps; ++i) grid.push_back(lo + (hi - lo) * i / (cfg.steps - 1.0));
  return grid;
}

CommandResult cmd_sweep(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  if (cfg.k < 1 || cfg.k > model.ell()) throw DomainError("k must lie in [1, ell]");
  CommandResult res;
  CsvTable table(frontier_header(cfg.k, model.ell()));
  json out = header("sweep", cfg, model);
  out["rows"] = json::array();
  for (const double d : sweep_grid(cfg, model)) {
    try {
      const FrontierRow row = frontier_row(model, cfg.k, d);
      table.add_row(frontier_csv(row, rate_scale(cfg)));
      json r = frontier_json(row, rate_scale(cfg));
      r["conditions"] = conditions_json(row.conditions);
      out["rows"].push_back(r);
    } catch (const DomainError& e) {
      res.warnings.push_back("skipping d_k=" + csv_number(d) + ": " + e.what());
    }
  }
  res.output = format_for("sweep", cfg) == Format::csv ? table.str() : dump(out);
  return res;
}

CommandResult cmd_region(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  const FrontierRow row = frontier_row(model, cfg.k, require_dk(cfg));
  CommandResult res;
  if (format_for("region", cfg) == Format::csv) {
    CsvTable table({"j", "d_j", "d_min_j"});
    for (std::size_t i = 0; i < row.point.profile.size(); ++i) {
      const int j = cfg.k + static_cast<int>(i);
      table.add_row({std::to_string(j), csv_number(row.point.profile[i]),
                     csv_number(d_min(model, j))});
    }
    res.output = table.str();
  } else {
    json out = header("region", cfg, model);
    json p = frontier_json(row, rate_scale(cfg));
    for (auto& entry : p["profile"]) entry["d_min_j"] = d_min(model, entry["j"].get<int>());
    out["point"] = p;
    res.output = dump(out);
  }
  return res;
}

CommandResult cmd_conditions(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  const double d_k = require_dk(cfg);
  const ConditionReport rep = check_conditions(model, cfg.k, d_k);
  CommandResult res;
  if (format_for("conditions", cfg) == Format::csv) {
    CsvTable table({"condition", "j", "verdict", "value"});
    table.add_row({"cond1", "", std::string(to_string(rep.cond1.verdict)),
                   csv_number(rep.cond1.value)});
    table.add_row({"cond2", "", std::string(to_string(rep.cond2.verdict)),
                   csv_number(rep.cond2.value)});
    for (std::size_t i = 0; i < rep.cond3.size(); ++i) {
      const std::string j = std::to_string(cfg.k + static_cast<int>(i));
      table.add_row({"cond3", j, std::string(to_string(rep.cond3[i].verdict)),
                     csv_number(rep.cond3[i].value)});
      table.add_row({"cond4", j, std::string(to_string(rep.cond4[i].verdict)),
                     csv_number(rep.cond4[i].value)});
    }
    res.output = table.str();
  } else {
    json out = header("conditions", cfg, model);
    out["k"] = cfg.k;
    out["d_k"] = d_k;
    out["lambda_q"] = rep.lambda_q;
    out["conditions"] = conditions_json(rep);
    res.output = dump(out);
  }
  return res;
}

json residuals_json(const std::vector<Residual>& rs) {
  json out = json::array();
  for (const auto& r : rs) out.push_back({{"name", r.name}, {"value", r.value}});
  return out;
}

json point_json(const FeasiblePoint& p) {
  return json{{"d1", p.d1}, {"d2", p.d2}, {"delta", p.delta}};
}

CommandResult cmd_verify(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  const double d_k = require_dk(cfg);
  const int j = cfg.j.value_or(cfg.k);
  check_distortion_interval(model, cfg.k, d_k);
  const Program program = select_program(model, j);
  const KKTCertificate cert = verify_kkt(model, cfg.k, j, d_k, program, cfg.tol);
  const NumericOptimum numeric = solve_numeric(model, cfg.k, j, d_k, program);
  const double rb = rate_bar(model, cfg.k, d_k);
  const double gap = std::abs(numeric.objective - rb);
  const double delta_gap = std::abs(numeric.point.delta - cert.point.delta);
  const bool sign_failure = cert.violation && cert.violation->starts_with("multiplier_");

  std::string status;
  CommandResult res;
  if (cert.valid) {
    status = gap <= cfg.gap_tol ? "certified" : "inconsistent";
  } else if (sign_failure) {
    status = "conditions fail";
  } else {
    status = gap > cfg.gap_tol ? "inconsistent" : "uncertified";
  }
  if (status == "inconsistent") res.exit_code = kExitInconsistent;

  const double scale = rate_scale(cfg);
  if (format_for("verify", cfg) == Format::csv) {
    CsvTable table({"section", "name", "value"});
    table.add_row({"summary", "status", status});
    table.add_row({"summary", "program", std::string(to_string(program))});
    table.add_row({"summary", "violation", cert.violation.value_or("")});
    table.add_row({"summary", "rate_bar", csv_number(rb * scale)});
    table.add_row({"summary", "certificate_objective", csv_number(cert.objective * scale)});
    table.add_row({"summary", "numeric_objective", csv_number(numeric.objective * scale)});
    table.add_row({"summary", "oracle_gap", csv_number(gap * scale)});
    table.add_row({"summary", "delta_gap", csv_number(delta_gap)});
    const Multipliers& m = cert.multipliers;
    for (const auto& [name, v] : std::vector<std::pair<std::string, double>>{
             {"a1", m.a1}, {"a2", m.a2}, {"b1", m.b1}, {"b2", m.b2}, {"c", m.c}}) {
      table.add_row({"multiplier", name, csv_number(v)});
    }
    for (const auto* group : {&cert.stationarity, &cert.slackness, &cert.feasibility}) {
      const char* section = group == &cert.stationarity ? "stationarity"
                            : group == &cert.slackness  ? "slackness"
                                                        : "feasibility";
      for (const auto& r : *group) table.add_row({section, r.name, csv_number(r.value)});
    }
    res.output = table.str();
  } else {
    json out = header("verify", cfg, model);
    out["k"] = cfg.k;
    out["j"] = j;
    out["d_k"] = d_k;
    out["program"] = std::string(to_string(program));
    out["status"] = status;
    out["valid"] = cert.valid;
    out["violation"] = cert.violation ? json(*cert.violation) : json(nullptr);
    out["tolerance"] = cert.tolerance;
    out["point"] = point_json(cert.point);
    const Multipliers& m = cert.multipliers;
    out["multipliers"] = {{"a1", m.a1}, {"a2", m.a2}, {"b1", m.b1}, {"b2", m.b2}, {"c", m.c}};
    out["residuals"] = {{"stationarity", residuals_json(cert.stationarity)},
                        {"slackness", residuals_json(cert.slackness)},
                        {"feasibility", residuals_json(cert.feasibility)}};
    out["rate_bar"] = rb * scale;
    out["certificate_objective"] = cert.objective * scale;
    out["numeric"] = {{"objective", numeric.objective * scale},
                      {"point", point_json(numeric.point)}};
    out["oracle_gap"] = gap * scale;
    out["delta_gap"] = delta_gap;
    out["gap_tolerance"] = cfg.gap_tol;
    res.output = dump(out);
  }
  return res;
}

CommandResult cmd_bt_check(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  const double d_k = require_dk(cfg);
  const RegionCheck rc = check_symmetric_rate(model, cfg.k, d_k);
  const double scale = rate_scale(cfg);
  CommandResult res;
  if (!rc.all_satisfied()) res.exit_code = kExitInconsistent;
  if (format_for("bt-check", cfg) == Format::csv) {
    CsvTable table({"size", "required", "provided", "slack", "satisfied"});
    for (const auto& c : rc.constraints) {
      table.add_row({std::to_string(c.size), csv_number(c.required * scale),
                     csv_number(c.provided * scale), csv_number(c.slack * scale),
                     bool_field(c.satisfied)});
    }
    res.output = table.str();
  } else {
    json out = header("bt-check", cfg, model);
    out["k"] = cfg.k;
    out["d_k"] = d_k;
    out["lambda_q"] = solve_lambda_q(model, cfg.k, d_k);
    out["rate"] = rc.rate * scale;
    out["all_satisfied"] = rc.all_satisfied();
    json cs = json::array();
    for (const auto& c : rc.constraints) {
      cs.push_back({{"size", c.size},
                    {"required", c.required * scale},
                    {"provided", c.provided * scale},
                    {"slack", c.slack * scale},
                    {"satisfied", c.satisfied}});
    }
    out["constraints"] = cs;
    res.output = dump(out);
  }
  return res;
}

// Test-channel variance for the simulation commands: --lambda-q, else the one
// solving --dk, else the one at the midpoint of (d_min^(k), gamma_x).
double simulation_lambda_q(const RunConfig& cfg, const SourceModel& model) {
  if (cfg.lambda_q) {
    if (!(*cfg.lambda_q > 0.0)) throw DomainError("--lambda-q must be positive");
    return *cfg.lambda_q;
  }
  const double d_k = cfg.dk.value_or(0.5 * (d_min(model, cfg.k) + model.gamma_x()));
  return solve_lambda_q(model, cfg.k, d_k);
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  if (cfg.k < 1 || cfg.k > model.ell()) throw DomainError("k must lie in [1, ell]");
  const double lq = simulation_lambda_q(cfg, model);
  const EmpiricalRD emp =
      empirical_profile(model, cfg.k, lq, cfg.n, cfg.seed, SimOptions{cfg.threads});

  CommandResult res;
  CsvTable table({"j", "analytic", "empirical", "standard_error", "z", "pass"});
  json rows = json::array();
  bool all_pass = true;
  for (const auto& p : emp.points) {
    const double analytic = distortion_at(model, p.j, lq);
    const double z = (p.distortion - analytic) / p.standard_error;
    const bool pass = std::abs(z) <= kValueGate;
    all_pass = all_pass && pass;
    table.add_row({std::to_string(p.j), csv_number(analytic), csv_number(p.distortion),
                   csv_number(p.standard_error), csv_number(z), bool_field(pass)});
    rows.push_back({{"j", p.j},
                    {"analytic", analytic},
                    {"empirical", p.distortion},
                    {"standard_error", p.standard_error},
                    {"z", z},
                    {"pass", pass}});
  }
  if (!all_pass) res.exit_code = kExitGate;

  if (format_for("simulate", cfg) == Format::csv) {
    res.output = table.str();
  } else {
    json out = header("simulate", cfg, model);
    out["k"] = cfg.k;
    out["lambda_q"] = lq;
    out["n"] = cfg.n;
    out["seed"] = cfg.seed;
    out["gate_se"] = kValueGate;
    out["all_pass"] = all_pass;
    out["rows"] = rows;
    res.output = dump(out);
  }
  return res;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

CommandResult cmd_decomp_check(const RunConfig& cfg) {
  const SourceModel model = build_model(cfg);
  const int j = cfg.j.value_or(model.ell());
  if (j < 1 || j > model.ell()) throw DomainError("j must lie in [1, ell]");
  if (cfg.k < 1 || cfg.k > model.ell()) throw DomainError("k must lie in [1, ell]");
  const double lq = simulation_lambda_q(cfg, model);
  const double bound = admissible_lambda_w_bound(model, j);
  const double lw = cfg.lambda_w.value_or(0.5 * bound);
  const DecompositionReport rep =
      decomposition_check(model, j, lw, lq, cfg.n, cfg.seed, SimOptions{cfg.threads});

  CommandResult res;
  if (!rep.passed()) res.exit_code = kExitGate;
  if (format_for("decomp-check", cfg) == Format::csv) {
    CsvTable table({"check", "row", "col", "mean", "expected", "standard_error"});
    for (int r = 0; r < j; ++r) {
      for (int c = 0; c < j; ++c) {
        table.add_row({"sigma", std::to_string(r + 1), std::to_string(c + 1),
                       csv_number(rep.sigma_mean(r, c)), csv_number(rep.sigma_expected(r, c)),
                       csv_number(rep.sigma_se(r, c))});
      }
    }
    for (int r = 0; r < j; ++r) {
      for (int c = 0; c < j; ++c) {
        table.add_row({"delta", std::to_string(r + 1), std::to_string(c + 1),
                       csv_number(rep.delta_mean(r, c)),
                       csv_number(r == c ? rep.delta_diagonal_expected : 0.0),
                       csv_number(rep.delta_se(r, c))});
      }
    }
    res.output = table.str();
  } else {
    json out = header("decomp-check", cfg, model);
    out["j"] = j;
    out["lambda_w"] = lw;
    out["lambda_w_bound"] = bound;
    out["lambda_q"] = lq;
    out["n"] = cfg.n;
    out["seed"] = cfg.seed;
    out["gate_se"] = rep.gate;
    out["sigma"] = {{"mean", matrix_json(rep.sigma_mean)},
                    {"expected", matrix_json(rep.sigma_expected)},
                    {"standard_error", matrix_json(rep.sigma_se)},
                    {"max_z", rep.sigma_max_z},
                    {"pass", rep.sigma_pass}};
    out["delta"] = {{"mean", matrix_json(rep.delta_mean)},
                    {"standard_error", matrix_json(rep.delta_se)},
                    {"diagonal_expected", rep.delta_diagonal_expected},
                    {"offdiag_max_z", rep.delta_offdiag_max_z},
                    {"diag_max_z", rep.delta_diag_max_z},
                    {"pass", rep.delta_pass}};
    out["pass"] = rep.passed();
    res.output = dump(out);
  }
  return res;
}

using Handler = std::function<CommandResult(const RunConfig&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"point", cmd_point},         {"sweep", cmd_sweep},
      {"region", cmd_region},       {"conditions", cmd_conditions},
      {"verify", cmd_verify},       {"bt-check", cmd_bt_check},
      {"simulate", cmd_simulate},   {"decomp-check", cmd_decomp_check},
  };
  return table;
}

std::int64_t parse_count(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError("--n must be a number, got '" + text + "'");
  }
  if (used != text.size() || !(v >= 1.0) || v > 9e15 || std::floor(v) != v) {
    throw DomainError("--n must be a positive integer, got '" + text + "'");
  }
  return static_cast<std::int64_t>(v);
}

Format parse_format(const std::string& text) {
  if (text == "json") return Format::json;
  if (text == "csv") return Format::csv;
  throw DomainError("--format must be json or csv, got '" + text + "'");
}

// Raw option values as typed, before they are folded into a RunConfig.
struct Flags {
  RunConfig cfg;
  double dk = 0.0, dk_min = 0.0, dk_max = 0.0, lambda_q = 0.0, lambda_w = 0.0;
  int j = 0;
  std::string n = "100000";
  std::string format;
  std::string params_json;
};

struct Binding {
  std::function<void(const json&)> from_json;
  CLI::Option* option = nullptr;
};

std::map<std::string, Binding> bind_options(CLI::App& app, Flags& f) {
  std::map<std::string, Binding> b;
  RunConfig& c = f.cfg;
  auto num = [&](const std::string& key, const std::string& flag, auto& target,
                 const std::string& help) {
    b[key].option = app.add_option(flag, target, help);
    b[key].from_json = [&target](const json& v) {
      target = v.get<std::remove_reference_t<decltype(target)>>();
    };
  };
  num("gamma_x", "--gamma-x", c.gamma_x, "Variance of each signal component");
  num("rho_x", "--rho-x", c.rho_x, "Correlation between signal components");
  num("gamma_z", "--gamma-z", c.gamma_z, "Variance of each observation-noise component");
  num("rho_z", "--rho-z", c.rho_z, "Correlation between noise components");
  num("ell", "--ell", c.ell, "Number of components");
  num("k", "--k", c.k, "Number of cooperating encoders");
  num("dk", "--dk", f.dk, "Target distortion d_k");
  num("dk_min", "--dk-min", f.dk_min, "Sweep start");
  num("dk_max", "--dk-max", f.dk_max, "Sweep end");
  num("steps", "--steps", c.steps, "Sweep grid size");
  num("j", "--j", f.j, "Component count for verify and decomp-check");
  num("lambda_q", "--lambda-q", f.lambda_q, "Test-channel noise variance for simulations");
  num("lambda_w", "--lambda-w", f.lambda_w, "Fictitious noise variance for decomp-check");
  num("seed", "--seed", c.seed, "Random seed (default: $CEO_RD_SEED or 42)");
  num("threads", "--threads", c.threads, "Simulation threads (0: all cores)");
  num("tol", "--tol", c.tol, "KKT residual tolerance");
  num("gap_tol", "--gap-tol", c.gap_tol, "Allowed gap between certificate and numeric optimum");
  num("out", "--out", c.out, "Write output to this file instead of stdout");
  b["seed"].option->envname("CEO_RD_SEED");

  b["n"].option = app.add_option("--n", f.n, "Monte Carlo sample count");
  b["n"].from_json = [&f](const json& v) {
    f.n = v.is_string() ? v.get<std::string>() : v.dump();
  };
  b["format"].option = app.add_option("--format", f.format, "Output format: json or csv");
  b["format"].from_json = [&f](const json& v) { f.format = v.get<std::string>(); };
  b["bits"].option = app.add_flag("--bits", c.bits, "Report rates in bits instead of nats");
  b["bits"].from_json = [&c](const json& v) { c.bits = v.get<bool>(); };
  app.add_option("--params-json", f.params_json,
                 "RunConfig as a JSON object; explicit flags take precedence");
  return b;
}

void apply_params_json(const std::string& text, std::map<std::string, Binding>& bindings) {
  json params;
  try {
    params = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("--params-json is not valid JSON: ") + e.what());
  }
  if (!params.is_object()) throw DomainError("--params-json must be a JSON object");
  for (const auto& [key, value] : params.items()) {
    const auto it = bindings.find(key);
    if (it == bindings.end()) throw DomainError("--params-json has unknown key '" + key + "'");
    if (it->second.option->count() > 0) continue;
    try {
      it->second.from_json(value);
    } catch (const json::exception&) {
      throw DomainError("--params-json key '" + key + "' has the wrong type");
    }
  }
}

constexpr int kUnsetJ = std::numeric_limits<int>::min();

// Optional values start as NaN (or kUnsetJ) and stay that way unless a flag or
// --params-json supplied them.
RunConfig finish_config(const Flags& f) {
  RunConfig cfg = f.cfg;
  auto pick = [](double v) { return std::isnan(v) ? std::nullopt : std::optional<double>(v); };
  cfg.dk = pick(f.dk);
  cfg.dk_min = pick(f.dk_min);
  cfg.dk_max = pick(f.dk_max);
  cfg.lambda_q = pick(f.lambda_q);
  cfg.lambda_w = pick(f.lambda_w);
  if (f.j != kUnsetJ) cfg.j = f.j;
  cfg.n = parse_count(f.n);
  if (!f.format.empty()) cfg.format = parse_format(f.format);
  return cfg;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

CommandResult run_command(const std::string& name, const RunConfig& config) {
  const auto it = handlers().find(name);
  if (it == handlers().end()) throw DomainError("unknown command '" + name + "'");
  return it->second(config);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rate-distortion frontier of robust distributed compression of symmetric "
               "Gaussian sources",
               "ceo-rd"};
  app.require_subcommand(1);

  Flags flags;
  const double unset = std::numeric_limits<double>::quiet_NaN();
  flags.dk = flags.dk_min = flags.dk_max = flags.lambda_q = flags.lambda_w = unset;
  flags.j = kUnsetJ;

  const std::map<std::string, std::string> descriptions{
      {"point", "Frontier point and matching-condition report at one d_k"},
      {"sweep", "Frontier table over a grid of d_k"},
      {"region", "Distortion profile d_j for j = k..ell at fixed d_k"},
      {"conditions", "Matching conditions and regime classification"},
      {"verify", "KKT certificate of the converse program with a numeric cross-check"},
      {"bt-check", "Subset constraints of the Berger-Tung region at the symmetric rate"},
      {"simulate", "Monte Carlo distortions against closed forms"},
      {"decomp-check", "Monte Carlo check of the fictitious signal-noise decomposition"},
  };
  std::map<std::string, std::map<std::string, Binding>> bindings;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    bindings[name] = bind_options(*sub, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitDomain;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto& b = bindings.at(command);
    const bool from_json = !flags.params_json.empty();
    if (from_json) apply_params_json(flags.params_json, b);
    const RunConfig cfg = finish_config(flags);
    const CommandResult res = run_command(command, cfg);
    for (const auto& w : res.warnings) err << "warning: " << w << "\n";
    if (cfg.out.empty()) {
      out << res.output;
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      if (!file) throw DomainError("cannot open --out file '" + cfg.out + "'");
      file << res.output;
    }
    return res.exit_code;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::logic_error& e) {
    err << "internal inconsistency: " << e.what() << "\n";
    return kExitInconsistent;
  }
}

}  // namespace ceo_rd::cli
