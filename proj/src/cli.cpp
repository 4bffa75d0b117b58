#include "tailconc/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "tailconc/convolution_oracle.hpp"
#include "tailconc/errors.hpp"
#include "tailconc/monte_carlo.hpp"
#include "tailconc/second_order.hpp"

#ifndef TAILCONC_VERSION
#define TAILCONC_VERSION "0.0.0"
#endif

namespace tailconc {
namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

Json json_value(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return v ? Json(fmt(*v)) : Json(nullptr);
  return Json(*v);
}

double number_field(const Json& j, const char* key, const std::string& kind) {
  if (!j.contains(key)) throw ParseError(kind + " model: missing field \"" + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ParseError(kind + " model: field \"" + key + "\" must be a number");
  return v.get<double>();
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& kind) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ParseError(kind + " model: unknown field \"" + item.key() + "\"");
    }
  }
}

const LossModel& model_of(const RunSpec& spec) {
  if (!spec.model) throw ParseError("no model given");
  return *spec.model;
}

CorrectionForm form_of(const RunSpec& spec) {
  return spec.hall_closed_form ? CorrectionForm::HallClosedForm : CorrectionForm::Analytic;
}

void report_regime(const Regime& regime, bool degenerate, std::ostream& err) {
  err << "regime: " << to_string(regime.tag);
  if (regime.q) err << " (q = " << fmt(*regime.q) << ")";
  err << "\n";
  err << "degenerate: " << (degenerate ? "true" : "false");
  if (degenerate && !regime.reason.empty()) err << " (" << regime.reason << ")";
  err << "\n";
}

Json metadata(const RunSpec& spec, const Regime& regime, bool degenerate) {
  Json meta;
  meta["command"] = spec.command;
  meta["model"] = Json::parse(model_of(spec).to_json());
  meta["n"] = spec.n;
  meta["alpha_min"] = spec.alpha_min;
  meta["alpha_max"] = spec.alpha_max;
  meta["points"] = spec.points;
  meta["samples"] = spec.samples;
  meta["batches"] = spec.batches;
  meta["seed"] = spec.seed;
  meta["denominator"] = spec.exact_denominator ? "exact" : "empirical";
  meta["correction_form"] = spec.hall_closed_form ? "hall_closed_form" : "analytic";
  meta["oracle"] = spec.oracle;
  meta["regime"] = to_string(regime.tag);
  if (regime.q) meta["q"] = *regime.q;
  meta["degenerate"] = degenerate;
  meta["version"] = TAILCONC_VERSION;
  return meta;
}

struct CurveColumns {
  std::vector<double> alpha;
  std::vector<std::optional<double>> c_emp, lo, hi, c_oracle;
  double c1 = 0.0;
  std::vector<double> c2;
  Regime regime;
  bool degenerate = false;
};

CurveColumns compute_curve(const RunSpec& spec) {
  const LossModel& model = model_of(spec);
  CurveColumns cols;
  cols.alpha = log_spaced_alphas(spec.alpha_min, spec.alpha_max, spec.points);
  const std::size_t m = cols.alpha.size();
  cols.c_emp.resize(m);
  cols.lo.resize(m);
  cols.hi.resize(m);
  cols.c_oracle.resize(m);
  cols.c2.resize(m);

  if (spec.samples > 0) {
    SimulationConfig cfg;
    cfg.n = spec.n;
    cfg.samples = spec.samples;
    cfg.batches = spec.batches;
    cfg.seed = spec.seed;
    cfg.alpha_grid = cols.alpha;
    cfg.denominator_mode = spec.exact_denominator ? DenominatorMode::Exact : DenominatorMode::Empirical;
    cfg.threads = spec.threads;
    cfg.correction_form = form_of(spec);
    const ConcentrationCurve curve = empirical_concentration(model, cfg);
    for (std::size_t i = 0; i < m; ++i) {
      cols.c_emp[i] = curve.c_emp[i];
      cols.lo[i] = curve.ci_lo[i];
      cols.hi[i] = curve.ci_hi[i];
    }
    cols.c1 = curve.c1;
    cols.c2 = curve.c2;
    cols.regime = curve.regime;
    cols.degenerate = curve.degenerate_flag;
  } else {
    const SecondOrderInfo info = model.second_order_info();
    std::optional<double> q;
    if (classify_regime(info).tag == RegimeTag::Boundary) q = estimate_boundary_q(model);
    for (std::size_t i = 0; i < m; ++i) {
      const ApproxResult r = c2(model, cols.alpha[i], spec.n, q, form_of(spec));
      cols.c2[i] = r.c2;
      cols.c1 = r.c1;
      cols.regime = r.regime;
      cols.degenerate = r.degenerate_flag;
    }
  }

  if (spec.oracle) {
    GridSpec gs;
    gs.threads = spec.threads;
    const ConvolutionGrid grid = convolve_tail(model, spec.n, gs);
    for (std::size_t i = 0; i < m; ++i) cols.c_oracle[i] = oracle_concentration(grid, cols.alpha[i]);
  }
  return cols;
}

void require_command_spec(const RunSpec& spec) {
  if (spec.n < 2) throw DomainError("--n must be >= 2");
  if (!(spec.alpha_min > 0.0 && spec.alpha_max < 1.0 && spec.alpha_min < spec.alpha_max)) {
    throw DomainError("alpha range must satisfy 0 < alpha-min < alpha-max < 1");
  }
  if (spec.points < 1) throw DomainError("--points must be >= 1");
}

}  // namespace

LossModel parse_model_spec(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model spec must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ParseError("model spec needs a string field \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pareto") {
    reject_unknown(j, {"kind", "xi"}, kind);
    return LossModel::pareto(number_field(j, "xi", kind));
  }
  if (kind == "burr") {
    reject_unknown(j, {"kind", "tau", "kappa"}, kind);
    return LossModel::burr(number_field(j, "tau", kind), number_field(j, "kappa", kind));
  }
  if (kind == "gandh") {
    reject_unknown(j, {"kind", "a", "b", "g", "h"}, kind);
    return LossModel::gandh(number_field(j, "a", kind), number_field(j, "b", kind),
                            number_field(j, "g", kind), number_field(j, "h", kind));
  }
  if (kind == "hall") {
    reject_unknown(j, {"kind", "c", "d", "xi", "rho", "t_min"}, kind);
    const double t_min = j.contains("t_min") ? number_field(j, "t_min", kind) : 1.0;
    return LossModel::exact_hall(number_field(j, "c", kind), number_field(j, "d", kind),
                                 number_field(j, "xi", kind), number_field(j, "rho", kind), t_min);
  }
  throw ParseError("unknown model kind \"" + kind + "\" (expected pareto, burr, gandh or hall)");
}

int run_info(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  const LossModel& model = model_of(spec);
  if (spec.n < 2) throw DomainError("--n must be >= 2");
  const SecondOrderInfo info = model.second_order_info();
  Regime regime = classify_regime(info);
  if (regime.tag == RegimeTag::Boundary) regime.q = estimate_boundary_q(model);
  const bool degenerate = regime.tag == RegimeTag::Degenerate;
  report_regime(regime, degenerate, err);

  std::optional<double> k;
  if (regime.tag != RegimeTag::Boundary) k = k_coefficient(info.xi, info.rho, spec.n);
  const ApproachResult approach = approach_direction(model, spec.n);
  std::optional<double> mean;
  try {
    mean = model.truncated_mean(std::numeric_limits<double>::infinity());
  } catch (const DomainError&) {
  }

  const std::vector<std::pair<std::string, std::string>> rows = {
      {"kind", to_string(model.kind())},
      {"n", std::to_string(spec.n)},
      {"xi", fmt(info.xi)},
      {"rho", fmt(info.rho)},
      {"regime", to_string(regime.tag)},
      {"q", fmt(regime.q)},
      {"degenerate", degenerate ? "true" : "false"},
      {"c1", fmt(c1(info.xi, spec.n))},
      {"c_xi", fmt(c_xi(info.xi))},
      {"j_const", fmt(j_const(info.xi, spec.n))},
      {"k_coefficient", fmt(k)},
      {"approach", to_string(approach.direction)},
      {"derivative_limit", std::isnan(approach.derivative_limit) ? "" : fmt(approach.derivative_limit)},
      {"mean", fmt(mean)},
  };
  if (spec.format == OutputFormat::Csv) {
    out << "quantity,value\n";
    for (const auto& [key, value] : rows) out << key << ',' << value << '\n';
  } else {
    Json j;
    j["metadata"] = metadata(spec, regime, degenerate);
    for (const auto& [key, value] : rows) j[key] = value;
    out << j.dump(2) << '\n';
  }
  return 0;
}

int run_curve(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  require_command_spec(spec);
  const CurveColumns cols = compute_curve(spec);
  report_regime(cols.regime, cols.degenerate, err);

  if (spec.format == OutputFormat::Csv) {
    out << "alpha,c_emp,c_emp_lo,c_emp_hi,c1,c2,c_oracle\n";
    for (std::size_t i = 0; i < cols.alpha.size(); ++i) {
      out << fmt(cols.alpha[i]) << ',' << fmt(cols.c_emp[i]) << ',' << fmt(cols.lo[i]) << ','
          << fmt(cols.hi[i]) << ',' << fmt(cols.c1) << ',' << fmt(cols.c2[i]) << ','
          << fmt(cols.c_oracle[i]) << '\n';
    }
    return 0;
  }
  Json j;
  j["metadata"] = metadata(spec, cols.regime, cols.degenerate);
  auto column = [&](const std::vector<std::optional<double>>& v) {
    Json a = Json::array();
    for (const auto& x : v) a.push_back(json_value(x));
    return a;
  };
  j["alpha"] = cols.alpha;
  j["c_emp"] = column(cols.c_emp);
  j["c_emp_lo"] = column(cols.lo);
  j["c_emp_hi"] = column(cols.hi);
  j["c1"] = std::vector<double>(cols.alpha.size(), cols.c1);
  j["c2"] = cols.c2;
  j["c_oracle"] = column(cols.c_oracle);
  out << j.dump(2) << '\n';
  return 0;
}

int run_crossover(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  require_command_spec(spec);
  const LossModel& model = model_of(spec);
  const std::optional<double> alpha_star =
      crossover(model, spec.n, spec.alpha_min, spec.alpha_max, form_of(spec));

  std::optional<double> emp_lo, emp_hi, emp_point;
  CurveColumns cols;
  if (spec.samples > 0) {
    cols = compute_curve(spec);
    const std::size_t m = cols.alpha.size();
    // Sign change of c_emp - 1 closest to alpha = 1, widened over
    // neighbouring levels whose band still contains 1.
    for (std::size_t i = m - 1; i-- > 0;) {
      const double f0 = *cols.c_emp[i] - 1.0;
      const double f1 = *cols.c_emp[i + 1] - 1.0;
      if ((f0 < 0.0) == (f1 < 0.0)) continue;
      emp_point = cols.alpha[i] + (cols.alpha[i + 1] - cols.alpha[i]) * f0 / (f0 - f1);
      auto covers = [&](std::size_t k) { return *cols.lo[k] <= 1.0 && *cols.hi[k] >= 1.0; };
      std::size_t lo = i;
      std::size_t hi = i + 1;
      while (lo > 0 && covers(lo)) --lo;
      while (hi + 1 < m && covers(hi)) ++hi;
      emp_lo = cols.alpha[lo];
      emp_hi = cols.alpha[hi];
      break;
    }
  } else {
    const ApproxResult r = c2(model, spec.alpha_max, spec.n, std::nullopt, form_of(spec));
    cols.regime = r.regime;
    cols.degenerate = r.degenerate_flag;
  }
  report_regime(cols.regime, cols.degenerate, err);

  const std::string status = alpha_star ? "found" : "none found";
  char star6[32] = "";
  if (alpha_star) std::snprintf(star6, sizeof star6, "%.6f", *alpha_star);

  if (spec.format == OutputFormat::Csv) {
    out << "quantity,value\n";
    out << "status," << status << '\n';
    out << "alpha_star," << fmt(alpha_star) << '\n';
    out << "alpha_star_6dp," << star6 << '\n';
    out << "empirical_alpha," << fmt(emp_point) << '\n';
    out << "empirical_bracket_lo," << fmt(emp_lo) << '\n';
    out << "empirical_bracket_hi," << fmt(emp_hi) << '\n';
    return 0;
  }
  Json j;
  j["metadata"] = metadata(spec, cols.regime, cols.degenerate);
  j["status"] = status;
  j["alpha_star"] = json_value(alpha_star);
  j["alpha_star_6dp"] = alpha_star ? Json(star6) : Json(nullptr);
  j["empirical_alpha"] = json_value(emp_point);
  j["empirical_bracket_lo"] = json_value(emp_lo);
  j["empirical_bracket_hi"] = json_value(emp_hi);
  out << j.dump(2) << '\n';
  return 0;
}

int run_diag(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  require_command_spec(spec);
  const LossModel& model = model_of(spec);
  const SecondOrderInfo info = model.second_order_info();
  const Regime regime = classify_regime(info);
  report_regime(regime, regime.tag == RegimeTag::Degenerate, err);

  const std::vector<double> alphas = log_spaced_alphas(spec.alpha_min, spec.alpha_max, spec.points);
  std::vector<double> xs;
  for (double a : alphas) xs.push_back(model.upper_quantile(1.0 - a));
  GridSpec gs;
  gs.threads = spec.threads;
  const ConvolutionGrid grid = convolve_tail(model, spec.n, gs);
  const auto diag = tail_ratio_diag(grid, xs);
  const double target = j_const(info.xi, spec.n);

  struct Row {
    std::string section;
    double x;
    double value;
    std::optional<double> target;
  };
  std::vector<Row> rows;
  for (const auto& [x, v] : diag) rows.push_back({"tail_ratio", x, v, target});
  for (double a : alphas) {
    const double t = 1.0 / (1.0 - a);
    std::optional<double> hall;
    if (info.hall_d) hall = *info.hall_d * info.rho * std::pow(t, info.rho);
    rows.push_back({"auxiliary", t, model.auxiliary(t), hall});
  }

  auto ratio = [](const Row& r) -> std::optional<double> {
    if (!r.target || *r.target == 0.0) return std::nullopt;
    return r.value / *r.target;
  };
  if (spec.format == OutputFormat::Csv) {
    out << "section,x,value,target,ratio\n";
    for (const Row& r : rows) {
      out << r.section << ',' << fmt(r.x) << ',' << fmt(r.value) << ',' << fmt(r.target) << ','
          << fmt(ratio(r)) << '\n';
    }
    return 0;
  }
  Json j;
  j["metadata"] = metadata(spec, regime, regime.tag == RegimeTag::Degenerate);
  Json arr = Json::array();
  for (const Row& r : rows) {
    arr.push_back({{"section", r.section},
                   {"x", r.x},
                   {"value", r.value},
                   {"target", json_value(r.target)},
                   {"ratio", json_value(ratio(r))}});
  }
  j["rows"] = arr;
  out << j.dump(2) << '\n';
  return 0;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Risk concentration of sums of heavy-tailed losses"};
  app.set_version_flag("--version", std::string(TAILCONC_VERSION));
  app.require_subcommand(1, 1);

  RunSpec spec;
  double samples = 1e7;
  std::string format = "csv";

  for (const char* name : {"info", "curve", "crossover", "diag"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--model", spec.model_text, "Model spec as JSON")->required();
    sub->add_option("--n", spec.n, "Number of summands")->default_val(2);
    sub->add_option("--alpha-min", spec.alpha_min)->default_val(0.95);
    sub->add_option("--alpha-max", spec.alpha_max)->default_val(0.9997);
    sub->add_option("--points", spec.points)->default_val(40);
    sub->add_option("--samples", samples, "Simulated sums; 0 disables simulation")->default_val(1e7);
    sub->add_option("--batches", spec.batches)->default_val(20);
    sub->add_option("--seed", spec.seed)->default_val(42);
    sub->add_option("--threads", spec.threads, "0 = all cores")->default_val(0);
    sub->add_flag("--oracle", spec.oracle, "Add the convolution oracle column");
    sub->add_flag("--exact-denominator", spec.exact_denominator);
    sub->add_flag("--hall-closed-form", spec.hall_closed_form);
    sub->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->default_val("csv");
    sub->add_option("--out", spec.out, "Output path, - for stdout")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    spec.command = app.get_subcommands().front()->get_name();
    spec.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (!(samples >= 0.0) || samples != std::floor(samples) || samples > 1e15) {
      throw ParseError("--samples must be a non-negative integer");
    }
    spec.samples = static_cast<std::uint64_t>(samples);
    spec.model = parse_model_spec(spec.model_text);

    std::ostringstream buffer;
    int code = 0;
    if (spec.command == "info") code = run_info(spec, buffer, std::cerr);
    if (spec.command == "curve") code = run_curve(spec, buffer, std::cerr);
    if (spec.command == "crossover") code = run_crossover(spec, buffer, std::cerr);
    if (spec.command == "diag") code = run_diag(spec, buffer, std::cerr);

    if (spec.out == "-") {
      std::cout << buffer.str();
    } else {
      std::ofstream file(spec.out, std::ios::binary);
      if (!file) throw ParseError("cannot open output file " + spec.out);
      file << buffer.str();
    }
    return code;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PrecisionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace tailconc
