// SPDX-License-Identifier: MIT
//
// singlab: command-line front end for the approximation lab.
//
// Subcommands: construct (build one network and report its error bound),
// approx-sweep (error vs parameter count of a construction), regress (one
// fit plus its measured error), rate-sweep (error vs sample size), and
// report (consolidate sweep outputs against the theoretical exponents).
//
// Every run writes a manifest with the resolved configuration, the master
// seed, and the version, and all outputs are deterministic functions of
// those values. Exit codes: 0 success, 1 bound/ordering failure under
// --strict, 2 configuration or IO error.
#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "singlab/constructor.hpp"
#include "singlab/errors.hpp"
#include "singlab/estimators.hpp"
#include "singlab/funcgen.hpp"
#include "singlab/harness.hpp"
#include "singlab/netio.hpp"
#include "singlab/network.hpp"
#include "singlab/quadrature.hpp"
#include "singlab/rng.hpp"
#include "singlab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace singlab;

namespace {

constexpr double kExactTol = 1e-12;  // claimed bound for the exact builders

std::uint64_t env_master_seed() {
  if (const char* s = std::getenv("SINGLAB_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError("SINGLAB_SEED is not an unsigned integer");
    }
  }
  return 1;
}

fgen::PiecewiseSmoothFn resolve_target(const std::string& name, int dim) {
  try {
    return fgen::named_target(name, dim);
  } catch (const ConfigError&) {
  }
  try {
    return fgen::make_extra_target(name);
  } catch (const ConfigError&) {
  }
  throw ConfigError("unknown target '" + name + "'");
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path.string());
  f << text;
  f.flush();
  if (!f) throw ConfigError("write failed: " + path.string());
}

void write_manifest(const fs::path& dir, const std::string& command,
                    std::uint64_t seed, const json& params) {
  json m;
  m["command"] = command;
  m["version"] = kVersionString;
  m["seed"] = seed;
  m["params"] = params;
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// --------------------------------------------------------------------------
// construct
// --------------------------------------------------------------------------

struct ConstructOpts {
  std::string builder;
  std::string act = "relu";
  std::string target = "graph-indicator";
  int dim = 2;
  int m = 4;
  int t = 3;
  double T = 1.0;
  int dprime = 2;
  int gamma = 2;
  double eps = 0.05;
  bool eps_set = false;  // explicit --eps tightens the claimed bound
  double eps1 = 0.1;
  double eps2 = 0.1;
  int grid = 4097;
  std::string out = "out";
  bool emit_net = false;
  bool strict = false;
};

double sup_on_grid_1d(const Network& net, double lo, double hi, int n,
                      const std::function<double(double)>& truth) {
  Evaluator ev(net);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    worst = std::max(worst, std::abs(ev.eval1(x) - truth(x)));
  }
  return worst;
}

double sup_on_grid_nd(const Network& net, double lo, double hi, int per_axis,
                      int d,
                      const std::function<double(std::span<const double>)>&
                          truth) {
  Evaluator ev(net);
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  double worst = 0.0;
  for (;;) {
    for (int a = 0; a < d; ++a) {
      x[static_cast<std::size_t>(a)] =
          lo + (hi - lo) * idx[static_cast<std::size_t>(a)] / (per_axis - 1);
    }
    worst = std::max(worst, std::abs(ev.eval1(x) - truth(x)));
    int a = 0;
    while (a < d && ++idx[static_cast<std::size_t>(a)] == per_axis) {
      idx[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
    if (a == d) break;
  }
  return worst;
}

int run_construct(const ConstructOpts& o) {
  const Activation act = Activation::parse(o.act);
  Network net;
  std::string metric = "sup";
  double claimed = 0.0, measured = 0.0;
  std::uint64_t grid = static_cast<std::uint64_t>(o.grid);

  if (o.builder == "teeth") {
    net = ctor::teeth_net(act);
    claimed = kExactTol;
    measured = sup_on_grid_1d(net, 0.0, 1.0, o.grid, ctor::teeth_closed_form);
  } else if (o.builder == "sawtooth") {
    net = ctor::sawtooth_net(o.t, act);
    claimed = kExactTol;
    measured = sup_on_grid_1d(net, 0.0, 1.0, o.grid, [&](double x) {
      return ctor::sawtooth_closed_form(o.t, x);
    });
  } else if (o.builder == "square") {
    net = ctor::square_net(o.m, act);
    claimed = ctor::square_error_bound(o.m);
    measured =
        sup_on_grid_1d(net, 0.0, 1.0, o.grid, [](double x) { return x * x; });
  } else if (o.builder == "mult") {
    net = ctor::mult_net(o.m, o.T, act);
    claimed = ctor::mult_error_bound(o.m, o.T);
    const int per = 257;
    grid = static_cast<std::uint64_t>(per) * per;
    measured = sup_on_grid_nd(net, -o.T, o.T, per, 2,
                              [](std::span<const double> x) {
                                return x[0] * x[1];
                              });
  } else if (o.builder == "multi-mult") {
    net = ctor::multi_mult_net(o.m, o.T, o.dprime, act);
    claimed = ctor::multi_mult_error_bound(o.m, o.T, o.dprime);
    const int per = o.dprime <= 2 ? 129 : 33;
    grid = 1;
    for (int a = 0; a < o.dprime; ++a) grid *= static_cast<std::uint64_t>(per);
    measured = sup_on_grid_nd(net, -o.T, o.T, per, o.dprime,
                              [](std::span<const double> x) {
                                double p = 1.0;
                                for (double v : x) p *= v;
                                return p;
                              });
  } else if (o.builder == "monomial") {
    net = ctor::monomial_net(o.gamma, o.eps, o.T, act);
    claimed = (o.gamma <= 1 && act.piecewise_linear()) ? kExactTol : o.eps;
    measured = sup_on_grid_1d(net, -o.T, o.T, o.grid, [&](double x) {
      return std::pow(x, o.gamma);
    });
  } else if (o.builder == "step") {
    const ctor::StepNetInfo info = ctor::step_net(o.eps, o.T, act);
    net = info.net;
    metric = "l2";
    claimed = info.claimed;
    measured = info.closed_form;  // analytic L2 error of the built ramp
    grid = 0;
  } else if (o.builder == "piecewise") {
    const fgen::PiecewiseSmoothFn target = resolve_target(o.target, o.dim);
    const ctor::ApproxReport rep =
        ctor::piecewise_smooth_net(target, o.eps1, o.eps2, act);
    net = rep.net;
    metric = rep.metric;
    claimed = rep.claimed;
    measured = rep.measured;
    grid = rep.grid;
  } else {
    throw ConfigError("unknown builder '" + o.builder + "'");
  }
  // An explicit --eps asks for a tighter contract than the builder's own
  // bound; a too-small m then shows up as a violation under --strict.
  if (o.eps_set && (o.builder == "square" || o.builder == "mult" ||
                    o.builder == "multi-mult")) {
    claimed = std::min(claimed, o.eps);
  }

  const SizeMetrics sm = net.metrics();
  std::string csv = "builder,metric,claimed,measured,grid,L,S,B\n";
  csv += fmt("%s,%s,%.17g,%.17g,%llu,%d,%lld,%.17g\n", o.builder.c_str(),
             metric.c_str(), claimed, measured,
             static_cast<unsigned long long>(grid), sm.L,
             static_cast<long long>(sm.S), sm.B);
  const fs::path dir(o.out);
  write_file(dir / "construct.csv", csv);
  if (o.emit_net) {
    write_file(dir / (o.builder + "_net.json"), network_to_json(net));
  }
  json params = {{"builder", o.builder}, {"act", o.act},   {"m", o.m},
                 {"t", o.t},             {"T", o.T},       {"dprime", o.dprime},
                 {"gamma", o.gamma},     {"eps", o.eps},   {"eps1", o.eps1},
                 {"eps2", o.eps2},       {"grid", o.grid}, {"target", o.target},
                 {"dim", o.dim},         {"strict", o.strict}};
  write_manifest(dir, "construct", 0, params);

  const bool ok = measured <= claimed;
  std::cout << fmt("construct %s: %s error measured=%.6g claimed<=%.6g  %s\n",
                   o.builder.c_str(), metric.c_str(), measured, claimed,
                   ok ? "[OK]" : "[VIOLATION]");
  std::cout << fmt("network: L=%d S=%lld B=%.6g  -> %s/construct.csv\n", sm.L,
                   static_cast<long long>(sm.S), sm.B, o.out.c_str());
  return (o.strict && !ok) ? 1 : 0;
}

// --------------------------------------------------------------------------
// approx-sweep
// --------------------------------------------------------------------------

struct ApproxOpts {
  std::string builder = "smooth";
  std::string target = "weier-smooth";
  int dim = 2;
  std::vector<double> eps;
  std::string act = "relu";
  std::uint64_t points = 1 << 16;
  std::string out = "out";
  bool svg = false;
};

void write_table_outputs(const harness::RateTable& table, const fs::path& dir,
                         const std::string& stem, bool svg) {
  write_file(dir / (stem + ".csv"), harness::rate_csv(table));
  write_file(dir / (stem + "_summary.json"),
             harness::rate_summary_json(table));
  if (svg) write_file(dir / (stem + ".svg"), harness::rate_svg(table));
}

int run_approx_sweep(const ApproxOpts& o) {
  const fgen::PiecewiseSmoothFn target = resolve_target(o.target, o.dim);
  harness::ApproxSweepConfig cfg;
  cfg.builder = o.builder;
  cfg.act = Activation::parse(o.act);
  cfg.points = o.points;
  const harness::RateTable table = harness::approx_sweep(cfg, target, o.eps);
  const fs::path dir(o.out);
  write_table_outputs(table, dir, "approx_" + o.builder, o.svg);
  json params = {{"builder", o.builder}, {"target", o.target},
                 {"dim", o.dim},         {"eps", o.eps},
                 {"act", o.act},         {"points", o.points},
                 {"svg", o.svg}};
  write_manifest(dir, "approx-sweep", 0, params);
  std::cout << fmt(
      "approx-sweep %s on %s: slope=%.4f (ref -%.4f), rows=%zu%s\n",
      o.builder.c_str(), table.target.c_str(), table.slope.slope,
      table.theoretical_exponent, table.rows.size(),
      table.degenerate ? " [degenerate]" : "");
  for (const std::string& w : table.warnings) {
    std::cout << "  warning: " << w << "\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// regress
// --------------------------------------------------------------------------

struct RegressOpts {
  std::string estimator = "dnn";
  std::string target = "graph-indicator";
  int dim = 2;
  std::uint64_t n = 1024;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t points = 0;
  std::vector<int> widths = {64, 64, 64};
  std::string act = "relu";
  double clip = 2.0;
  double lr = 0.05;
  double momentum = 0.9;
  int iters = 2000;
  int restarts = 5;
  std::string kernel = "gaussian";
  double bandwidth = 0.25;
  double lambda = 1e-3;
  int tau = 3;
  int grid_size = 256;
  double delta1 = 1.0;
  double delta2 = 1.0;
  std::string out = "out";
  bool emit_predictor = false;
};

est::FitConfig fit_config_from(const RegressOpts& o) {
  est::FitConfig fc;
  fc.dnn.widths = o.widths;
  fc.dnn.act = Activation::parse(o.act);
  fc.dnn.clip = o.clip;
  fc.dnn.learning_rate = o.lr;
  fc.dnn.momentum = o.momentum;
  fc.dnn.iters = o.iters;
  fc.dnn.restarts = o.restarts;
  fc.kernel.kernel = o.kernel;
  fc.kernel.bandwidth = o.bandwidth;
  fc.kernel.lambda = o.lambda;
  fc.wavelet.tau = o.tau;
  fc.curvelet.tau = o.tau;
  fc.curvelet.grid = o.grid_size;
  fc.curvelet.delta1 = o.delta1;
  fc.curvelet.delta2 = o.delta2;
  return fc;
}

int run_regress(const RegressOpts& o) {
  const est::PredictorKind kind = est::kind_parse(o.estimator);
  const fgen::PiecewiseSmoothFn target = resolve_target(o.target, o.dim);
  const std::uint64_t seed = o.seed_set ? o.seed : env_master_seed();
  const fgen::Dataset ds = fgen::gen_dataset(target, o.n, o.sigma, seed);
  const est::FitConfig fc = fit_config_from(o);

  est::Predictor pred;
  switch (kind) {
    case est::PredictorKind::Dnn:
      pred = est::fit_dnn_erm(ds, fc, seed);
      break;
    case est::PredictorKind::KernelRidge:
      pred = est::fit_kernel_ridge(ds, fc);
      break;
    case est::PredictorKind::Wavelet:
      pred = est::fit_wavelet(ds, fc);
      break;
    case est::PredictorKind::Curvelet:
      pred = est::fit_curvelet(ds, fc);
      break;
  }

  std::uint64_t points = o.points;
  if (points == 0) {
    points = kind == est::PredictorKind::Curvelet ? (1u << 13)
             : target.pieces.M() > 1              ? (1u << 17)
                                                  : (1u << 16);
  }
  const double err = harness::l2_error(pred, target, target.domain, points);

  json j;
  j["estimator"] = o.estimator;
  j["target"] = target.name;
  j["n"] = o.n;
  j["sigma"] = o.sigma;
  j["seed"] = seed;
  j["l2_sq_error"] = err;
  j["l2_points"] = points;
  j["meta"] = {{"final_loss", pred.meta.final_loss},
               {"iterations", pred.meta.iterations},
               {"gap", pred.meta.gap},
               {"tau", pred.meta.tau},
               {"lambda", pred.meta.lambda},
               {"bandwidth", pred.meta.bandwidth},
               {"restarts", pred.meta.restarts},
               {"net", {{"L", pred.meta.net.L},
                        {"S", pred.meta.net.S},
                        {"B", pred.meta.net.B}}}};
  const std::string text = j.dump(2) + "\n";
  const fs::path dir(o.out);
  write_file(dir / "regress_summary.json", text);
  if (o.emit_predictor) {
    write_file(dir / "predictor.json", est::predictor_to_json(pred));
  }
  json params = {{"estimator", o.estimator},
                 {"target", o.target},
                 {"dim", o.dim},
                 {"n", o.n},
                 {"sigma", o.sigma},
                 {"points", points},
                 {"widths", o.widths},
                 {"act", o.act},
                 {"iters", o.iters},
                 {"restarts", o.restarts},
                 {"kernel", o.kernel},
                 {"bandwidth", o.bandwidth},
                 {"lambda", o.lambda},
                 {"tau", o.tau},
                 {"grid_size", o.grid_size}};
  write_manifest(dir, "regress", seed, params);
  std::cout << text;
  return 0;
}

// --------------------------------------------------------------------------
// rate-sweep
// --------------------------------------------------------------------------

struct RateOpts {
  std::vector<std::string> estimators = {"dnn"};
  std::string target = "graph-indicator";
  int dim = 2;
  std::vector<std::uint64_t> ns;
  int reps = 10;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
  bool no_auto = false;
  std::vector<int> tau_grid = {0, 1, 2, 3, 4, 5};
  std::vector<double> bandwidth_grid = {0.05, 0.1, 0.2, 0.4};
  std::vector<double> lambda_grid = {1e-5, 1e-3, 1e-1};
  double budget_scale = 0.25;
  std::uint64_t l2_points = 0;
  std::uint64_t tune_points = 1 << 12;
  std::uint64_t tune_subsample = 2048;
  RegressOpts base;  // shared fit knobs (--iters, --widths, ...)
  std::string out = "out";
  bool svg = false;
};

int run_rate_sweep(const RateOpts& o) {
  const fgen::PiecewiseSmoothFn target = resolve_target(o.target, o.dim);
  const std::uint64_t seed = o.seed_set ? o.seed : env_master_seed();
  const fs::path dir(o.out);

  json comparison;
  comparison["target"] = target.name;
  comparison["alpha"] = target.alpha;
  comparison["beta"] = target.beta;
  comparison["D"] = target.domain.dim();

  std::vector<harness::RateTable> tables;
  for (const std::string& name : o.estimators) {
    harness::SweepConfig cfg;
    cfg.kind = est::kind_parse(name);
    cfg.fit = fit_config_from(o.base);
    cfg.auto_policy = !o.no_auto;
    cfg.tau_grid = o.tau_grid;
    cfg.bandwidth_grid = o.bandwidth_grid;
    cfg.lambda_grid = o.lambda_grid;
    cfg.dnn_budget_scale = o.budget_scale;
    cfg.l2_points = o.l2_points;
    cfg.tune_points = o.tune_points;
    cfg.tune_subsample = o.tune_subsample;
    cfg.workers = o.workers;
    const harness::RateTable table =
        harness::rate_sweep(cfg, target, o.ns, o.reps, o.sigma, seed);
    write_table_outputs(table, dir, "rate_" + name, o.svg);
    comparison["estimators"][name] = {
        {"slope", table.slope.slope},
        {"slope_ok", table.slope.ok},
        {"theoretical_exponent", table.theoretical_exponent},
        {"mean_sq_err_at_largest_n", table.rows.back().mean_sq_err}};
    comparison["flags"] = {
        {"linear_suboptimal", table.rates.linear_suboptimal},
        {"wavelet_floor_active", table.rates.wavelet_floor_active},
        {"curvelet_floor_active", table.rates.curvelet_floor_active}};
    std::cout << fmt(
        "rate-sweep %s on %s: slope=%.4f (ref -%.4f)%s%s\n", name.c_str(),
        table.target.c_str(), table.slope.slope, table.theoretical_exponent,
        table.monotone ? "" : " [non-monotone]",
        table.degenerate ? " [degenerate]" : "");
    for (const std::string& w : table.warnings) {
      std::cout << "  warning: " << w << "\n";
    }
    tables.push_back(table);
  }
  if (o.estimators.size() > 1) {
    write_file(dir / "comparison.json", comparison.dump(2) + "\n");
  }
  json params = {{"estimators", o.estimators},
                 {"target", o.target},
                 {"dim", o.dim},
                 {"ns", o.ns},
                 {"reps", o.reps},
                 {"sigma", o.sigma},
                 {"workers", o.workers},
                 {"auto", !o.no_auto},
                 {"tau_grid", o.tau_grid},
                 {"bandwidth_grid", o.bandwidth_grid},
                 {"lambda_grid", o.lambda_grid},
                 {"budget_scale", o.budget_scale},
                 {"l2_points", o.l2_points},
                 {"tune_points", o.tune_points},
                 {"tune_subsample", o.tune_subsample},
                 {"iters", o.base.iters},
                 {"restarts", o.base.restarts},
                 {"act", o.base.act},
                 {"svg", o.svg}};
  write_manifest(dir, "rate-sweep", seed, params);
  return 0;
}

// --------------------------------------------------------------------------
// report
// --------------------------------------------------------------------------

struct ReportOpts {
  std::string dir;
  double window = 0.3;
  bool strict = false;
};

struct ParsedTable {
  std::string file;
  std::string estimator;
  std::string target;
  std::vector<harness::RateRow> rows;
  bool have_sidecar = false;
  double slope = 0.0;
  bool slope_ok = false;
  double exponent = 0.0;
};

double parse_num(const std::string& field, const std::string& file,
                 int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty()) {
    throw ConfigError(file + ":" + std::to_string(line) +
                      ": malformed numeric field '" + field + "'");
  }
  return v;
}

ParsedTable parse_rate_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path.string());
  ParsedTable t;
  t.file = path.filename().string();
  std::string line;
  int lineno = 0;
  const std::string header =
      "estimator,target,alpha,beta,D,n,reps,mean_sq_err,stderr";
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != header) {
        throw ConfigError(t.file + ":1: unexpected header '" + line + "'");
      }
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 9) {
      throw ConfigError(t.file + ":" + std::to_string(lineno) +
                        ": expected 9 fields, found " +
                        std::to_string(fields.size()));
    }
    t.estimator = fields[0];
    t.target = fields[1];
    harness::RateRow r;
    r.n = static_cast<std::uint64_t>(parse_num(fields[5], t.file, lineno));
    r.reps = static_cast<int>(parse_num(fields[6], t.file, lineno));
    r.mean_sq_err = parse_num(fields[7], t.file, lineno);
    r.std_err = parse_num(fields[8], t.file, lineno);
    parse_num(fields[2], t.file, lineno);  // alpha
    parse_num(fields[3], t.file, lineno);  // beta
    parse_num(fields[4], t.file, lineno);  // D
    t.rows.push_back(r);
  }
  if (t.rows.empty()) {
    throw ConfigError(t.file + ": no data rows");
  }
  return t;
}

int run_report(const ReportOpts& o) {
  const fs::path dir(o.dir);
  if (!fs::is_directory(dir)) {
    throw ConfigError("report: '" + o.dir + "' is not a directory");
  }
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename().string() != "construct.csv") {
      csvs.push_back(entry.path());
    }
  }
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty()) {
    throw ConfigError("report: no sweep CSV files in '" + o.dir + "'");
  }

  std::vector<ParsedTable> tables;
  for (const fs::path& p : csvs) {
    ParsedTable t = parse_rate_csv(p);
    const fs::path sidecar =
        p.parent_path() / (p.stem().string() + "_summary.json");
    if (fs::exists(sidecar)) {
      std::ifstream sf(sidecar);
      json j;
      sf >> j;
      t.have_sidecar = true;
      t.slope = j.at("slope").at("value").get<double>();
      t.slope_ok = j.at("slope").at("ok").get<bool>();
      t.exponent = j.at("theoretical_exponent").get<double>();
    } else {
      try {
        const harness::SlopeFit fit = harness::fit_slope(t.rows);
        t.slope = fit.slope;
        t.slope_ok = fit.ok;
      } catch (const ConfigError&) {
        t.slope_ok = false;
      }
    }
    tables.push_back(std::move(t));
  }

  // One block per target, one row per table.
  std::map<std::string, std::vector<const ParsedTable*>> by_target;
  for (const ParsedTable& t : tables) by_target[t.target].push_back(&t);
  std::string out;
  bool all_pass = true;
  for (const auto& [target, group] : by_target) {
    out += "target " + target + "\n";
    for (const ParsedTable* t : group) {
      std::string verdict = "SKIP (no slope)";
      if (t->slope_ok && t->exponent > 0.0) {
        const bool pass = std::abs(t->slope + t->exponent) <= o.window;
        verdict = pass ? "PASS" : "FAIL";
        if (!pass) all_pass = false;
      } else if (!t->slope_ok) {
        all_pass = false;
      }
      out += fmt("  %-28s slope=%8.4f  ref=%8.4f  window=±%.2f  %s\n",
                 t->estimator.c_str(), t->slope_ok ? t->slope : 0.0,
                 -t->exponent, o.window, verdict.c_str());
    }
  }
  write_file(dir / "report.txt", out);
  std::cout << out;
  return (o.strict && !all_pass) ? 1 : 0;
}

}  // namespace

// --------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{std::string("singlab ") + kVersionString +
               " - approximation and regression laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "flat key=value file; keys live in a [subcommand] section "
                 "(or use subcommand.key=value)");
  app.footer(
      "Master seed resolution: --seed flag, else SINGLAB_SEED, else 1.\n"
      "Config files are flat key=value lines under a [subcommand] section;\n"
      "command-line flags override file values.\n"
      "Exit codes: 0 ok, 1 bound/check failure under --strict, 2 bad "
      "config/IO.");

  ConstructOpts c;
  CLI::App* construct =
      app.add_subcommand("construct", "Build one network, report its bound");
  construct->add_option("--builder", c.builder,
                        "teeth|sawtooth|square|mult|multi-mult|monomial|step|"
                        "piecewise")
      ->required();
  construct->add_option("--act", c.act, "activation (default relu)");
  construct->add_option("--m", c.m, "squarer refinement depth");
  construct->add_option("--t", c.t, "sawtooth composition count");
  construct->add_option("--T", c.T, "input range half-width");
  construct->add_option("--dprime", c.dprime, "product arity");
  construct->add_option("--gamma", c.gamma, "monomial degree");
  construct->add_option("--eps", c.eps,
                        "tolerance (monomial/step; tightens the claimed "
                        "bound for square/mult builders)");
  construct->add_option("--eps1", c.eps1, "piecewise smooth-part tolerance");
  construct->add_option("--eps2", c.eps2,
                        "piecewise indicator-part tolerance");
  construct->add_option("--target", c.target, "piecewise target name");
  construct->add_option("--dim", c.dim, "target dimension");
  construct->add_option("--grid", c.grid, "1d measurement grid points");
  construct->add_option("--out", c.out, "output directory");
  construct->add_flag("--emit-net", c.emit_net, "write the network JSON");
  construct->add_flag("--strict", c.strict, "exit 1 on bound violation");

  ApproxOpts a;
  CLI::App* approx = app.add_subcommand(
      "approx-sweep", "Error vs parameter count of a construction");
  approx->add_option("--builder", a.builder, "smooth|indicator|piecewise");
  approx->add_option("--target", a.target, "target name")->required();
  approx->add_option("--dim", a.dim, "target dimension");
  approx->add_option("--eps", a.eps, "strictly decreasing tolerances")
      ->required()
      ->delimiter(',');
  approx->add_option("--act", a.act, "activation");
  approx->add_option("--points", a.points, "QMC budget per cell");
  approx->add_option("--out", a.out, "output directory");
  approx->add_flag("--svg", a.svg, "also write a log-log SVG plot");

  RegressOpts r;
  CLI::App* regress =
      app.add_subcommand("regress", "One fit plus its measured error");
  auto add_fit_knobs = [](CLI::App* cmd, RegressOpts& opt) {
    cmd->add_option("--widths", opt.widths, "dnn hidden widths")
        ->delimiter(',');
    cmd->add_option("--act", opt.act, "dnn activation");
    cmd->add_option("--clip", opt.clip, "dnn output clip");
    cmd->add_option("--lr", opt.lr, "dnn learning rate");
    cmd->add_option("--momentum", opt.momentum, "dnn momentum");
    cmd->add_option("--iters", opt.iters, "dnn iterations");
    cmd->add_option("--restarts", opt.restarts, "dnn restarts");
    cmd->add_option("--kernel", opt.kernel, "kernel name");
    cmd->add_option("--bandwidth", opt.bandwidth, "kernel bandwidth");
    cmd->add_option("--lambda", opt.lambda, "ridge strength");
    cmd->add_option("--tau", opt.tau, "series truncation");
    cmd->add_option("--grid-size", opt.grid_size, "curvelet frequency grid");
    cmd->add_option("--delta1", opt.delta1, "curvelet lattice density 1");
    cmd->add_option("--delta2", opt.delta2, "curvelet lattice density 2");
  };
  regress->add_option("--estimator", r.estimator,
                      "dnn|kernel-ridge|wavelet|curvelet");
  regress->add_option("--target", r.target, "target name");
  regress->add_option("--dim", r.dim, "target dimension");
  regress->add_option("--n", r.n, "sample size");
  regress->add_option("--sigma", r.sigma, "noise level");
  regress->add_option("--seed", r.seed, "master seed");
  regress->add_option("--points", r.points, "QMC budget (0 = auto)");
  add_fit_knobs(regress, r);
  regress->add_option("--out", r.out, "output directory");
  regress->add_flag("--emit-predictor", r.emit_predictor,
                    "write the fitted predictor JSON");

  RateOpts s;
  CLI::App* rate =
      app.add_subcommand("rate-sweep", "Error vs sample size, with slope");
  rate->add_option("--estimator", s.estimators,
                   "one or more of dnn|kernel-ridge|wavelet|curvelet")
      ->delimiter(',');
  rate->add_option("--target", s.target, "target name");
  rate->add_option("--dim", s.dim, "target dimension");
  rate->add_option("--ns", s.ns, "strictly increasing sample sizes")
      ->required()
      ->delimiter(',');
  rate->add_option("--reps", s.reps, "replicates per cell");
  rate->add_option("--sigma", s.sigma, "noise level");
  rate->add_option("--seed", s.seed, "master seed");
  rate->add_option("--workers", s.workers, "parallel cell workers");
  rate->add_flag("--no-auto", s.no_auto, "disable per-n policies");
  rate->add_option("--tau-grid", s.tau_grid, "series tuning grid")
      ->delimiter(',');
  rate->add_option("--bandwidth-grid", s.bandwidth_grid,
                   "kernel tuning grid")
      ->delimiter(',');
  rate->add_option("--lambda-grid", s.lambda_grid, "ridge tuning grid")
      ->delimiter(',');
  rate->add_option("--budget-scale", s.budget_scale,
                   "dnn parameter budget scale");
  rate->add_option("--l2-points", s.l2_points, "QMC budget (0 = auto)");
  rate->add_option("--tune-points", s.tune_points, "tuning QMC budget");
  rate->add_option("--tune-subsample", s.tune_subsample,
                   "kernel tuning subsample cap");
  add_fit_knobs(rate, s.base);
  rate->add_option("--out", s.out, "output directory");
  rate->add_flag("--svg", s.svg, "also write log-log SVG plots");

  ReportOpts p;
  CLI::App* report = app.add_subcommand(
      "report", "Consolidate sweep outputs against the reference exponents");
  report->add_option("--dir", p.dir, "directory with sweep outputs")
      ->required();
  report->add_option("--window", p.window, "slope acceptance half-width");
  report->add_flag("--strict", p.strict, "exit 1 when any row fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help/--version; anything else is a usage error.
    return code == 0 ? 0 : 2;
  }
  c.eps_set = construct->count("--eps") > 0;
  r.seed_set = regress->count("--seed") > 0;
  s.seed_set = rate->count("--seed") > 0;

  try {
    if (construct->parsed()) return run_construct(c);
    if (approx->parsed()) return run_approx_sweep(a);
    if (regress->parsed()) return run_regress(r);
    if (rate->parsed()) return run_rate_sweep(s);
    if (report->parsed()) return run_report(p);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "singlab: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "singlab: error: " << e.what() << "\n";
    return 1;
  }
}
