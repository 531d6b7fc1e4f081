// SPDX-License-Identifier: MIT
//
// Textual outputs for sweep tables: the flat CSV, the JSON summary with the
// slope and regime flags, and a small log-log SVG scatter. All three are
// byte-deterministic functions of the table.
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "singlab/harness.hpp"

namespace singlab::harness {

namespace {

void appendf(std::string& out, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  out += buf;
}

}  // namespace

std::string rate_csv(const RateTable& table) {
  std::string out = "estimator,target,alpha,beta,D,n,reps,mean_sq_err,stderr\n";
  for (const RateRow& r : table.rows) {
    appendf(out, "%s,%s,%.17g,%.17g,%d,%llu,%d,%.17g,%.17g\n",
            table.estimator.c_str(), table.target.c_str(), table.alpha,
            table.beta, table.D, static_cast<unsigned long long>(r.n), r.reps,
            r.mean_sq_err, r.std_err);
  }
  return out;
}

std::string rate_summary_json(const RateTable& table) {
  nlohmann::json j;
  j["estimator"] = table.estimator;
  j["target"] = table.target;
  j["alpha"] = table.alpha;
  j["beta"] = table.beta;
  j["D"] = table.D;
  j["rows"] = table.rows.size();
  int failed = 0;
  for (const RateRow& r : table.rows) failed += r.failed;
  j["failed_cells"] = failed;
  j["slope"] = {{"ok", table.slope.ok},
                {"value", table.slope.slope},
                {"stderr", table.slope.std_err},
                {"intercept", table.slope.intercept},
                {"used", table.slope.used},
                {"excluded", table.slope.excluded}};
  j["theoretical_exponent"] = table.theoretical_exponent;
  j["exponent_source"] = table.exponent_source;
  j["rates"] = {{"dnn", table.rates.dnn},
                {"linear_floor", table.rates.linear_floor},
                {"wavelet_floor", table.rates.wavelet_floor},
                {"curvelet_floor", table.rates.curvelet_floor}};
  j["flags"] = {{"wavelet_floor_active", table.rates.wavelet_floor_active},
                {"curvelet_floor_active", table.rates.curvelet_floor_active},
                {"linear_suboptimal", table.rates.linear_suboptimal},
                {"monotone", table.monotone},
                {"degenerate", table.degenerate}};
  j["warnings"] = table.warnings;
  return j.dump(2) + "\n";
}

std::string rate_svg(const RateTable& table) {
  constexpr double kW = 640.0, kH = 480.0, kM = 64.0;
  std::string out;
  appendf(out,
          "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" "
          "height=\"%g\" viewBox=\"0 0 %g %g\">\n",
          kW, kH, kW, kH);
  appendf(out,
          "<text x=\"%g\" y=\"24\" font-family=\"monospace\" "
          "font-size=\"14\">%s on %s (log10-log10)</text>\n",
          kM, table.estimator.c_str(), table.target.c_str());

  std::vector<double> xs, ys;
  for (const RateRow& r : table.rows) {
    if (r.reps >= 1 && r.mean_sq_err > 0.0 && r.n > 0) {
      xs.push_back(std::log10(static_cast<double>(r.n)));
      ys.push_back(std::log10(r.mean_sq_err));
    }
  }
  if (xs.size() < 2) {
    appendf(out,
            "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" "
            "font-size=\"14\">not enough usable rows to plot</text>\n</svg>\n",
            kM, kH / 2.0);
    return out;
  }
  double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.10 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) {
    return kM + (x - xmin) / (xmax - xmin) * (kW - 2.0 * kM);
  };
  auto py = [&](double y) {
    return kH - kM - (y - ymin) / (ymax - ymin) * (kH - 2.0 * kM);
  };

  appendf(out,
          "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
          "stroke=\"black\"/>\n",
          kM, kH - kM, kW - kM, kH - kM);
  appendf(out,
          "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
          "stroke=\"black\"/>\n",
          kM, kM, kM, kH - kM);
  appendf(out,
          "<text x=\"%g\" y=\"%g\" font-family=\"monospace\" "
          "font-size=\"12\">log10 n</text>\n",
          kW / 2.0 - 30.0, kH - 20.0);
  appendf(out,
          "<text x=\"16\" y=\"%g\" font-family=\"monospace\" font-size=\"12\" "
          "transform=\"rotate(-90 16 %g)\">log10 error</text>\n",
          kH / 2.0, kH / 2.0);

  // Theoretical reference: slope -exponent anchored at the first point.
  if (table.theoretical_exponent > 0.0) {
    const double s = -table.theoretical_exponent;
    const double y0 = ys[0] + s * (xmin - xs[0]);
    const double y1 = ys[0] + s * (xmax - xs[0]);
    appendf(out,
            "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"gray\" "
            "stroke-dasharray=\"6 4\"/>\n",
            px(xmin), py(y0), px(xmax), py(y1));
  }
  // Fitted slope (natural-log fit; identical slope in log10 coordinates).
  if (table.slope.ok) {
    constexpr double kLn10 = 2.302585092994046;
    const double b = table.slope.intercept / kLn10;
    const double y0 = b + table.slope.slope * xmin;
    const double y1 = b + table.slope.slope * xmax;
    appendf(out,
            "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
            "stroke=\"steelblue\"/>\n",
            px(xmin), py(y0), px(xmax), py(y1));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    appendf(out,
            "<circle cx=\"%g\" cy=\"%g\" r=\"4\" fill=\"crimson\"/>\n",
            px(xs[i]), py(ys[i]));
  }
  appendf(out,
          "<text x=\"%g\" y=\"44\" font-family=\"monospace\" "
          "font-size=\"12\">slope %.4f (ref %.4f)</text>\n",
          kM, table.slope.slope, -table.theoretical_exponent);
  out += "</svg>\n";
  return out;
}

}  // namespace singlab::harness
