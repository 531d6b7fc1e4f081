// SPDX-License-Identifier: MIT
#include "singlab/estimators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "estimators_internal.hpp"
#include "singlab/errors.hpp"
#include "singlab/netio.hpp"

namespace singlab::est {

using nlohmann::json;

std::string kind_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Dnn: return "dnn";
    case PredictorKind::KernelRidge: return "kernel-ridge";
    case PredictorKind::Wavelet: return "wavelet";
    case PredictorKind::Curvelet: return "curvelet";
  }
  throw ConfigError("predictor: unknown kind value");
}

PredictorKind kind_parse(const std::string& name) {
  if (name == "dnn") return PredictorKind::Dnn;
  if (name == "kernel-ridge") return PredictorKind::KernelRidge;
  if (name == "wavelet") return PredictorKind::Wavelet;
  if (name == "curvelet") return PredictorKind::Curvelet;
  throw ConfigError("unknown estimator kind '" + name + "'");
}

namespace {

void check_point(const Predictor& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.domain.dim()) {
    throw ShapeError("predict: point has " + std::to_string(x.size()) +
                     " coordinates, the predictor domain has " +
                     std::to_string(p.domain.dim()));
  }
  if (!p.domain.contains(x)) {
    throw ConfigError("predict: point lies outside the predictor's domain");
  }
}

double eval_unchecked(const Predictor& p, std::span<const double> x) {
  switch (p.kind) {
    case PredictorKind::Dnn: return p.net.eval1(x);
    case PredictorKind::KernelRidge: return detail::eval_krr(p.krr, x);
    case PredictorKind::Wavelet: return detail::eval_wavelet(p.wav, x);
    case PredictorKind::Curvelet: return p.cur.frame->synth(x, p.cur.w);
  }
  throw ConfigError("predict: unknown predictor kind");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double Predictor::predict(std::span<const double> x) const {
  check_point(*this, x);
  return eval_unchecked(*this, x);
}

std::vector<double> Predictor::predict_batch(std::span<const double> X,
                                             std::size_t n) const {
  const auto D = static_cast<std::size_t>(domain.dim());
  if (X.size() != n * D) {
    throw ShapeError("predict_batch: row-major block size mismatch");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = predict(X.subspan(i * D, D));
  }
  return out;
}

double predict(const Predictor& p, std::span<const double> x) {
  return p.predict(x);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json box_to_json(const quad::Box& b) {
  return json{{"lo", b.lo}, {"hi", b.hi}};
}

quad::Box box_from_json(const json& j) {
  quad::Box b;
  b.lo = j.at("lo").get<std::vector<double>>();
  b.hi = j.at("hi").get<std::vector<double>>();
  if (b.lo.size() != b.hi.size()) {
    throw ConfigError("predictor file: domain lo/hi length mismatch");
  }
  return b;
}

json meta_to_json(const FitMeta& m) {
  json j;
  j["final_loss"] = m.final_loss;
  j["iterations"] = m.iterations;
  j["gap"] = m.gap;
  j["tau"] = m.tau;
  j["lambda"] = m.lambda;
  j["bandwidth"] = m.bandwidth;
  j["seed"] = m.seed;
  j["restarts"] = m.restarts;
  j["net_depth"] = m.net.L;
  j["net_nonzeros"] = m.net.S;
  j["net_max_weight"] = m.net.B;
  j["checkpoints"] = m.checkpoints;
  return j;
}

FitMeta meta_from_json(const json& j) {
  FitMeta m;
  m.final_loss = j.at("final_loss").get<double>();
  m.iterations = j.at("iterations").get<long long>();
  m.gap = j.at("gap").get<double>();
  m.tau = j.at("tau").get<int>();
  m.lambda = j.at("lambda").get<double>();
  m.bandwidth = j.at("bandwidth").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.restarts = j.at("restarts").get<int>();
  m.net.L = j.at("net_depth").get<long long>();
  m.net.S = j.at("net_nonzeros").get<long long>();
  m.net.B = j.at("net_max_weight").get<double>();
  m.checkpoints = j.at("checkpoints").get<std::vector<double>>();
  return m;
}

// Coefficient tables ride as CSV blocks: index columns followed by the
// value, zero coefficients omitted.

std::string wavelet_csv(const WaveletState& s) {
  std::ostringstream os;
  for (int d = 1; d <= s.D; ++d) {
    os << "j" << d << ",k" << d << ",";
  }
  os << "value\n";
  const int m = s.per_axis();
  std::vector<int> slot(static_cast<std::size_t>(s.D), 0);
  for (std::size_t flat = 0; flat < s.w.size(); ++flat) {
    if (s.w[flat] == 0.0) continue;
    std::size_t rest = flat;
    for (int d = s.D - 1; d >= 0; --d) {
      slot[static_cast<std::size_t>(d)] = static_cast<int>(rest % m);
      rest /= static_cast<std::size_t>(m);
    }
    for (int d = 0; d < s.D; ++d) {
      const int sl = slot[static_cast<std::size_t>(d)];
      int j = -1, k = 0;
      if (sl > 0) {
        j = 0;
        while ((2 << j) <= sl) ++j;  // j = floor(log2(sl))
        k = sl - (1 << j);
      }
      os << j << "," << k << ",";
    }
    os << fmt17(s.w[flat]) << "\n";
  }
  return os.str();
}

void wavelet_from_csv(WaveletState& s, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) {
    throw ConfigError("predictor file: empty wavelet coefficient table");
  }
  const int m = s.per_axis();
  std::size_t total = 1;
  for (int d = 0; d < s.D; ++d) total *= static_cast<std::size_t>(m);
  s.w.assign(total, 0.0);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t flat = 0;
    for (int d = 0; d < s.D; ++d) {
      int j = 0, k = 0;
      char comma = 0;
      if (!(ls >> j >> comma >> k >> comma)) {
        throw ConfigError("predictor file: bad wavelet row at line " +
                          std::to_string(lineno));
      }
      const int sl = j < 0 ? 0 : (1 << j) + k;
      if (sl < 0 || sl >= m) {
        throw ConfigError("predictor file: wavelet index out of range at line " +
                          std::to_string(lineno));
      }
      flat = flat * static_cast<std::size_t>(m) + static_cast<std::size_t>(sl);
    }
    double v = 0.0;
    if (!(ls >> v)) {
      throw ConfigError("predictor file: bad wavelet value at line " +
                        std::to_string(lineno));
    }
    s.w[flat] = v;
  }
}

std::string curvelet_csv(const CurveletState& s) {
  std::ostringstream os;
  os << "j,l,k1,k2,value\n";
  const auto& wedges = s.frame->wedges();
  for (const auto& wd : wedges) {
    for (int a = 0; a < wd.M1; ++a) {
      for (int b = 0; b < wd.M2; ++b) {
        const std::size_t slot =
            wd.offset + static_cast<std::size_t>(a) *
                            static_cast<std::size_t>(wd.M2) +
            static_cast<std::size_t>(b);
        if (s.w[slot] == 0.0) continue;
        os << wd.j << "," << wd.l << "," << a << "," << b << ","
           << fmt17(s.w[slot]) << "\n";
      }
    }
  }
  return os.str();
}

void curvelet_from_csv(CurveletState& s, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) {
    throw ConfigError("predictor file: empty curvelet coefficient table");
  }
  s.w.assign(s.frame->coefficient_count(), 0.0);
  const auto& wedges = s.frame->wedges();
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int j = 0, l = 0, a = 0, b = 0;
    double v = 0.0;
    char comma = 0;
    if (!(ls >> j >> comma >> l >> comma >> a >> comma >> b >> comma >> v)) {
      throw ConfigError("predictor file: bad curvelet row at line " +
                        std::to_string(lineno));
    }
    const CurveletWedge* hit = nullptr;
    for (const auto& wd : wedges) {
      if (wd.j == j && wd.l == l) {
        hit = &wd;
        break;
      }
    }
    if (hit == nullptr || a < 0 || a >= hit->M1 || b < 0 || b >= hit->M2) {
      throw ConfigError("predictor file: curvelet index out of range at line " +
                        std::to_string(lineno));
    }
    s.w[hit->offset + static_cast<std::size_t>(a) *
                          static_cast<std::size_t>(hit->M2) +
        static_cast<std::size_t>(b)] = v;
  }
}

std::string design_csv(const KernelRidgeState& s) {
  std::ostringstream os;
  for (int d = 1; d <= s.D; ++d) {
    os << "x" << d << (d == s.D ? "" : ",");
  }
  os << "\n";
  const std::size_t n = s.a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < s.D; ++d) {
      os << fmt17(s.X[i * static_cast<std::size_t>(s.D) +
                      static_cast<std::size_t>(d)])
         << (d + 1 == s.D ? "" : ",");
    }
    os << "\n";
  }
  return os.str();
}

std::string dual_csv(const KernelRidgeState& s) {
  std::ostringstream os;
  os << "a\n";
  for (double v : s.a) os << fmt17(v) << "\n";
  return os.str();
}

std::vector<double> numbers_from_csv(const std::string& text, int columns,
                                     const char* what) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) {
    throw ConfigError(std::string("predictor file: empty ") + what + " table");
  }
  std::vector<double> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    for (int c = 0; c < columns; ++c) {
      double v = 0.0;
      char comma = 0;
      if (c > 0 && !(ls >> comma)) {
        throw ConfigError(std::string("predictor file: bad ") + what +
                          " row at line " + std::to_string(lineno));
      }
      if (!(ls >> v)) {
        throw ConfigError(std::string("predictor file: bad ") + what +
                          " row at line " + std::to_string(lineno));
      }
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

std::string predictor_to_json(const Predictor& p) {
  json j;
  j["format"] = "singlab-predictor-v1";
  j["kind"] = kind_name(p.kind);
  j["domain"] = box_to_json(p.domain);
  j["meta"] = meta_to_json(p.meta);
  switch (p.kind) {
    case PredictorKind::Dnn:
      j["network"] = json::parse(network_to_json(p.net));
      break;
    case PredictorKind::KernelRidge:
      j["kernel"] = {{"family", "gaussian"},
                     {"bandwidth", p.krr.bandwidth},
                     {"lambda", p.krr.lambda},
                     {"dim", p.krr.D}};
      j["design_csv"] = design_csv(p.krr);
      j["dual_csv"] = dual_csv(p.krr);
      break;
    case PredictorKind::Wavelet:
      j["wavelet"] = {{"dim", p.wav.D}, {"tau", p.wav.tau}};
      j["coeff_csv"] = wavelet_csv(p.wav);
      break;
    case PredictorKind::Curvelet:
      j["curvelet"] = {{"tau", p.cur.tau},
                       {"delta1", p.cur.delta1},
                       {"delta2", p.cur.delta2},
                       {"grid", p.cur.grid}};
      j["coeff_csv"] = curvelet_csv(p.cur);
      break;
  }
  return j.dump(1);
}

Predictor predictor_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("predictor file: parse error: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "singlab-predictor-v1") {
      throw ConfigError("predictor file: unknown format tag");
    }
    Predictor p;
    p.kind = kind_parse(j.at("kind").get<std::string>());
    p.domain = box_from_json(j.at("domain"));
    p.meta = meta_from_json(j.at("meta"));
    switch (p.kind) {
      case PredictorKind::Dnn:
        p.net = network_from_json(j.at("network").dump());
        break;
      case PredictorKind::KernelRidge: {
        const json& k = j.at("kernel");
        p.krr.D = k.at("dim").get<int>();
        p.krr.bandwidth = k.at("bandwidth").get<double>();
        p.krr.lambda = k.at("lambda").get<double>();
        p.krr.X = numbers_from_csv(j.at("design_csv").get<std::string>(),
                                   p.krr.D, "design");
        p.krr.a = numbers_from_csv(j.at("dual_csv").get<std::string>(), 1,
                                   "dual weight");
        if (p.krr.X.size() !=
            p.krr.a.size() * static_cast<std::size_t>(p.krr.D)) {
          throw ConfigError("predictor file: design/dual size mismatch");
        }
        break;
      }
      case PredictorKind::Wavelet: {
        const json& k = j.at("wavelet");
        p.wav.D = k.at("dim").get<int>();
        p.wav.tau = k.at("tau").get<int>();
        if (p.wav.D < 1 || p.wav.tau < 0) {
          throw ConfigError("predictor file: bad wavelet shape");
        }
        wavelet_from_csv(p.wav, j.at("coeff_csv").get<std::string>());
        break;
      }
      case PredictorKind::Curvelet: {
        const json& k = j.at("curvelet");
        p.cur.tau = k.at("tau").get<int>();
        p.cur.delta1 = k.at("delta1").get<double>();
        p.cur.delta2 = k.at("delta2").get<double>();
        p.cur.grid = k.at("grid").get<int>();
        p.cur.frame = CurveletFrame::get(p.cur.tau, p.cur.delta1,
                                         p.cur.delta2, p.cur.grid);
        curvelet_from_csv(p.cur, j.at("coeff_csv").get<std::string>());
        break;
      }
    }
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("predictor file: missing field: ") +
                      e.what());
  }
}

void save_predictor(const Predictor& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << predictor_to_json(p) << "\n";
  if (!out.good()) throw ConfigError("short write to '" + path + "'");
}

Predictor load_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return predictor_from_json(buf.str());
}

}  // namespace singlab::est
