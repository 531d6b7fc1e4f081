// SPDX-License-Identifier: MIT
#include "singlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "singlab/errors.hpp"

namespace singlab {

Layer Layer::from_triplets(int out, int in, std::vector<Triplet> entries,
                           std::vector<double> bias_in) {
  if (out <= 0 || in <= 0) throw ShapeError("layer dimensions must be positive");
  if (static_cast<int>(bias_in.size()) != out) {
    throw ShapeError("bias length does not match layer output width");
  }
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= out || t.col < 0 || t.col >= in) {
      throw ShapeError("weight entry outside layer shape");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  Layer l;
  l.in = in;
  l.out = out;
  l.bias = std::move(bias_in);
  l.row_ptr.assign(out + 1, 0);
  l.col.reserve(entries.size());
  l.val.reserve(entries.size());
  std::size_t i = 0;
  for (int r = 0; r < out; ++r) {
    while (i < entries.size() && entries[i].row == r) {
      double v = entries[i].value;
      int c = entries[i].col;
      ++i;
      while (i < entries.size() && entries[i].row == r && entries[i].col == c) {
        v += entries[i].value;  // merge duplicates
        ++i;
      }
      if (v != 0.0) {
        l.col.push_back(c);
        l.val.push_back(v);
      }
    }
    l.row_ptr[r + 1] = static_cast<int>(l.col.size());
  }
  return l;
}

Layer Layer::dense(int out, int in, const std::vector<double>& row_major,
                   std::vector<double> bias_in) {
  if (static_cast<long long>(row_major.size()) !=
      static_cast<long long>(out) * in) {
    throw ShapeError("dense weight block size does not match layer shape");
  }
  std::vector<Triplet> t;
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < in; ++c) {
      const double v = row_major[static_cast<std::size_t>(r) * in + c];
      if (v != 0.0) t.push_back({r, c, v});
    }
  }
  return from_triplets(out, in, std::move(t), std::move(bias_in));
}

Layer Layer::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t), std::vector<double>(n, 0.0));
}

void Layer::apply(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < out; ++r) {
    double acc = bias[r];
    for (int i = row_ptr[r]; i < row_ptr[r + 1]; ++i) {
      acc += val[i] * x[col[i]];
    }
    y[r] = acc;
  }
}

std::vector<double> Layer::to_dense() const {
  std::vector<double> d(static_cast<std::size_t>(out) * in, 0.0);
  for (int r = 0; r < out; ++r) {
    for (int i = row_ptr[r]; i < row_ptr[r + 1]; ++i) {
      d[static_cast<std::size_t>(r) * in + col[i]] = val[i];
    }
  }
  return d;
}

int Network::max_width() const {
  int w = 0;
  for (const auto& l : layers) w = std::max({w, l.in, l.out});
  return w;
}

void Network::check() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    if (layers[i].out != layers[i + 1].in) {
      throw ShapeError("layer widths do not chain at layer " + std::to_string(i));
    }
  }
  if (clip && !(*clip > 0.0)) throw ConfigError("clip bound must be positive");
}

void Network::eval_into(std::span<const double> x, std::vector<double>& out,
                        std::vector<double>& scratch) const {
  if (layers.empty()) throw ShapeError("network has no layers");
  if (static_cast<int>(x.size()) != input_width()) {
    throw ShapeError("input length " + std::to_string(x.size()) +
                     " does not match network input width " +
                     std::to_string(input_width()));
  }
  const std::size_t cap = static_cast<std::size_t>(max_width());
  out.resize(cap);
  scratch.resize(cap);
  std::vector<double>* cur = &scratch;
  std::vector<double>* nxt = &out;
  std::copy(x.begin(), x.end(), cur->begin());
  const int L = depth();
  for (int l = 0; l < L; ++l) {
    const Layer& lay = layers[l];
    lay.apply(std::span<const double>(cur->data(), lay.in),
              std::span<double>(nxt->data(), lay.out));
    if (l + 1 < L) {
      for (int r = 0; r < lay.out; ++r) (*nxt)[r] = act((*nxt)[r]);
    }
    std::swap(cur, nxt);
  }
  if (cur != &out) out.swap(scratch);
  out.resize(layers.back().out);
  if (clip) {
    const double F = *clip;
    for (double& v : out) v = std::clamp(v, -F, F);
  }
}

std::vector<double> Network::eval(std::span<const double> x) const {
  std::vector<double> out, scratch;
  eval_into(x, out, scratch);
  return out;
}

double Network::eval1(std::span<const double> x) const {
  if (output_width() != 1) throw ShapeError("eval1 requires a scalar output");
  return eval(x)[0];
}

double Network::eval1(double x) const {
  return eval1(std::span<const double>(&x, 1));
}

SizeMetrics Network::metrics() const {
  SizeMetrics m;
  m.L = depth();
  for (const auto& l : layers) {
    for (double v : l.val) {
      if (std::abs(v) > kZeroTol) ++m.S;
      m.B = std::max(m.B, std::abs(v));
    }
    for (double b : l.bias) {
      if (std::abs(b) > kZeroTol) ++m.S;
      m.B = std::max(m.B, std::abs(b));
    }
  }
  return m;
}

namespace {

/// Affine fusion: returns the layer computing a(b(x)) for adjacent affine
/// maps (no activation in between).
Layer fuse(const Layer& a, const Layer& b) {
  if (a.in != b.out) throw ShapeError("affine fusion: shapes do not chain");
  std::vector<Layer::Triplet> t;
  std::vector<double> bias(a.out, 0.0);
  std::vector<double> acc(b.in, 0.0);
  std::vector<int> touched;
  for (int r = 0; r < a.out; ++r) {
    touched.clear();
    double brow = a.bias[r];
    for (int i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i) {
      const int k = a.col[i];
      const double w = a.val[i];
      brow += w * b.bias[k];
      for (int j = b.row_ptr[k]; j < b.row_ptr[k + 1]; ++j) {
        if (acc[b.col[j]] == 0.0) touched.push_back(b.col[j]);
        acc[b.col[j]] += w * b.val[j];
      }
    }
    bias[r] = brow;
    std::sort(touched.begin(), touched.end());
    for (int c : touched) {
      if (acc[c] != 0.0) t.push_back({r, c, acc[c]});
      acc[c] = 0.0;
    }
  }
  return Layer::from_triplets(a.out, b.in, std::move(t), std::move(bias));
}

}  // namespace

Network compose(const Network& outer, const Network& inner) {
  if (!outer.act.same_as(inner.act)) {
    throw UnsupportedConstruction("compose: mixed activations are not supported");
  }
  if (inner.clip) {
    throw UnsupportedConstruction("compose: inner network must be unclipped");
  }
  if (inner.output_width() != outer.input_width()) {
    throw ShapeError("compose: inner output width " +
                     std::to_string(inner.output_width()) +
                     " does not match outer input width " +
                     std::to_string(outer.input_width()));
  }
  Network r;
  r.act = outer.act;
  r.clip = outer.clip;
  r.layers.reserve(inner.depth() + outer.depth() - 1);
  for (int i = 0; i + 1 < inner.depth(); ++i) r.layers.push_back(inner.layers[i]);
  r.layers.push_back(fuse(outer.layers.front(), inner.layers.back()));
  for (int i = 1; i < outer.depth(); ++i) r.layers.push_back(outer.layers[i]);
  r.check();
  return r;
}

Network deepen(const Network& net, int extra) {
  if (extra <= 0) return net;
  if (!net.act.piecewise_linear()) {
    throw UnsupportedConstruction(
        "deepen: exact identity carriers need a piecewise-linear activation");
  }
  const double s = net.act.c1 + net.act.c2;
  if (!(s > 0.0)) {
    throw UnsupportedConstruction("deepen: c1 + c2 must be positive");
  }
  Network r = net;
  for (int e = 0; e < extra; ++e) {
    Layer last = std::move(r.layers.back());
    r.layers.pop_back();
    const int w = last.out;
    // Pre-activation pair (u, -u).
    std::vector<Layer::Triplet> t;
    std::vector<double> bias(2 * w, 0.0);
    for (int rr = 0; rr < w; ++rr) {
      for (int i = last.row_ptr[rr]; i < last.row_ptr[rr + 1]; ++i) {
        t.push_back({rr, last.col[i], last.val[i]});
        t.push_back({w + rr, last.col[i], -last.val[i]});
      }
      bias[rr] = last.bias[rr];
      bias[w + rr] = -last.bias[rr];
    }
    r.layers.push_back(Layer::from_triplets(2 * w, last.in, std::move(t), std::move(bias)));
    // Recombine: u = (eta(u) - eta(-u)) / (c1 + c2).
    std::vector<Layer::Triplet> t2;
    for (int rr = 0; rr < w; ++rr) {
      t2.push_back({rr, rr, 1.0 / s});
      t2.push_back({rr, w + rr, -1.0 / s});
    }
    r.layers.push_back(
        Layer::from_triplets(w, 2 * w, std::move(t2), std::vector<double>(w, 0.0)));
  }
  r.check();
  return r;
}

Network parallel(const std::vector<Network>& nets) {
  if (nets.empty()) throw ShapeError("parallel: empty network sequence");
  const int in = nets.front().input_width();
  for (const auto& n : nets) {
    if (!n.act.same_as(nets.front().act)) {
      throw UnsupportedConstruction("parallel: mixed activations are not supported");
    }
    if (n.input_width() != in) {
      throw ShapeError("parallel: member input widths differ");
    }
    if (n.clip) {
      throw UnsupportedConstruction("parallel: member networks must be unclipped");
    }
  }
  int L = 0;
  for (const auto& n : nets) L = std::max(L, n.depth());
  std::vector<Network> padded;
  padded.reserve(nets.size());
  for (const auto& n : nets) {
    if (n.depth() < L && !n.act.piecewise_linear()) {
      throw UnsupportedConstruction(
          "parallel: smooth activations cannot pad depth-mismatched members");
    }
    padded.push_back(n.depth() < L ? deepen(n, L - n.depth()) : n);
  }
  Network r;
  r.act = nets.front().act;
  for (int l = 0; l < L; ++l) {
    std::vector<Layer::Triplet> t;
    std::vector<double> bias;
    int row_off = 0;
    int col_off = 0;
    int out_total = 0;
    for (const auto& n : padded) out_total += n.layers[l].out;
    bias.reserve(out_total);
    for (const auto& n : padded) {
      const Layer& lay = n.layers[l];
      const int coff = (l == 0) ? 0 : col_off;
      for (int rr = 0; rr < lay.out; ++rr) {
        for (int i = lay.row_ptr[rr]; i < lay.row_ptr[rr + 1]; ++i) {
          t.push_back({row_off + rr, coff + lay.col[i], lay.val[i]});
        }
        bias.push_back(lay.bias[rr]);
      }
      row_off += lay.out;
      col_off += lay.in;
    }
    const int in_total = (l == 0) ? in : col_off;
    r.layers.push_back(
        Layer::from_triplets(out_total, in_total, std::move(t), std::move(bias)));
  }
  r.check();
  return r;
}

Network postcompose_affine(const Network& net, const Layer& affine) {
  if (affine.in != net.output_width()) {
    throw ShapeError("postcompose_affine: width mismatch");
  }
  Network r = net;
  r.layers.back() = fuse(affine, net.layers.back());
  r.check();
  return r;
}

Network affine_output(const Network& net, const std::vector<double>& weights,
                      double bias) {
  if (static_cast<int>(weights.size()) != net.output_width()) {
    throw ShapeError("affine_output: weight length " +
                     std::to_string(weights.size()) +
                     " does not match network output width " +
                     std::to_string(net.output_width()));
  }
  std::vector<Layer::Triplet> t;
  for (int c = 0; c < static_cast<int>(weights.size()); ++c) {
    if (weights[c] != 0.0) t.push_back({0, c, weights[c]});
  }
  return postcompose_affine(
      net, Layer::from_triplets(1, net.output_width(), std::move(t), {bias}));
}

Network precompose_affine(const Network& net, const Layer& affine) {
  if (affine.out != net.input_width()) {
    throw ShapeError("precompose_affine: width mismatch");
  }
  Network r = net;
  r.layers.front() = fuse(net.layers.front(), affine);
  r.check();
  return r;
}

Network identity_net(const Activation& act, int depth, int width) {
  if (depth < 1) throw ConfigError("identity_net: depth must be >= 1");
  Network n;
  n.act = act;
  n.layers.push_back(Layer::identity(width));
  return deepen(n, depth - 1);
}

Network constant_net(const Activation& act, double value, int in_width) {
  Network n;
  n.act = act;
  n.layers.push_back(Layer::from_triplets(1, in_width, {}, {value}));
  return n;
}

}  // namespace singlab
