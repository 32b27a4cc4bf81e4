#include "gps/encoder.hpp"

#include <cmath>

#include "gps/error.hpp"

namespace gps {

namespace {

Tensor fanin_uniform(int rows, int cols, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return Tensor::uniform(rows, cols, -bound, bound, rng, /*requires_grad=*/true);
}

// Affine map on row-major activations: h * w + b broadcast over rows.
Tensor affine(const Tensor& h, const Tensor& w, const Tensor& b) {
  return add_rowvec(matmul(h, w), b);
}

}  // namespace

GinLayerParams make_gin_layer(int d_in, int d_h, Rng& rng) {
  GinLayerParams p;
  p.eps = Tensor::param(1, 1, {0.0});
  p.w1 = fanin_uniform(d_in, d_h, d_in, rng);
  p.b1 = fanin_uniform(1, d_h, d_in, rng);
  p.w2 = fanin_uniform(d_h, d_h, d_h, rng);
  p.b2 = fanin_uniform(1, d_h, d_h, rng);
  return p;
}

GinLayerParams clone_gin_layer(const GinLayerParams& p, bool requires_grad) {
  GinLayerParams c;
  c.eps = p.eps.clone();
  c.w1 = p.w1.clone();
  c.b1 = p.b1.clone();
  c.w2 = p.w2.clone();
  c.b2 = p.b2.clone();
  for (Tensor* t : {&c.eps, &c.w1, &c.b1, &c.w2, &c.b2}) t->set_requires_grad(requires_grad);
  return c;
}

Tensor gin_layer(const Tensor& h, const Tensor& adj, const GinLayerParams& p) {
  if (h.rows() != adj.rows() || adj.rows() != adj.cols()) {
    throw DimensionError("gin_layer: adjacency must be n x n matching h");
  }
  if (h.cols() != p.in_dim()) {
    throw DimensionError("gin_layer: feature width does not match layer input dim");
  }
  // (1 + eps) broadcast to a column so the self term stays differentiable
  // in eps through the closed op set.
  Tensor one_plus_eps = add_scalar(p.eps, 1.0);
  Tensor self_scale = matmul(Tensor::ones(h.rows(), 1), one_plus_eps);
  Tensor combined = add(scale_rows(h, self_scale), matmul(adj, h));
  return affine(relu(affine(combined, p.w1, p.b1)), p.w2, p.b2);
}

Tensor readout(const Tensor& h) { return col_sum(h); }

EncoderParams make_encoder(int d_in, int d_h, int num_layers, Rng& rng) {
  if (num_layers < 1) throw ConfigError("make_encoder: need at least one layer");
  EncoderParams p;
  p.layers.push_back(make_gin_layer(d_in, d_h, rng));
  for (int k = 1; k < num_layers; ++k) p.layers.push_back(make_gin_layer(d_h, d_h, rng));
  return p;
}

EncoderParams clone_encoder(const EncoderParams& p, bool requires_grad) {
  EncoderParams c;
  c.layers.reserve(p.layers.size());
  for (const GinLayerParams& layer : p.layers) {
    c.layers.push_back(clone_gin_layer(layer, requires_grad));
  }
  return c;
}

Tensor encode(const Tensor& x, const Tensor& adj, const EncoderParams& p) {
  Tensor h = x;
  for (const GinLayerParams& layer : p.layers) h = gin_layer(h, adj, layer);
  return readout(h);
}

Tensor encode(const Graph& g, const EncoderParams& p) { return encode(g.x, g.adj, p); }

PredictorParams make_predictor(int d, Rng& rng) {
  PredictorParams p;
  p.w1 = fanin_uniform(d, d, d, rng);
  p.b1 = fanin_uniform(1, d, d, rng);
  p.w2 = fanin_uniform(d, d, d, rng);
  p.b2 = fanin_uniform(1, d, d, rng);
  return p;
}

Tensor predict(const Tensor& h, const PredictorParams& p) {
  if (h.cols() != p.dim()) throw DimensionError("predict: embedding width mismatch");
  return affine(relu(affine(h, p.w1, p.b1)), p.w2, p.b2);
}

void collect(const GinLayerParams& p, const std::string& prefix, NamedTensors& out) {
  out.emplace_back(prefix + ".eps", p.eps);
  out.emplace_back(prefix + ".w1", p.w1);
  out.emplace_back(prefix + ".b1", p.b1);
  out.emplace_back(prefix + ".w2", p.w2);
  out.emplace_back(prefix + ".b2", p.b2);
}

void collect(const EncoderParams& p, const std::string& prefix, NamedTensors& out) {
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    collect(p.layers[k], prefix + ".layer" + std::to_string(k), out);
  }
}

void collect(const PredictorParams& p, const std::string& prefix, NamedTensors& out) {
  out.emplace_back(prefix + ".w1", p.w1);
  out.emplace_back(prefix + ".b1", p.b1);
  out.emplace_back(prefix + ".w2", p.w2);
  out.emplace_back(prefix + ".b2", p.b2);
}

}  // namespace gps
