#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gps/graph.hpp"
#include "gps/rng.hpp"
#include "gps/tensor.hpp"

namespace gps {

// One GIN layer: MLP((1 + eps) * H + A * H) with a two-affine relu MLP.
// eps starts at zero; weights use fan-in uniform init.
struct GinLayerParams {
  Tensor eps;  // 1x1, learnable
  Tensor w1, b1;  // d_in -> d_h
  Tensor w2, b2;  // d_h -> d_h

  int in_dim() const { return w1.rows(); }
  int hidden_dim() const { return w1.cols(); }
};

GinLayerParams make_gin_layer(int d_in, int d_h, Rng& rng);
GinLayerParams clone_gin_layer(const GinLayerParams& p, bool requires_grad);

Tensor gin_layer(const Tensor& h, const Tensor& adj, const GinLayerParams& p);

// Sum readout over nodes: n x d -> 1 x d. Permutation invariant.
Tensor readout(const Tensor& h);

struct EncoderParams {
  std::vector<GinLayerParams> layers;

  int in_dim() const { return layers.front().in_dim(); }
  int out_dim() const { return layers.back().hidden_dim(); }
};

EncoderParams make_encoder(int d_in, int d_h, int num_layers, Rng& rng);
EncoderParams clone_encoder(const EncoderParams& p, bool requires_grad);

// Stacked GIN layers followed by readout: graph-level embedding, 1 x d.
Tensor encode(const Tensor& x, const Tensor& adj, const EncoderParams& p);
Tensor encode(const Graph& g, const EncoderParams& p);

// Online-side predictor: affine-relu-affine, square d -> d.
struct PredictorParams {
  Tensor w1, b1, w2, b2;

  int dim() const { return w1.rows(); }
};

PredictorParams make_predictor(int d, Rng& rng);

Tensor predict(const Tensor& h, const PredictorParams& p);

// Named tensor enumeration, used by checkpointing and update loops.
using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void collect(const GinLayerParams& p, const std::string& prefix, NamedTensors& out);
void collect(const EncoderParams& p, const std::string& prefix, NamedTensors& out);
void collect(const PredictorParams& p, const std::string& prefix, NamedTensors& out);

}  // namespace gps
