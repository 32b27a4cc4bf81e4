#pragma once

#include <vector>

#include "gps/encoder.hpp"
#include "gps/graph.hpp"

namespace gps {

enum class PoolerFamily { topk, cluster };

// Learnable view generator. Both families share a GIN feature layer; the
// head maps to a single score (topk) or to k_max cluster logits (cluster).
struct PoolerParams {
  PoolerFamily family = PoolerFamily::topk;
  double rho = 0.5;   // keep ratio in (0, 1]
  GinLayerParams gin;  // d0 -> d_h
  Tensor head_w;       // d_h x 1 (topk) or d_h x k_max (cluster)
  Tensor head_b;

  int k_max() const { return head_w.cols(); }
};

PoolerParams make_pooler(PoolerFamily family, double rho, int d_in, int d_h, int k_max,
                         Rng& rng);
PoolerParams clone_pooler(const PoolerParams& p, bool requires_grad);
void collect(const PoolerParams& p, const std::string& prefix, NamedTensors& out);

// ceil(rho * n) clamped to [1, n].
int keep_count(int n, double rho);

// Self-attention scores for topk pooling: gin -> affine -> tanh, |V| x 1.
Tensor topk_scores(const Graph& g, const PoolerParams& p);

// Indices of the keep_count(n, rho) largest scores; ties broken toward the
// lower node index. Returned sorted ascending.
std::vector<int> topk_select(const Tensor& scores, double rho);

struct PooledGraph {
  Tensor x;    // m x d0
  Tensor adj;  // m x m
  std::vector<int> kept;  // topk provenance (ascending kept node indices)
  Tensor assignment;      // cluster provenance (|V| x m, row-stochastic)
};

// Gated node selection: X_pool = X[idx] * Z[idx] (rows scaled by their own
// score), A_pool = A[idx, idx]. Selection itself is not differentiated;
// gradient reaches the score net only through the Z gating, which assumes
// the kept index set is locally constant.
PooledGraph topk_pool(const Graph& g, const PoolerParams& p);

// Row-stochastic soft assignment S: softmax over k_max cluster logits,
// restricted to the first keep_count columns and renormalized per row.
Tensor cluster_assign(const Graph& g, const PoolerParams& p);

// Soft coarsening: X_pool = S^T X, A_pool = S^T A S.
PooledGraph cluster_pool(const Graph& g, const PoolerParams& p);

// Dispatch on family.
PooledGraph pool(const Graph& g, const PoolerParams& p);

}  // namespace gps
