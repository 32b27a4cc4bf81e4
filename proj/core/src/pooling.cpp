#include "gps/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gps/error.hpp"

namespace gps {

namespace {

Tensor fanin_uniform(int rows, int cols, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return Tensor::uniform(rows, cols, -bound, bound, rng, /*requires_grad=*/true);
}

}  // namespace

PoolerParams make_pooler(PoolerFamily family, double rho, int d_in, int d_h, int k_max,
                         Rng& rng) {
  if (rho <= 0.0 || rho > 1.0) throw ConfigError("make_pooler: rho must be in (0, 1]");
  if (family == PoolerFamily::cluster && k_max < 1) {
    throw ConfigError("make_pooler: cluster pooler needs k_max >= 1");
  }
  PoolerParams p;
  p.family = family;
  p.rho = rho;
  p.gin = make_gin_layer(d_in, d_h, rng);
  const int head_out = family == PoolerFamily::topk ? 1 : k_max;
  p.head_w = fanin_uniform(d_h, head_out, d_h, rng);
  p.head_b = fanin_uniform(1, head_out, d_h, rng);
  return p;
}

PoolerParams clone_pooler(const PoolerParams& p, bool requires_grad) {
  PoolerParams c;
  c.family = p.family;
  c.rho = p.rho;
  c.gin = clone_gin_layer(p.gin, requires_grad);
  c.head_w = p.head_w.clone();
  c.head_b = p.head_b.clone();
  c.head_w.set_requires_grad(requires_grad);
  c.head_b.set_requires_grad(requires_grad);
  return c;
}

void collect(const PoolerParams& p, const std::string& prefix, NamedTensors& out) {
  collect(p.gin, prefix + ".gin", out);
  out.emplace_back(prefix + ".head_w", p.head_w);
  out.emplace_back(prefix + ".head_b", p.head_b);
}

int keep_count(int n, double rho) {
  if (n < 1) throw DimensionError("keep_count: n must be >= 1");
  if (rho <= 0.0 || rho > 1.0) throw ConfigError("keep_count: rho must be in (0, 1]");
  const int m = static_cast<int>(std::ceil(rho * static_cast<double>(n)));
  return std::clamp(m, 1, n);
}

Tensor topk_scores(const Graph& g, const PoolerParams& p) {
  Tensor h = gin_layer(g.x, g.adj, p.gin);
  return tanh_op(add_rowvec(matmul(h, p.head_w), p.head_b));
}

std::vector<int> topk_select(const Tensor& scores, double rho) {
  if (scores.cols() != 1) throw DimensionError("topk_select: scores must be n x 1");
  const int n = scores.rows();
  const int m = keep_count(n, rho);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = scores.values()[static_cast<std::size_t>(a)];
    const double sb = scores.values()[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;  // ties keep the lower node index
  });
  order.resize(static_cast<std::size_t>(m));
  std::sort(order.begin(), order.end());
  return order;
}

PooledGraph topk_pool(const Graph& g, const PoolerParams& p) {
  if (p.family != PoolerFamily::topk) throw ConfigError("topk_pool: pooler is not topk");
  Tensor scores = topk_scores(g, p);
  const std::vector<int> kept = topk_select(scores, p.rho);
  PooledGraph out;
  out.kept = kept;
  out.x = scale_rows(index_rows(g.x, kept), index_rows(scores, kept));
  out.adj = index_cols(index_rows(g.adj, kept), kept);
  return out;
}

Tensor cluster_assign(const Graph& g, const PoolerParams& p) {
  if (p.family != PoolerFamily::cluster) {
    throw ConfigError("cluster_assign: pooler is not cluster");
  }
  const int m = keep_count(g.n, p.rho);
  if (m > p.k_max()) {
    throw DimensionError("cluster_assign: graph needs more clusters than k_max");
  }
  Tensor h = gin_layer(g.x, g.adj, p.gin);
  Tensor assignment = row_softmax(add_rowvec(matmul(h, p.head_w), p.head_b));
  std::vector<int> front(static_cast<std::size_t>(m));
  std::iota(front.begin(), front.end(), 0);
  Tensor sliced = index_cols(assignment, front);
  // Rows of a softmax slice stay positive, so the renormalization is safe.
  return scale_rows(sliced, reciprocal(row_sum(sliced)));
}

PooledGraph cluster_pool(const Graph& g, const PoolerParams& p) {
  Tensor assignment = cluster_assign(g, p);
  PooledGraph out;
  out.assignment = assignment;
  Tensor st = transpose(assignment);
  out.x = matmul(st, g.x);
  out.adj = matmul(matmul(st, g.adj), assignment);
  return out;
}

PooledGraph pool(const Graph& g, const PoolerParams& p) {
  return p.family == PoolerFamily::topk ? topk_pool(g, p) : cluster_pool(g, p);
}

}  // namespace gps
