#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles are
// deliberately written as plain double loops so they share no code with the
// library paths they check.

#include <cmath>
#include <map>
#include <vector>

#include "gps/encoder.hpp"
#include "gps/graph.hpp"
#include "gps/rng.hpp"
#include "gps/tensor.hpp"

namespace testsupport {

inline double rel_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_error(a[i], b[i]));
  return worst;
}

// Random Erdos-Renyi graph with one-hot features drawn uniformly.
inline gps::Graph random_graph(int n, int feature_dim, double edge_prob, gps::Rng& rng,
                               int label = 0) {
  std::vector<double> adj(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < edge_prob) {
        adj[static_cast<std::size_t>(i) * n + j] = 1.0;
        adj[static_cast<std::size_t>(j) * n + i] = 1.0;
      }
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n) * feature_dim, 0.0);
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i) * feature_dim + rng.uniform_int(feature_dim)] = 1.0;
  }
  gps::Graph g;
  g.n = n;
  g.adj = gps::Tensor::from_data(n, n, std::move(adj));
  g.x = gps::Tensor::from_data(n, feature_dim, std::move(x));
  g.label = label;
  return g;
}

// Per-node message passing oracle for one GIN layer: explicit neighbor sums
// followed by the two affine maps with relu between.
inline std::vector<double> gin_layer_oracle(const gps::Tensor& h, const gps::Tensor& adj,
                                            const gps::GinLayerParams& p) {
  const int n = h.rows(), din = h.cols(), dh = p.hidden_dim();
  std::vector<double> combined(static_cast<std::size_t>(n) * din, 0.0);
  const double eps = p.eps.item();
  for (int v = 0; v < n; ++v) {
    for (int j = 0; j < din; ++j) {
      double s = (1.0 + eps) * h.at(v, j);
      for (int u = 0; u < n; ++u) s += adj.at(v, u) * h.at(u, j);
      combined[static_cast<std::size_t>(v) * din + j] = s;
    }
  }
  std::vector<double> hidden(static_cast<std::size_t>(n) * dh, 0.0);
  for (int v = 0; v < n; ++v) {
    for (int k = 0; k < dh; ++k) {
      double s = p.b1.at(0, k);
      for (int j = 0; j < din; ++j) s += combined[static_cast<std::size_t>(v) * din + j] * p.w1.at(j, k);
      hidden[static_cast<std::size_t>(v) * dh + k] = s > 0.0 ? s : 0.0;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n) * dh, 0.0);
  for (int v = 0; v < n; ++v) {
    for (int k = 0; k < dh; ++k) {
      double s = p.b2.at(0, k);
      for (int j = 0; j < dh; ++j) s += hidden[static_cast<std::size_t>(v) * dh + j] * p.w2.at(j, k);
      out[static_cast<std::size_t>(v) * dh + k] = s;
    }
  }
  return out;
}

// Triple-loop oracle for cluster pooling given an assignment matrix.
struct ClusterPoolOracle {
  std::vector<double> x;    // m x d
  std::vector<double> adj;  // m x m
};

inline ClusterPoolOracle cluster_pool_oracle(const gps::Tensor& s, const gps::Tensor& x,
                                             const gps::Tensor& adj) {
  const int n = s.rows(), m = s.cols(), d = x.cols();
  ClusterPoolOracle out;
  out.x.assign(static_cast<std::size_t>(m) * d, 0.0);
  for (int c = 0; c < m; ++c) {
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int v = 0; v < n; ++v) acc += s.at(v, c) * x.at(v, j);
      out.x[static_cast<std::size_t>(c) * d + j] = acc;
    }
  }
  out.adj.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int c = 0; c < m; ++c) {
    for (int cp = 0; cp < m; ++cp) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) acc += s.at(i, c) * adj.at(i, j) * s.at(j, cp);
      }
      out.adj[static_cast<std::size_t>(c) * m + cp] = acc;
    }
  }
  return out;
}

// Direct-summation KL oracle over one pair of probability rows.
inline double symmetric_kl_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  double forward = 0.0, reverse = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    forward += p[i] * std::log(p[i] / q[i]);
    reverse += q[i] * std::log(q[i] / p[i]);
  }
  return 0.5 * (forward + reverse);
}

inline double cosine_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace testsupport
