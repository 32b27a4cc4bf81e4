#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gps/encoder.hpp"
#include "gps/graph.hpp"
#include "gps/tensor.hpp"

namespace gps {

// Frozen graph embeddings with ground-truth labels: one row per graph.
struct EmbeddingTable {
  Tensor z;  // M x d
  std::vector<int> labels;

  int count() const { return z.rows(); }
  int dim() const { return z.cols(); }
  int num_classes() const;
};

// Embeds every graph with the given (momentum) encoder. All graphs must
// carry labels.
EmbeddingTable embed_dataset(const GraphDataset& dataset, const EncoderParams& encoder);

// Tab-separated export: header "M\td", then M rows of d values plus the
// label column. Values are printed with full round-trip precision.
void write_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable read_embeddings(const std::string& path);

struct ProbeReport {
  std::vector<double> fold_accuracy;
  double mean = 0.0;
  double stddev = 0.0;  // population std over folds
  int folds_used = 0;
};

// Stratified k-fold linear probe: per fold, an L2-regularized multinomial
// logistic regression (lambda = 1e-3) trained by full-batch gradient
// descent to gradient tolerance 1e-6 or 2000 iterations, evaluated on the
// held-out fold. Folds shrink to the smallest class when necessary.
ProbeReport linear_probe(const EmbeddingTable& table, int folds, std::uint64_t seed);

// Same probe with a caller-fixed fold assignment (fold id per row).
ProbeReport linear_probe_with_folds(const EmbeddingTable& table,
                                    const std::vector<int>& fold_of);

// Best-inertia run of Lloyd's algorithm with k-means++ seeding.
// Deterministic under seed.
std::vector<int> kmeans(const Tensor& z, int k, std::uint64_t seed, int restarts = 10);

// Normalized mutual information with geometric-mean normalization and
// natural logs. Both-trivial partitions score 1; exactly one zero-entropy
// partition scores 0.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

// Adjusted Rand index via the pair-counting contingency formula; 1 when the
// correction denominator vanishes.
double ari(const std::vector<int>& a, const std::vector<int>& b);

// Clustering accuracy: best cluster-to-class matching (Hungarian) over the
// contingency matrix.
double clustering_acc(const std::vector<int>& predicted, const std::vector<int>& truth);

// Minimum-cost assignment on a square matrix; returns column per row.
std::vector<int> hungarian_min_assignment(const std::vector<std::vector<double>>& cost);

struct ClusterScores {
  double nmi = 0.0;
  double acc = 0.0;
  double ari = 0.0;
};

// kmeans on the embeddings followed by all three agreement metrics against
// the stored labels.
ClusterScores cluster_eval(const EmbeddingTable& table, int k, std::uint64_t seed,
                           int restarts = 10);

}  // namespace gps
