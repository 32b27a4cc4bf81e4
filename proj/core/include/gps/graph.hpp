#pragma once

#include <optional>
#include <vector>

#include "gps/tensor.hpp"

namespace gps {

// One graph: node features X (|V| x d0), dense symmetric 0/1 adjacency with
// zero diagonal, and an optional class label.
struct Graph {
  int n = 0;
  Tensor x;
  Tensor adj;
  std::optional<int> label;
};

enum class FeatureKind {
  node_label_onehot,  // X rows one-hot over remapped node labels
  degree_onehot,      // X rows one-hot over capped node degree
};

struct GraphDataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  int feature_dim = 0;
  FeatureKind feature_kind = FeatureKind::degree_onehot;

  int size() const { return static_cast<int>(graphs.size()); }
  int max_nodes() const;
};

// Mini-batch as indices into a dataset. Consistency learning compares
// against other members, so a batch always has at least two.
struct Batch {
  std::vector<int> indices;
  int size() const { return static_cast<int>(indices.size()); }
};

}  // namespace gps
