#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gps/graph.hpp"

namespace gps {

struct ParseOptions {
  // Degree one-hot cap used when no node labels are present: degrees >= cap
  // share the overflow bucket, so feature_dim = cap + 1.
  int degree_cap = 10;
};

// Reads a TUDataset-format corpus from `{dir}/{name}_A.txt`,
// `{name}_graph_indicator.txt`, `{name}_graph_labels.txt` and the optional
// `{name}_node_labels.txt`. All indices are 1-based; edges are symmetrized;
// graph labels are remapped to a contiguous [0, num_classes).
GraphDataset parse_tudataset(const std::string& dir, const std::string& name,
                             const ParseOptions& options = {});

// Writes the dataset back out in the same text format (used for round-trip
// checks and fixture generation).
void write_tudataset(const GraphDataset& dataset, const std::string& dir,
                     const std::string& name);

enum class SynthKind {
  cycles_vs_cliques,  // n-cycles (class 0) vs n-cliques (class 1)
  two_community,      // one dense block (class 0) vs two bridged blocks (class 1)
};

// Deterministic synthetic corpus with degree one-hot features. Node counts
// are drawn uniformly from [min_nodes, max_nodes].
GraphDataset synth_dataset(SynthKind kind, int per_class, int min_nodes, int max_nodes,
                           std::uint64_t seed);

// Partitions dataset indices into batches of `batch_size`. A trailing batch
// smaller than two is merged into its predecessor. Deterministic under seed.
std::vector<Batch> make_batches(const GraphDataset& dataset, int batch_size,
                                std::uint64_t seed, bool shuffle);

}  // namespace gps
