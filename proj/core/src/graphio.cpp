#include "gps/graphio.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gps/error.hpp"
#include "gps/rng.hpp"

namespace gps {

namespace {

namespace fs = std::filesystem;

// Strict integer parse; rejects anything but an optionally signed decimal.
long long parse_int(const std::string& token, const std::string& where) {
  std::string t = token;
  // trim surrounding whitespace
  auto notspace = [](unsigned char c) { return !std::isspace(c); };
  t.erase(t.begin(), std::find_if(t.begin(), t.end(), notspace));
  t.erase(std::find_if(t.rbegin(), t.rend(), notspace).base(), t.end());
  if (t.empty()) throw FormatError(where + ": empty token");
  std::size_t pos = 0;
  long long value = 0;
  try {
    value = std::stoll(t, &pos);
  } catch (const std::exception&) {
    throw FormatError(where + ": non-integer token '" + token + "'");
  }
  if (pos != t.size()) throw FormatError(where + ": non-integer token '" + token + "'");
  return value;
}

std::vector<std::string> read_lines(const fs::path& path, bool required) {
  std::ifstream in(path);
  if (!in) {
    if (required) throw IoError("missing file: " + path.string());
    return {};
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // trailing blank lines are tolerated
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<long long> read_int_lines(const fs::path& path, bool required) {
  std::vector<long long> values;
  for (const std::string& line : read_lines(path, required)) {
    if (line.empty()) throw FormatError(path.string() + ": blank line inside file");
    values.push_back(parse_int(line, path.string()));
  }
  return values;
}

// Remaps arbitrary integer values to [0, k) by sorted order of occurrence.
std::map<long long, int> contiguous_remap(const std::vector<long long>& values) {
  std::vector<long long> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<long long, int> remap;
  for (std::size_t i = 0; i < sorted.size(); ++i) remap[sorted[i]] = static_cast<int>(i);
  return remap;
}

Tensor onehot_rows(const std::vector<int>& ids, int dim) {
  const int n = static_cast<int>(ids.size());
  std::vector<double> data(static_cast<std::size_t>(n) * dim, 0.0);
  for (int i = 0; i < n; ++i) data[static_cast<std::size_t>(i) * dim + ids[i]] = 1.0;
  return Tensor::from_data(n, dim, std::move(data));
}

Tensor degree_onehot(const std::vector<std::vector<int>>& adjacency, int cap) {
  std::vector<int> buckets(adjacency.size());
  for (std::size_t v = 0; v < adjacency.size(); ++v) {
    buckets[v] = std::min(static_cast<int>(adjacency[v].size()), cap);
  }
  return onehot_rows(buckets, cap + 1);
}

Tensor adjacency_tensor(const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<double> data(static_cast<std::size_t>(n) * n, 0.0);
  for (int v = 0; v < n; ++v) {
    for (int u : adjacency[static_cast<std::size_t>(v)]) {
      data[static_cast<std::size_t>(v) * n + u] = 1.0;
    }
  }
  return Tensor::from_data(n, n, std::move(data));
}

Graph build_graph(const std::vector<std::vector<int>>& adjacency, int label,
                  const Tensor& features) {
  Graph g;
  g.n = static_cast<int>(adjacency.size());
  g.adj = adjacency_tensor(adjacency);
  g.x = features;
  g.label = label;
  return g;
}

// Adjacency lists from an undirected edge set; deduplicates and drops
// self-loops so the dense matrix keeps a zero diagonal.
std::vector<std::vector<int>> to_sorted_lists(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    if (u == v) continue;
    adjacency[static_cast<std::size_t>(u)].push_back(v);
    adjacency[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& nb : adjacency) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return adjacency;
}

}  // namespace

int GraphDataset::max_nodes() const {
  int n = 0;
  for (const Graph& g : graphs) n = std::max(n, g.n);
  return n;
}

GraphDataset parse_tudataset(const std::string& dir, const std::string& name,
                             const ParseOptions& options) {
  const fs::path base = fs::path(dir);
  const fs::path a_path = base / (name + "_A.txt");
  const fs::path indicator_path = base / (name + "_graph_indicator.txt");
  const fs::path graph_labels_path = base / (name + "_graph_labels.txt");
  const fs::path node_labels_path = base / (name + "_node_labels.txt");

  const std::vector<long long> indicator = read_int_lines(indicator_path, /*required=*/true);
  const std::vector<long long> graph_labels = read_int_lines(graph_labels_path, /*required=*/true);
  const std::vector<long long> node_labels = read_int_lines(node_labels_path, /*required=*/false);

  const int total_nodes = static_cast<int>(indicator.size());
  const int num_graphs = static_cast<int>(graph_labels.size());
  if (total_nodes == 0) throw FormatError(indicator_path.string() + ": no nodes");
  if (num_graphs == 0) throw FormatError(graph_labels_path.string() + ": no graphs");
  if (!node_labels.empty() && static_cast<int>(node_labels.size()) != total_nodes) {
    throw FormatError(node_labels_path.string() + ": expected one label per node");
  }

  // node -> graph, and per-graph local numbering in node order
  std::vector<int> graph_of(static_cast<std::size_t>(total_nodes));
  std::vector<int> local_id(static_cast<std::size_t>(total_nodes));
  std::vector<int> node_count(static_cast<std::size_t>(num_graphs), 0);
  for (int v = 0; v < total_nodes; ++v) {
    const long long gid = indicator[static_cast<std::size_t>(v)];
    if (gid < 1 || gid > num_graphs) {
      throw FormatError(indicator_path.string() + ": indicator references graph id " +
                        std::to_string(gid) + " but labels file has " +
                        std::to_string(num_graphs) + " lines");
    }
    graph_of[static_cast<std::size_t>(v)] = static_cast<int>(gid) - 1;
    local_id[static_cast<std::size_t>(v)] = node_count[static_cast<std::size_t>(gid) - 1]++;
  }
  for (int g = 0; g < num_graphs; ++g) {
    if (node_count[static_cast<std::size_t>(g)] == 0) {
      throw FormatError(indicator_path.string() + ": graph " + std::to_string(g + 1) +
                        " has no nodes");
    }
  }

  // edges, validated to stay within one graph
  std::vector<std::vector<std::pair<int, int>>> edges(static_cast<std::size_t>(num_graphs));
  for (const std::string& line : read_lines(a_path, /*required=*/true)) {
    if (line.empty()) throw FormatError(a_path.string() + ": blank line inside file");
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError(a_path.string() + ": expected 'u, v' pair, got '" + line + "'");
    }
    const long long u = parse_int(line.substr(0, comma), a_path.string());
    const long long v = parse_int(line.substr(comma + 1), a_path.string());
    if (u < 1 || u > total_nodes || v < 1 || v > total_nodes) {
      throw FormatError(a_path.string() + ": node id out of range in '" + line + "'");
    }
    const int ui = static_cast<int>(u) - 1, vi = static_cast<int>(v) - 1;
    if (graph_of[static_cast<std::size_t>(ui)] != graph_of[static_cast<std::size_t>(vi)]) {
      throw FormatError(a_path.string() + ": edge '" + line + "' crosses graph boundaries");
    }
    edges[static_cast<std::size_t>(graph_of[static_cast<std::size_t>(ui)])].emplace_back(
        local_id[static_cast<std::size_t>(ui)], local_id[static_cast<std::size_t>(vi)]);
  }

  const std::map<long long, int> label_map = contiguous_remap(graph_labels);
  std::map<long long, int> node_label_map;
  if (!node_labels.empty()) node_label_map = contiguous_remap(node_labels);

  GraphDataset dataset;
  dataset.num_classes = static_cast<int>(label_map.size());
  dataset.feature_kind =
      node_labels.empty() ? FeatureKind::degree_onehot : FeatureKind::node_label_onehot;
  dataset.feature_dim = node_labels.empty() ? options.degree_cap + 1
                                            : static_cast<int>(node_label_map.size());

  // per-graph node label lists in local order
  std::vector<std::vector<int>> graph_node_labels(static_cast<std::size_t>(num_graphs));
  if (!node_labels.empty()) {
    for (int g = 0; g < num_graphs; ++g) {
      graph_node_labels[static_cast<std::size_t>(g)].resize(
          static_cast<std::size_t>(node_count[static_cast<std::size_t>(g)]));
    }
    for (int v = 0; v < total_nodes; ++v) {
      graph_node_labels[static_cast<std::size_t>(graph_of[static_cast<std::size_t>(v)])]
                       [static_cast<std::size_t>(local_id[static_cast<std::size_t>(v)])] =
                           node_label_map.at(node_labels[static_cast<std::size_t>(v)]);
    }
  }

  dataset.graphs.reserve(static_cast<std::size_t>(num_graphs));
  for (int g = 0; g < num_graphs; ++g) {
    const auto adjacency = to_sorted_lists(node_count[static_cast<std::size_t>(g)],
                                           edges[static_cast<std::size_t>(g)]);
    Tensor features = node_labels.empty()
                          ? degree_onehot(adjacency, options.degree_cap)
                          : onehot_rows(graph_node_labels[static_cast<std::size_t>(g)],
                                        dataset.feature_dim);
    dataset.graphs.push_back(build_graph(
        adjacency, label_map.at(graph_labels[static_cast<std::size_t>(g)]), features));
  }
  return dataset;
}

void write_tudataset(const GraphDataset& dataset, const std::string& dir,
                     const std::string& name) {
  const fs::path base = fs::path(dir);
  fs::create_directories(base);
  std::ofstream a_out(base / (name + "_A.txt"));
  std::ofstream ind_out(base / (name + "_graph_indicator.txt"));
  std::ofstream lab_out(base / (name + "_graph_labels.txt"));
  if (!a_out || !ind_out || !lab_out) throw IoError("cannot write dataset under " + dir);

  const bool write_node_labels = dataset.feature_kind == FeatureKind::node_label_onehot;
  std::ofstream node_out;
  if (write_node_labels) {
    node_out.open(base / (name + "_node_labels.txt"));
    if (!node_out) throw IoError("cannot write dataset under " + dir);
  }

  int offset = 0;
  for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
    const Graph& graph = dataset.graphs[g];
    for (int u = 0; u < graph.n; ++u) {
      ind_out << (g + 1) << "\n";
      if (write_node_labels) {
        int label = 0;
        for (int j = 1; j < graph.x.cols(); ++j) {
          if (graph.x.at(u, j) > graph.x.at(u, label)) label = j;
        }
        node_out << label << "\n";
      }
      for (int v = 0; v < graph.n; ++v) {
        if (graph.adj.at(u, v) != 0.0) {
          a_out << (offset + u + 1) << ", " << (offset + v + 1) << "\n";
        }
      }
    }
    lab_out << graph.label.value_or(0) << "\n";
    offset += graph.n;
  }
}

namespace {

std::vector<std::vector<int>> cycle_edges(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return to_sorted_lists(n, edges);
}

std::vector<std::vector<int>> clique_edges(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  return to_sorted_lists(n, edges);
}

std::vector<std::vector<int>> er_block_edges(int n, int lo, int hi, double p, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int i = lo; i < hi; ++i) {
    for (int j = i + 1; j < hi; ++j) {
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return to_sorted_lists(n, edges);
}

}  // namespace

GraphDataset synth_dataset(SynthKind kind, int per_class, int min_nodes, int max_nodes,
                           std::uint64_t seed) {
  if (per_class < 1) throw ConfigError("synth_dataset: per_class must be >= 1");
  if (min_nodes < 3 || max_nodes < min_nodes) {
    throw ConfigError("synth_dataset: need 3 <= min_nodes <= max_nodes");
  }
  const int cap = 10;
  Rng rng(seed);

  GraphDataset dataset;
  dataset.num_classes = 2;
  dataset.feature_dim = cap + 1;
  dataset.feature_kind = FeatureKind::degree_onehot;

  for (int cls = 0; cls < 2; ++cls) {
    for (int i = 0; i < per_class; ++i) {
      const int n = min_nodes + rng.uniform_int(max_nodes - min_nodes + 1);
      std::vector<std::vector<int>> adjacency;
      if (kind == SynthKind::cycles_vs_cliques) {
        adjacency = (cls == 0) ? cycle_edges(n) : clique_edges(n);
      } else {
        if (cls == 0) {
          adjacency = er_block_edges(n, 0, n, 0.8, rng);
        } else {
          const int half = n / 2;
          std::vector<std::pair<int, int>> edges;
          for (int a = 0; a < half; ++a) {
            for (int b = a + 1; b < half; ++b) {
              if (rng.uniform() < 0.8) edges.emplace_back(a, b);
            }
          }
          for (int a = half; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
              if (rng.uniform() < 0.8) edges.emplace_back(a, b);
            }
          }
          edges.emplace_back(0, half);  // single bridge between the blocks
          adjacency = to_sorted_lists(n, edges);
        }
      }
      dataset.graphs.push_back(build_graph(adjacency, cls, degree_onehot(adjacency, cap)));
    }
  }
  return dataset;
}

std::vector<Batch> make_batches(const GraphDataset& dataset, int batch_size,
                                std::uint64_t seed, bool shuffle) {
  if (dataset.size() < 2) throw ConfigError("make_batches: dataset needs at least 2 graphs");
  if (batch_size < 2) throw ConfigError("make_batches: batch size must be >= 2");

  std::vector<int> order(static_cast<std::size_t>(dataset.size()));
  for (int i = 0; i < dataset.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order);
  }

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    Batch b;
    b.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(std::move(b));
  }
  if (batches.size() > 1 && batches.back().size() < 2) {
    Batch tail = std::move(batches.back());
    batches.pop_back();
    batches.back().indices.insert(batches.back().indices.end(), tail.indices.begin(),
                                  tail.indices.end());
  }
  return batches;
}

}  // namespace gps
