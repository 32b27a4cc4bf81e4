#include "gps/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gps/error.hpp"
#include "gps/rng.hpp"

namespace gps {

namespace {

std::vector<int> remap_contiguous(const std::vector<int>& labels) {
  std::map<int, int> seen;
  for (int label : labels) seen.emplace(label, 0);
  int next = 0;
  for (auto& [label, id] : seen) id = next++;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = seen.at(labels[i]);
  return out;
}

// rows x cols contingency counts of two contiguous labelings.
std::vector<std::vector<long long>> contingency(const std::vector<int>& a, int ka,
                                                const std::vector<int>& b, int kb) {
  std::vector<std::vector<long long>> table(static_cast<std::size_t>(ka),
                                            std::vector<long long>(static_cast<std::size_t>(kb), 0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
  }
  return table;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int EmbeddingTable::num_classes() const {
  int k = 0;
  for (int label : labels) k = std::max(k, label + 1);
  return k;
}

EmbeddingTable embed_dataset(const GraphDataset& dataset, const EncoderParams& encoder) {
  if (dataset.size() == 0) throw ConfigError("embed_dataset: empty dataset");
  if (dataset.feature_dim != encoder.in_dim()) {
    throw ConfigError("embed_dataset: encoder expects feature dim " +
                      std::to_string(encoder.in_dim()) + " but dataset has " +
                      std::to_string(dataset.feature_dim));
  }
  EmbeddingTable table;
  std::vector<Tensor> rows;
  rows.reserve(dataset.graphs.size());
  for (const Graph& g : dataset.graphs) {
    if (!g.label.has_value()) throw ConfigError("embed_dataset: graph without label");
    rows.push_back(encode(g, encoder));
    table.labels.push_back(*g.label);
  }
  table.z = concat_rows(rows);
  return table;
}

void write_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write embeddings to " + path);
  const int m = table.count(), d = table.dim();
  out << m << "\t" << d << "\n";
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) {
      out << format_double(table.z.at(i, j)) << "\t";
    }
    out << table.labels[static_cast<std::size_t>(i)] << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

EmbeddingTable read_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": missing header");
  std::istringstream header(line);
  int m = 0, d = 0;
  if (!(header >> m >> d) || m < 1 || d < 1) {
    throw FormatError(path + ": malformed header '" + line + "'");
  }
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m) * d);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw FormatError(path + ": expected " + std::to_string(m) + " rows");
    std::istringstream row_in(line);
    for (int j = 0; j < d; ++j) {
      double v;
      if (!(row_in >> v)) throw FormatError(path + ": malformed row " + std::to_string(i + 2));
      data.push_back(v);
    }
    int label;
    if (!(row_in >> label)) throw FormatError(path + ": missing label in row " + std::to_string(i + 2));
    std::string rest;
    if (row_in >> rest) throw FormatError(path + ": trailing tokens in row " + std::to_string(i + 2));
    labels.push_back(label);
  }
  EmbeddingTable table;
  table.z = Tensor::from_data(m, d, std::move(data));
  table.labels = std::move(labels);
  return table;
}

namespace {

struct LogisticModel {
  std::vector<double> w;  // d x c
  std::vector<double> b;  // c
  int dim = 0;
  int classes = 0;
};

struct LogisticEval {
  double loss = 0.0;
  std::vector<double> dw;
  std::vector<double> db;
  double max_grad = 0.0;
};

constexpr double kL2Penalty = 1e-3;

LogisticEval evaluate_logistic(const LogisticModel& model, const std::vector<double>& x,
                               const std::vector<int>& y) {
  const int n = static_cast<int>(y.size());
  const int d = model.dim, c = model.classes;
  LogisticEval eval;
  eval.dw.assign(model.w.size(), 0.0);
  eval.db.assign(model.b.size(), 0.0);

  std::vector<double> probs(static_cast<std::size_t>(c));
  for (int i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < c; ++k) {
      double z = model.b[static_cast<std::size_t>(k)];
      for (int j = 0; j < d; ++j) {
        z += x[static_cast<std::size_t>(i) * d + j] * model.w[static_cast<std::size_t>(j) * c + k];
      }
      probs[static_cast<std::size_t>(k)] = z;
      mx = std::max(mx, z);
    }
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
      probs[static_cast<std::size_t>(k)] = std::exp(probs[static_cast<std::size_t>(k)] - mx);
      sum += probs[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < c; ++k) probs[static_cast<std::size_t>(k)] /= sum;
    eval.loss -= std::log(std::max(probs[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])],
                                   1e-300));
    for (int k = 0; k < c; ++k) {
      const double delta =
          (probs[static_cast<std::size_t>(k)] - (k == y[static_cast<std::size_t>(i)] ? 1.0 : 0.0)) /
          static_cast<double>(n);
      eval.db[static_cast<std::size_t>(k)] += delta;
      for (int j = 0; j < d; ++j) {
        eval.dw[static_cast<std::size_t>(j) * c + k] += delta * x[static_cast<std::size_t>(i) * d + j];
      }
    }
  }
  eval.loss /= static_cast<double>(n);
  for (std::size_t i = 0; i < model.w.size(); ++i) {
    eval.loss += kL2Penalty * model.w[i] * model.w[i];
    eval.dw[i] += 2.0 * kL2Penalty * model.w[i];
  }
  for (double g : eval.dw) eval.max_grad = std::max(eval.max_grad, std::fabs(g));
  for (double g : eval.db) eval.max_grad = std::max(eval.max_grad, std::fabs(g));
  return eval;
}

LogisticModel train_logistic(const std::vector<double>& x, const std::vector<int>& y, int d,
                             int c) {
  LogisticModel model;
  model.dim = d;
  model.classes = c;
  model.w.assign(static_cast<std::size_t>(d) * c, 0.0);
  model.b.assign(static_cast<std::size_t>(c), 0.0);

  // Full-batch gradient descent with a bold-driver step size: accepted steps
  // grow the rate slightly, rejected steps halve it. Convex objective, so
  // this converges deterministically.
  double lr = 1.0;
  LogisticEval eval = evaluate_logistic(model, x, y);
  for (int iter = 0; iter < 2000 && eval.max_grad >= 1e-6; ++iter) {
    LogisticModel trial = model;
    for (std::size_t i = 0; i < trial.w.size(); ++i) trial.w[i] -= lr * eval.dw[i];
    for (std::size_t i = 0; i < trial.b.size(); ++i) trial.b[i] -= lr * eval.db[i];
    LogisticEval trial_eval = evaluate_logistic(trial, x, y);
    if (trial_eval.loss <= eval.loss) {
      model = std::move(trial);
      eval = std::move(trial_eval);
      lr *= 1.05;
    } else {
      lr *= 0.5;
      if (lr < 1e-12) break;
    }
  }
  return model;
}

int predict_logistic(const LogisticModel& model, const double* features) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.classes; ++k) {
    double z = model.b[static_cast<std::size_t>(k)];
    for (int j = 0; j < model.dim; ++j) {
      z += features[j] * model.w[static_cast<std::size_t>(j) * model.classes + k];
    }
    if (z > best_score) {
      best_score = z;
      best = k;
    }
  }
  return best;
}

}  // namespace

ProbeReport linear_probe_with_folds(const EmbeddingTable& table,
                                    const std::vector<int>& fold_of) {
  const int m = table.count(), d = table.dim();
  if (static_cast<int>(fold_of.size()) != m) {
    throw ConfigError("linear_probe: fold assignment size mismatch");
  }
  const std::vector<int> y = remap_contiguous(table.labels);
  const int classes = *std::max_element(y.begin(), y.end()) + 1;
  if (classes < 2) throw ConfigError("linear_probe: need at least two classes");
  const int folds = *std::max_element(fold_of.begin(), fold_of.end()) + 1;
  if (folds < 2) throw ConfigError("linear_probe: need at least two folds");

  ProbeReport report;
  report.folds_used = folds;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<int> train_idx, test_idx;
    for (int i = 0; i < m; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == fold ? test_idx : train_idx).push_back(i);
    }
    if (train_idx.empty() || test_idx.empty()) {
      throw ConfigError("linear_probe: empty train or test fold");
    }

    // Standardize with train-fold statistics.
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0),
        scale(static_cast<std::size_t>(d), 0.0);
    for (int i : train_idx) {
      for (int j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += table.z.at(i, j);
    }
    for (double& v : mean) v /= static_cast<double>(train_idx.size());
    for (int i : train_idx) {
      for (int j = 0; j < d; ++j) {
        const double c = table.z.at(i, j) - mean[static_cast<std::size_t>(j)];
        scale[static_cast<std::size_t>(j)] += c * c;
      }
    }
    for (double& v : scale) {
      v = std::sqrt(v / static_cast<double>(train_idx.size()));
      if (v < 1e-12) v = 1.0;
    }
    auto standardized = [&](int i, std::vector<double>& out) {
      for (int j = 0; j < d; ++j) {
        out[static_cast<std::size_t>(j)] =
            (table.z.at(i, j) - mean[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];
      }
    };

    std::vector<double> train_x(train_idx.size() * static_cast<std::size_t>(d));
    std::vector<int> train_y(train_idx.size());
    std::vector<double> scratch(static_cast<std::size_t>(d));
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      standardized(train_idx[r], scratch);
      std::copy(scratch.begin(), scratch.end(), train_x.begin() + static_cast<std::ptrdiff_t>(r * static_cast<std::size_t>(d)));
      train_y[r] = y[static_cast<std::size_t>(train_idx[r])];
    }

    const LogisticModel model = train_logistic(train_x, train_y, d, classes);
    int correct = 0;
    for (int i : test_idx) {
      standardized(i, scratch);
      if (predict_logistic(model, scratch.data()) == y[static_cast<std::size_t>(i)]) ++correct;
    }
    report.fold_accuracy.push_back(static_cast<double>(correct) /
                                   static_cast<double>(test_idx.size()));
  }

  for (double acc : report.fold_accuracy) report.mean += acc;
  report.mean /= static_cast<double>(report.fold_accuracy.size());
  double var = 0.0;
  for (double acc : report.fold_accuracy) var += (acc - report.mean) * (acc - report.mean);
  report.stddev = std::sqrt(var / static_cast<double>(report.fold_accuracy.size()));
  return report;
}

ProbeReport linear_probe(const EmbeddingTable& table, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("linear_probe: need at least two folds");
  const int m = table.count();
  if (m < 4) throw ConfigError("linear_probe: too few rows");
  const std::vector<int> y = remap_contiguous(table.labels);
  const int classes = *std::max_element(y.begin(), y.end()) + 1;
  if (classes < 2) throw ConfigError("linear_probe: need at least two classes");

  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < m; ++i) by_class[y[static_cast<std::size_t>(i)]].push_back(i);
  int min_count = m;
  for (const auto& [cls, members] : by_class) min_count = std::min(min_count, static_cast<int>(members.size()));
  if (min_count < 2) throw ConfigError("linear_probe: smallest class has fewer than 2 members");
  const int folds_used = std::min(folds, min_count);

  // Stratified assignment: shuffle within each class, deal round-robin.
  Rng rng(seed);
  std::vector<int> fold_of(static_cast<std::size_t>(m), -1);
  for (auto& [cls, members] : by_class) {
    rng.shuffle(members);
    for (std::size_t r = 0; r < members.size(); ++r) {
      fold_of[static_cast<std::size_t>(members[r])] = static_cast<int>(r % static_cast<std::size_t>(folds_used));
    }
  }
  return linear_probe_with_folds(table, fold_of);
}

std::vector<int> kmeans(const Tensor& z, int k, std::uint64_t seed, int restarts) {
  const int m = z.rows(), d = z.cols();
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (k > m) throw ConfigError("kmeans: k exceeds number of points");
  if (restarts < 1) throw ConfigError("kmeans: restarts must be >= 1");

  auto dist2 = [&](int i, const std::vector<double>& center) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = z.at(i, j) - center[static_cast<std::size_t>(j)];
      s += diff * diff;
    }
    return s;
  };

  std::vector<int> best_labels;
  double best_inertia = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < restarts; ++restart) {
    Rng rng = Rng(seed).fork(static_cast<std::uint64_t>(restart));

    // k-means++ seeding
    std::vector<std::vector<double>> centers;
    centers.reserve(static_cast<std::size_t>(k));
    std::vector<double> first(static_cast<std::size_t>(d));
    const int c0 = rng.uniform_int(m);
    for (int j = 0; j < d; ++j) first[static_cast<std::size_t>(j)] = z.at(c0, j);
    centers.push_back(std::move(first));
    std::vector<double> nearest(static_cast<std::size_t>(m));
    while (static_cast<int>(centers.size()) < k) {
      double total = 0.0;
      for (int i = 0; i < m; ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) dmin = std::min(dmin, dist2(i, c));
        nearest[static_cast<std::size_t>(i)] = dmin;
        total += dmin;
      }
      int pick;
      if (total <= 0.0) {
        pick = rng.uniform_int(m);
      } else {
        const double target = rng.uniform() * total;
        double cum = 0.0;
        pick = m - 1;
        for (int i = 0; i < m; ++i) {
          cum += nearest[static_cast<std::size_t>(i)];
          if (cum > target) {
            pick = i;
            break;
          }
        }
      }
      std::vector<double> c(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j)] = z.at(pick, j);
      centers.push_back(std::move(c));
    }

    // Lloyd iterations
    std::vector<int> labels(static_cast<std::size_t>(m), -1);
    for (int iter = 0; iter < 300; ++iter) {
      bool changed = false;
      for (int i = 0; i < m; ++i) {
        int best = 0;
        double dmin = dist2(i, centers[0]);
        for (int c = 1; c < k; ++c) {
          const double dc = dist2(i, centers[static_cast<std::size_t>(c)]);
          if (dc < dmin) {
            dmin = dc;
            best = c;
          }
        }
        if (labels[static_cast<std::size_t>(i)] != best) {
          labels[static_cast<std::size_t>(i)] = best;
          changed = true;
        }
      }
      if (!changed && iter > 0) break;

      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
      for (int i = 0; i < m; ++i) {
        auto& c = centers[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
        for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j)] += z.at(i, j);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
          // deterministic refill: farthest point from its own centroid
          int far = 0;
          double dmax = -1.0;
          for (int i = 0; i < m; ++i) {
            const double di = dist2(i, centers[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]);
            if (di > dmax) {
              dmax = di;
              far = i;
            }
          }
          for (int j = 0; j < d; ++j) {
            centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = z.at(far, j);
          }
        } else {
          for (int j = 0; j < d; ++j) {
            centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] /=
                static_cast<double>(counts[static_cast<std::size_t>(c)]);
          }
        }
      }
    }

    double inertia = 0.0;
    for (int i = 0; i < m; ++i) {
      inertia += dist2(i, centers[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]);
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_labels = labels;
    }
  }
  return best_labels;
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("nmi: label vectors must match");
  const std::vector<int> ca = remap_contiguous(a), cb = remap_contiguous(b);
  const int ka = *std::max_element(ca.begin(), ca.end()) + 1;
  const int kb = *std::max_element(cb.begin(), cb.end()) + 1;
  const double n = static_cast<double>(a.size());

  const auto table = contingency(ca, ka, cb, kb);
  std::vector<double> pa(static_cast<std::size_t>(ka), 0.0), pb(static_cast<std::size_t>(kb), 0.0);
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      pa[static_cast<std::size_t>(i)] += static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      pb[static_cast<std::size_t>(j)] += static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
  double ha = 0.0, hb = 0.0;
  for (double c : pa) {
    if (c > 0) ha -= (c / n) * std::log(c / n);
  }
  for (double c : pb) {
    if (c > 0) hb -= (c / n) * std::log(c / n);
  }
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;

  double mi = 0.0;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double nij = static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      if (nij > 0) {
        mi += (nij / n) * std::log(n * nij / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
      }
    }
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw DimensionError("ari: need two equal-length labelings with >= 2 elements");
  }
  const std::vector<int> ca = remap_contiguous(a), cb = remap_contiguous(b);
  const int ka = *std::max_element(ca.begin(), ca.end()) + 1;
  const int kb = *std::max_element(cb.begin(), cb.end()) + 1;
  const auto table = contingency(ca, ka, cb, kb);

  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  std::vector<double> row(static_cast<std::size_t>(ka), 0.0), col(static_cast<std::size_t>(kb), 0.0);
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double nij = static_cast<double>(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      sum_ij += choose2(nij);
      row[static_cast<std::size_t>(i)] += nij;
      col[static_cast<std::size_t>(j)] += nij;
    }
  }
  for (double r : row) sum_a += choose2(r);
  for (double c : col) sum_b += choose2(c);
  const double pairs = choose2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / pairs;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum - expected == 0.0) return 1.0;
  return (sum_ij - expected) / (maximum - expected);
}

std::vector<int> hungarian_min_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  for (const auto& r : cost) {
    if (static_cast<int>(r.size()) != n) {
      throw DimensionError("hungarian: cost matrix must be square");
    }
  }
  // Jonker-Volgenant style shortest augmenting path, 1-indexed potentials.
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[static_cast<std::size_t>(j)] > 0) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  }
  return assignment;
}

double clustering_acc(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw DimensionError("clustering_acc: label vectors must match");
  }
  const std::vector<int> cp = remap_contiguous(predicted), ct = remap_contiguous(truth);
  const int kp = *std::max_element(cp.begin(), cp.end()) + 1;
  const int kt = *std::max_element(ct.begin(), ct.end()) + 1;
  if (kp > 64 || kt > 64) throw ConfigError("clustering_acc: too many clusters");
  const auto table = contingency(cp, kp, ct, kt);

  const int n = std::max(kp, kt);
  long long max_count = 0;
  for (const auto& r : table) {
    for (long long c : r) max_count = std::max(max_count, c);
  }
  // Pad to square and convert the maximization into a min-cost assignment.
  std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n),
                                                            static_cast<double>(max_count)));
  for (int i = 0; i < kp; ++i) {
    for (int j = 0; j < kt; ++j) {
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<double>(max_count - table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
  const std::vector<int> assignment = hungarian_min_assignment(cost);
  long long matched = 0;
  for (int i = 0; i < kp; ++i) {
    const int j = assignment[static_cast<std::size_t>(i)];
    if (j < kt) matched += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return static_cast<double>(matched) / static_cast<double>(predicted.size());
}

ClusterScores cluster_eval(const EmbeddingTable& table, int k, std::uint64_t seed,
                           int restarts) {
  if (table.labels.empty()) throw ConfigError("cluster_eval: labels required");
  const std::vector<int> predicted = kmeans(table.z, k, seed, restarts);
  ClusterScores scores;
  scores.nmi = nmi(predicted, table.labels);
  scores.acc = clustering_acc(predicted, table.labels);
  scores.ari = ari(predicted, table.labels);
  return scores;
}

}  // namespace gps
