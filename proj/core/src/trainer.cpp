#include "gps/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gps/checkpoint.hpp"
#include "gps/error.hpp"

namespace gps {

namespace fs = std::filesystem;

const char* to_string(PoolerFamily family) {
  return family == PoolerFamily::topk ? "topk" : "cluster";
}

const char* to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::none: return "none";
    case Ablation::no_weak: return "no_weak";
    case Ablation::no_strong: return "no_strong";
    case Ablation::no_sl: return "no_sl";
    case Ablation::no_adv: return "no_adv";
  }
  return "none";
}

PoolerFamily pooler_family_from_string(const std::string& s) {
  if (s == "topk") return PoolerFamily::topk;
  if (s == "cluster") return PoolerFamily::cluster;
  throw ConfigError("unknown pooler family '" + s + "' (expected topk or cluster)");
}

Ablation ablation_from_string(const std::string& s) {
  if (s == "none") return Ablation::none;
  if (s == "no_weak") return Ablation::no_weak;
  if (s == "no_strong") return Ablation::no_strong;
  if (s == "no_sl") return Ablation::no_sl;
  if (s == "no_adv") return Ablation::no_adv;
  throw ConfigError("unknown ablation '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 2) throw ConfigError("batch size must be >= 2");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (lr_pooler < 0.0) throw ConfigError("pooler learning rate must be >= 0");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
  if (tau <= 0.0) throw ConfigError("tau must be positive");
  if (rho_weak <= 0.0 || rho_weak > 1.0) throw ConfigError("rho_weak must lie in (0, 1]");
  if (rho_strong <= 0.0 || rho_strong > 1.0) throw ConfigError("rho_strong must lie in (0, 1]");
  const bool single_view = ablation == Ablation::no_weak || ablation == Ablation::no_strong;
  if (!single_view && rho_weak <= rho_strong) {
    throw ConfigError("rho_weak must exceed rho_strong");
  }
  if (hidden_dim < 1) throw ConfigError("hidden dim must be >= 1");
  if (num_layers < 1) throw ConfigError("need at least one encoder layer");
  if (checkpoint_interval < 0) throw ConfigError("checkpoint interval must be >= 0");
}

std::string serialize_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "epochs=" << c.epochs << "\n";
  out << "batch=" << c.batch_size << "\n";
  out.precision(17);
  out << "lr=" << c.lr << "\n";
  out << "lr-pooler=" << c.lr_pooler << "\n";
  out << "gamma=" << c.gamma << "\n";
  out << "tau=" << c.tau << "\n";
  out << "rho-weak=" << c.rho_weak << "\n";
  out << "rho-strong=" << c.rho_strong << "\n";
  out << "pooler-weak=" << to_string(c.pooler_weak) << "\n";
  out << "pooler-strong=" << to_string(c.pooler_strong) << "\n";
  out << "ablation=" << to_string(c.ablation) << "\n";
  out << "seed=" << c.seed << "\n";
  out << "hidden=" << c.hidden_dim << "\n";
  out << "layers=" << c.num_layers << "\n";
  out << "checkpoint-interval=" << c.checkpoint_interval << "\n";
  out << "timing=" << (c.record_timing ? 1 : 0) << "\n";
  out << "feature-dim=" << c.feature_dim << "\n";
  out << "kmax-weak=" << c.kmax_weak << "\n";
  out << "kmax-strong=" << c.kmax_strong << "\n";
  return out.str();
}

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config: expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "epochs") c.epochs = std::stoi(value);
      else if (key == "batch") c.batch_size = std::stoi(value);
      else if (key == "lr") c.lr = std::stod(value);
      else if (key == "lr-pooler") c.lr_pooler = std::stod(value);
      else if (key == "gamma") c.gamma = std::stod(value);
      else if (key == "tau") c.tau = std::stod(value);
      else if (key == "rho-weak") c.rho_weak = std::stod(value);
      else if (key == "rho-strong") c.rho_strong = std::stod(value);
      else if (key == "pooler-weak") c.pooler_weak = pooler_family_from_string(value);
      else if (key == "pooler-strong") c.pooler_strong = pooler_family_from_string(value);
      else if (key == "ablation") c.ablation = ablation_from_string(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "hidden") c.hidden_dim = std::stoi(value);
      else if (key == "layers") c.num_layers = std::stoi(value);
      else if (key == "checkpoint-interval") c.checkpoint_interval = std::stoi(value);
      else if (key == "timing") c.record_timing = std::stoi(value) != 0;
      else if (key == "feature-dim") c.feature_dim = std::stoi(value);
      else if (key == "kmax-weak") c.kmax_weak = std::stoi(value);
      else if (key == "kmax-strong") c.kmax_strong = std::stoi(value);
      else throw FormatError("config: unknown key '" + key + "'");
    } catch (const FormatError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw FormatError("config: bad value for key '" + key + "'");
    }
  }
  return c;
}

NamedTensors TrainState::named_tensors() const {
  NamedTensors out;
  collect(theta_encoder, "theta.encoder", out);
  collect(theta_predictor, "theta.predictor", out);
  collect(phi, "phi", out);
  if (omega_weak) collect(*omega_weak, "omega_weak", out);
  if (omega_strong) collect(*omega_strong, "omega_strong", out);
  return out;
}

namespace {

std::vector<Tensor> tensors_of(const NamedTensors& named) {
  std::vector<Tensor> out;
  out.reserve(named.size());
  for (const auto& [name, tensor] : named) out.push_back(tensor);
  return out;
}

}  // namespace

std::vector<Tensor> TrainState::theta_tensors() const {
  NamedTensors named;
  collect(theta_encoder, "enc", named);
  collect(theta_predictor, "pred", named);
  return tensors_of(named);
}

std::vector<Tensor> TrainState::omega_weak_tensors() const {
  NamedTensors named;
  if (omega_weak) collect(*omega_weak, "w", named);
  return tensors_of(named);
}

std::vector<Tensor> TrainState::omega_strong_tensors() const {
  NamedTensors named;
  if (omega_strong) collect(*omega_strong, "s", named);
  return tensors_of(named);
}

void TrainState::zero_grads() const {
  for (Tensor t : theta_tensors()) t.zero_grad();
  for (Tensor t : omega_weak_tensors()) t.zero_grad();
  for (Tensor t : omega_strong_tensors()) t.zero_grad();
}

TrainState init_state(const TrainConfig& config, const GraphDataset& dataset) {
  config.validate();
  if (dataset.size() < 2) throw ConfigError("init_state: dataset needs at least 2 graphs");

  TrainState state;
  state.config = config;
  state.config.feature_dim = dataset.feature_dim;
  state.config.kmax_weak = keep_count(dataset.max_nodes(), config.rho_weak);
  state.config.kmax_strong = keep_count(dataset.max_nodes(), config.rho_strong);

  Rng root(config.seed);
  Rng enc_rng = root.fork(1);
  Rng pred_rng = root.fork(2);
  Rng weak_rng = root.fork(3);
  Rng strong_rng = root.fork(4);

  state.theta_encoder =
      make_encoder(dataset.feature_dim, config.hidden_dim, config.num_layers, enc_rng);
  state.theta_predictor = make_predictor(config.hidden_dim, pred_rng);
  state.phi = clone_encoder(state.theta_encoder, /*requires_grad=*/false);
  if (state.config.weak_view_active()) {
    state.omega_weak = make_pooler(config.pooler_weak, config.rho_weak, dataset.feature_dim,
                                   config.hidden_dim, state.config.kmax_weak, weak_rng);
  }
  if (state.config.strong_view_active()) {
    state.omega_strong = make_pooler(config.pooler_strong, config.rho_strong,
                                     dataset.feature_dim, config.hidden_dim,
                                     state.config.kmax_strong, strong_rng);
  }
  state.rng = root.fork(5);
  return state;
}

BatchLosses compute_batch_losses(const TrainState& state, const GraphDataset& dataset,
                                 const Batch& batch) {
  if (batch.size() < 2) throw ConfigError("compute_batch_losses: batch must have >= 2 graphs");
  const TrainConfig& config = state.config;

  // Target rows carry no gradients: phi has none, so nothing records.
  std::vector<Tensor> target_rows;
  target_rows.reserve(static_cast<std::size_t>(batch.size()));
  for (int index : batch.indices) {
    target_rows.push_back(encode(dataset.graphs[static_cast<std::size_t>(index)], state.phi));
  }
  Tensor target = concat_rows(target_rows);

  auto embed_views = [&](const PoolerParams& pooler) {
    std::vector<Tensor> rows;
    rows.reserve(static_cast<std::size_t>(batch.size()));
    for (int index : batch.indices) {
      PooledGraph view = pool(dataset.graphs[static_cast<std::size_t>(index)], pooler);
      rows.push_back(predict(encode(view.x, view.adj, state.theta_encoder),
                             state.theta_predictor));
    }
    return concat_rows(rows);
  };

  BatchViews views;
  views.target = target;
  views.tau = config.tau;
  if (state.omega_weak) views.weak = embed_views(*state.omega_weak);
  if (state.omega_strong) views.strong = embed_views(*state.omega_strong);

  BatchLosses losses;
  switch (config.ablation) {
    case Ablation::none:
    case Ablation::no_adv: {
      ObjectiveTerms terms = batch_objective(views, /*use_sl=*/true, /*use_cl=*/true);
      losses.l_sl = terms.l_sl;
      losses.l_cl = terms.l_cl;
      break;
    }
    case Ablation::no_sl: {
      ObjectiveTerms terms = batch_objective(views, /*use_sl=*/false, /*use_cl=*/true);
      losses.l_cl = terms.l_cl;
      break;
    }
    case Ablation::no_weak:
      // The strong view is the only positive; similarity learning uses it.
      losses.l_sl = similarity_loss(views.target, views.strong);
      break;
    case Ablation::no_strong:
      losses.l_sl = similarity_loss(views.target, views.weak);
      break;
  }
  return losses;
}

namespace {

std::vector<std::vector<double>> snapshot_grads(const std::vector<Tensor>& tensors) {
  std::vector<std::vector<double>> out;
  out.reserve(tensors.size());
  for (const Tensor& t : tensors) out.push_back(t.grad());
  return out;
}

void check_grads_finite(const std::vector<std::vector<double>>& grads, const char* who) {
  for (const auto& g : grads) {
    for (double v : g) {
      if (!std::isfinite(v)) {
        throw NumericError(std::string(who) + ": non-finite gradient");
      }
    }
  }
}

void apply_step(std::vector<Tensor>& tensors, const std::vector<std::vector<double>>& grads,
                double step) {
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    std::vector<double>& data = tensors[t].values();
    const std::vector<double>& g = grads[t];
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += step * g[i];
  }
}

void add_into(std::vector<std::vector<double>>& acc,
              const std::vector<std::vector<double>>& more) {
  for (std::size_t t = 0; t < acc.size(); ++t) {
    for (std::size_t i = 0; i < acc[t].size(); ++i) acc[t][i] += more[t][i];
  }
}

}  // namespace

StepLosses train_step(TrainState& state, const GraphDataset& dataset, const Batch& batch) {
  const TrainConfig& config = state.config;

  Tape tape;
  BatchLosses losses;
  {
    TapeScope scope(tape);
    losses = compute_batch_losses(state, dataset, batch);
  }

  StepLosses values;
  if (losses.l_sl.defined()) values.l_sl = losses.l_sl.item();
  if (losses.l_cl.defined()) values.l_cl = losses.l_cl.item();

  std::vector<Tensor> theta = state.theta_tensors();
  std::vector<Tensor> omega_w = state.omega_weak_tensors();
  std::vector<Tensor> omega_s = state.omega_strong_tensors();

  // Per-loss gradients. Each pooler follows its own objective only, so the
  // two backward passes stay separate; theta sums both.
  std::vector<std::vector<double>> theta_step(theta.size());
  for (std::size_t t = 0; t < theta.size(); ++t) {
    theta_step[t].assign(theta[t].size(), 0.0);
  }
  std::vector<std::vector<double>> omega_w_grad, omega_s_grad;

  if (losses.l_sl.defined()) {
    state.zero_grads();
    tape.backward(losses.l_sl);
    add_into(theta_step, snapshot_grads(theta));
    // A pooler ascends the similarity loss when it is the view behind it:
    // the weak pooler normally, the strong pooler under no_weak.
    if (config.ablation == Ablation::no_weak) {
      omega_s_grad = snapshot_grads(omega_s);
    } else if (!omega_w.empty()) {
      omega_w_grad = snapshot_grads(omega_w);
    }
    tape.rewind();
  }
  if (losses.l_cl.defined()) {
    state.zero_grads();
    tape.backward(losses.l_cl);
    add_into(theta_step, snapshot_grads(theta));
    if (!omega_s.empty() && omega_s_grad.empty()) omega_s_grad = snapshot_grads(omega_s);
    // Without similarity learning the weak pooler plays against the only
    // remaining loss.
    if (config.ablation == Ablation::no_sl && !omega_w.empty()) {
      omega_w_grad = snapshot_grads(omega_w);
    }
    tape.rewind();
  }

  check_grads_finite(theta_step, "train_step(theta)");
  check_grads_finite(omega_w_grad, "train_step(omega_w)");
  check_grads_finite(omega_s_grad, "train_step(omega_s)");

  // All validation is done; mutate.
  const double pooler_step =
      config.ablation == Ablation::no_adv ? -config.pooler_lr() : config.pooler_lr();
  if (!omega_w_grad.empty()) apply_step(omega_w, omega_w_grad, pooler_step);
  if (!omega_s_grad.empty()) apply_step(omega_s, omega_s_grad, pooler_step);
  apply_step(theta, theta_step, -config.lr);
  momentum_update(state.phi, state.theta_encoder, config.gamma);
  state.zero_grads();
  return values;
}

void momentum_update(EncoderParams& phi, const EncoderParams& theta, double gamma) {
  if (phi.layers.size() != theta.layers.size()) {
    throw DimensionError("momentum_update: layer counts differ");
  }
  NamedTensors phi_named, theta_named;
  collect(phi, "phi", phi_named);
  collect(theta, "theta", theta_named);
  for (std::size_t i = 0; i < phi_named.size(); ++i) {
    Tensor& p = phi_named[i].second;
    const Tensor& t = theta_named[i].second;
    if (p.rows() != t.rows() || p.cols() != t.cols()) {
      throw DimensionError("momentum_update: tensor shapes differ");
    }
    std::vector<double>& pv = p.values();
    const std::vector<double>& tv = t.values();
    for (std::size_t k = 0; k < pv.size(); ++k) {
      pv[k] = gamma * pv[k] + (1.0 - gamma) * tv[k];
    }
  }
}

PretrainResult pretrain(const TrainConfig& config, const GraphDataset& dataset,
                        const std::string& out_dir) {
  fs::create_directories(out_dir);
  TrainState state = init_state(config, dataset);

  const fs::path metrics_path = fs::path(out_dir) / "metrics.jsonl";
  const fs::path checkpoint_path = fs::path(out_dir) / "checkpoint.bin";
  std::ofstream metrics(metrics_path, std::ios::trunc);
  if (!metrics) throw IoError("cannot write metrics to " + metrics_path.string());

  for (int epoch = 1; epoch <= state.config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng batch_rng = state.rng.fork(static_cast<std::uint64_t>(epoch));
    const std::vector<Batch> batches =
        make_batches(dataset, state.config.batch_size, batch_rng.next_u64(), /*shuffle=*/true);

    double sum_sl = 0.0, sum_cl = 0.0;
    for (const Batch& batch : batches) {
      const StepLosses losses = train_step(state, dataset, batch);
      sum_sl += losses.l_sl;
      sum_cl += losses.l_cl;
    }
    state.epoch = epoch;

    long long wall_ms = 0;
    if (state.config.record_timing) {
      wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count();
    }
    nlohmann::ordered_json record{{"epoch", epoch},
                                  {"L_sl", sum_sl / static_cast<double>(batches.size())},
                                  {"L_cl", sum_cl / static_cast<double>(batches.size())},
                                  {"wall_ms", wall_ms}};
    metrics << record.dump() << "\n";

    if (state.config.checkpoint_interval > 0 &&
        epoch % state.config.checkpoint_interval == 0 && epoch != state.config.epochs) {
      save_checkpoint(state,
                      (fs::path(out_dir) / ("checkpoint_epoch" + std::to_string(epoch) + ".bin"))
                          .string());
    }
  }
  metrics.close();
  save_checkpoint(state, checkpoint_path.string());
  return PretrainResult{checkpoint_path.string(), metrics_path.string()};
}

}  // namespace gps
