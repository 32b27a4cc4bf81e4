#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gps/graphio.hpp"
#include "gps/objective.hpp"
#include "gps/pooling.hpp"

namespace gps {

enum class Ablation { none, no_weak, no_strong, no_sl, no_adv };

const char* to_string(PoolerFamily family);
const char* to_string(Ablation ablation);
PoolerFamily pooler_family_from_string(const std::string& s);
Ablation ablation_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 128;
  double lr = 0.01;
  double lr_pooler = 0.0;  // 0 means: use lr
  double gamma = 0.99;
  double tau = 0.5;
  double rho_weak = 0.9;
  double rho_strong = 0.4;
  PoolerFamily pooler_weak = PoolerFamily::topk;
  PoolerFamily pooler_strong = PoolerFamily::topk;
  Ablation ablation = Ablation::none;
  std::uint64_t seed = 1;
  int hidden_dim = 512;
  int num_layers = 2;
  int checkpoint_interval = 0;  // epochs between intermediate checkpoints; 0 = final only
  bool record_timing = false;   // wall_ms stays 0 unless enabled, keeping runs byte-reproducible

  // Derived from the dataset at init time and echoed through checkpoints.
  int feature_dim = 0;
  int kmax_weak = 0;
  int kmax_strong = 0;

  double pooler_lr() const { return lr_pooler > 0.0 ? lr_pooler : lr; }
  bool weak_view_active() const { return ablation != Ablation::no_weak; }
  bool strong_view_active() const { return ablation != Ablation::no_strong; }
  bool similarity_active() const { return ablation != Ablation::no_sl; }
  // Consistency learning needs both views.
  bool consistency_active() const {
    return ablation == Ablation::none || ablation == Ablation::no_adv ||
           ablation == Ablation::no_sl;
  }
  void validate() const;  // ConfigError on violated invariants
};

std::string serialize_config(const TrainConfig& config);
TrainConfig parse_config_text(const std::string& text);

struct TrainState {
  TrainConfig config;
  EncoderParams theta_encoder;
  PredictorParams theta_predictor;
  EncoderParams phi;  // momentum encoder; never carries gradients
  std::optional<PoolerParams> omega_weak;
  std::optional<PoolerParams> omega_strong;
  int epoch = 0;
  Rng rng{0};

  // All persistent tensors with stable names (checkpoint order).
  NamedTensors named_tensors() const;
  std::vector<Tensor> theta_tensors() const;
  std::vector<Tensor> omega_weak_tensors() const;
  std::vector<Tensor> omega_strong_tensors() const;
  void zero_grads() const;
};

// Seeded initialization; phi starts as an exact copy of theta's encoder.
TrainState init_state(const TrainConfig& config, const GraphDataset& dataset);

// Losses for one batch, built on the active tape. The target branch runs
// without gradients; the online branch embeds freshly pooled views.
struct BatchLosses {
  Tensor l_sl;  // undefined when the ablation drops the term
  Tensor l_cl;
};
BatchLosses compute_batch_losses(const TrainState& state, const GraphDataset& dataset,
                                 const Batch& batch);

// One optimization step: poolers take a gradient-ascent step on their own
// objective (descent under no_adv), theta descends on the summed losses, and
// phi is folded toward theta with the momentum coefficient. Returns the
// pre-update loss values. On any numeric failure the state is untouched.
struct StepLosses {
  double l_sl = 0.0;
  double l_cl = 0.0;
};
StepLosses train_step(TrainState& state, const GraphDataset& dataset, const Batch& batch);

// Entrywise phi <- gamma * phi + (1 - gamma) * theta over the encoder subset.
void momentum_update(EncoderParams& phi, const EncoderParams& theta, double gamma);

struct PretrainResult {
  std::string checkpoint_path;
  std::string metrics_path;
};

// Full training run per the adversarial schedule; writes metrics JSONL rows
// {epoch, L_sl, L_cl, wall_ms} and a final checkpoint under out_dir.
PretrainResult pretrain(const TrainConfig& config, const GraphDataset& dataset,
                        const std::string& out_dir);

}  // namespace gps
