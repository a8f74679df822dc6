#pragma once

#include <cstdint>
#include <string>

#include "s2r/errors.hpp"

namespace s2r {

enum class GradForm { SignedSum, AbsSum };  // |dx + dy|  vs  |dx| + |dy|
enum class GanObjective { LeastSquares, Log };
enum class CombineMode { Multiply, Add, Concat };

std::string to_string(GradForm f);
std::string to_string(GanObjective o);
std::string to_string(CombineMode m);
CombineMode combine_from_string(const std::string& s);

struct DatasetConfig {
  double max_depth = 80.0;
  int64_t height = 192;
  int64_t width = 640;
  double flip_probability = 0.5;
  double rotation_lo_deg = -5.0;
  double rotation_hi_deg = 5.0;
  double brightness_jitter = 0.2;  // multiplicative range in [0,1] intensity space
  uint64_t seed = 0;
  bool augment = true;

  void validate() const;
};

struct LossConfig {
  double lambda = 1.0;
  double beta = 0.001;
  GradForm grad_form = GradForm::SignedSum;
  bool mean_reduce = true;
};

// Stage-1 translation training block (its own hyperparameters).
struct GanConfig {
  GanObjective objective = GanObjective::LeastSquares;
  double lambda1 = 10.0;  // image reconstruction
  double lambda2 = 1.0;   // s->t code reconstruction
  double lambda3 = 1.0;   // t->s code reconstruction
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double weight_decay = 0.0;
};

struct ModelConfig {
  int64_t base_channels = 64;  // structure code has 4x this many channels
  int64_t style_dim = 8;
  int64_t dsa_channels = 32;
  int64_t dp_channels = 32;
  int64_t disc_channels = 32;
  int64_t disc_scales = 3;
  CombineMode combine = CombineMode::Multiply;
  bool nonneg_structure_map = true;
};

struct TrainConfig {
  double base_lr = 1e-4;
  double lr_decay = 0.5;
  int64_t lr_step_epochs = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double weight_decay = 1e-4;
  int64_t epochs = 60;
  int64_t batch_size = 4;
  int stage = 1;
  uint64_t seed = 0;
  LossConfig loss;
  DatasetConfig data;
  GanConfig gan;
  ModelConfig model;

  std::string raw_text;  // config file contents, stored for the checkpoint fingerprint

  void validate() const;
};

// Flat `key = value` format, '#' comments. Unknown keys are an error.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::string& path);

// Re-serialize the effective configuration (used when no file was given).
std::string config_to_text(const TrainConfig& cfg);

}  // namespace s2r
