#pragma once

#include <map>
#include <string>
#include <vector>

#include "s2r/checkpoint.hpp"
#include "s2r/config.hpp"
#include "s2r/data_pipeline.hpp"
#include "s2r/evaluation.hpp"
#include "s2r/models.hpp"

namespace s2r {

// base_lr * 0.5^floor(epoch / 10) with the configured decay/step.
double lr_at(const TrainConfig& cfg, int64_t epoch);

struct TrainResult {
  Checkpoint checkpoint;
  std::string checkpoint_path;
  // one entry per epoch: term name -> mean value over the epoch
  std::vector<std::map<std::string, double>> epoch_losses;
};

// Stage 1: train all translation networks (alternating D/G updates with the
// stage-1 hyperparameter block). Marks ste.encoder.* frozen in the result.
TrainResult train_stage1(const TrainConfig& cfg, const SampleDataset& source_data,
                         const SampleDataset& style_data, const std::string& out_dir);

// Stage 2: D_s + DP with the gated structure-map loss; E_s stays bit-identical.
// Marks ste.decoder_ds.* frozen on completion.
TrainResult train_stage2(const TrainConfig& cfg, const SampleDataset& source_data,
                         const Checkpoint& ckpt, const std::string& out_dir);

// Stage 3: DSA + DP with the plain L1 depth loss; E_s and D_s frozen.
// Combine mode comes from cfg.model.combine; concat rebuilds DP with a
// 2-channel input layer.
TrainResult train_stage3(const TrainConfig& cfg, const SampleDataset& source_data,
                         const Checkpoint& ckpt, const std::string& out_dir);

// Stage 4: semi-supervised fine-tuning of DSA + DP on labeled real data.
TrainResult train_stage4_semi(const TrainConfig& cfg, const SampleDataset& labeled_real_subset,
                              const Checkpoint& ckpt, const std::string& out_dir);

// DP-only ablation baseline trained on raw images (stage tag 0).
TrainResult train_baseline(const TrainConfig& cfg, const SampleDataset& source_data,
                           const std::string& out_dir);

MetricsReport evaluate_checkpoint(const Checkpoint& ckpt, const SampleDataset& dataset, double cap,
                                  Scaling scaling);

}  // namespace s2r
