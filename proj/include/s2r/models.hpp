#pragma once

#include <torch/torch.h>

#include <string>
#include <vector>

#include "s2r/checkpoint.hpp"
#include "s2r/config.hpp"
#include "s2r/depth_predictor.hpp"
#include "s2r/dsa.hpp"
#include "s2r/ste.hpp"

namespace s2r {

// Which inference path a checkpoint represents.
//   Baseline: image -> DP (3-channel input), the DP-only ablation arm
//   SteOnly:  image -> E_s -> D_s -> DP (the stage-2 "+STE" arm)
//   Full:     image -> E_s -> D_s, image -> DSA, combine -> DP
enum class PipelineMode { Baseline, SteOnly, Full };
std::string to_string(PipelineMode m);
PipelineMode pipeline_from_string(const std::string& s);

struct Intermediates {
  torch::Tensor ms;   // Nx1xHxW
  torch::Tensor ma;   // Nx1xHxW
  torch::Tensor msa;  // Nx1xHxW or Nx2xHxW (concat)
  torch::Tensor depth;  // NxHxW
};

// Everything under one roof so checkpoints always carry the full name set:
//   ste.encoder.* ste.style_{s,t}.* ste.gen_{s,t}.* ste.disc_{s,t}.*
//   ste.decoder_ds.*   dsa.encoder.* / dsa.decoder.*   dp.*
struct Models {
  ModelConfig cfg;
  double max_depth = 80.0;
  PipelineMode pipeline = PipelineMode::Full;

  std::shared_ptr<SteModel> ste;
  AttentionNet dsa{nullptr};
  DepthPredictor dp{nullptr};

  static Models build(const ModelConfig& cfg, double max_depth, PipelineMode pipeline);

  // named (prefix, module) pairs in checkpoint naming order
  std::vector<std::pair<std::string, std::shared_ptr<torch::nn::Module>>> named_modules() const;

  // dump/load every parameter and buffer under the spec names
  Checkpoint to_checkpoint() const;
  void load_arrays(const Checkpoint& ckpt, const std::vector<std::string>& skip_prefixes = {});

  torch::Tensor predict(const torch::Tensor& images);  // Nx3xHxW -> NxHxW
  Intermediates infer(const torch::Tensor& images);    // Full pipeline only

  void set_eval();
  void set_train();

  static int64_t dp_in_channels(PipelineMode pipeline, CombineMode combine);
};

// Rebuild a Models bundle from checkpoint metadata and load its weights.
Models models_from_checkpoint(const Checkpoint& ckpt);

// Collect trainable parameters of a module list.
std::vector<torch::Tensor> collect_params(const std::vector<std::shared_ptr<torch::nn::Module>>& mods);

}  // namespace s2r
