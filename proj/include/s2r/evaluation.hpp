#pragma once

#include <torch/torch.h>

#include <functional>
#include <string>

#include "json.hpp"
#include "s2r/data_pipeline.hpp"

namespace s2r {

enum class Scaling { Median, None };
std::string to_string(Scaling s);
Scaling scaling_from_string(const std::string& s);

struct MetricsReport {
  double abs_rel = 0, squa_rel = 0, rmse = 0, rmse_log = 0, log10 = 0;
  double delta1 = 0, delta2 = 0, delta3 = 0;
  double cap = 80.0;
  int64_t n_valid = 0;
  int64_t n_images = 0;
  int64_t n_skipped = 0;  // images with an empty valid set after capping
  Scaling scaling = Scaling::Median;

  nlohmann::json to_json() const;
};

// pred * median(gt_valid) / median(pred_valid). Lower-median convention
// (the element torch::median returns for even counts).
torch::Tensor median_scale(const torch::Tensor& pred, const torch::Tensor& gt, const torch::Tensor& mask);

// Standard single-image depth metrics. Pixels with gt > cap (or invalid
// mask) are excluded; pred is clamped to [eps, cap] first.
MetricsReport compute_metrics(const torch::Tensor& pred, const torch::Tensor& gt,
                              const torch::Tensor& mask, double cap, double eps = 1e-3);

// Per-image metrics (median scaling applied per image when enabled),
// arithmetically averaged over images. Images with empty valid sets are
// skipped and counted.
MetricsReport evaluate_dataset(const std::function<torch::Tensor(const torch::Tensor&)>& predict,
                               const SampleDataset& dataset, double cap, Scaling scaling);

}  // namespace s2r
