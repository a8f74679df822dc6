#include "s2r/evaluation.hpp"

#include <cmath>

#include "s2r/errors.hpp"

namespace s2r {

std::string to_string(Scaling s) { return s == Scaling::Median ? "median" : "none"; }

Scaling scaling_from_string(const std::string& s) {
  if (s == "median") return Scaling::Median;
  if (s == "none") return Scaling::None;
  throw ConfigError("unknown scaling mode: " + s);
}

nlohmann::json MetricsReport::to_json() const {
  return nlohmann::json{{"abs_rel", abs_rel}, {"squa_rel", squa_rel}, {"rmse", rmse},
                        {"rmse_log", rmse_log}, {"log10", log10},     {"delta1", delta1},
                        {"delta2", delta2},     {"delta3", delta3},   {"cap", cap},
                        {"n_valid", n_valid},   {"n_images", n_images}, {"n_skipped", n_skipped},
                        {"scaling", to_string(scaling)}};
}

torch::Tensor median_scale(const torch::Tensor& pred, const torch::Tensor& gt, const torch::Tensor& mask) {
  auto m = mask.to(torch::kBool);
  auto pv = pred.masked_select(m);
  auto gv = gt.masked_select(m);
  if (pv.numel() == 0) throw DegenerateBatchError("median_scale: no valid pixels");
  const double mp = pv.median().item<double>();
  const double mg = gv.median().item<double>();
  if (mp == 0) throw DegenerateBatchError("median_scale: median of prediction is zero");
  return pred * (mg / mp);
}

MetricsReport compute_metrics(const torch::Tensor& pred, const torch::Tensor& gt,
                              const torch::Tensor& mask, double cap, double eps) {
  if (pred.sizes() != gt.sizes() || gt.sizes() != mask.sizes())
    throw ShapeError("compute_metrics: shape mismatch");
  auto valid = mask.to(torch::kBool) & (gt > 0) & (gt <= cap);
  const int64_t n = valid.sum().item<int64_t>();
  if (n == 0) throw DegenerateBatchError("compute_metrics: empty valid set after capping");

  auto d = gt.masked_select(valid).to(torch::kFloat64);          // ground truth
  auto dh = pred.clamp(eps, cap).masked_select(valid).to(torch::kFloat64);

  MetricsReport r;
  r.cap = cap;
  r.n_valid = n;
  r.n_images = 1;
  auto diff = d - dh;
  r.abs_rel = (diff.abs() / d).mean().item<double>();
  r.squa_rel = (diff.pow(2) / d).mean().item<double>();
  r.rmse = std::sqrt(diff.pow(2).mean().item<double>());
  r.rmse_log = std::sqrt((d.log() - dh.log()).pow(2).mean().item<double>());
  r.log10 = (d.log10() - dh.log10()).abs().mean().item<double>();
  auto ratio = torch::maximum(d / dh, dh / d);
  r.delta1 = (ratio < 1.25).to(torch::kFloat64).mean().item<double>();
  r.delta2 = (ratio < 1.25 * 1.25).to(torch::kFloat64).mean().item<double>();
  r.delta3 = (ratio < 1.25 * 1.25 * 1.25).to(torch::kFloat64).mean().item<double>();
  return r;
}

MetricsReport evaluate_dataset(const std::function<torch::Tensor(const torch::Tensor&)>& predict,
                               const SampleDataset& dataset, double cap, Scaling scaling) {
  if (dataset.samples.empty()) throw DegenerateBatchError("evaluate_dataset: empty dataset");
  MetricsReport agg;
  agg.cap = cap;
  agg.scaling = scaling;
  int64_t used = 0;
  for (const auto& s : dataset.samples) {
    auto valid = s.mask & (s.depth > 0) & (s.depth <= cap);
    if (valid.sum().item<int64_t>() == 0) {
      agg.n_skipped++;
      continue;
    }
    torch::Tensor pred;
    {
      torch::NoGradGuard ng;
      pred = predict(s.image.unsqueeze(0)).squeeze(0);
    }
    if (scaling == Scaling::Median) pred = median_scale(pred, s.depth, valid);
    auto r = compute_metrics(pred, s.depth, valid, cap);
    agg.abs_rel += r.abs_rel;
    agg.squa_rel += r.squa_rel;
    agg.rmse += r.rmse;
    agg.rmse_log += r.rmse_log;
    agg.log10 += r.log10;
    agg.delta1 += r.delta1;
    agg.delta2 += r.delta2;
    agg.delta3 += r.delta3;
    agg.n_valid += r.n_valid;
    ++used;
  }
  if (used == 0) throw DegenerateBatchError("evaluate_dataset: all images had empty valid sets");
  for (double* f : {&agg.abs_rel, &agg.squa_rel, &agg.rmse, &agg.rmse_log, &agg.log10, &agg.delta1,
                    &agg.delta2, &agg.delta3})
    *f /= (double)used;
  agg.n_images = used;
  return agg;
}

}  // namespace s2r
