#include <cmath>
#include <vector>

#include "oracle_metrics.hpp"
#include "s2r/errors.hpp"
#include "s2r/evaluation.hpp"

// doctest last: torch's logging headers define a conflicting CHECK macro
#ifdef CHECK
#undef CHECK
#endif
#include "doctest.h"

using namespace s2r;

namespace {

std::vector<double> to_vec(const torch::Tensor& t) {
  auto flat = t.to(torch::kDouble).reshape(-1).contiguous();
  return std::vector<double>(flat.data_ptr<double>(), flat.data_ptr<double>() + flat.numel());
}

std::vector<bool> to_mask_vec(const torch::Tensor& t) {
  auto flat = t.to(torch::kBool).reshape(-1).contiguous();
  std::vector<bool> out(flat.numel());
  for (int64_t i = 0; i < flat.numel(); ++i) out[i] = flat[i].item<bool>();
  return out;
}

}  // namespace

TEST_CASE("median_scale: ratio of medians") {
  auto pred = torch::tensor({1.0f, 2.0f, 3.0f});
  auto gt = torch::tensor({10.0f, 20.0f, 30.0f});
  auto mask = torch::ones({3}, torch::kBool);
  auto scaled = median_scale(pred, gt, mask);
  // median(gt)/median(pred) = 20/2 = 10
  CHECK(scaled[0].item<double>() == doctest::Approx(10.0));
  CHECK(scaled[1].item<double>() == doctest::Approx(20.0));
  CHECK(scaled[2].item<double>() == doctest::Approx(30.0));
}

TEST_CASE("median_scale: lower-median convention on even counts") {
  auto pred = torch::tensor({1.0f, 2.0f, 3.0f, 4.0f});
  auto gt = torch::tensor({8.0f, 8.0f, 8.0f, 8.0f});
  auto mask = torch::ones({4}, torch::kBool);
  // lower median of pred is 2, so scale = 8/2 = 4
  auto scaled = median_scale(pred, gt, mask);
  CHECK(scaled[0].item<double>() == doctest::Approx(4.0));
}

TEST_CASE("median_scale: degenerate inputs throw") {
  auto pred = torch::ones({4});
  auto gt = torch::ones({4});
  auto none = torch::zeros({4}, torch::kBool);
  CHECK_THROWS_AS(median_scale(pred, gt, none), DegenerateBatchError);
  auto mask = torch::ones({4}, torch::kBool);
  CHECK_THROWS_AS(median_scale(torch::zeros({4}), gt, mask), DegenerateBatchError);
}

TEST_CASE("compute_metrics: perfect prediction") {
  torch::manual_seed(2);
  auto gt = torch::rand({8, 8}) * 70.0 + 1.0;
  auto mask = torch::ones({8, 8}, torch::kBool);
  auto r = compute_metrics(gt, gt, mask, 80.0);
  CHECK(r.abs_rel == doctest::Approx(0.0));
  CHECK(r.squa_rel == doctest::Approx(0.0));
  CHECK(r.rmse == doctest::Approx(0.0));
  CHECK(r.rmse_log == doctest::Approx(0.0));
  CHECK(r.log10 == doctest::Approx(0.0));
  CHECK(r.delta1 == doctest::Approx(1.0));
  CHECK(r.delta3 == doctest::Approx(1.0));
  CHECK(r.n_valid == 64);
}

TEST_CASE("compute_metrics: constant ratio 1.3 splits the delta thresholds") {
  auto gt = torch::rand({6, 6}) * 30.0 + 1.0;
  auto pred = gt * 1.3;
  auto mask = torch::ones({6, 6}, torch::kBool);
  auto r = compute_metrics(pred, gt, mask, 80.0);
  CHECK(r.delta1 == doctest::Approx(0.0));  // 1.3 >= 1.25
  CHECK(r.delta2 == doctest::Approx(1.0));  // 1.3 < 1.5625
  CHECK(r.delta3 == doctest::Approx(1.0));
  CHECK(r.abs_rel == doctest::Approx(0.3).epsilon(1e-5));
}

TEST_CASE("compute_metrics: two-pixel hand oracle") {
  // gt=[2,4], pred=[4,2]: abs_rel = (2/2 + 2/4)/2 = 0.75
  // squa_rel = (4/2 + 4/4)/2 = 1.5, rmse = 2, log ratios both ln 2
  auto gt = torch::tensor({2.0f, 4.0f});
  auto pred = torch::tensor({4.0f, 2.0f});
  auto mask = torch::ones({2}, torch::kBool);
  auto r = compute_metrics(pred, gt, mask, 80.0);
  CHECK(r.abs_rel == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(r.squa_rel == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(r.rmse == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.rmse_log == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(r.log10 == doctest::Approx(std::log10(2.0)).epsilon(1e-6));
  CHECK(r.delta1 == doctest::Approx(0.0));  // ratio 2 everywhere
  CHECK(r.delta3 == doctest::Approx(0.0));  // 2 > 1.953
}

TEST_CASE("compute_metrics agrees with the brute-force oracle") {
  torch::manual_seed(42);
  for (int trial = 0; trial < 50; ++trial) {
    auto gt = torch::rand({16, 16}) * 100.0;  // some pixels beyond the cap
    auto pred = torch::rand({16, 16}) * 100.0 + 0.5;
    auto mask = torch::rand({16, 16}) > 0.2;
    // force at least a few valid pixels inside the cap
    gt.index_put_({0, 0}, 10.0);
    gt.index_put_({0, 1}, 20.0);
    mask.index_put_({0, 0}, true);
    mask.index_put_({0, 1}, true);
    auto r = compute_metrics(pred, gt, mask, 80.0);
    auto o = oracle::compute(to_vec(pred), to_vec(gt), to_mask_vec(mask), 80.0);
    CHECK(r.n_valid == o.n_valid);
    CHECK(r.abs_rel == doctest::Approx(o.abs_rel).epsilon(1e-6));
    CHECK(r.squa_rel == doctest::Approx(o.squa_rel).epsilon(1e-6));
    CHECK(r.rmse == doctest::Approx(o.rmse).epsilon(1e-6));
    CHECK(r.rmse_log == doctest::Approx(o.rmse_log).epsilon(1e-6));
    CHECK(r.log10 == doctest::Approx(o.log10).epsilon(1e-6));
    CHECK(r.delta1 == doctest::Approx(o.delta1).epsilon(1e-9));
    CHECK(r.delta2 == doctest::Approx(o.delta2).epsilon(1e-9));
    CHECK(r.delta3 == doctest::Approx(o.delta3).epsilon(1e-9));
  }
}

TEST_CASE("median scaling cancels a global prediction rescale") {
  torch::manual_seed(9);
  auto gt = torch::rand({12, 12}) * 60.0 + 1.0;
  auto pred = torch::rand({12, 12}) * 60.0 + 1.0;
  auto mask = torch::ones({12, 12}, torch::kBool);
  auto base = compute_metrics(median_scale(pred, gt, mask), gt, mask, 80.0);
  for (double alpha : {0.1, 3.0, 42.0}) {
    auto scaled = compute_metrics(median_scale(pred * alpha, gt, mask), gt, mask, 80.0);
    CHECK(scaled.abs_rel == doctest::Approx(base.abs_rel).epsilon(1e-5));
    CHECK(scaled.rmse == doctest::Approx(base.rmse).epsilon(1e-5));
    CHECK(scaled.rmse_log == doctest::Approx(base.rmse_log).epsilon(1e-5));
    CHECK(scaled.delta1 == doctest::Approx(base.delta1).epsilon(1e-9));
  }
}

TEST_CASE("delta metrics are monotone: delta1 <= delta2 <= delta3") {
  torch::manual_seed(12);
  for (int trial = 0; trial < 20; ++trial) {
    auto gt = torch::rand({10, 10}) * 70.0 + 1.0;
    auto pred = torch::rand({10, 10}) * 70.0 + 1.0;
    auto mask = torch::ones({10, 10}, torch::kBool);
    auto r = compute_metrics(pred, gt, mask, 80.0);
    CHECK(r.delta1 <= r.delta2 + 1e-12);
    CHECK(r.delta2 <= r.delta3 + 1e-12);
  }
}

TEST_CASE("capping at 80 then 50 equals capping at 50 directly") {
  torch::manual_seed(15);
  auto gt = torch::rand({14, 14}) * 120.0;  // values above both caps
  auto pred = torch::rand({14, 14}) * 60.0 + 1.0;
  auto mask = torch::ones({14, 14}, torch::kBool);
  auto pre_clipped = torch::minimum(gt, torch::full_like(gt, 80.0));
  auto a = compute_metrics(pred, pre_clipped, mask, 50.0);
  auto b = compute_metrics(pred, gt, mask, 50.0);
  CHECK(a.n_valid == b.n_valid);
  CHECK(a.abs_rel == doctest::Approx(b.abs_rel).epsilon(1e-9));
  CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-9));
  CHECK(a.delta1 == doctest::Approx(b.delta1).epsilon(1e-12));
}

TEST_CASE("compute_metrics: empty valid set throws") {
  auto gt = torch::full({4, 4}, 200.0f);  // all beyond the cap
  auto pred = torch::ones({4, 4});
  auto mask = torch::ones({4, 4}, torch::kBool);
  CHECK_THROWS_AS(compute_metrics(pred, gt, mask, 80.0), DegenerateBatchError);
}

namespace {

ImageSample make_eval_sample(uint64_t seed) {
  torch::manual_seed(seed);
  ImageSample s;
  s.image = torch::rand({3, 8, 8}) * 2.0 - 1.0;
  // keep depths low enough that a 1.3x prediction stays under the 80 m cap
  s.depth = torch::rand({8, 8}) * 50.0 + 1.0;
  s.mask = torch::ones({8, 8}, torch::kBool);
  s.domain = Domain::RealTarget;
  return s;
}

}  // namespace

TEST_CASE("evaluate_dataset: predictor that returns gt gives perfect metrics") {
  SampleDataset ds;
  for (int i = 0; i < 3; ++i) {
    ds.samples.push_back(make_eval_sample(100 + i));
    ds.ids.push_back("s" + std::to_string(i));
  }
  int call = 0;
  auto predict = [&](const torch::Tensor& image) -> torch::Tensor {
    (void)image;
    return ds.samples[call++].depth.unsqueeze(0);
  };
  auto r = evaluate_dataset(predict, ds, 80.0, Scaling::None);
  CHECK(r.n_images == 3);
  CHECK(r.n_skipped == 0);
  CHECK(r.abs_rel == doctest::Approx(0.0));
  CHECK(r.delta1 == doctest::Approx(1.0));
}

TEST_CASE("evaluate_dataset: mean over per-image reports") {
  SampleDataset ds;
  ds.samples.push_back(make_eval_sample(7));
  ds.samples.push_back(make_eval_sample(8));
  ds.ids = {"a", "b"};
  // constant relative error of 1.1 on the first image, 1.3 on the second
  int call = 0;
  auto predict = [&](const torch::Tensor& image) -> torch::Tensor {
    (void)image;
    double f = call == 0 ? 1.1 : 1.3;
    return ds.samples[call++].depth.unsqueeze(0) * f;
  };
  auto r = evaluate_dataset(predict, ds, 80.0, Scaling::None);
  CHECK(r.abs_rel == doctest::Approx((0.1 + 0.3) / 2.0).epsilon(1e-5));
  // image one is inside delta1, image two is not
  CHECK(r.delta1 == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("evaluate_dataset: duplicated image leaves the mean unchanged") {
  SampleDataset ds;
  ds.samples.push_back(make_eval_sample(21));
  ds.ids = {"x"};
  auto predict_off = [&](const torch::Tensor&) { return ds.samples[0].depth.unsqueeze(0) * 1.15; };
  auto r1 = evaluate_dataset(predict_off, ds, 80.0, Scaling::None);
  ds.samples.push_back(ds.samples[0]);
  ds.ids.push_back("x2");
  auto r2 = evaluate_dataset(predict_off, ds, 80.0, Scaling::None);
  CHECK(r1.abs_rel == doctest::Approx(r2.abs_rel).epsilon(1e-9));
  CHECK(r1.rmse == doctest::Approx(r2.rmse).epsilon(1e-9));
  CHECK(r2.n_images == 2);
}

TEST_CASE("evaluate_dataset: images with no valid pixels are skipped and counted") {
  SampleDataset ds;
  ds.samples.push_back(make_eval_sample(31));
  auto dead = make_eval_sample(32);
  dead.mask = torch::zeros({8, 8}, torch::kBool);
  ds.samples.push_back(dead);
  ds.ids = {"ok", "dead"};
  auto predict = [&](const torch::Tensor&) { return torch::ones({1, 8, 8}) * 30.0; };
  auto r = evaluate_dataset(predict, ds, 80.0, Scaling::Median);
  CHECK(r.n_images == 1);
  CHECK(r.n_skipped == 1);
}

TEST_CASE("MetricsReport::to_json carries every field") {
  MetricsReport r;
  r.abs_rel = 0.25;
  r.n_valid = 10;
  r.scaling = Scaling::None;
  auto j = r.to_json();
  CHECK(j.at("abs_rel").get<double>() == doctest::Approx(0.25));
  CHECK(j.at("n_valid").get<int64_t>() == 10);
  CHECK(j.at("scaling").get<std::string>() == "none");
  CHECK(j.contains("rmse"));
  CHECK(j.contains("rmse_log"));
  CHECK(j.contains("squa_rel"));
  CHECK(j.contains("log10"));
  CHECK(j.contains("delta1"));
  CHECK(j.contains("delta2"));
  CHECK(j.contains("delta3"));
  CHECK(j.contains("cap"));
}
