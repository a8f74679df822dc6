#include <cmath>

#include "s2r/depth_predictor.hpp"
#include "s2r/errors.hpp"
#include "s2r/losses.hpp"

// doctest last: torch's logging headers define a conflicting CHECK macro
#ifdef CHECK
#undef CHECK
#endif
#include "doctest.h"

using namespace s2r;

TEST_CASE("depth predictor: shape and value range") {
  torch::manual_seed(1);
  DepthPredictor dp(1, 8, 80.0);
  dp->eval();
  for (int trial = 0; trial < 3; ++trial) {
    auto msa = torch::randn({2, 1, 32, 32}) * std::pow(10.0, trial);  // includes huge inputs
    auto d = dp->forward(msa);
    CHECK(d.sizes() == torch::IntArrayRef({2, 32, 32}));
    CHECK(d.min().item<double>() > 0.0);
    CHECK(d.max().item<double>() <= 80.0);
    CHECK(torch::isfinite(d).all().item<bool>());
  }
}

TEST_CASE("depth predictor: multi-channel input for the concat arm") {
  DepthPredictor dp(2, 8, 80.0);
  auto d = dp->forward(torch::rand({1, 2, 16, 16}));
  CHECK(d.sizes() == torch::IntArrayRef({1, 16, 16}));
}

TEST_CASE("depth predictor: channel mismatch rejected") {
  DepthPredictor dp(1, 8, 80.0);
  CHECK_THROWS_AS(dp->forward(torch::rand({1, 3, 16, 16})), ShapeError);
}

TEST_CASE("depth predictor: indivisible spatial dims rejected") {
  DepthPredictor dp(1, 8, 80.0);
  CHECK_THROWS_AS(dp->forward(torch::rand({1, 1, 20, 16})), ShapeError);
}

TEST_CASE("depth predictor: deterministic in eval mode") {
  torch::manual_seed(2);
  DepthPredictor dp(1, 8, 80.0);
  dp->eval();
  auto x = torch::rand({1, 1, 16, 16});
  CHECK(torch::equal(dp->forward(x), dp->forward(x)));
}

namespace {

// Minimal stand-in with the same output activation as the real predictor:
// eps + (max_depth - eps) * sigmoid(conv(x)).
struct StubpredImpl : torch::nn::Module {
  StubpredImpl() {
    conv = register_module("conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(1, 1, 3).padding(1)));
    to(torch::kDouble);
  }
  torch::Tensor forward(torch::Tensor x) {
    const double eps = 1e-3, max_depth = 80.0;
    return (eps + (max_depth - eps) * torch::sigmoid(conv->forward(x))).squeeze(1);
  }
  torch::nn::Conv2d conv{nullptr};
};
TORCH_MODULE(Stubpred);

}  // namespace

TEST_CASE("L1 depth loss gradient through the predictor activation matches finite differences") {
  torch::manual_seed(3);
  Stubpred net;
  auto x = torch::randn({1, 1, 6, 6}, torch::kDouble);
  auto gt = torch::rand({1, 6, 6}, torch::kDouble) * 70.0 + 1.0;
  auto mask = torch::ones({1, 6, 6}, torch::kBool);

  auto loss_fn = [&]() { return depth_l1(net->forward(x), gt, mask).total; };
  net->zero_grad();
  loss_fn().backward();

  const double h = 1e-6;
  for (const auto& p : net->parameters()) {
    auto grad = p.grad().clone();
    auto flat = p.data().reshape(-1);
    for (int64_t i = 0; i < std::min<int64_t>(flat.numel(), 6); ++i) {
      double orig = flat[i].item<double>();
      flat[i] = orig + h;
      double fp;
      {
        torch::NoGradGuard ng;
        fp = loss_fn().item<double>();
      }
      flat[i] = orig - h;
      double fm;
      {
        torch::NoGradGuard ng;
        fm = loss_fn().item<double>();
      }
      flat[i] = orig;
      double fd = (fp - fm) / (2 * h);
      double an = grad.reshape(-1)[i].item<double>();
      double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
      CHECK(std::abs(fd - an) / denom < 1e-3);
    }
  }
}
