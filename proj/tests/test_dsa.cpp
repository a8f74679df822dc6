#include "s2r/depth_predictor.hpp"
#include "s2r/dsa.hpp"
#include "s2r/errors.hpp"

// doctest last: torch's logging headers define a conflicting CHECK macro
#ifdef CHECK
#undef CHECK
#endif
#include "doctest.h"

using namespace s2r;

TEST_CASE("attention: full-resolution map strictly inside (0,1)") {
  torch::manual_seed(1);
  AttentionNet net(8);
  net->eval();
  for (int trial = 0; trial < 3; ++trial) {
    auto x = torch::randn({2, 3, 32, 32}) * (trial + 1) * 3.0;  // include large inputs
    auto ma = net->forward(x);
    CHECK(ma.sizes() == torch::IntArrayRef({2, 1, 32, 32}));
    CHECK(ma.min().item<double>() > 0.0);
    CHECK(ma.max().item<double>() < 1.0);
  }
  auto zero = net->forward(torch::zeros({1, 3, 16, 16}));
  CHECK(torch::isfinite(zero).all().item<bool>());
}

TEST_CASE("attention: indivisible spatial dims are rejected") {
  AttentionNet net(8);
  CHECK_THROWS_AS(net->forward(torch::zeros({1, 3, 30, 32})), ShapeError);
  CHECK_THROWS_AS(net->forward(torch::zeros({1, 3, 32, 20})), ShapeError);
}

TEST_CASE("attention: parameter names live under encoder/decoder") {
  AttentionNet net(8);
  bool has_enc = false, has_dec = false;
  for (const auto& p : net->named_parameters()) {
    if (p.key().rfind("encoder.", 0) == 0) has_enc = true;
    if (p.key().rfind("decoder.", 0) == 0) has_dec = true;
  }
  CHECK(has_enc);
  CHECK(has_dec);
}

TEST_CASE("combine: multiply is elementwise") {
  auto ms = torch::tensor({{2.0f, 4.0f}, {6.0f, 8.0f}});
  auto ma = torch::tensor({{0.5f, 0.25f}, {1.0f, 0.0f}});
  auto out = combine(ms, ma, CombineMode::Multiply);
  CHECK(torch::allclose(out, torch::tensor({{1.0f, 1.0f}, {6.0f, 0.0f}})));
}

TEST_CASE("combine: identity and annihilator attentions") {
  torch::manual_seed(4);
  auto ms = torch::rand({1, 1, 4, 4});
  CHECK(torch::allclose(combine(ms, torch::ones_like(ms), CombineMode::Multiply), ms));
  CHECK(combine(ms, torch::zeros_like(ms), CombineMode::Multiply).abs().sum().item<double>() ==
        doctest::Approx(0.0));
}

TEST_CASE("combine: multiply is linear in the structure map") {
  torch::manual_seed(5);
  auto ms1 = torch::rand({2, 1, 4, 4});
  auto ms2 = torch::rand({2, 1, 4, 4});
  auto ma = torch::rand({2, 1, 4, 4});
  auto lhs = combine(ms1 + 2.0 * ms2, ma, CombineMode::Multiply);
  auto rhs = combine(ms1, ma, CombineMode::Multiply) + 2.0 * combine(ms2, ma, CombineMode::Multiply);
  CHECK(torch::allclose(lhs, rhs, 1e-5, 1e-6));
}

TEST_CASE("combine: attention bottleneck never amplifies") {
  torch::manual_seed(6);
  AttentionNet net(8);
  net->eval();
  auto img = torch::randn({2, 3, 16, 16});
  auto ma = net->forward(img);
  auto ms = torch::randn({2, 1, 16, 16});
  auto msa = combine(ms, ma, CombineMode::Multiply);
  CHECK((msa.abs() <= ms.abs() + 1e-6).all().item<bool>());
}

TEST_CASE("combine: add and concat modes") {
  auto ms = torch::ones({1, 1, 2, 2});
  auto ma = torch::full({1, 1, 2, 2}, 0.5f);
  auto added = combine(ms, ma, CombineMode::Add);
  CHECK(torch::allclose(added, torch::full({1, 1, 2, 2}, 1.5f)));
  auto cat = combine(ms, ma, CombineMode::Concat);
  CHECK(cat.sizes() == torch::IntArrayRef({1, 2, 2, 2}));
  CHECK(torch::allclose(cat.index({0, 0}), ms.index({0, 0})));
  CHECK(torch::allclose(cat.index({0, 1}), ma.index({0, 0})));
}

TEST_CASE("combine: shape mismatch is rejected") {
  CHECK_THROWS_AS(combine(torch::ones({1, 1, 4, 4}), torch::ones({1, 1, 2, 2}), CombineMode::Multiply),
                  ShapeError);
}

TEST_CASE("gradients reach both the attention net and the depth predictor") {
  torch::manual_seed(8);
  AttentionNet dsa(8);
  DepthPredictor dp(1, 8, 80.0);
  auto img = torch::randn({1, 3, 16, 16});
  auto ms = torch::rand({1, 1, 16, 16});
  auto ma = dsa->forward(img);
  auto depth = dp->forward(combine(ms, ma, CombineMode::Multiply));
  depth.sum().backward();
  bool dsa_grad = false;
  for (const auto& p : dsa->parameters())
    if (p.grad().defined() && p.grad().abs().sum().item<double>() > 0) dsa_grad = true;
  bool dp_grad = false;
  for (const auto& p : dp->parameters())
    if (p.grad().defined() && p.grad().abs().sum().item<double>() > 0) dp_grad = true;
  CHECK(dsa_grad);
  CHECK(dp_grad);
}
