#pragma once

#include <torch/torch.h>

#include "s2r/errors.hpp"

namespace s2r {

// DP module: 4-scale encoder-decoder with skip connections. Output is
// eps + (max_depth - eps) * sigmoid(raw), so predictions stay in
// (eps, max_depth).
struct DepthPredictorImpl : torch::nn::Module {
  DepthPredictorImpl(int64_t in_channels, int64_t base_channels, double max_depth, double eps = 1e-3);
  torch::Tensor forward(torch::Tensor msa);  // NxCxHxW -> NxHxW

  torch::nn::Conv2d enc0{nullptr}, enc1{nullptr}, enc2{nullptr}, enc3{nullptr};
  torch::nn::Conv2d dec3{nullptr}, dec2{nullptr}, dec1{nullptr}, head{nullptr};
  torch::nn::InstanceNorm2d n0{nullptr}, n1{nullptr}, n2{nullptr}, n3{nullptr};
  int64_t in_channels;
  double max_depth;
  double eps;
};
TORCH_MODULE(DepthPredictor);

}  // namespace s2r
