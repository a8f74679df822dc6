#pragma once

#include <torch/torch.h>

#include <map>
#include <string>

#include "s2r/config.hpp"

namespace s2r {

struct LossValue {
  torch::Tensor total;                          // scalar, keeps the autograd graph
  std::map<std::string, torch::Tensor> terms;   // named scalar sub-terms

  double value() const { return total.item<double>(); }
};

// Mean over valid pixels of |pred - gt|. Tensors are HxW or NxHxW.
LossValue depth_l1(const torch::Tensor& pred, const torch::Tensor& gt, const torch::Tensor& mask);

// Mean over counted pixels of |M_s(p)| * exp(-beta * g(p)) where g is
// |dx D + dy D| (signed_sum) or |dx D| + |dy D| (abs_sum), forward
// differences. A pixel is counted when its whole forward stencil is valid
// and at least one forward difference exists (the bottom-right corner has
// none). Out-of-range differences contribute 0.
LossValue structure_regularizer(const torch::Tensor& ms, const torch::Tensor& gt_depth,
                                const torch::Tensor& mask, double beta,
                                GradForm grad_form = GradForm::SignedSum, bool mean_reduce = true);

// depth_l1 + lambda * structure_regularizer
LossValue stage2_loss(const torch::Tensor& pred, const torch::Tensor& gt, const torch::Tensor& mask,
                      const torch::Tensor& ms, double lambda, double beta,
                      GradForm grad_form = GradForm::SignedSum, bool mean_reduce = true);

}  // namespace s2r
