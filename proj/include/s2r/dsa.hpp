#pragma once

#include <torch/torch.h>

#include "s2r/config.hpp"
#include "s2r/errors.hpp"

namespace s2r {

// Depth-specific attention: dilated residual encoder (stride budget 8) and
// three up-projection decoder layers ending in a sigmoid. Output is the
// full-resolution attention map with values strictly inside (0, 1).
struct AttentionNetImpl : torch::nn::Module {
  explicit AttentionNetImpl(int64_t base_channels);
  torch::Tensor forward(torch::Tensor image);  // Nx1xHxW
  torch::nn::Sequential encoder{nullptr};
  torch::nn::Sequential decoder{nullptr};
};
TORCH_MODULE(AttentionNet);

// M_sa combination. multiply (elementwise gating) is the reference mode;
// add and concat exist for the ablation only. concat stacks [ms, ma] along
// the channel dim.
torch::Tensor combine(const torch::Tensor& ms, const torch::Tensor& ma, CombineMode mode);

}  // namespace s2r
