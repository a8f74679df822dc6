#pragma once

#include <string>

#include "s2r/checkpoint.hpp"

namespace s2r {

// Writes structure.png, attention.png, msa.png, depth.png and a sidecar
// viz_constants.txt (the normalization ranges) for one input image.
// Requires a stage >= 3 checkpoint (DSA and DP must exist).
void visualize(const Checkpoint& ckpt, const std::string& image_path, const std::string& out_dir);

// inferno-style colormap over a HxW map already normalized to [0,1];
// returns HxWx3 uint8.
torch::Tensor apply_inferno(const torch::Tensor& map01);

}  // namespace s2r
