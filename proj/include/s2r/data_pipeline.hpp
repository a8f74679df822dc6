#pragma once

#include <torch/torch.h>

#include <random>
#include <string>
#include <vector>

#include "s2r/config.hpp"
#include "s2r/image_sample.hpp"

namespace s2r {

// output[p] = min(depth[p], max_depth); zeros (invalid) stay zero.
torch::Tensor clip_depth(const torch::Tensor& depth, double max_depth);

// Random horizontal flip, rotation (bilinear image / nearest depth+mask,
// out-of-frame pixels invalidated) and multiplicative brightness jitter.
// All decisions are drawn from `rng`, so a fixed stream is reproducible.
ImageSample augment(const ImageSample& sample, const DatasetConfig& cfg, std::mt19937_64& rng);

// Bilinear image resize; nearest-neighbor (pixel-center convention) for
// depth and mask so no depths are interpolated across discontinuities.
ImageSample resize_pair(const ImageSample& sample, int64_t target_h, int64_t target_w);

// On-disk dataset layout: <root>/{images,depths}/<id>.png + <root>/index.txt
// where each index line is "<id> <domain>".
struct SampleDataset {
  std::vector<ImageSample> samples;
  std::vector<std::string> ids;
};

void save_sample(const std::string& root, const std::string& id, const ImageSample& sample);
void append_index(const std::string& root, const std::string& id, Domain domain);
SampleDataset load_dataset(const std::string& root);

// Stacks samples [begin, end) into NCHW / NHW batch tensors.
struct Batch {
  torch::Tensor image;  // Nx3xHxW
  torch::Tensor depth;  // NxHxW
  torch::Tensor mask;   // NxHxW bool
};
Batch make_batch(const std::vector<ImageSample>& samples, const std::vector<size_t>& indices);

}  // namespace s2r
