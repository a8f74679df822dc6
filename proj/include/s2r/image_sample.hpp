#pragma once

#include <torch/torch.h>

#include <string>

#include "s2r/errors.hpp"

namespace s2r {

enum class Domain { SourceSynthetic, StyleCorpus, RealTarget };

std::string to_string(Domain d);
Domain domain_from_string(const std::string& s);

// One image/depth pair.
//   image: 3xHxW float32 in [-1, 1]
//   depth: HxW float32 meters, 0 on invalid pixels
//   mask:  HxW bool, true where ground truth is valid
struct ImageSample {
  torch::Tensor image;
  torch::Tensor depth;
  torch::Tensor mask;
  Domain domain = Domain::SourceSynthetic;

  int64_t height() const { return depth.size(0); }
  int64_t width() const { return depth.size(1); }

  // Throws ShapeError / std::runtime_error when the invariants don't hold.
  void validate(double max_depth) const;
};

}  // namespace s2r
