#include "s2r/image_sample.hpp"

namespace s2r {

std::string to_string(Domain d) {
  switch (d) {
    case Domain::SourceSynthetic: return "source_synthetic";
    case Domain::StyleCorpus: return "style_corpus";
    case Domain::RealTarget: return "real_target";
  }
  return "source_synthetic";
}

Domain domain_from_string(const std::string& s) {
  if (s == "source_synthetic") return Domain::SourceSynthetic;
  if (s == "style_corpus") return Domain::StyleCorpus;
  if (s == "real_target") return Domain::RealTarget;
  throw ConfigError("unknown domain tag: " + s);
}

void ImageSample::validate(double max_depth) const {
  if (image.dim() != 3 || image.size(0) != 3) throw ShapeError("image must be 3xHxW");
  if (depth.dim() != 2 || mask.dim() != 2) throw ShapeError("depth/mask must be HxW");
  if (image.size(1) != depth.size(0) || image.size(2) != depth.size(1) ||
      mask.size(0) != depth.size(0) || mask.size(1) != depth.size(1))
    throw ShapeError("image, depth and mask must share spatial dimensions");
  auto valid_pos = (depth > 0).eq(mask).all().item<bool>();
  if (!valid_pos) throw std::runtime_error("mask must be true exactly where depth > 0");
  if ((depth > max_depth).any().item<bool>()) throw std::runtime_error("depth exceeds max_depth");
  if ((depth < 0).any().item<bool>()) throw std::runtime_error("negative depth");
}

}  // namespace s2r
