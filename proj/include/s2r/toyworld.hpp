#pragma once

#include <cstdint>
#include <string>

#include "s2r/image_sample.hpp"

namespace s2r::toyworld {

enum class StyleDomain { A, B };

StyleDomain style_from_string(const std::string& s);
std::string to_string(StyleDomain d);

struct ToySceneOptions {
  int64_t height = 64;
  int64_t width = 64;
  double max_depth = 80.0;
  double near_depth = 2.0;   // ground plane at the bottom row
  double far_depth = 60.0;   // ground plane at the top row
  int min_rects = 3;
  int max_rects = 8;
  bool texture = true;       // depth-irrelevant stripes (A) / noise (B)
};

struct ToyScene {
  uint64_t geometry_seed = 0;
  StyleDomain style_domain = StyleDomain::A;
  ImageSample sample;
};

// Geometry (depth map) depends only on (geometry_seed, resolution); the two
// style domains render the same geometry with opposite shading polarity:
//   A: bright = near, plus additive stripe texture on surfaces
//   B: inverted palette (bright = far), plus pixel noise
ToyScene generate_scene(uint64_t geometry_seed, StyleDomain domain, const ToySceneOptions& opts);

// Emits `count` scenes with geometry seeds seed0..seed0+count-1 in the
// data_pipeline directory layout under `out_dir`.
void generate_dataset(const std::string& out_dir, int64_t count, StyleDomain domain, uint64_t seed0,
                      const ToySceneOptions& opts);

}  // namespace s2r::toyworld
