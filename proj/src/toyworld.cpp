#include "s2r/toyworld.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "s2r/data_pipeline.hpp"

namespace s2r::toyworld {

StyleDomain style_from_string(const std::string& s) {
  if (s == "A" || s == "a") return StyleDomain::A;
  if (s == "B" || s == "b") return StyleDomain::B;
  throw ConfigError("unknown style domain: " + s + " (expected A or B)");
}

std::string to_string(StyleDomain d) { return d == StyleDomain::A ? "A" : "B"; }

namespace {

struct Rect {
  int64_t x0, y0, x1, y1;
  double depth;
  int64_t stripe_phase;
};

}  // namespace

ToyScene generate_scene(uint64_t geometry_seed, StyleDomain domain, const ToySceneOptions& opts) {
  if (opts.height < 32 || opts.width < 32) throw ConfigError("toyworld: resolution must be at least 32x32");
  const int64_t h = opts.height, w = opts.width;

  // Geometry stream: identical draw sequence for both domains and for
  // texture on/off, so depth maps match bit for bit.
  std::mt19937_64 rng_g(geometry_seed * 0x9e3779b97f4a7c15ULL + 0x5851f42d4c957f2dULL);
  std::uniform_int_distribution<int> nrect_d(opts.min_rects, std::max(opts.min_rects, opts.max_rects));
  const int nrects = opts.max_rects <= 0 ? 0 : nrect_d(rng_g);

  std::vector<Rect> rects;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < nrects; ++i) {
    Rect r;
    const int64_t rw = (int64_t)(w / 8 + unit(rng_g) * (w * 3 / 8));
    const int64_t rh = (int64_t)(h / 8 + unit(rng_g) * (h * 3 / 8));
    r.x0 = (int64_t)(unit(rng_g) * (w - rw));
    r.y0 = (int64_t)(unit(rng_g) * (h - rh));
    r.x1 = r.x0 + rw;
    r.y1 = r.y0 + rh;
    r.depth = 1.0 + unit(rng_g) * (opts.far_depth * 0.8 - 1.0);
    r.stripe_phase = (int64_t)(unit(rng_g) * 16);
    rects.push_back(r);
  }
  // painter's order, far first
  std::sort(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) { return a.depth > b.depth; });

  // Style stream: domain-specific, never touches geometry.
  std::mt19937_64 rng_s(geometry_seed * 0xc2b2ae3d27d4eb4fULL + (domain == StyleDomain::A ? 17u : 41u));

  auto depth = torch::empty({h, w}, torch::kFloat32);
  auto region = torch::zeros({h, w}, torch::kLong);  // 0 = ground, 1+i = rect i
  auto dep = depth.accessor<float, 2>();
  auto reg = region.accessor<int64_t, 2>();
  for (int64_t r = 0; r < h; ++r) {
    const double ground = opts.far_depth + (opts.near_depth - opts.far_depth) * ((double)r / (double)(h - 1));
    for (int64_t c = 0; c < w; ++c) {
      dep[r][c] = (float)ground;
      reg[r][c] = 0;
    }
  }
  for (size_t i = 0; i < rects.size(); ++i) {
    const Rect& rc = rects[i];
    for (int64_t r = rc.y0; r < rc.y1; ++r) {
      for (int64_t c = rc.x0; c < rc.x1; ++c) {
        if (rc.depth < dep[r][c]) {
          dep[r][c] = (float)rc.depth;
          reg[r][c] = (int64_t)i + 1;
        }
      }
    }
  }
  depth.clamp_(1.0, opts.max_depth);

  auto image = torch::empty({3, h, w}, torch::kFloat32);
  auto img = image.accessor<float, 3>();
  const double chan_a[3] = {1.0, 0.9, 0.75};
  const double chan_b[3] = {0.75, 0.9, 1.0};
  std::uniform_real_distribution<double> noise(-0.1, 0.1);
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      const double t = dep[r][c] / opts.max_depth;
      double v;
      if (domain == StyleDomain::A) {
        v = 1.0 - t;  // bright = near
        if (opts.texture) {
          // depth-irrelevant stripes, phase tied to the surface
          const int64_t phase = reg[r][c] == 0 ? 3 : rects[(size_t)reg[r][c] - 1].stripe_phase;
          v += (((c + phase) / 4) % 2 == 0) ? 0.15 : -0.15;
        }
      } else {
        v = t;  // inverted palette: bright = far
        if (opts.texture) v += noise(rng_s);
      }
      const double* chan = domain == StyleDomain::A ? chan_a : chan_b;
      for (int64_t k = 0; k < 3; ++k) {
        const double vv = std::clamp(v * chan[k], 0.0, 1.0);
        img[k][r][c] = (float)(2.0 * vv - 1.0);
      }
    }
  }

  ToyScene scene;
  scene.geometry_seed = geometry_seed;
  scene.style_domain = domain;
  scene.sample.image = image;
  scene.sample.depth = depth;
  scene.sample.mask = depth > 0;
  scene.sample.domain = domain == StyleDomain::A ? Domain::SourceSynthetic : Domain::StyleCorpus;
  return scene;
}

void generate_dataset(const std::string& out_dir, int64_t count, StyleDomain domain, uint64_t seed0,
                      const ToySceneOptions& opts) {
  for (int64_t i = 0; i < count; ++i) {
    auto scene = generate_scene(seed0 + (uint64_t)i, domain, opts);
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%06lld", domain == StyleDomain::A ? "a" : "b",
                  (long long)(seed0 + (uint64_t)i));
    save_sample(out_dir, id, scene.sample);
    append_index(out_dir, id, scene.sample.domain);
  }
}

}  // namespace s2r::toyworld
