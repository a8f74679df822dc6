#include <filesystem>

#include "s2r/data_pipeline.hpp"
#include "s2r/toyworld.hpp"

// doctest last: torch's logging headers define a conflicting CHECK macro
#ifdef CHECK
#undef CHECK
#endif
#include "doctest.h"

using namespace s2r;
using namespace s2r::toyworld;
namespace fs = std::filesystem;

namespace {

ToySceneOptions small_opts() {
  ToySceneOptions o;
  o.height = 32;
  o.width = 32;
  return o;
}

}  // namespace

TEST_CASE("toyworld: both style domains share the geometry bit for bit") {
  auto opts = small_opts();
  for (uint64_t seed = 0; seed < 100; ++seed) {
    auto a = generate_scene(seed, StyleDomain::A, opts);
    auto b = generate_scene(seed, StyleDomain::B, opts);
    CHECK(torch::equal(a.sample.depth, b.sample.depth));
    CHECK(torch::equal(a.sample.mask, b.sample.mask));
  }
}

TEST_CASE("toyworld: deterministic per (seed, domain)") {
  auto opts = small_opts();
  auto x = generate_scene(7, StyleDomain::A, opts);
  auto y = generate_scene(7, StyleDomain::A, opts);
  CHECK(torch::equal(x.sample.image, y.sample.image));
  CHECK(torch::equal(x.sample.depth, y.sample.depth));
}

TEST_CASE("toyworld: different seeds give different scenes") {
  auto opts = small_opts();
  auto x = generate_scene(1, StyleDomain::A, opts);
  auto y = generate_scene(2, StyleDomain::A, opts);
  CHECK(!torch::equal(x.sample.depth, y.sample.depth));
}

TEST_CASE("toyworld: styles actually differ on the same geometry") {
  auto opts = small_opts();
  auto a = generate_scene(3, StyleDomain::A, opts);
  auto b = generate_scene(3, StyleDomain::B, opts);
  CHECK((a.sample.image - b.sample.image).abs().mean().item<double>() > 0.1);
}

TEST_CASE("toyworld: texture is depth-irrelevant") {
  auto opts = small_opts();
  auto textured = generate_scene(5, StyleDomain::A, opts);
  opts.texture = false;
  auto plain = generate_scene(5, StyleDomain::A, opts);
  CHECK(torch::equal(textured.sample.depth, plain.sample.depth));
  CHECK(!torch::equal(textured.sample.image, plain.sample.image));
}

TEST_CASE("toyworld: depth range and sample validity") {
  auto opts = small_opts();
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto s = generate_scene(seed, seed % 2 ? StyleDomain::A : StyleDomain::B, opts).sample;
    CHECK(s.depth.min().item<double>() >= 1.0);
    CHECK(s.depth.max().item<double>() <= opts.max_depth);
    CHECK(s.image.min().item<double>() >= -1.0);
    CHECK(s.image.max().item<double>() <= 1.0);
    CHECK(s.mask.all().item<bool>());
    CHECK_NOTHROW(s.validate(opts.max_depth));
  }
}

TEST_CASE("toyworld: zero rectangles give the pure ground gradient") {
  auto opts = small_opts();
  opts.min_rects = 0;
  opts.max_rects = 0;
  auto s = generate_scene(0, StyleDomain::A, opts).sample;
  for (int64_t r = 0; r < opts.height; ++r) {
    double expected = opts.far_depth +
                      (opts.near_depth - opts.far_depth) * (double)r / (double)(opts.height - 1);
    CHECK(s.depth.index({r, 0}).item<double>() == doctest::Approx(expected).epsilon(1e-5));
    // rows are constant
    CHECK(s.depth[r].min().item<double>() == doctest::Approx(s.depth[r].max().item<double>()));
  }
}

TEST_CASE("toyworld: opposite shading polarity between the domains") {
  // near surfaces are brighter than far ones in A, darker in B
  auto opts = small_opts();
  opts.texture = false;
  auto a = generate_scene(9, StyleDomain::A, opts).sample;
  auto b = generate_scene(9, StyleDomain::B, opts).sample;
  auto lum_a = a.image.mean(0).reshape(-1);
  auto lum_b = b.image.mean(0).reshape(-1);
  auto depth = a.depth.reshape(-1);
  auto near = depth < depth.median();
  auto far = ~near;
  CHECK(lum_a.masked_select(near).mean().item<double>() >
        lum_a.masked_select(far).mean().item<double>());
  CHECK(lum_b.masked_select(near).mean().item<double>() <
        lum_b.masked_select(far).mean().item<double>());
}

TEST_CASE("toyworld: generate_dataset writes a loadable dataset") {
  auto dir = fs::temp_directory_path() / "s2r_test_toyds";
  fs::remove_all(dir);
  ToySceneOptions opts = small_opts();
  generate_dataset(dir.string(), 4, StyleDomain::B, 100, opts);
  auto ds = load_dataset(dir.string());
  REQUIRE(ds.samples.size() == 4);
  for (const auto& s : ds.samples) {
    CHECK(s.image.sizes() == torch::IntArrayRef({3, 32, 32}));
    CHECK(s.domain == Domain::StyleCorpus);
  }
  // matches in-memory generation up to png quantization
  auto ref = generate_scene(100, StyleDomain::B, opts).sample;
  CHECK((ds.samples[0].depth - ref.depth).abs().max().item<double>() <= 1.0 / 512.0 + 1e-9);
  CHECK((ds.samples[0].image - ref.image).abs().max().item<double>() <= 2.0 / 255.0 + 1e-6);
  fs::remove_all(dir);
}
