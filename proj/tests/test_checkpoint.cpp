#include <filesystem>
#include <fstream>

#include "s2r/checkpoint.hpp"

// doctest last: torch's logging headers define a conflicting CHECK macro
#ifdef CHECK
#undef CHECK
#endif
#include "doctest.h"

using namespace s2r;
namespace fs = std::filesystem;

namespace {

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Checkpoint sample_ckpt() {
  torch::manual_seed(33);
  Checkpoint c;
  c.put("dp.enc0.weight", torch::randn({4, 3, 3, 3}));
  c.put("ste.encoder.conv1.weight", torch::randn({8, 3, 7, 7}));
  c.put("ste.encoder.conv1.bias", torch::randn({8}));
  c.metadata = {{"stage", 2}, {"epoch", 5}, {"note", "unit test"}};
  return c;
}

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / "s2r_test_ckpt";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("checkpoint: save -> load preserves arrays and metadata") {
  auto dir = temp_dir();
  auto c = sample_ckpt();
  auto path = (dir / "a.ckpt").string();
  c.save(path);
  auto back = Checkpoint::load(path);
  REQUIRE(back.arrays.size() == c.arrays.size());
  for (const auto& [name, t] : c.arrays) {
    REQUIRE(back.arrays.count(name) == 1);
    CHECK(torch::equal(back.arrays.at(name), t));
  }
  CHECK(back.metadata.at("stage").get<int>() == 2);
  CHECK(back.metadata.at("note").get<std::string>() == "unit test");
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: save -> load -> save is byte-identical") {
  auto dir = temp_dir();
  auto c = sample_ckpt();
  auto p1 = (dir / "one.ckpt").string();
  auto p2 = (dir / "two.ckpt").string();
  c.save(p1);
  Checkpoint::load(p1).save(p2);
  CHECK(slurp(p1) == slurp(p2));
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: has_prefix") {
  auto c = sample_ckpt();
  CHECK(c.has_prefix("ste.encoder"));
  CHECK(c.has_prefix("dp."));
  CHECK(!c.has_prefix("dsa."));
}

TEST_CASE("checkpoint: hash is stable and prefix-scoped") {
  auto c = sample_ckpt();
  auto h_all = hash_arrays(c);
  CHECK(h_all == hash_arrays(c));
  auto h_enc = hash_arrays(c, "ste.encoder");
  auto h_dp = hash_arrays(c, "dp.");
  CHECK(h_enc != h_dp);
  // untouched prefixes keep their hash when another array changes
  auto c2 = sample_ckpt();
  c2.arrays.at("dp.enc0.weight") += 1.0;
  CHECK(hash_arrays(c2, "ste.encoder") == h_enc);
  CHECK(hash_arrays(c2, "dp.") != h_dp);
  CHECK(hash_arrays(c2) != h_all);
}

TEST_CASE("checkpoint: load rejects garbage") {
  auto dir = temp_dir();
  auto path = (dir / "junk.ckpt").string();
  std::ofstream(path, std::ios::binary) << "definitely not a checkpoint";
  CHECK_THROWS(Checkpoint::load(path));
  CHECK_THROWS(Checkpoint::load((dir / "missing.ckpt").string()));
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: put stores a detached float32 contiguous copy") {
  Checkpoint c;
  auto t = torch::randn({2, 2}, torch::kDouble).t();  // non-contiguous double
  c.put("x", t);
  auto& stored = c.arrays.at("x");
  CHECK(stored.dtype() == torch::kFloat32);
  CHECK(stored.is_contiguous());
  CHECK(torch::allclose(stored, t.to(torch::kFloat32)));
}
