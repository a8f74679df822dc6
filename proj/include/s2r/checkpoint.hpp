#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

namespace s2r {

// Single-file archive of named little-endian float32 arrays plus a UTF-8
// JSON metadata record. Entries are stored sorted by name, so
// save -> load -> save is byte-identical.
struct Checkpoint {
  std::map<std::string, torch::Tensor> arrays;  // float32, CPU, contiguous
  nlohmann::json metadata;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  void put(const std::string& name, const torch::Tensor& t);
  bool has_prefix(const std::string& prefix) const;
};

// FNV-1a over the raw bytes of every array whose name starts with `prefix`
// (names and shapes included). Used by the stage-freeze contract tests.
uint64_t hash_arrays(const Checkpoint& ckpt, const std::string& prefix = "");

}  // namespace s2r
