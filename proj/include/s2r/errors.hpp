#pragma once

#include <stdexcept>
#include <string>

namespace s2r {

// Bad configuration or bad CLI arguments. Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor shape / channel mismatch.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A batch (or masked region) with nothing valid in it.
struct DegenerateBatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf appeared during training. Carries the offending loss term and,
// when available, the path of the last good checkpoint.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& term, const std::string& last_good_ckpt)
      : std::runtime_error("training diverged: non-finite value in term '" + term + "'" +
                           (last_good_ckpt.empty() ? "" : "; last good checkpoint: " + last_good_ckpt)),
        term(term),
        last_good_ckpt(last_good_ckpt) {}
  std::string term;
  std::string last_good_ckpt;
};

// A training stage was started without its prerequisite checkpoint state.
struct StageOrderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace s2r
