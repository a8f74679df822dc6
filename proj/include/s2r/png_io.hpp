#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <string>
#include <vector>

namespace s2r::png_io {

// Depth-on-disk convention: 16-bit grayscale PNG, stored = round(depth_m * 256),
// 0 reserved for invalid pixels. Valid encode range is [0, 256) meters.
std::vector<uint8_t> encode_depth_png(const torch::Tensor& depth);
torch::Tensor decode_depth_png(const std::vector<uint8_t>& bytes);

void write_depth_png(const std::string& path, const torch::Tensor& depth);
torch::Tensor read_depth_png(const std::string& path);

// 8-bit RGB image files. Tensors are 3xHxW float in [-1, 1].
void write_image_png(const std::string& path, const torch::Tensor& image);
torch::Tensor read_image_png(const std::string& path);

// 8-bit grayscale from a HxW float tensor in [0, 1] (clamped).
void write_gray_png(const std::string& path, const torch::Tensor& map01);

// 8-bit RGB from a HxWx3 uint8 tensor.
void write_rgb8_png(const std::string& path, const torch::Tensor& rgb);

}  // namespace s2r::png_io
