#include "s2r/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "s2r/errors.hpp"

namespace s2r::png_io {

namespace {

struct MemReader {
  const uint8_t* data;
  size_t size;
  size_t pos;
};

void mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) png_error(png, "png: read past end of buffer");
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

void mem_write(png_structp png, png_bytep data, png_size_t n) {
  auto* v = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  v->insert(v->end(), data, data + n);
}

void mem_flush(png_structp) {}

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info = png_create_info_struct(png);
    if (!png || !info) throw std::runtime_error("png: writer allocation failed");
  }
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info = png_create_info_struct(png);
    if (!png || !info) throw std::runtime_error("png: reader allocation failed");
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), (std::streamsize)bytes.size());
}

std::vector<uint8_t> encode_gray16(const std::vector<uint16_t>& pix, int64_t h, int64_t w) {
  PngWriter wr;
  std::vector<uint8_t> out;
  if (setjmp(png_jmpbuf(wr.png))) throw std::runtime_error("png: encode failed");
  png_set_write_fn(wr.png, &out, mem_write, mem_flush);
  png_set_IHDR(wr.png, wr.info, (png_uint_32)w, (png_uint_32)h, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wr.png, wr.info);
  // PNG is big-endian
  std::vector<uint8_t> row(2 * (size_t)w);
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      uint16_t v = pix[(size_t)(r * w + c)];
      row[2 * (size_t)c] = (uint8_t)(v >> 8);
      row[2 * (size_t)c + 1] = (uint8_t)(v & 0xff);
    }
    png_write_row(wr.png, row.data());
  }
  png_write_end(wr.png, nullptr);
  return out;
}

std::vector<uint8_t> encode_rgb8(const std::vector<uint8_t>& pix, int64_t h, int64_t w) {
  PngWriter wr;
  std::vector<uint8_t> out;
  if (setjmp(png_jmpbuf(wr.png))) throw std::runtime_error("png: encode failed");
  png_set_write_fn(wr.png, &out, mem_write, mem_flush);
  png_set_IHDR(wr.png, wr.info, (png_uint_32)w, (png_uint_32)h, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wr.png, wr.info);
  for (int64_t r = 0; r < h; ++r) png_write_row(wr.png, const_cast<uint8_t*>(pix.data()) + r * w * 3);
  png_write_end(wr.png, nullptr);
  return out;
}

std::vector<uint8_t> encode_gray8(const std::vector<uint8_t>& pix, int64_t h, int64_t w) {
  PngWriter wr;
  std::vector<uint8_t> out;
  if (setjmp(png_jmpbuf(wr.png))) throw std::runtime_error("png: encode failed");
  png_set_write_fn(wr.png, &out, mem_write, mem_flush);
  png_set_IHDR(wr.png, wr.info, (png_uint_32)w, (png_uint_32)h, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wr.png, wr.info);
  for (int64_t r = 0; r < h; ++r) png_write_row(wr.png, const_cast<uint8_t*>(pix.data()) + r * w);
  png_write_end(wr.png, nullptr);
  return out;
}

}  // namespace

std::vector<uint8_t> encode_depth_png(const torch::Tensor& depth) {
  TORCH_CHECK(depth.dim() == 2, "depth must be HxW");
  auto d = depth.to(torch::kFloat64).contiguous();
  int64_t h = d.size(0), w = d.size(1);
  auto acc = d.accessor<double, 2>();
  std::vector<uint16_t> pix((size_t)(h * w));
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      double v = acc[r][c];
      if (v < 0) throw std::runtime_error("encode_depth_png: negative depth");
      if (v >= 256.0) throw std::runtime_error("encode_depth_png: depth >= 256 m not representable");
      pix[(size_t)(r * w + c)] = (uint16_t)std::llround(v * 256.0);
    }
  }
  return encode_gray16(pix, h, w);
}

torch::Tensor decode_depth_png(const std::vector<uint8_t>& bytes) {
  PngReader rd;
  MemReader mem{bytes.data(), bytes.size(), 0};
  if (setjmp(png_jmpbuf(rd.png))) throw std::runtime_error("png: decode failed");
  png_set_read_fn(rd.png, &mem, mem_read);
  png_read_info(rd.png, rd.info);
  int bit_depth = png_get_bit_depth(rd.png, rd.info);
  int color_type = png_get_color_type(rd.png, rd.info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY)
    throw std::runtime_error("decode_depth_png: expected 16-bit grayscale PNG");
  int64_t h = png_get_image_height(rd.png, rd.info);
  int64_t w = png_get_image_width(rd.png, rd.info);
  auto out = torch::empty({h, w}, torch::kFloat32);
  auto acc = out.accessor<float, 2>();
  std::vector<uint8_t> row(2 * (size_t)w);
  for (int64_t r = 0; r < h; ++r) {
    png_read_row(rd.png, row.data(), nullptr);
    for (int64_t c = 0; c < w; ++c) {
      uint16_t v = (uint16_t)((row[2 * (size_t)c] << 8) | row[2 * (size_t)c + 1]);
      acc[r][c] = (float)(v / 256.0);
    }
  }
  return out;
}

void write_depth_png(const std::string& path, const torch::Tensor& depth) {
  write_file(path, encode_depth_png(depth));
}

torch::Tensor read_depth_png(const std::string& path) { return decode_depth_png(read_file(path)); }

void write_image_png(const std::string& path, const torch::Tensor& image) {
  TORCH_CHECK(image.dim() == 3 && image.size(0) == 3, "image must be 3xHxW");
  auto im = image.clamp(-1, 1).add(1).mul(127.5).round().to(torch::kUInt8).contiguous();
  int64_t h = im.size(1), w = im.size(2);
  auto acc = im.accessor<uint8_t, 3>();
  std::vector<uint8_t> pix((size_t)(h * w * 3));
  for (int64_t r = 0; r < h; ++r)
    for (int64_t c = 0; c < w; ++c)
      for (int64_t k = 0; k < 3; ++k) pix[(size_t)((r * w + c) * 3 + k)] = acc[k][r][c];
  write_file(path, encode_rgb8(pix, h, w));
}

torch::Tensor read_image_png(const std::string& path) {
  auto bytes = read_file(path);
  PngReader rd;
  MemReader mem{bytes.data(), bytes.size(), 0};
  if (setjmp(png_jmpbuf(rd.png))) throw std::runtime_error("png: decode failed: " + path);
  png_set_read_fn(rd.png, &mem, mem_read);
  png_read_info(rd.png, rd.info);
  // normalize anything to 8-bit RGB
  png_set_strip_16(rd.png);
  png_set_palette_to_rgb(rd.png);
  png_set_expand_gray_1_2_4_to_8(rd.png);
  png_set_gray_to_rgb(rd.png);
  png_set_strip_alpha(rd.png);
  png_read_update_info(rd.png, rd.info);
  int64_t h = png_get_image_height(rd.png, rd.info);
  int64_t w = png_get_image_width(rd.png, rd.info);
  std::vector<uint8_t> row((size_t)(3 * w));
  auto out = torch::empty({3, h, w}, torch::kFloat32);
  auto acc = out.accessor<float, 3>();
  for (int64_t r = 0; r < h; ++r) {
    png_read_row(rd.png, row.data(), nullptr);
    for (int64_t c = 0; c < w; ++c)
      for (int64_t k = 0; k < 3; ++k) acc[k][r][c] = (float)(row[(size_t)(3 * c + k)] / 127.5 - 1.0);
  }
  return out;
}

void write_gray_png(const std::string& path, const torch::Tensor& map01) {
  TORCH_CHECK(map01.dim() == 2, "gray map must be HxW");
  auto m = map01.clamp(0, 1).mul(255).round().to(torch::kUInt8).contiguous();
  int64_t h = m.size(0), w = m.size(1);
  auto acc = m.accessor<uint8_t, 2>();
  std::vector<uint8_t> pix((size_t)(h * w));
  for (int64_t r = 0; r < h; ++r)
    for (int64_t c = 0; c < w; ++c) pix[(size_t)(r * w + c)] = acc[r][c];
  write_file(path, encode_gray8(pix, h, w));
}

void write_rgb8_png(const std::string& path, const torch::Tensor& rgb) {
  TORCH_CHECK(rgb.dim() == 3 && rgb.size(2) == 3 && rgb.dtype() == torch::kUInt8, "expected HxWx3 uint8");
  auto m = rgb.contiguous();
  int64_t h = m.size(0), w = m.size(1);
  std::vector<uint8_t> pix((size_t)(h * w * 3));
  std::memcpy(pix.data(), m.data_ptr<uint8_t>(), pix.size());
  write_file(path, encode_rgb8(pix, h, w));
}

}  // namespace s2r::png_io
