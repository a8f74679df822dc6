#include "s2r/data_pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "s2r/png_io.hpp"

namespace fs = std::filesystem;

namespace s2r {

torch::Tensor clip_depth(const torch::Tensor& depth, double max_depth) {
  if (max_depth <= 0) throw ConfigError("clip_depth: max_depth must be > 0");
  return torch::minimum(depth, torch::full_like(depth, max_depth));
}

namespace {

// Rotate by `deg` about the image center. Bilinear with zero fill for the
// image; nearest for depth/mask, out-of-frame pixels become invalid.
void rotate_sample(ImageSample& s, double deg) {
  const double rad = deg * M_PI / 180.0;
  const double ct = std::cos(rad), st = std::sin(rad);
  const int64_t h = s.height(), w = s.width();
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;

  auto img_in = s.image.contiguous();
  auto dep_in = s.depth.contiguous();
  auto msk_in = s.mask.contiguous();
  auto img = torch::zeros_like(img_in);
  auto dep = torch::zeros_like(dep_in);
  auto msk = torch::zeros_like(msk_in);
  auto ii = img_in.accessor<float, 3>();
  auto di = dep_in.accessor<float, 2>();
  auto mi = msk_in.accessor<bool, 2>();
  auto io = img.accessor<float, 3>();
  auto d_o = dep.accessor<float, 2>();
  auto mo = msk.accessor<bool, 2>();

  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      const double xs = ct * (c - cx) + st * (r - cy) + cx;
      const double ys = -st * (c - cx) + ct * (r - cy) + cy;
      // bilinear image sample, zero outside
      const int64_t x0 = (int64_t)std::floor(xs), y0 = (int64_t)std::floor(ys);
      const double fx = xs - x0, fy = ys - y0;
      for (int64_t k = 0; k < 3; ++k) {
        double acc = 0;
        for (int dy = 0; dy <= 1; ++dy) {
          for (int dx = 0; dx <= 1; ++dx) {
            const int64_t yy = y0 + dy, xx = x0 + dx;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            const double wgt = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
            acc += wgt * ii[k][yy][xx];
          }
        }
        io[k][r][c] = (float)acc;
      }
      // nearest depth/mask
      const int64_t xn = (int64_t)std::llround(xs), yn = (int64_t)std::llround(ys);
      if (xn >= 0 && xn < w && yn >= 0 && yn < h && mi[yn][xn]) {
        d_o[r][c] = di[yn][xn];
        mo[r][c] = true;
      }
    }
  }
  s.image = img;
  s.depth = dep;
  s.mask = msk;
}

}  // namespace

ImageSample augment(const ImageSample& sample, const DatasetConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  ImageSample out;
  out.image = sample.image.clone();
  out.depth = sample.depth.clone();
  out.mask = sample.mask.clone();
  out.domain = sample.domain;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < cfg.flip_probability) {
    out.image = torch::flip(out.image, {2}).contiguous();
    out.depth = torch::flip(out.depth, {1}).contiguous();
    out.mask = torch::flip(out.mask, {1}).contiguous();
  }

  if (cfg.rotation_lo_deg != 0.0 || cfg.rotation_hi_deg != 0.0) {
    std::uniform_real_distribution<double> ang(cfg.rotation_lo_deg, cfg.rotation_hi_deg);
    double deg = ang(rng);
    if (deg != 0.0) rotate_sample(out, deg);
  }

  if (cfg.brightness_jitter > 0) {
    std::uniform_real_distribution<double> bj(1.0 - cfg.brightness_jitter, 1.0 + cfg.brightness_jitter);
    double f = bj(rng);
    // jitter acts on [0,1] intensities, image stays in [-1,1]
    out.image = (((out.image + 1.0) * 0.5 * f).clamp(0.0, 1.0) * 2.0 - 1.0).clamp(-1.0, 1.0);
  }
  return out;
}

ImageSample resize_pair(const ImageSample& sample, int64_t target_h, int64_t target_w) {
  if (target_h <= 0 || target_w <= 0) throw ConfigError("resize_pair: target dims must be positive");
  const int64_t h = sample.height(), w = sample.width();
  if (target_h > 4 * h || target_w > 4 * w)
    std::cerr << "resize_pair: warning: upsampling beyond 4x source resolution\n";

  ImageSample out;
  out.domain = sample.domain;
  if (target_h == h && target_w == w) {
    out.image = sample.image.clone();
    out.depth = sample.depth.clone();
    out.mask = sample.mask.clone();
    return out;
  }

  namespace F = torch::nn::functional;
  out.image = F::interpolate(sample.image.unsqueeze(0),
                             F::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{target_h, target_w})
                                 .mode(torch::kBilinear)
                                 .align_corners(false))
                  .squeeze(0)
                  .clamp(-1, 1);

  // nearest with pixel-center convention: src = floor((i + 0.5) * in / out)
  auto src_idx = [](int64_t i, int64_t in, int64_t out_) {
    auto s = (int64_t)std::floor((i + 0.5) * (double)in / (double)out_);
    return std::min(s, in - 1);
  };
  std::vector<int64_t> rows(target_h), cols(target_w);
  for (int64_t r = 0; r < target_h; ++r) rows[r] = src_idx(r, h, target_h);
  for (int64_t c = 0; c < target_w; ++c) cols[c] = src_idx(c, w, target_w);
  auto ridx = torch::tensor(rows, torch::kLong);
  auto cidx = torch::tensor(cols, torch::kLong);
  out.depth = sample.depth.index_select(0, ridx).index_select(1, cidx).contiguous();
  out.mask = sample.mask.index_select(0, ridx).index_select(1, cidx).contiguous();
  return out;
}

void save_sample(const std::string& root, const std::string& id, const ImageSample& sample) {
  fs::create_directories(fs::path(root) / "images");
  fs::create_directories(fs::path(root) / "depths");
  png_io::write_image_png((fs::path(root) / "images" / (id + ".png")).string(), sample.image);
  png_io::write_depth_png((fs::path(root) / "depths" / (id + ".png")).string(), sample.depth);
}

void append_index(const std::string& root, const std::string& id, Domain domain) {
  std::ofstream out(fs::path(root) / "index.txt", std::ios::app);
  if (!out) throw std::runtime_error("cannot open index file under " + root);
  out << id << " " << to_string(domain) << "\n";
}

SampleDataset load_dataset(const std::string& root) {
  std::ifstream in(fs::path(root) / "index.txt");
  if (!in) throw std::runtime_error("missing index file: " + root + "/index.txt");
  SampleDataset ds;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string id, dom;
    if (!(ss >> id >> dom)) continue;
    ImageSample s;
    s.image = png_io::read_image_png((fs::path(root) / "images" / (id + ".png")).string());
    s.depth = png_io::read_depth_png((fs::path(root) / "depths" / (id + ".png")).string());
    s.mask = s.depth > 0;
    s.domain = domain_from_string(dom);
    ds.samples.push_back(std::move(s));
    ds.ids.push_back(id);
  }
  return ds;
}

Batch make_batch(const std::vector<ImageSample>& samples, const std::vector<size_t>& indices) {
  if (indices.empty()) throw DegenerateBatchError("make_batch: empty index list");
  std::vector<torch::Tensor> imgs, deps, msks;
  imgs.reserve(indices.size());
  for (size_t i : indices) {
    imgs.push_back(samples[i].image);
    deps.push_back(samples[i].depth);
    msks.push_back(samples[i].mask);
  }
  return Batch{torch::stack(imgs), torch::stack(deps), torch::stack(msks)};
}

}  // namespace s2r
