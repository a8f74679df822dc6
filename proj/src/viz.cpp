#include "s2r/viz.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "s2r/errors.hpp"
#include "s2r/models.hpp"
#include "s2r/png_io.hpp"

namespace fs = std::filesystem;

namespace s2r {

namespace {

// inferno anchors, evenly spaced in [0,1]
constexpr float kInferno[][3] = {
    {0.001f, 0.000f, 0.014f}, {0.078f, 0.042f, 0.206f}, {0.226f, 0.036f, 0.388f},
    {0.373f, 0.074f, 0.432f}, {0.522f, 0.128f, 0.420f}, {0.665f, 0.182f, 0.370f},
    {0.797f, 0.255f, 0.287f}, {0.898f, 0.354f, 0.192f}, {0.962f, 0.489f, 0.084f},
    {0.988f, 0.645f, 0.040f}, {0.964f, 0.812f, 0.227f}, {0.988f, 0.998f, 0.645f},
};
constexpr int kNAnchors = sizeof(kInferno) / sizeof(kInferno[0]);

struct MinMax {
  double lo, hi;
};

MinMax minmax(const torch::Tensor& t) {
  return {t.min().item<double>(), t.max().item<double>()};
}

torch::Tensor normalize01(const torch::Tensor& t, const MinMax& mm) {
  if (mm.hi == mm.lo) return torch::zeros_like(t);
  return (t - mm.lo) / (mm.hi - mm.lo);
}

}  // namespace

torch::Tensor apply_inferno(const torch::Tensor& map01) {
  auto m = map01.clamp(0, 1).to(torch::kFloat32).contiguous();
  const int64_t h = m.size(0), w = m.size(1);
  auto out = torch::empty({h, w, 3}, torch::kUInt8);
  auto mi = m.accessor<float, 2>();
  auto oi = out.accessor<uint8_t, 3>();
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      const float x = mi[r][c] * (kNAnchors - 1);
      const int i0 = std::min((int)x, kNAnchors - 2);
      const float f = x - (float)i0;
      for (int k = 0; k < 3; ++k) {
        const float v = kInferno[i0][k] * (1 - f) + kInferno[i0 + 1][k] * f;
        oi[r][c][k] = (uint8_t)std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f);
      }
    }
  }
  return out;
}

void visualize(const Checkpoint& ckpt, const std::string& image_path, const std::string& out_dir) {
  const int stage = ckpt.metadata.value("stage", 0);
  const auto pipeline = pipeline_from_string(ckpt.metadata.at("pipeline").get<std::string>());
  if (pipeline != PipelineMode::Full || stage < 3)
    throw std::runtime_error("visualize: checkpoint is stage " + std::to_string(stage) +
                             "; the DSA/DP modules of stage 3 are missing");

  auto models = models_from_checkpoint(ckpt);
  models.set_eval();
  auto image = png_io::read_image_png(image_path).unsqueeze(0);

  Intermediates inter;
  {
    torch::NoGradGuard ng;
    inter = models.infer(image);
  }
  auto ms = inter.ms.squeeze(0).squeeze(0);
  auto ma = inter.ma.squeeze(0).squeeze(0);
  auto msa = inter.msa.squeeze(0).select(0, 0);  // first channel for display
  auto depth = inter.depth.squeeze(0);

  fs::create_directories(out_dir);
  const auto mm_ms = minmax(ms);
  const auto mm_msa = minmax(msa);
  auto disp = 1.0 / depth;  // inverse-depth display
  const auto mm_disp = minmax(disp);

  png_io::write_gray_png((fs::path(out_dir) / "structure.png").string(), normalize01(ms, mm_ms));
  png_io::write_gray_png((fs::path(out_dir) / "attention.png").string(), ma);  // already (0,1)
  png_io::write_gray_png((fs::path(out_dir) / "msa.png").string(), normalize01(msa, mm_msa));
  png_io::write_rgb8_png((fs::path(out_dir) / "depth.png").string(),
                         apply_inferno(normalize01(disp, mm_disp)));

  std::ofstream sidecar(fs::path(out_dir) / "viz_constants.txt");
  sidecar.precision(10);
  sidecar << "structure_min = " << mm_ms.lo << "\nstructure_max = " << mm_ms.hi << "\n"
          << "msa_min = " << mm_msa.lo << "\nmsa_max = " << mm_msa.hi << "\n"
          << "inv_depth_min = " << mm_disp.lo << "\ninv_depth_max = " << mm_disp.hi << "\n"
          << "attention_display = direct (0,1)\n";
}

}  // namespace s2r
