#include "s2r/ste.hpp"

#include <cmath>

namespace s2r {

namespace F = torch::nn::functional;
namespace nn = torch::nn;

namespace {

nn::InstanceNorm2d make_in(int64_t ch) {
  return nn::InstanceNorm2d(nn::InstanceNorm2dOptions(ch).affine(true));
}

torch::Tensor l1(const torch::Tensor& a, const torch::Tensor& b) { return (a - b).abs().mean(); }

void check_finite(const torch::Tensor& t, const char* term) {
  if (!torch::isfinite(t).all().item<bool>()) throw DivergenceError(term, "");
}

}  // namespace

// --- blocks ---------------------------------------------------------------

UpProjectionImpl::UpProjectionImpl(int64_t in_ch, int64_t out_ch) {
  conv = register_module("conv", nn::Conv2d(nn::Conv2dOptions(in_ch, out_ch, 5).stride(1).padding(2)));
}

torch::Tensor UpProjectionImpl::forward(torch::Tensor x) {
  x = F::interpolate(x, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2, 2}).mode(torch::kNearest));
  return torch::relu(conv->forward(x));
}

ResBlockINImpl::ResBlockINImpl(int64_t ch) {
  conv1 = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(ch, ch, 3).padding(1)));
  conv2 = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(ch, ch, 3).padding(1)));
  norm1 = register_module("norm1", make_in(ch));
  norm2 = register_module("norm2", make_in(ch));
}

torch::Tensor ResBlockINImpl::forward(torch::Tensor x) {
  auto y = torch::relu(norm1->forward(conv1->forward(x)));
  y = norm2->forward(conv2->forward(y));
  return x + y;
}

// --- encoders ---------------------------------------------------------------

StructureEncoderImpl::StructureEncoderImpl(int64_t c) {
  conv1 = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(3, c, 7).stride(1).padding(3)));
  conv2 = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(c, 2 * c, 4).stride(2).padding(1)));
  conv3 = register_module("conv3", nn::Conv2d(nn::Conv2dOptions(2 * c, 4 * c, 4).stride(2).padding(1)));
  norm1 = register_module("norm1", make_in(c));
  norm2 = register_module("norm2", make_in(2 * c));
  norm3 = register_module("norm3", make_in(4 * c));
  res1 = register_module("res1", ResBlockIN(4 * c));
  res2 = register_module("res2", ResBlockIN(4 * c));
}

torch::Tensor StructureEncoderImpl::forward(torch::Tensor image) {
  if (image.size(-1) % 4 != 0 || image.size(-2) % 4 != 0)
    throw ShapeError("encode_structure: image dims must be divisible by 4");
  auto x = torch::relu(norm1->forward(conv1->forward(image)));
  x = torch::relu(norm2->forward(conv2->forward(x)));
  x = torch::relu(norm3->forward(conv3->forward(x)));
  x = res1->forward(x);
  return res2->forward(x);
}

StyleEncoderImpl::StyleEncoderImpl(int64_t c, int64_t style_dim) {
  conv1 = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(3, c, 7).stride(1).padding(3)));
  conv2 = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(c, 2 * c, 4).stride(2).padding(1)));
  conv3 = register_module("conv3", nn::Conv2d(nn::Conv2dOptions(2 * c, 4 * c, 4).stride(2).padding(1)));
  conv4 = register_module("conv4", nn::Conv2d(nn::Conv2dOptions(4 * c, 4 * c, 4).stride(2).padding(1)));
  to_style = register_module("to_style", nn::Conv2d(nn::Conv2dOptions(4 * c, style_dim, 1)));
}

torch::Tensor StyleEncoderImpl::forward(torch::Tensor image) {
  auto x = torch::relu(conv1->forward(image));
  x = torch::relu(conv2->forward(x));
  x = torch::relu(conv3->forward(x));
  x = torch::relu(conv4->forward(x));
  x = F::adaptive_avg_pool2d(x, F::AdaptiveAvgPool2dFuncOptions(1));
  return to_style->forward(x).flatten(1);  // N x S
}

// --- decoder ---------------------------------------------------------------

ImageDecoderImpl::ImageDecoderImpl(int64_t code_ch, int64_t style_dim) {
  style_fc = register_module("style_fc", nn::Linear(style_dim, code_ch));
  merge = register_module("merge", nn::Conv2d(nn::Conv2dOptions(2 * code_ch, code_ch, 3).padding(1)));
  res1a = register_module("res1a", nn::Conv2d(nn::Conv2dOptions(code_ch, code_ch, 3).padding(1)));
  res1b = register_module("res1b", nn::Conv2d(nn::Conv2dOptions(code_ch, code_ch, 3).padding(1)));
  up1 = register_module("up1", UpProjection(code_ch, code_ch / 2));
  up2 = register_module("up2", UpProjection(code_ch / 2, code_ch / 4));
  to_rgb = register_module("to_rgb", nn::Conv2d(nn::Conv2dOptions(code_ch / 4, 3, 7).padding(3)));
}

torch::Tensor ImageDecoderImpl::forward(torch::Tensor code, torch::Tensor style) {
  if (style.dim() != 2 || style.size(0) != code.size(0))
    throw ShapeError("decode_image: style must be N x style_dim matching the code batch");
  auto s = style_fc->forward(style).unsqueeze(-1).unsqueeze(-1).expand({-1, -1, code.size(2), code.size(3)});
  auto x = torch::relu(merge->forward(torch::cat({code, s}, 1)));
  auto y = torch::relu(res1a->forward(x));
  x = x + res1b->forward(y);
  x = up1->forward(x);
  x = up2->forward(x);
  return torch::tanh(to_rgb->forward(x));
}

// --- discriminator -----------------------------------------------------------

MultiScaleDiscriminatorImpl::MultiScaleDiscriminatorImpl(int64_t c, int64_t n) : n_scales(n) {
  for (int64_t i = 0; i < n; ++i) {
    nn::Sequential net(
        nn::Conv2d(nn::Conv2dOptions(3, c, 4).stride(2).padding(1)), nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)),
        nn::Conv2d(nn::Conv2dOptions(c, 2 * c, 4).stride(2).padding(1)), nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)),
        nn::Conv2d(nn::Conv2dOptions(2 * c, 4 * c, 4).stride(2).padding(1)), nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)),
        nn::Conv2d(nn::Conv2dOptions(4 * c, 1, 1)));
    scales.push_back(register_module("scale" + std::to_string(i), net));
  }
}

std::vector<torch::Tensor> MultiScaleDiscriminatorImpl::forward(torch::Tensor image) {
  std::vector<torch::Tensor> outs;
  auto x = image;
  for (int64_t i = 0; i < n_scales; ++i) {
    outs.push_back(scales[(size_t)i]->forward(x));
    if (i + 1 < n_scales) x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(3).stride(2).padding(1));
  }
  return outs;
}

// --- D_s -----------------------------------------------------------------

StructureMapDecoderImpl::StructureMapDecoderImpl(int64_t code_ch, bool nonneg_) : nonneg(nonneg_) {
  up1 = register_module("up1", UpProjection(code_ch, code_ch / 2));
  up2 = register_module("up2", UpProjection(code_ch / 2, code_ch / 4));
  head = register_module("head", nn::Conv2d(nn::Conv2dOptions(code_ch / 4, 1, 3).padding(1)));
}

torch::Tensor StructureMapDecoderImpl::forward(torch::Tensor code) {
  auto x = up1->forward(code);
  x = up2->forward(x);
  x = head->forward(x);
  return nonneg ? torch::softplus(x) : x;
}

// --- objective -----------------------------------------------------------

namespace {

torch::Tensor gen_adv(const std::vector<torch::Tensor>& logits, GanObjective obj) {
  torch::Tensor acc;
  for (const auto& l : logits) {
    torch::Tensor term;
    if (obj == GanObjective::LeastSquares) {
      term = (l - 1).pow(2).mean();
    } else {
      term = F::binary_cross_entropy_with_logits(l, torch::ones_like(l));
    }
    acc = acc.defined() ? acc + term : term;
  }
  return acc / (double)logits.size();
}

torch::Tensor disc_adv(const std::vector<torch::Tensor>& real, const std::vector<torch::Tensor>& fake,
                       GanObjective obj) {
  torch::Tensor acc;
  for (size_t i = 0; i < real.size(); ++i) {
    torch::Tensor term;
    if (obj == GanObjective::LeastSquares) {
      term = (real[i] - 1).pow(2).mean() + fake[i].pow(2).mean();
    } else {
      term = F::binary_cross_entropy_with_logits(real[i], torch::ones_like(real[i])) +
             F::binary_cross_entropy_with_logits(fake[i], torch::zeros_like(fake[i]));
    }
    acc = acc.defined() ? acc + term : term;
  }
  return acc / (double)real.size();
}

}  // namespace

TranslationLossBreakdown translation_loss(TranslationModel& model, const torch::Tensor& batch_s,
                                          const torch::Tensor& batch_t, const torch::Tensor& style_rand_s,
                                          const torch::Tensor& style_rand_t, const GanConfig& gan) {
  if (batch_s.size(0) == 0 || batch_t.size(0) == 0)
    throw DegenerateBatchError("translation_loss: empty batch");

  auto code_s = model.encode_structure(batch_s);
  auto code_t = model.encode_structure(batch_t);
  auto sty_s = model.encode_style(batch_s, TransDomain::Source);
  auto sty_t = model.encode_style(batch_t, TransDomain::Target);

  TranslationLossBreakdown b;
  b.recon_image_s = l1(model.decode_image(code_s, sty_s, TransDomain::Source), batch_s);
  b.recon_image_t = l1(model.decode_image(code_t, sty_t, TransDomain::Target), batch_t);

  auto x_s2t = model.decode_image(code_s, style_rand_t, TransDomain::Target);
  auto x_t2s = model.decode_image(code_t, style_rand_s, TransDomain::Source);

  b.recon_code_a_s = l1(model.encode_structure(x_s2t), code_s);
  b.recon_code_b_t = l1(model.encode_style(x_s2t, TransDomain::Target), style_rand_t);
  b.recon_code_a_t = l1(model.encode_structure(x_t2s), code_t);
  b.recon_code_b_s = l1(model.encode_style(x_t2s, TransDomain::Source), style_rand_s);

  b.adv_s = gen_adv(model.discriminate(x_t2s, TransDomain::Source), gan.objective);
  b.adv_t = gen_adv(model.discriminate(x_s2t, TransDomain::Target), gan.objective);

  check_finite(b.recon_image_s, "recon_image_s");
  check_finite(b.recon_image_t, "recon_image_t");
  check_finite(b.recon_code_a_s, "recon_code_a_s");
  check_finite(b.recon_code_a_t, "recon_code_a_t");
  check_finite(b.recon_code_b_s, "recon_code_b_s");
  check_finite(b.recon_code_b_t, "recon_code_b_t");
  check_finite(b.adv_s, "adv_s");
  check_finite(b.adv_t, "adv_t");

  b.total = b.adv_s + b.adv_t + gan.lambda1 * (b.recon_image_s + b.recon_image_t) +
            gan.lambda2 * (b.recon_code_b_t + b.recon_code_a_s) +
            gan.lambda3 * (b.recon_code_b_s + b.recon_code_a_t);
  return b;
}

torch::Tensor discriminator_loss(TranslationModel& model, const torch::Tensor& real_s,
                                 const torch::Tensor& real_t, const torch::Tensor& fake_s,
                                 const torch::Tensor& fake_t, const GanConfig& gan) {
  auto ls = disc_adv(model.discriminate(real_s, TransDomain::Source),
                     model.discriminate(fake_s.detach(), TransDomain::Source), gan.objective);
  auto lt = disc_adv(model.discriminate(real_t, TransDomain::Target),
                     model.discriminate(fake_t.detach(), TransDomain::Target), gan.objective);
  auto total = ls + lt;
  check_finite(total, "disc_loss");
  return total;
}

torch::Tensor sample_style(int64_t n, int64_t style_dim, torch::Generator& gen) {
  return torch::randn({n, style_dim}, gen, torch::TensorOptions().dtype(torch::kFloat32));
}

// --- bundle ----------------------------------------------------------------

SteModel::SteModel(const ModelConfig& cfg, torch::Dtype dtype) : style_dim(cfg.style_dim) {
  const int64_t code_ch = 4 * cfg.base_channels;
  encoder = StructureEncoder(cfg.base_channels);
  style_s = StyleEncoder(cfg.base_channels, cfg.style_dim);
  style_t = StyleEncoder(cfg.base_channels, cfg.style_dim);
  gen_s = ImageDecoder(code_ch, cfg.style_dim);
  gen_t = ImageDecoder(code_ch, cfg.style_dim);
  disc_s = MultiScaleDiscriminator(cfg.disc_channels, cfg.disc_scales);
  disc_t = MultiScaleDiscriminator(cfg.disc_channels, cfg.disc_scales);
  decoder_ds = StructureMapDecoder(code_ch, cfg.nonneg_structure_map);
  if (dtype != torch::kFloat32) {
    encoder->to(dtype);
    style_s->to(dtype);
    style_t->to(dtype);
    gen_s->to(dtype);
    gen_t->to(dtype);
    disc_s->to(dtype);
    disc_t->to(dtype);
    decoder_ds->to(dtype);
  }
}

torch::Tensor SteModel::encode_structure(const torch::Tensor& image) { return encoder->forward(image); }

torch::Tensor SteModel::encode_style(const torch::Tensor& image, TransDomain d) {
  return (d == TransDomain::Source ? style_s : style_t)->forward(image);
}

torch::Tensor SteModel::decode_image(const torch::Tensor& code, const torch::Tensor& style, TransDomain d) {
  return (d == TransDomain::Source ? gen_s : gen_t)->forward(code, style);
}

std::vector<torch::Tensor> SteModel::discriminate(const torch::Tensor& image, TransDomain d) {
  return (d == TransDomain::Source ? disc_s : disc_t)->forward(image);
}

torch::Tensor SteModel::decode_structure_map(const torch::Tensor& code) {
  return decoder_ds->forward(code);
}

}  // namespace s2r
