#pragma once

#include <torch/torch.h>

#include <vector>

#include "s2r/config.hpp"
#include "s2r/errors.hpp"

namespace s2r {

enum class TransDomain { Source, Target };

// --- building blocks ---------------------------------------------------

struct UpProjectionImpl : torch::nn::Module {
  UpProjectionImpl(int64_t in_ch, int64_t out_ch);
  torch::Tensor forward(torch::Tensor x);
  torch::nn::Conv2d conv{nullptr};
};
TORCH_MODULE(UpProjection);

struct ResBlockINImpl : torch::nn::Module {
  explicit ResBlockINImpl(int64_t ch);
  torch::Tensor forward(torch::Tensor x);
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ResBlockIN);

// --- STE networks -------------------------------------------------------

// Shared structure encoder E_s: 4x downsampling, instance-normalized.
// Output has 4 * base_channels channels at H/4 x W/4.
struct StructureEncoderImpl : torch::nn::Module {
  explicit StructureEncoderImpl(int64_t base_channels);
  torch::Tensor forward(torch::Tensor image);
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr}, norm3{nullptr};
  ResBlockIN res1{nullptr}, res2{nullptr};
};
TORCH_MODULE(StructureEncoder);

// Domain-specific style encoder, no normalization layers.
struct StyleEncoderImpl : torch::nn::Module {
  StyleEncoderImpl(int64_t base_channels, int64_t style_dim);
  torch::Tensor forward(torch::Tensor image);
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr}, conv4{nullptr}, to_style{nullptr};
};
TORCH_MODULE(StyleEncoder);

// Decoder G: structure code + broadcast style vector -> image in [-1,1].
struct ImageDecoderImpl : torch::nn::Module {
  ImageDecoderImpl(int64_t code_channels, int64_t style_dim);
  torch::Tensor forward(torch::Tensor code, torch::Tensor style);
  torch::nn::Linear style_fc{nullptr};
  torch::nn::Conv2d merge{nullptr}, res1a{nullptr}, res1b{nullptr};
  UpProjection up1{nullptr}, up2{nullptr};
  torch::nn::Conv2d to_rgb{nullptr};
};
TORCH_MODULE(ImageDecoder);

// Patch discriminator evaluated on a pyramid of downscaled inputs.
struct MultiScaleDiscriminatorImpl : torch::nn::Module {
  MultiScaleDiscriminatorImpl(int64_t base_channels, int64_t n_scales);
  std::vector<torch::Tensor> forward(torch::Tensor image);
  std::vector<torch::nn::Sequential> scales;
  int64_t n_scales;
};
TORCH_MODULE(MultiScaleDiscriminator);

// D_s: two up-projection layers + 1-channel head (softplus when the
// nonnegative-map flag is on).
struct StructureMapDecoderImpl : torch::nn::Module {
  StructureMapDecoderImpl(int64_t code_channels, bool nonneg);
  torch::Tensor forward(torch::Tensor code);  // Nx1xHxW
  UpProjection up1{nullptr}, up2{nullptr};
  torch::nn::Conv2d head{nullptr};
  bool nonneg;
};
TORCH_MODULE(StructureMapDecoder);

// --- translation objective ----------------------------------------------

// Abstracted so the loss can be exercised on stub models in tests.
struct TranslationModel {
  virtual ~TranslationModel() = default;
  virtual torch::Tensor encode_structure(const torch::Tensor& image) = 0;
  virtual torch::Tensor encode_style(const torch::Tensor& image, TransDomain d) = 0;
  virtual torch::Tensor decode_image(const torch::Tensor& code, const torch::Tensor& style, TransDomain d) = 0;
  virtual std::vector<torch::Tensor> discriminate(const torch::Tensor& image, TransDomain d) = 0;
};

struct TranslationLossBreakdown {
  torch::Tensor recon_image_s, recon_image_t;
  torch::Tensor recon_code_a_s, recon_code_a_t;
  torch::Tensor recon_code_b_s, recon_code_b_t;
  torch::Tensor adv_s, adv_t;
  torch::Tensor total;
};

// Generator-side objective. style_rand_s / style_rand_t are the sampled
// prior codes used for the t->s and s->t translations.
TranslationLossBreakdown translation_loss(TranslationModel& model, const torch::Tensor& batch_s,
                                          const torch::Tensor& batch_t, const torch::Tensor& style_rand_s,
                                          const torch::Tensor& style_rand_t, const GanConfig& gan);

// Discriminator-side objective for the alternating update.
torch::Tensor discriminator_loss(TranslationModel& model, const torch::Tensor& real_s,
                                 const torch::Tensor& real_t, const torch::Tensor& fake_s,
                                 const torch::Tensor& fake_t, const GanConfig& gan);

// i.i.d. N(0, I) style codes, N x style_dim.
torch::Tensor sample_style(int64_t n, int64_t style_dim, torch::Generator& gen);

// --- the real model bundle ----------------------------------------------

struct SteModel : TranslationModel {
  explicit SteModel(const ModelConfig& cfg, torch::Dtype dtype = torch::kFloat32);

  torch::Tensor encode_structure(const torch::Tensor& image) override;
  torch::Tensor encode_style(const torch::Tensor& image, TransDomain d) override;
  torch::Tensor decode_image(const torch::Tensor& code, const torch::Tensor& style, TransDomain d) override;
  std::vector<torch::Tensor> discriminate(const torch::Tensor& image, TransDomain d) override;

  // E_s -> D_s, full resolution 1-channel map
  torch::Tensor decode_structure_map(const torch::Tensor& code);

  StructureEncoder encoder{nullptr};
  StyleEncoder style_s{nullptr}, style_t{nullptr};
  ImageDecoder gen_s{nullptr}, gen_t{nullptr};
  MultiScaleDiscriminator disc_s{nullptr}, disc_t{nullptr};
  StructureMapDecoder decoder_ds{nullptr};
  int64_t style_dim;
};

}  // namespace s2r
