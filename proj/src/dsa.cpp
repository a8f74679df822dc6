#include "s2r/dsa.hpp"

namespace s2r {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {

struct DilatedResBlockImpl : nn::Module {
  DilatedResBlockImpl(int64_t ch, int64_t dilation) {
    conv1 = register_module("conv1", nn::Conv2d(nn::Conv2dOptions(ch, ch, 3).padding(dilation).dilation(dilation)));
    conv2 = register_module("conv2", nn::Conv2d(nn::Conv2dOptions(ch, ch, 3).padding(dilation).dilation(dilation)));
    norm1 = register_module("norm1", nn::InstanceNorm2d(nn::InstanceNorm2dOptions(ch).affine(true)));
    norm2 = register_module("norm2", nn::InstanceNorm2d(nn::InstanceNorm2dOptions(ch).affine(true)));
  }
  torch::Tensor forward(torch::Tensor x) {
    auto y = torch::relu(norm1->forward(conv1->forward(x)));
    y = norm2->forward(conv2->forward(y));
    return torch::relu(x + y);
  }
  nn::Conv2d conv1{nullptr}, conv2{nullptr};
  nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(DilatedResBlock);

struct UpConvImpl : nn::Module {
  UpConvImpl(int64_t in_ch, int64_t out_ch) {
    conv = register_module("conv", nn::Conv2d(nn::Conv2dOptions(in_ch, out_ch, 5).padding(2)));
  }
  torch::Tensor forward(torch::Tensor x) {
    x = F::interpolate(x, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2, 2}).mode(torch::kNearest));
    return torch::relu(conv->forward(x));
  }
  nn::Conv2d conv{nullptr};
};
TORCH_MODULE(UpConv);

struct ConvINReluImpl : nn::Module {
  ConvINReluImpl(int64_t in_ch, int64_t out_ch, int64_t k, int64_t stride, int64_t pad) {
    conv = register_module("conv", nn::Conv2d(nn::Conv2dOptions(in_ch, out_ch, k).stride(stride).padding(pad)));
    norm = register_module("norm", nn::InstanceNorm2d(nn::InstanceNorm2dOptions(out_ch).affine(true)));
  }
  torch::Tensor forward(torch::Tensor x) { return torch::relu(norm->forward(conv->forward(x))); }
  nn::Conv2d conv{nullptr};
  nn::InstanceNorm2d norm{nullptr};
};
TORCH_MODULE(ConvINRelu);

}  // namespace

AttentionNetImpl::AttentionNetImpl(int64_t c) {
  // dilated residual encoder, stride budget 8
  encoder = register_module("encoder",
                            nn::Sequential(ConvINRelu(3, c, 7, 1, 3), ConvINRelu(c, 2 * c, 3, 2, 1),
                                           ConvINRelu(2 * c, 4 * c, 3, 2, 1), ConvINRelu(4 * c, 4 * c, 3, 2, 1),
                                           DilatedResBlock(4 * c, 2), DilatedResBlock(4 * c, 4)));
  // three up-projection layers + 1-channel head (sigmoid applied in forward)
  decoder = register_module("decoder",
                            nn::Sequential(UpConv(4 * c, 2 * c), UpConv(2 * c, c), UpConv(c, c),
                                           nn::Conv2d(nn::Conv2dOptions(c, 1, 3).padding(1))));
}

torch::Tensor AttentionNetImpl::forward(torch::Tensor image) {
  if (image.size(-1) % 8 != 0 || image.size(-2) % 8 != 0)
    throw ShapeError("predict_attention: image dims must be divisible by 8");
  auto x = encoder->forward(image);
  x = decoder->forward(x);
  // clamp keeps float32 sigmoid strictly inside (0, 1)
  return torch::sigmoid(x.clamp(-12.0, 12.0));
}

torch::Tensor combine(const torch::Tensor& ms, const torch::Tensor& ma, CombineMode mode) {
  if (ms.sizes() != ma.sizes()) throw ShapeError("combine: ms and ma must have equal shapes");
  switch (mode) {
    case CombineMode::Multiply: return ms * ma;
    case CombineMode::Add: return ms + ma;
    case CombineMode::Concat: {
      if (ms.dim() == 2) return torch::stack({ms, ma}, 0);  // HxW -> 2xHxW
      return torch::cat({ms, ma}, ms.dim() == 4 ? 1 : 0);   // channel dim
    }
  }
  throw ConfigError("combine: unknown mode");
}

}  // namespace s2r
