#include "s2r/depth_predictor.hpp"

namespace s2r {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {
nn::InstanceNorm2d make_in(int64_t ch) { return nn::InstanceNorm2d(nn::InstanceNorm2dOptions(ch).affine(true)); }
torch::Tensor up2(const torch::Tensor& x) {
  return F::interpolate(x, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2, 2}).mode(torch::kNearest));
}
}  // namespace

DepthPredictorImpl::DepthPredictorImpl(int64_t in_ch, int64_t c, double max_depth_, double eps_)
    : in_channels(in_ch), max_depth(max_depth_), eps(eps_) {
  enc0 = register_module("enc0", nn::Conv2d(nn::Conv2dOptions(in_ch, c, 3).padding(1)));
  enc1 = register_module("enc1", nn::Conv2d(nn::Conv2dOptions(c, 2 * c, 3).stride(2).padding(1)));
  enc2 = register_module("enc2", nn::Conv2d(nn::Conv2dOptions(2 * c, 4 * c, 3).stride(2).padding(1)));
  enc3 = register_module("enc3", nn::Conv2d(nn::Conv2dOptions(4 * c, 8 * c, 3).stride(2).padding(1)));
  n0 = register_module("n0", make_in(c));
  n1 = register_module("n1", make_in(2 * c));
  n2 = register_module("n2", make_in(4 * c));
  n3 = register_module("n3", make_in(8 * c));
  dec3 = register_module("dec3", nn::Conv2d(nn::Conv2dOptions(8 * c + 4 * c, 4 * c, 3).padding(1)));
  dec2 = register_module("dec2", nn::Conv2d(nn::Conv2dOptions(4 * c + 2 * c, 2 * c, 3).padding(1)));
  dec1 = register_module("dec1", nn::Conv2d(nn::Conv2dOptions(2 * c + c, c, 3).padding(1)));
  head = register_module("head", nn::Conv2d(nn::Conv2dOptions(c, 1, 3).padding(1)));
}

torch::Tensor DepthPredictorImpl::forward(torch::Tensor msa) {
  if (msa.dim() == 3) msa = msa.unsqueeze(1);  // NxHxW -> Nx1xHxW
  if (msa.size(1) != in_channels)
    throw ShapeError("predict_depth: expected " + std::to_string(in_channels) + " input channels, got " +
                     std::to_string(msa.size(1)));
  if (msa.size(-1) % 8 != 0 || msa.size(-2) % 8 != 0)
    throw ShapeError("predict_depth: input dims must be divisible by 8");

  auto f0 = torch::relu(n0->forward(enc0->forward(msa)));
  auto f1 = torch::relu(n1->forward(enc1->forward(f0)));
  auto f2 = torch::relu(n2->forward(enc2->forward(f1)));
  auto f3 = torch::relu(n3->forward(enc3->forward(f2)));
  auto x = torch::relu(dec3->forward(torch::cat({up2(f3), f2}, 1)));
  x = torch::relu(dec2->forward(torch::cat({up2(x), f1}, 1)));
  x = torch::relu(dec1->forward(torch::cat({up2(x), f0}, 1)));
  auto raw = head->forward(x).squeeze(1);
  return eps + (max_depth - eps) * torch::sigmoid(raw);
}

}  // namespace s2r
