#include "s2r/losses.hpp"

#include "s2r/errors.hpp"

namespace s2r {

namespace {

torch::Tensor squeeze_channel(const torch::Tensor& t) {
  // accept HxW, NxHxW or Nx1xHxW
  if (t.dim() == 4 && t.size(1) == 1) return t.squeeze(1);
  if (t.dim() == 3 && t.size(0) == 1) return t;  // ambiguous 1xHxW: treat as batch of one
  return t;
}

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) throw ShapeError(std::string("shape mismatch in ") + what);
}

}  // namespace

LossValue depth_l1(const torch::Tensor& pred, const torch::Tensor& gt, const torch::Tensor& mask) {
  auto p = squeeze_channel(pred);
  auto g = squeeze_channel(gt);
  check_same_shape(p, g, "depth_l1");
  check_same_shape(g, mask, "depth_l1 mask");
  auto m = mask.to(p.dtype());
  auto n = m.sum();
  if (n.item<double>() < 1) throw DegenerateBatchError("depth_l1: no valid pixels");
  LossValue lv;
  lv.total = ((p - g).abs() * m).sum() / n;
  lv.terms["depth_l1"] = lv.total;
  return lv;
}

LossValue structure_regularizer(const torch::Tensor& ms_in, const torch::Tensor& gt_depth,
                                const torch::Tensor& mask, double beta, GradForm grad_form,
                                bool mean_reduce) {
  if (beta <= 0) throw ConfigError("structure_regularizer: beta must be > 0");
  auto ms = squeeze_channel(ms_in);
  auto d = squeeze_channel(gt_depth);
  check_same_shape(ms, d, "structure_regularizer");
  check_same_shape(d, mask, "structure_regularizer mask");

  const bool batched = d.dim() == 3;
  auto dd = batched ? d : d.unsqueeze(0);
  auto mm = batched ? mask : mask.unsqueeze(0);
  auto msb = batched ? ms : ms.unsqueeze(0);
  const int64_t H = dd.size(1), W = dd.size(2);

  using torch::indexing::Slice;
  auto zeros_col = torch::zeros({dd.size(0), H, 1}, dd.options());
  auto zeros_row = torch::zeros({dd.size(0), 1, W}, dd.options());
  auto dx = torch::cat({dd.index({Slice(), Slice(), Slice(1)}) - dd.index({Slice(), Slice(), Slice(0, W - 1)}), zeros_col}, 2);
  auto dy = torch::cat({dd.index({Slice(), Slice(1), Slice()}) - dd.index({Slice(), Slice(0, H - 1), Slice()}), zeros_row}, 1);

  auto mb = mm.to(torch::kBool);
  auto true_col = torch::ones({mb.size(0), H, 1}, mb.options());
  auto true_row = torch::ones({mb.size(0), 1, W}, mb.options());
  auto right_ok = torch::cat({mb.index({Slice(), Slice(), Slice(1)}), true_col}, 2);
  auto down_ok = torch::cat({mb.index({Slice(), Slice(1), Slice()}), true_row}, 1);
  auto counted = mb & right_ok & down_ok;
  // the bottom-right corner has no forward difference at all
  counted.index_put_({Slice(), H - 1, W - 1}, false);

  auto n = counted.sum();
  if (n.item<double>() < 1) throw DegenerateBatchError("structure_regularizer: no valid stencil pixels");

  auto g = grad_form == GradForm::SignedSum ? (dx + dy).abs() : dx.abs() + dy.abs();
  auto gate = torch::exp(-beta * g);
  auto contrib = msb.abs() * gate * counted.to(dd.dtype());
  LossValue lv;
  lv.total = mean_reduce ? contrib.sum() / n.to(dd.dtype()) : contrib.sum();
  lv.terms["structure_reg"] = lv.total;
  return lv;
}

LossValue stage2_loss(const torch::Tensor& pred, const torch::Tensor& gt, const torch::Tensor& mask,
                      const torch::Tensor& ms, double lambda, double beta, GradForm grad_form,
                      bool mean_reduce) {
  auto l1 = depth_l1(pred, gt, mask);
  auto reg = structure_regularizer(ms, gt, mask, beta, grad_form, mean_reduce);
  LossValue lv;
  lv.total = l1.total + lambda * reg.total;
  lv.terms["depth_l1"] = l1.total;
  lv.terms["structure_reg"] = reg.total;
  return lv;
}

}  // namespace s2r
