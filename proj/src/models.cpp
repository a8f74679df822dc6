#include "s2r/models.hpp"

namespace s2r {

std::string to_string(PipelineMode m) {
  switch (m) {
    case PipelineMode::Baseline: return "baseline";
    case PipelineMode::SteOnly: return "ste_only";
    case PipelineMode::Full: return "full";
  }
  return "full";
}

PipelineMode pipeline_from_string(const std::string& s) {
  if (s == "baseline") return PipelineMode::Baseline;
  if (s == "ste_only") return PipelineMode::SteOnly;
  if (s == "full") return PipelineMode::Full;
  throw ConfigError("unknown pipeline mode: " + s);
}

int64_t Models::dp_in_channels(PipelineMode pipeline, CombineMode combine) {
  if (pipeline == PipelineMode::Baseline) return 3;
  if (pipeline == PipelineMode::Full && combine == CombineMode::Concat) return 2;
  return 1;
}

Models Models::build(const ModelConfig& cfg, double max_depth, PipelineMode pipeline) {
  Models m;
  m.cfg = cfg;
  m.max_depth = max_depth;
  m.pipeline = pipeline;
  m.ste = std::make_shared<SteModel>(cfg);
  m.dsa = AttentionNet(cfg.dsa_channels);
  m.dp = DepthPredictor(dp_in_channels(pipeline, cfg.combine), cfg.dp_channels, max_depth);
  return m;
}

std::vector<std::pair<std::string, std::shared_ptr<torch::nn::Module>>> Models::named_modules() const {
  return {
      {"ste.encoder", ste->encoder.ptr()},     {"ste.style_s", ste->style_s.ptr()},
      {"ste.style_t", ste->style_t.ptr()},     {"ste.gen_s", ste->gen_s.ptr()},
      {"ste.gen_t", ste->gen_t.ptr()},         {"ste.disc_s", ste->disc_s.ptr()},
      {"ste.disc_t", ste->disc_t.ptr()},       {"ste.decoder_ds", ste->decoder_ds.ptr()},
      {"dsa", dsa.ptr()},                      {"dp", dp.ptr()},
  };
}

Checkpoint Models::to_checkpoint() const {
  Checkpoint ckpt;
  for (const auto& [prefix, mod] : named_modules()) {
    for (const auto& p : mod->named_parameters(true)) ckpt.put(prefix + "." + p.key(), p.value());
    for (const auto& b : mod->named_buffers(true)) ckpt.put(prefix + "." + b.key(), b.value());
  }
  return ckpt;
}

void Models::load_arrays(const Checkpoint& ckpt, const std::vector<std::string>& skip_prefixes) {
  torch::NoGradGuard ng;
  for (const auto& [prefix, mod] : named_modules()) {
    bool skip = false;
    for (const auto& s : skip_prefixes)
      if (prefix.rfind(s, 0) == 0) skip = true;
    if (skip) continue;
    auto copy_into = [&](const std::string& name, torch::Tensor dst) {
      auto it = ckpt.arrays.find(prefix + "." + name);
      if (it == ckpt.arrays.end())
        throw std::runtime_error("checkpoint missing array: " + prefix + "." + name);
      if (it->second.sizes() != dst.sizes())
        throw ShapeError("checkpoint array shape mismatch for " + prefix + "." + name);
      dst.copy_(it->second.to(dst.dtype()));
    };
    for (const auto& p : mod->named_parameters(true)) copy_into(p.key(), p.value());
    for (const auto& b : mod->named_buffers(true)) copy_into(b.key(), b.value());
  }
}

torch::Tensor Models::predict(const torch::Tensor& images) {
  switch (pipeline) {
    case PipelineMode::Baseline:
      return dp->forward(images);
    case PipelineMode::SteOnly: {
      auto ms = ste->decode_structure_map(ste->encode_structure(images));
      return dp->forward(ms);
    }
    case PipelineMode::Full:
      return infer(images).depth;
  }
  throw ConfigError("predict: unknown pipeline mode");
}

Intermediates Models::infer(const torch::Tensor& images) {
  Intermediates out;
  out.ms = ste->decode_structure_map(ste->encode_structure(images));
  out.ma = dsa->forward(images);
  out.msa = combine(out.ms, out.ma, cfg.combine);
  out.depth = dp->forward(out.msa);
  return out;
}

void Models::set_eval() {
  for (auto& [name, mod] : named_modules()) mod->eval();
}

void Models::set_train() {
  for (auto& [name, mod] : named_modules()) mod->train();
}

Models models_from_checkpoint(const Checkpoint& ckpt) {
  const auto& meta = ckpt.metadata;
  ModelConfig cfg;
  const auto& mm = meta.at("model");
  cfg.base_channels = mm.at("base_channels").get<int64_t>();
  cfg.style_dim = mm.at("style_dim").get<int64_t>();
  cfg.dsa_channels = mm.at("dsa_channels").get<int64_t>();
  cfg.dp_channels = mm.at("dp_channels").get<int64_t>();
  cfg.disc_channels = mm.at("disc_channels").get<int64_t>();
  cfg.disc_scales = mm.at("disc_scales").get<int64_t>();
  cfg.combine = combine_from_string(mm.at("combine").get<std::string>());
  cfg.nonneg_structure_map = mm.at("nonneg_structure_map").get<bool>();
  auto models = Models::build(cfg, meta.at("max_depth").get<double>(),
                              pipeline_from_string(meta.at("pipeline").get<std::string>()));
  models.load_arrays(ckpt);
  return models;
}

std::vector<torch::Tensor> collect_params(const std::vector<std::shared_ptr<torch::nn::Module>>& mods) {
  std::vector<torch::Tensor> out;
  for (const auto& m : mods)
    for (auto& p : m->parameters(true))
      if (p.requires_grad()) out.push_back(p);
  return out;
}

}  // namespace s2r
