#include "s2r/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <random>

#include "s2r/losses.hpp"

namespace fs = std::filesystem;

namespace s2r {

double lr_at(const TrainConfig& cfg, int64_t epoch) {
  if (epoch < 0) throw ConfigError("lr_at: epoch must be >= 0");
  return cfg.base_lr * std::pow(cfg.lr_decay, (double)(epoch / cfg.lr_step_epochs));
}

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
  return buf;
}

nlohmann::json model_meta(const ModelConfig& m) {
  return nlohmann::json{{"base_channels", m.base_channels},
                        {"style_dim", m.style_dim},
                        {"dsa_channels", m.dsa_channels},
                        {"dp_channels", m.dp_channels},
                        {"disc_channels", m.disc_channels},
                        {"disc_scales", m.disc_scales},
                        {"combine", to_string(m.combine)},
                        {"nonneg_structure_map", m.nonneg_structure_map}};
}

Checkpoint snapshot(const Models& models, const TrainConfig& cfg, int stage, int64_t epoch,
                    PipelineMode pipeline, const std::vector<std::string>& frozen) {
  Checkpoint ckpt = models.to_checkpoint();
  ckpt.metadata = nlohmann::json{{"stage", stage},
                                 {"epoch", epoch},
                                 {"pipeline", to_string(pipeline)},
                                 {"max_depth", models.max_depth},
                                 {"model", model_meta(models.cfg)},
                                 {"frozen", frozen},
                                 {"config_fingerprint", hex64(fnv1a(cfg.raw_text))},
                                 {"config_text", cfg.raw_text}};
  return ckpt;
}

std::vector<std::string> frozen_of(const Checkpoint& ckpt) {
  std::vector<std::string> out;
  if (ckpt.metadata.contains("frozen"))
    for (const auto& f : ckpt.metadata.at("frozen")) out.push_back(f.get<std::string>());
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void set_requires_grad(const std::shared_ptr<torch::nn::Module>& mod, bool value) {
  for (auto& p : mod->parameters(true)) p.set_requires_grad(value);
}

std::vector<std::vector<size_t>> make_batches(size_t n, int64_t batch_size, std::mt19937_64& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < n; i += (size_t)batch_size)
    batches.emplace_back(idx.begin() + (long)i, idx.begin() + (long)std::min(n, i + (size_t)batch_size));
  return batches;
}

Batch gather_batch(const SampleDataset& ds, const std::vector<size_t>& indices, const DatasetConfig& dcfg,
                   std::mt19937_64& rng) {
  if (!dcfg.augment) return make_batch(ds.samples, indices);
  std::vector<ImageSample> aug;
  aug.reserve(indices.size());
  for (size_t i : indices) aug.push_back(augment(ds.samples[i], dcfg, rng));
  std::vector<size_t> all(aug.size());
  std::iota(all.begin(), all.end(), 0);
  return make_batch(aug, all);
}

void set_lr(torch::optim::Adam& opt, double lr) {
  for (auto& group : opt.param_groups())
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

void log_epoch(int64_t epoch, double lr, const std::map<std::string, double>& terms) {
  std::cout << "epoch " << epoch << " lr " << lr;
  for (const auto& [k, v] : terms) std::cout << " " << k << "=" << v;
  std::cout << std::endl;
}

std::string save_last_good(const Models& models, const TrainConfig& cfg, int stage, int64_t epoch,
                           PipelineMode pipeline, const std::vector<std::string>& frozen,
                           const std::string& out_dir) {
  fs::create_directories(out_dir);
  auto path = (fs::path(out_dir) / "last_good.ckpt").string();
  snapshot(models, cfg, stage, epoch, pipeline, frozen).save(path);
  return path;
}

// Shared loop for the depth-supervised stages (2, 3, 4 and the baseline).
// `forward` returns the loss for one batch.
TrainResult run_depth_stage(const TrainConfig& cfg, const SampleDataset& data, Models& models,
                            std::vector<torch::Tensor> trainable, int stage, PipelineMode pipeline,
                            const std::vector<std::string>& frozen, const std::string& out_dir,
                            const std::function<LossValue(const Batch&)>& forward,
                            const std::string& ckpt_name) {
  torch::manual_seed((int64_t)cfg.seed);
  torch::optim::Adam opt(trainable, torch::optim::AdamOptions(cfg.base_lr)
                                        .betas({cfg.adam_beta1, cfg.adam_beta2})
                                        .weight_decay(cfg.weight_decay));
  TrainResult result;
  std::string last_good;
  std::mt19937_64 shuffle_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 1);
  std::mt19937_64 aug_rng(cfg.data.seed * 0x9e3779b97f4a7c15ULL + 2);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(cfg, epoch);
    set_lr(opt, lr);
    std::map<std::string, double> sums;
    int64_t nb = 0;
    for (const auto& idx : make_batches(data.samples.size(), cfg.batch_size, shuffle_rng)) {
      auto batch = gather_batch(data, idx, cfg.data, aug_rng);
      opt.zero_grad();
      LossValue loss = forward(batch);
      if (!std::isfinite(loss.value())) throw DivergenceError("stage" + std::to_string(stage) + "_total", last_good);
      loss.total.backward();
      opt.step();
      for (const auto& [k, v] : loss.terms) sums[k] += v.item<double>();
      sums["total"] += loss.value();
      ++nb;
    }
    for (auto& [k, v] : sums) v /= (double)nb;
    log_epoch(epoch, lr, sums);
    result.epoch_losses.push_back(sums);
    last_good = save_last_good(models, cfg, stage, epoch, pipeline, frozen, out_dir);
  }

  result.checkpoint = snapshot(models, cfg, stage, cfg.epochs, pipeline, frozen);
  fs::create_directories(out_dir);
  result.checkpoint_path = (fs::path(out_dir) / ckpt_name).string();
  result.checkpoint.save(result.checkpoint_path);
  return result;
}

}  // namespace

TrainResult train_stage1(const TrainConfig& cfg, const SampleDataset& source_data,
                         const SampleDataset& style_data, const std::string& out_dir) {
  if (source_data.samples.empty() || style_data.samples.empty())
    throw DegenerateBatchError("train_stage1: both domains must be non-empty");
  torch::manual_seed((int64_t)cfg.seed);

  auto models = Models::build(cfg.model, cfg.data.max_depth, PipelineMode::SteOnly);
  models.set_train();
  auto& ste = *models.ste;

  std::vector<torch::Tensor> gen_params = collect_params(
      {ste.encoder.ptr(), ste.style_s.ptr(), ste.style_t.ptr(), ste.gen_s.ptr(), ste.gen_t.ptr()});
  std::vector<torch::Tensor> disc_params = collect_params({ste.disc_s.ptr(), ste.disc_t.ptr()});

  torch::optim::Adam opt_g(gen_params, torch::optim::AdamOptions(cfg.gan.lr)
                                           .betas({cfg.gan.beta1, cfg.gan.beta2})
                                           .weight_decay(cfg.gan.weight_decay));
  torch::optim::Adam opt_d(disc_params, torch::optim::AdamOptions(cfg.gan.lr)
                                            .betas({cfg.gan.beta1, cfg.gan.beta2})
                                            .weight_decay(cfg.gan.weight_decay));

  const std::vector<std::string> frozen = {"ste.encoder"};
  TrainResult result;
  std::string last_good;
  std::mt19937_64 rng_s(cfg.seed * 0x9e3779b97f4a7c15ULL + 11);
  std::mt19937_64 rng_t(cfg.seed * 0x9e3779b97f4a7c15ULL + 13);
  std::mt19937_64 aug_rng(cfg.data.seed * 0x9e3779b97f4a7c15ULL + 17);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto batches_s = make_batches(source_data.samples.size(), cfg.batch_size, rng_s);
    auto batches_t = make_batches(style_data.samples.size(), cfg.batch_size, rng_t);
    const size_t n_iter = std::min(batches_s.size(), batches_t.size());
    std::map<std::string, double> sums;

    for (size_t it = 0; it < n_iter; ++it) {
      auto bs = gather_batch(source_data, batches_s[it], cfg.data, aug_rng);
      auto bt = gather_batch(style_data, batches_t[it], cfg.data, aug_rng);
      const int64_t ns = bs.image.size(0), nt = bt.image.size(0);

      auto style_rand_s = torch::randn({nt, cfg.model.style_dim});
      auto style_rand_t = torch::randn({ns, cfg.model.style_dim});

      try {
        // discriminator step on detached translations
        {
          torch::Tensor fake_s, fake_t;
          {
            torch::NoGradGuard ng;
            fake_t = ste.decode_image(ste.encode_structure(bs.image), style_rand_t, TransDomain::Target);
            fake_s = ste.decode_image(ste.encode_structure(bt.image), style_rand_s, TransDomain::Source);
          }
          opt_d.zero_grad();
          auto dl = discriminator_loss(ste, bs.image, bt.image, fake_s, fake_t, cfg.gan);
          dl.backward();
          opt_d.step();
          sums["disc"] += dl.item<double>();
        }
        // generator step
        opt_g.zero_grad();
        auto b = translation_loss(ste, bs.image, bt.image, style_rand_s, style_rand_t, cfg.gan);
        b.total.backward();
        opt_g.step();
        sums["total"] += b.total.item<double>();
        sums["recon_image_s"] += b.recon_image_s.item<double>();
        sums["recon_image_t"] += b.recon_image_t.item<double>();
        sums["recon_code_a"] += (b.recon_code_a_s + b.recon_code_a_t).item<double>() / 2;
        sums["recon_code_b"] += (b.recon_code_b_s + b.recon_code_b_t).item<double>() / 2;
        sums["adv"] += (b.adv_s + b.adv_t).item<double>() / 2;
      } catch (const DivergenceError& e) {
        throw DivergenceError(e.term, last_good);
      }
    }
    for (auto& [k, v] : sums) v /= (double)n_iter;
    log_epoch(epoch, cfg.gan.lr, sums);
    result.epoch_losses.push_back(sums);
    last_good = save_last_good(models, cfg, 1, epoch, PipelineMode::SteOnly, frozen, out_dir);
  }

  result.checkpoint = snapshot(models, cfg, 1, cfg.epochs, PipelineMode::SteOnly, frozen);
  fs::create_directories(out_dir);
  result.checkpoint_path = (fs::path(out_dir) / "stage1.ckpt").string();
  result.checkpoint.save(result.checkpoint_path);
  return result;
}

TrainResult train_stage2(const TrainConfig& cfg, const SampleDataset& source_data,
                         const Checkpoint& ckpt, const std::string& out_dir) {
  auto frozen_in = frozen_of(ckpt);
  if (!contains(frozen_in, "ste.encoder"))
    throw StageOrderError("train_stage2: checkpoint does not carry a frozen ste.encoder (run stage 1 first)");
  if (source_data.samples.empty()) throw DegenerateBatchError("train_stage2: empty dataset");

  auto models = models_from_checkpoint(ckpt);
  models.pipeline = PipelineMode::SteOnly;
  models.set_train();
  auto& ste = *models.ste;
  set_requires_grad(ste.encoder.ptr(), false);

  auto trainable = collect_params({ste.decoder_ds.ptr(), models.dp.ptr()});
  const std::vector<std::string> frozen = {"ste.encoder", "ste.decoder_ds"};

  auto forward = [&](const Batch& batch) {
    auto code = ste.encode_structure(batch.image).detach();
    auto ms = ste.decode_structure_map(code);
    auto pred = models.dp->forward(ms);
    return stage2_loss(pred, batch.depth, batch.mask, ms, cfg.loss.lambda, cfg.loss.beta,
                       cfg.loss.grad_form, cfg.loss.mean_reduce);
  };
  return run_depth_stage(cfg, source_data, models, trainable, 2, PipelineMode::SteOnly, frozen, out_dir,
                         forward, "stage2.ckpt");
}

TrainResult train_stage3(const TrainConfig& cfg, const SampleDataset& source_data,
                         const Checkpoint& ckpt, const std::string& out_dir) {
  auto frozen_in = frozen_of(ckpt);
  if (!contains(frozen_in, "ste.encoder") || !contains(frozen_in, "ste.decoder_ds"))
    throw StageOrderError("train_stage3: checkpoint must carry frozen ste.encoder and ste.decoder_ds (run stage 2 first)");
  if (source_data.samples.empty()) throw DegenerateBatchError("train_stage3: empty dataset");

  // model dims come from the checkpoint; the combine mode from the config
  auto probe = models_from_checkpoint(ckpt);
  ModelConfig mcfg = probe.cfg;
  mcfg.combine = cfg.model.combine;
  auto models = Models::build(mcfg, probe.max_depth, PipelineMode::Full);
  const bool fresh_dp = mcfg.combine == CombineMode::Concat;  // input layer widens to 2 channels
  models.load_arrays(ckpt, fresh_dp ? std::vector<std::string>{"dp"} : std::vector<std::string>{});
  models.set_train();
  auto& ste = *models.ste;
  set_requires_grad(ste.encoder.ptr(), false);
  set_requires_grad(ste.decoder_ds.ptr(), false);

  auto trainable = collect_params({models.dsa.ptr(), models.dp.ptr()});
  const std::vector<std::string> frozen = {"ste.encoder", "ste.decoder_ds"};

  auto forward = [&](const Batch& batch) {
    torch::Tensor ms;
    {
      torch::NoGradGuard ng;
      ms = ste.decode_structure_map(ste.encode_structure(batch.image));
    }
    auto ma = models.dsa->forward(batch.image);
    auto pred = models.dp->forward(combine(ms, ma, mcfg.combine));
    return depth_l1(pred, batch.depth, batch.mask);
  };
  return run_depth_stage(cfg, source_data, models, trainable, 3, PipelineMode::Full, frozen, out_dir,
                         forward, "stage3.ckpt");
}

TrainResult train_stage4_semi(const TrainConfig& cfg, const SampleDataset& labeled_real_subset,
                              const Checkpoint& ckpt, const std::string& out_dir) {
  if (!ckpt.metadata.contains("stage") || ckpt.metadata.at("stage").get<int>() < 3)
    throw StageOrderError("train_stage4_semi: requires a stage-3 checkpoint");
  if (labeled_real_subset.samples.empty())
    throw DegenerateBatchError("train_stage4_semi: empty labeled subset");

  auto models = models_from_checkpoint(ckpt);
  models.set_train();
  auto& ste = *models.ste;
  set_requires_grad(ste.encoder.ptr(), false);
  set_requires_grad(ste.decoder_ds.ptr(), false);

  auto trainable = collect_params({models.dsa.ptr(), models.dp.ptr()});
  const std::vector<std::string> frozen = {"ste.encoder", "ste.decoder_ds"};

  auto forward = [&](const Batch& batch) {
    torch::Tensor ms;
    {
      torch::NoGradGuard ng;
      ms = ste.decode_structure_map(ste.encode_structure(batch.image));
    }
    auto ma = models.dsa->forward(batch.image);
    auto pred = models.dp->forward(combine(ms, ma, models.cfg.combine));
    return depth_l1(pred, batch.depth, batch.mask);
  };
  return run_depth_stage(cfg, labeled_real_subset, models, trainable, 4, PipelineMode::Full, frozen,
                         out_dir, forward, "stage4.ckpt");
}

TrainResult train_baseline(const TrainConfig& cfg, const SampleDataset& source_data,
                           const std::string& out_dir) {
  if (source_data.samples.empty()) throw DegenerateBatchError("train_baseline: empty dataset");
  torch::manual_seed((int64_t)cfg.seed);
  auto models = Models::build(cfg.model, cfg.data.max_depth, PipelineMode::Baseline);
  models.set_train();
  auto trainable = collect_params({models.dp.ptr()});

  auto forward = [&](const Batch& batch) {
    auto pred = models.dp->forward(batch.image);
    return depth_l1(pred, batch.depth, batch.mask);
  };
  return run_depth_stage(cfg, source_data, models, trainable, 0, PipelineMode::Baseline, {}, out_dir,
                         forward, "baseline.ckpt");
}

MetricsReport evaluate_checkpoint(const Checkpoint& ckpt, const SampleDataset& dataset, double cap,
                                  Scaling scaling) {
  auto models = models_from_checkpoint(ckpt);
  models.set_eval();
  return evaluate_dataset([&](const torch::Tensor& img) { return models.predict(img); }, dataset, cap,
                          scaling);
}

}  // namespace s2r
