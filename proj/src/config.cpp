#include "s2r/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace s2r {

std::string to_string(GradForm f) { return f == GradForm::SignedSum ? "signed_sum" : "abs_sum"; }
std::string to_string(GanObjective o) { return o == GanObjective::LeastSquares ? "lsgan" : "log"; }
std::string to_string(CombineMode m) {
  switch (m) {
    case CombineMode::Multiply: return "multiply";
    case CombineMode::Add: return "add";
    case CombineMode::Concat: return "concat";
  }
  return "multiply";
}

CombineMode combine_from_string(const std::string& s) {
  if (s == "multiply") return CombineMode::Multiply;
  if (s == "add") return CombineMode::Add;
  if (s == "concat") return CombineMode::Concat;
  throw ConfigError("unknown combine mode: " + s);
}

void DatasetConfig::validate() const {
  if (max_depth <= 0) throw ConfigError("data.max_depth must be > 0");
  if (height <= 0 || width <= 0) throw ConfigError("target resolution must be positive");
  if (flip_probability < 0 || flip_probability > 1) throw ConfigError("data.flip_probability must be in [0,1]");
  if (rotation_lo_deg > rotation_hi_deg) throw ConfigError("rotation range lo > hi");
  if (brightness_jitter < 0) throw ConfigError("data.brightness_jitter must be >= 0");
}

void TrainConfig::validate() const {
  if (base_lr <= 0 || lr_decay <= 0 || lr_step_epochs <= 0) throw ConfigError("learning-rate settings must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (stage < 1 || stage > 4) throw ConfigError("stage must be in {1,2,3,4}");
  if (loss.beta <= 0) throw ConfigError("loss.beta must be > 0");
  data.validate();
}

namespace {

struct KV {
  std::map<std::string, std::string> pairs;

  bool has(const std::string& k) const { return pairs.count(k) > 0; }
  std::string take(const std::string& k) {
    auto it = pairs.find(k);
    std::string v = it->second;
    pairs.erase(it);
    return v;
  }
  double num(const std::string& k, double fallback) {
    if (!has(k)) return fallback;
    std::string v = take(k);
    try {
      size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value for '" + k + "': " + v);
    }
  }
  std::string str(const std::string& k, const std::string& fallback) { return has(k) ? take(k) : fallback; }
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
  KV kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + " has no '='");
    kv.pairs[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  TrainConfig cfg;
  cfg.raw_text = text;
  cfg.base_lr = kv.num("base_lr", cfg.base_lr);
  cfg.lr_decay = kv.num("lr_decay", cfg.lr_decay);
  cfg.lr_step_epochs = (int64_t)kv.num("lr_step_epochs", (double)cfg.lr_step_epochs);
  cfg.adam_beta1 = kv.num("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = kv.num("adam_beta2", cfg.adam_beta2);
  cfg.weight_decay = kv.num("weight_decay", cfg.weight_decay);
  cfg.epochs = (int64_t)kv.num("epochs", (double)cfg.epochs);
  cfg.batch_size = (int64_t)kv.num("batch_size", (double)cfg.batch_size);
  cfg.stage = (int)kv.num("stage", (double)cfg.stage);
  cfg.seed = (uint64_t)kv.num("seed", (double)cfg.seed);

  cfg.loss.lambda = kv.num("loss.lambda", cfg.loss.lambda);
  cfg.loss.beta = kv.num("loss.beta", cfg.loss.beta);
  {
    std::string g = kv.str("loss.grad_form", to_string(cfg.loss.grad_form));
    if (g == "signed_sum") cfg.loss.grad_form = GradForm::SignedSum;
    else if (g == "abs_sum") cfg.loss.grad_form = GradForm::AbsSum;
    else throw ConfigError("loss.grad_form must be signed_sum or abs_sum");
  }
  cfg.loss.mean_reduce = kv.num("loss.mean_reduce", cfg.loss.mean_reduce ? 1 : 0) != 0;

  cfg.data.max_depth = kv.num("data.max_depth", cfg.data.max_depth);
  cfg.data.height = (int64_t)kv.num("data.height", (double)cfg.data.height);
  cfg.data.width = (int64_t)kv.num("data.width", (double)cfg.data.width);
  cfg.data.flip_probability = kv.num("data.flip_probability", cfg.data.flip_probability);
  cfg.data.rotation_lo_deg = kv.num("data.rotation_lo_deg", cfg.data.rotation_lo_deg);
  cfg.data.rotation_hi_deg = kv.num("data.rotation_hi_deg", cfg.data.rotation_hi_deg);
  cfg.data.brightness_jitter = kv.num("data.brightness_jitter", cfg.data.brightness_jitter);
  cfg.data.seed = (uint64_t)kv.num("data.seed", (double)cfg.data.seed);
  cfg.data.augment = kv.num("data.augment", cfg.data.augment ? 1 : 0) != 0;

  {
    std::string o = kv.str("gan.objective", to_string(cfg.gan.objective));
    if (o == "lsgan") cfg.gan.objective = GanObjective::LeastSquares;
    else if (o == "log") cfg.gan.objective = GanObjective::Log;
    else throw ConfigError("gan.objective must be lsgan or log");
  }
  cfg.gan.lambda1 = kv.num("gan.lambda1", cfg.gan.lambda1);
  cfg.gan.lambda2 = kv.num("gan.lambda2", cfg.gan.lambda2);
  cfg.gan.lambda3 = kv.num("gan.lambda3", cfg.gan.lambda3);
  cfg.gan.lr = kv.num("gan.lr", cfg.gan.lr);
  cfg.gan.beta1 = kv.num("gan.beta1", cfg.gan.beta1);
  cfg.gan.beta2 = kv.num("gan.beta2", cfg.gan.beta2);
  cfg.gan.weight_decay = kv.num("gan.weight_decay", cfg.gan.weight_decay);

  cfg.model.base_channels = (int64_t)kv.num("model.base_channels", (double)cfg.model.base_channels);
  cfg.model.style_dim = (int64_t)kv.num("model.style_dim", (double)cfg.model.style_dim);
  cfg.model.dsa_channels = (int64_t)kv.num("model.dsa_channels", (double)cfg.model.dsa_channels);
  cfg.model.dp_channels = (int64_t)kv.num("model.dp_channels", (double)cfg.model.dp_channels);
  cfg.model.disc_channels = (int64_t)kv.num("model.disc_channels", (double)cfg.model.disc_channels);
  cfg.model.disc_scales = (int64_t)kv.num("model.disc_scales", (double)cfg.model.disc_scales);
  cfg.model.combine = combine_from_string(kv.str("model.combine", to_string(cfg.model.combine)));
  cfg.model.nonneg_structure_map = kv.num("model.nonneg_structure_map", cfg.model.nonneg_structure_map ? 1 : 0) != 0;

  if (!kv.pairs.empty()) throw ConfigError("unknown config key: " + kv.pairs.begin()->first);

  cfg.validate();
  if (cfg.raw_text.empty()) cfg.raw_text = config_to_text(cfg);
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

std::string config_to_text(const TrainConfig& cfg) {
  std::ostringstream o;
  o.precision(17);
  o << "base_lr = " << cfg.base_lr << "\n"
    << "lr_decay = " << cfg.lr_decay << "\n"
    << "lr_step_epochs = " << cfg.lr_step_epochs << "\n"
    << "adam_beta1 = " << cfg.adam_beta1 << "\n"
    << "adam_beta2 = " << cfg.adam_beta2 << "\n"
    << "weight_decay = " << cfg.weight_decay << "\n"
    << "epochs = " << cfg.epochs << "\n"
    << "batch_size = " << cfg.batch_size << "\n"
    << "stage = " << cfg.stage << "\n"
    << "seed = " << cfg.seed << "\n"
    << "loss.lambda = " << cfg.loss.lambda << "\n"
    << "loss.beta = " << cfg.loss.beta << "\n"
    << "loss.grad_form = " << to_string(cfg.loss.grad_form) << "\n"
    << "loss.mean_reduce = " << (cfg.loss.mean_reduce ? 1 : 0) << "\n"
    << "data.max_depth = " << cfg.data.max_depth << "\n"
    << "data.height = " << cfg.data.height << "\n"
    << "data.width = " << cfg.data.width << "\n"
    << "data.flip_probability = " << cfg.data.flip_probability << "\n"
    << "data.rotation_lo_deg = " << cfg.data.rotation_lo_deg << "\n"
    << "data.rotation_hi_deg = " << cfg.data.rotation_hi_deg << "\n"
    << "data.brightness_jitter = " << cfg.data.brightness_jitter << "\n"
    << "data.seed = " << cfg.data.seed << "\n"
    << "data.augment = " << (cfg.data.augment ? 1 : 0) << "\n"
    << "gan.objective = " << to_string(cfg.gan.objective) << "\n"
    << "gan.lambda1 = " << cfg.gan.lambda1 << "\n"
    << "gan.lambda2 = " << cfg.gan.lambda2 << "\n"
    << "gan.lambda3 = " << cfg.gan.lambda3 << "\n"
    << "gan.lr = " << cfg.gan.lr << "\n"
    << "gan.beta1 = " << cfg.gan.beta1 << "\n"
    << "gan.beta2 = " << cfg.gan.beta2 << "\n"
    << "gan.weight_decay = " << cfg.gan.weight_decay << "\n"
    << "model.base_channels = " << cfg.model.base_channels << "\n"
    << "model.style_dim = " << cfg.model.style_dim << "\n"
    << "model.dsa_channels = " << cfg.model.dsa_channels << "\n"
    << "model.dp_channels = " << cfg.model.dp_channels << "\n"
    << "model.disc_channels = " << cfg.model.disc_channels << "\n"
    << "model.disc_scales = " << cfg.model.disc_scales << "\n"
    << "model.combine = " << to_string(cfg.model.combine) << "\n"
    << "model.nonneg_structure_map = " << (cfg.model.nonneg_structure_map ? 1 : 0) << "\n";
  return o.str();
}

}  // namespace s2r
