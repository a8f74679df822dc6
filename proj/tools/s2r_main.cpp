#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "s2r/config.hpp"
#include "s2r/orchestrator.hpp"
#include "s2r/toyworld.hpp"
#include "s2r/viz.hpp"

namespace fs = std::filesystem;

namespace {

int run(int argc, char** argv) {
  CLI::App app{"S2R-DepthNet: structure-based synthetic-to-real depth estimation"};
  app.require_subcommand(1);

  // --- toyworld generate ---
  auto* toyworld = app.add_subcommand("toyworld", "procedural two-style dataset");
  toyworld->require_subcommand(1);
  auto* gen = toyworld->add_subcommand("generate", "emit paired image/depth scenes");
  int64_t count = 16;
  std::string out_dir, domain_str = "A";
  uint64_t seed = 0;
  s2r::toyworld::ToySceneOptions topts;
  gen->add_option("--count", count, "number of scenes")->required();
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--domain", domain_str, "style domain A|B")->required();
  gen->add_option("--seed", seed, "first geometry seed");
  gen->add_option("--height", topts.height, "scene height");
  gen->add_option("--width", topts.width, "scene width");
  gen->add_option("--min-rects", topts.min_rects, "min rectangles per scene");
  gen->add_option("--max-rects", topts.max_rects, "max rectangles per scene");
  gen->add_flag("--no-texture", [&topts](int64_t) { topts.texture = false; },
                "disable depth-irrelevant texture");

  // --- train ---
  auto* train = app.add_subcommand("train", "run one training stage");
  std::string stage_str, config_path, resume_path, train_out, data_dir, style_dir;
  train->add_option("--stage", stage_str, "1|2|3|4|baseline")->required();
  train->add_option("--config", config_path, "flat key=value config file");
  train->add_option("--resume", resume_path, "checkpoint to resume from (stages 2-4)");
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--data", data_dir, "supervised dataset directory")->required();
  train->add_option("--style-data", style_dir, "style-corpus directory (stage 1)");

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ckpt_path, eval_data, scaling_str = "auto", report_path = "report.json";
  double cap = 80.0;
  eval_cmd->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--cap", cap, "depth cap in meters (80 or 50)");
  eval_cmd->add_option("--scaling", scaling_str, "median|none|auto (auto: none after stage 4)");
  eval_cmd->add_option("--out", report_path, "report JSON path");

  // --- visualize ---
  auto* viz = app.add_subcommand("visualize", "export intermediate maps for one image");
  std::string viz_ckpt, viz_image, viz_out;
  viz->add_option("--ckpt", viz_ckpt, "stage >= 3 checkpoint")->required();
  viz->add_option("--image", viz_image, "input image PNG")->required();
  viz->add_option("--out", viz_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage / unknown flag
  }

  if (gen->parsed()) {
    s2r::toyworld::generate_dataset(out_dir, count, s2r::toyworld::style_from_string(domain_str), seed, topts);
    std::cout << "wrote " << count << " scenes to " << out_dir << "\n";
    return 0;
  }

  if (train->parsed()) {
    s2r::TrainConfig cfg = config_path.empty() ? s2r::TrainConfig{} : s2r::load_train_config(config_path);
    if (cfg.raw_text.empty()) cfg.raw_text = s2r::config_to_text(cfg);
    auto data = s2r::load_dataset(data_dir);

    if (stage_str == "1") {
      if (style_dir.empty()) throw s2r::ConfigError("stage 1 requires --style-data");
      auto style = s2r::load_dataset(style_dir);
      auto res = s2r::train_stage1(cfg, data, style, train_out);
      std::cout << "checkpoint: " << res.checkpoint_path << "\n";
    } else if (stage_str == "baseline") {
      auto res = s2r::train_baseline(cfg, data, train_out);
      std::cout << "checkpoint: " << res.checkpoint_path << "\n";
    } else if (stage_str == "2" || stage_str == "3" || stage_str == "4") {
      if (resume_path.empty()) throw s2r::ConfigError("stages 2-4 require --resume CKPT");
      auto ckpt = s2r::Checkpoint::load(resume_path);
      s2r::TrainResult res;
      if (stage_str == "2") res = s2r::train_stage2(cfg, data, ckpt, train_out);
      else if (stage_str == "3") res = s2r::train_stage3(cfg, data, ckpt, train_out);
      else res = s2r::train_stage4_semi(cfg, data, ckpt, train_out);
      std::cout << "checkpoint: " << res.checkpoint_path << "\n";
    } else {
      throw s2r::ConfigError("unknown --stage value: " + stage_str);
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    auto ckpt = s2r::Checkpoint::load(ckpt_path);
    auto data = s2r::load_dataset(eval_data);
    s2r::Scaling scaling;
    if (scaling_str == "auto") {
      // median scaling is the reported protocol except after semi-supervised training
      scaling = ckpt.metadata.value("stage", 0) == 4 ? s2r::Scaling::None : s2r::Scaling::Median;
    } else {
      scaling = s2r::scaling_from_string(scaling_str);
    }
    auto report = s2r::evaluate_checkpoint(ckpt, data, cap, scaling);
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write report: " + report_path);
    out << report.to_json().dump(2) << "\n";
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
  }

  if (viz->parsed()) {
    s2r::visualize(s2r::Checkpoint::load(viz_ckpt), viz_image, viz_out);
    std::cout << "wrote visualizations to " << viz_out << "\n";
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const s2r::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
