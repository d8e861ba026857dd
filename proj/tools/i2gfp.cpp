// Command-line front end: compose, train, infer, eval, audit.
//
// Exit codes: 0 success, 1 runtime/IO failure, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "i2gfp/config.hpp"
#include "i2gfp/image_ops.hpp"
#include "i2gfp/metrics.hpp"
#include "i2gfp/png_io.hpp"
#include "i2gfp/trainer.hpp"

namespace fs = std::filesystem;
using namespace i2gfp;

namespace {

KvConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  KvConfig cfg = path.empty() ? KvConfig() : KvConfig::from_file(path);
  cfg.apply_env();
  for (const auto& kv : overrides) cfg.apply_override(kv);
  return cfg;
}

void echo_config(const KvConfig& cfg) {
  std::cout << "-- resolved config --\n" << cfg.echo() << "---------------------\n";
}

int cmd_compose(const std::string& config_path, const std::vector<std::string>& overrides) {
  const KvConfig cfg = load_config(config_path, overrides);
  echo_config(cfg);
  const DatasetSpec spec = dataset_from_config(cfg);
  const auto manifest = synthesize_dataset(spec);
  std::cout << "wrote " << manifest.size() << " samples under " << spec.output_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, int stage_flag, const std::string& ablation,
              const std::string& resume, const std::string& out_dir_flag,
              const std::vector<std::string>& overrides) {
  KvConfig cfg = load_config(config_path, overrides);
  if (stage_flag > 0) cfg.set("train.stage", std::to_string(stage_flag));

  if (!ablation.empty()) {
    if (ablation == "base") {
      cfg.set("model.use_ic", "false");
      cfg.set("model.use_gfp", "false");
    } else if (ablation == "base_ic") {
      cfg.set("model.use_ic", "true");
      cfg.set("model.use_gfp", "false");
    } else if (ablation == "i2gfp") {
      cfg.set("model.use_ic", "true");
      cfg.set("model.use_gfp", "true");
    } else {
      throw ConfigError("unknown ablation '" + ablation + "' (base, base_ic, i2gfp)");
    }
  } else if (!cfg.has("model.use_gfp")) {
    // Two-stage default: the GFP branch joins in stage 2.
    const int stage = static_cast<int>(cfg.get_int("train.stage", 1));
    cfg.set("model.use_gfp", stage == 2 ? "true" : "false");
  }
  if (!resume.empty()) cfg.set("train.resume_from", resume);
  if (!out_dir_flag.empty()) cfg.set("train.out_dir", out_dir_flag);
  echo_config(cfg);

  const ModelConfig model = model_from_config(cfg);
  const TrainConfig train = train_from_config(cfg);
  AugmentationConfig aug = augmentation_from_config(cfg);

  const std::string manifest_path = cfg.require_path("train.manifest");
  const std::string dataset_root =
      cfg.get_path("train.dataset_root", fs::path(manifest_path).parent_path().string());
  const std::string out_dir = cfg.get_path(
      "train.out_dir", (fs::path(dataset_root) / ("run_stage" + std::to_string(train.stage)))
                           .string());

  Trainer trainer(model, train, aug, dataset_root, load_manifest(manifest_path), out_dir);
  const Checkpoint final = trainer.run();
  const auto& hist = trainer.history();
  std::cout << "stage " << train.stage << " finished at iteration " << final.iteration;
  if (!hist.empty()) std::cout << ", final total loss " << hist.back().loss.total;
  std::cout << "\ncheckpoints under " << out_dir << "\n";
  return 0;
}

int cmd_infer(const std::string& checkpoint_path, const std::string& image_path,
              const std::string& trimap_path, const std::string& out_path) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  std::cout << "model: input_size=" << ckpt.model.input_size
            << " use_ic=" << ckpt.model.use_ic << " use_gfp=" << ckpt.model.use_gfp
            << " width_divisor=" << ckpt.model.width_divisor << "\n";

  const RgbImage image = load_rgb_png(image_path);
  const Trimap trimap = load_trimap_png(trimap_path);
  if (image.height != trimap.height || image.width != trimap.width)
    throw ConfigError("infer: image " + std::to_string(image.height) + "x" +
                      std::to_string(image.width) + " vs trimap " +
                      std::to_string(trimap.height) + "x" + std::to_string(trimap.width));

  I2GFPNet net(ckpt.model);
  restore_params(net, ckpt);

  // Resize through the model grid, then restore the original geometry.
  const int S = ckpt.model.input_size;
  const RgbImage rgb_s = resize_bilinear(image, S, S);
  const Trimap tri_s = resize_nearest(trimap, S, S);
  const Tensor out = net.predict(rgb_to_tensor(rgb_s), trimap_to_plane(tri_s));
  AlphaMatte alpha = resize_bilinear(tensor_to_alpha(out), image.height, image.width);

  // Known regions are authoritative.
  for (size_t j = 0; j < trimap.labels.size(); ++j) {
    if (trimap.labels[j] == TrimapLabel::Foreground) alpha.data[j] = 1.f;
    if (trimap.labels[j] == TrimapLabel::Background) alpha.data[j] = 0.f;
  }
  save_alpha_png(out_path, alpha);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& trimap_dir, const std::string& region,
             const std::string& report_path) {
  if (region != "unknown" && region != "full")
    throw ConfigError("eval: --region must be unknown or full");
  const EvalRegion reg = region == "full" ? EvalRegion::Full : EvalRegion::Unknown;

  auto stems = [](const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".png")
        out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
  };
  for (const auto& d : {pred_dir, gt_dir}) {
    if (!fs::is_directory(d)) throw ConfigError("eval: not a directory: " + d);
  }
  if (reg == EvalRegion::Unknown && !fs::is_directory(trimap_dir))
    throw ConfigError("eval: not a directory: " + trimap_dir);

  const auto pred_stems = stems(pred_dir);
  const auto gt_stems = stems(gt_dir);
  if (pred_stems.size() != gt_stems.size())
    throw ConfigError("eval: " + std::to_string(pred_stems.size()) + " predictions vs " +
                      std::to_string(gt_stems.size()) + " ground-truth mattes");
  if (reg == EvalRegion::Unknown) {
    const auto tri_stems = stems(trimap_dir);
    if (tri_stems.size() != pred_stems.size())
      throw ConfigError("eval: " + std::to_string(tri_stems.size()) + " trimaps vs " +
                        std::to_string(pred_stems.size()) + " predictions");
  }

  std::vector<EvalItem> items;
  for (const auto& s : pred_stems) {
    EvalItem item;
    item.name = s;
    item.pred_path = (fs::path(pred_dir) / (s + ".png")).string();
    item.gt_path = (fs::path(gt_dir) / (s + ".png")).string();
    item.trimap_path = (fs::path(trimap_dir) / (s + ".png")).string();
    items.push_back(std::move(item));
  }

  const MetricReport report = evaluate(items, reg);
  std::cout << report_table(report);
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw IoError("cannot write report " + report_path);
    out << report_to_json(report, reg) << "\n";
    std::cout << "report: " << report_path << "\n";
  }
  return report.failures.empty() ? 0 : 1;
}

int cmd_audit(const std::string& config_path, const std::string& checkpoint_path, int probes,
              uint64_t audit_seed, const std::vector<std::string>& overrides) {
  ModelConfig model;
  if (!checkpoint_path.empty()) {
    model = load_checkpoint(checkpoint_path).model;
  } else {
    const KvConfig cfg = load_config(config_path, overrides);
    echo_config(cfg);
    model = model_from_config(cfg);
  }

  I2GFPNet net(model);
  if (!checkpoint_path.empty())
    restore_params(net, load_checkpoint(checkpoint_path));
  else
    net.init(model.seed);

  const PreparedSample sample =
      prepare_sample(synthetic_sample(model.input_size, audit_seed));
  const AuditReport report = gradient_audit(model, net.params(), sample, probes, audit_seed);

  std::printf("%-32s %8s %14s %14s %10s\n", "parameter", "index", "analytic", "central-diff",
              "rel-err");
  for (const auto& p : report.probes)
    std::printf("%-32s %8zu %14.6e %14.6e %10.3e\n", p.param.c_str(), p.index, p.analytic,
                p.fdiff, p.rel_err);
  std::printf("max relative error: %.3e over %zu probes\n", report.max_rel_err,
              report.probes.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"I2GFP matting pipeline"};
  app.require_subcommand(1);

  std::string config_path, ablation, resume, out_dir, checkpoint_path;
  std::string image_path, trimap_path, out_path;
  std::string pred_dir, gt_dir, trimap_dir, region = "unknown", report_path;
  std::vector<std::string> overrides;
  int stage = 0, probes = 20;
  uint64_t audit_seed = 1;

  auto* compose = app.add_subcommand("compose", "Synthesize a composited dataset");
  compose->add_option("--config", config_path, "Config file")->required();
  compose->add_option("--set", overrides, "key=value override (repeatable)");

  auto* train = app.add_subcommand("train", "Train a model stage");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--stage", stage, "Training stage (1 or 2)");
  train->add_option("--ablation", ablation, "base | base_ic | i2gfp");
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_option("--out", out_dir, "Output directory");
  train->add_option("--set", overrides, "key=value override (repeatable)");

  auto* infer = app.add_subcommand("infer", "Predict a matte for one image");
  infer->add_option("--checkpoint", checkpoint_path, "Trained checkpoint")->required();
  infer->add_option("--image", image_path, "Input RGB PNG")->required();
  infer->add_option("--trimap", trimap_path, "Input trimap PNG")->required();
  infer->add_option("--out", out_path, "Output alpha PNG")->required();

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--pred", pred_dir, "Directory of predicted mattes")->required();
  eval->add_option("--gt", gt_dir, "Directory of ground-truth mattes")->required();
  eval->add_option("--trimap", trimap_dir, "Directory of trimaps");
  eval->add_option("--region", region, "unknown (default) or full");
  eval->add_option("--report", report_path, "Write a JSON report here");

  auto* audit = app.add_subcommand("audit", "Finite-difference gradient check");
  audit->add_option("--config", config_path, "Config file");
  audit->add_option("--checkpoint", checkpoint_path, "Checkpoint to audit");
  audit->add_option("--probes", probes, "Number of parameter probes");
  audit->add_option("--seed", audit_seed, "Probe/sample seed");
  audit->add_option("--set", overrides, "key=value override (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compose->parsed()) return cmd_compose(config_path, overrides);
    if (train->parsed()) return cmd_train(config_path, stage, ablation, resume, out_dir, overrides);
    if (infer->parsed()) return cmd_infer(checkpoint_path, image_path, trimap_path, out_path);
    if (eval->parsed()) return cmd_eval(pred_dir, gt_dir, trimap_dir, region, report_path);
    if (audit->parsed()) {
      if (config_path.empty() && checkpoint_path.empty())
        throw ConfigError("audit: need --config or --checkpoint");
      return cmd_audit(config_path, checkpoint_path, probes, audit_seed, overrides);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
