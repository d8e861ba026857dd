#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "i2gfp/losses.hpp"
#include "i2gfp/network.hpp"
#include "i2gfp/pipeline.hpp"

namespace i2gfp {

struct TrainConfig {
  int stage = 1;
  int64_t iterations = 200000;
  int batch_size = 10;
  double lr_initial = 4e-4;
  double lr_min = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int64_t checkpoint_every = 10000;
  uint64_t seed = 0;
  std::string resume_from;         // same-stage checkpoint to continue
  std::string stage1_checkpoint;   // warm-start source, required for stage 2

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// lr_min + (lr_initial - lr_min) * (1 + cos(pi * iter / iterations)) / 2
double cosine_lr(int64_t iter, const TrainConfig& cfg);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  int64_t step = 0;

  void init_like(const ParamSetT<float>& params);
};

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  int64_t iteration = 0;
  std::string rng_state;
  std::vector<std::pair<std::string, Tensor>> params;
  std::vector<std::pair<std::string, Tensor>> adam_m;
  std::vector<std::pair<std::string, Tensor>> adam_v;
  int64_t adam_step = 0;
  bool has_optimizer = false;

  const Tensor* find_param(const std::string& name) const;
};

// Self-describing container: JSON header (config, tensor directory) plus a
// little-endian float32 blob. save -> load -> save is byte-identical.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Network-ready view of one training sample.
struct PreparedSample {
  Tensor rgb;           // {3,S,S}
  Tensor trimap_plane;  // {1,S,S} in {0, 0.5, 1}
  LossTarget<float> target;
};

PreparedSample prepare_sample(const MattingSample& sample);  // requires ground truth

// Deterministic synthetic sample (smooth random matte composited over random
// noise fields); used by the gradient audit when no dataset is around.
MattingSample synthetic_sample(int size, uint64_t seed);

MattingSample load_sample(const std::string& dataset_root, const ManifestEntry& entry);

struct StepResult {
  LossBreakdown loss;
  double lr = 0.0;
};

// Single-writer optimization loop. Everything runs on one thread and all
// randomness flows through one engine, so a (config, seed, checkpoint)
// triple pins the whole loss stream bit for bit.
class Trainer {
 public:
  Trainer(ModelConfig model, TrainConfig train, AugmentationConfig aug, std::string dataset_root,
          std::vector<ManifestEntry> manifest, std::string out_dir);

  // Runs the remaining iterations, writing train_log.jsonl and periodic
  // checkpoints under out_dir. Returns the final checkpoint.
  Checkpoint run();

  StepResult train_step(const std::vector<PreparedSample>& batch, int64_t iter0);

  I2GFPNet& network() { return *net_; }
  const std::vector<StepResult>& history() const { return history_; }
  int64_t start_iteration() const { return start_iteration_; }

 private:
  std::vector<PreparedSample> draw_batch();
  const MattingSample& cached_sample(size_t index);
  void apply_adam(double lr);
  Checkpoint snapshot(int64_t completed_iterations) const;

  ModelConfig model_cfg_;
  TrainConfig train_cfg_;
  AugmentationConfig aug_cfg_;
  std::string dataset_root_;
  std::vector<ManifestEntry> manifest_;
  std::string out_dir_;

  std::unique_ptr<I2GFPNet> net_;
  AdamState adam_;
  std::mt19937_64 rng_;
  int64_t start_iteration_ = 0;  // completed iterations when resuming
  std::vector<StepResult> history_;
  std::unordered_map<size_t, MattingSample> sample_cache_;
};

// Exact restore: every network parameter must exist in the archive with a
// matching shape.
void restore_params(I2GFPNet& net, const Checkpoint& ckpt);

// Copies every tensor whose path and shape both match; the head's first
// convolution grows input channels in stage 2, so its overlapping input
// slice is copied and the new GFP slice keeps its fresh Gaussian init.
void warm_start_stage2(I2GFPNet& net, const Checkpoint& stage1);

struct AuditProbe {
  std::string param;
  size_t index = 0;
  double analytic = 0.0;
  double fdiff = 0.0;
  double rel_err = 0.0;
};

struct AuditReport {
  std::vector<AuditProbe> probes;
  double max_rel_err = 0.0;
};

// Central-difference check of d(total loss)/d(theta) on randomly chosen
// scalar parameters. Runs in double precision.
AuditReport gradient_audit(const ModelConfig& cfg, const ParamSetT<float>& params,
                           const PreparedSample& sample, int n_probes, uint64_t probe_seed,
                           double epsilon = 1e-3);

}  // namespace i2gfp
