#include "i2gfp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "i2gfp/image_ops.hpp"
#include "i2gfp/png_io.hpp"
#include "i2gfp/rng.hpp"

namespace fs = std::filesystem;

namespace i2gfp {

void TrainConfig::validate() const {
  if (stage != 1 && stage != 2) throw ConfigError("train: stage must be 1 or 2");
  if (iterations < 1) throw ConfigError("train: iterations must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (lr_initial <= 0.0) throw ConfigError("train: lr_initial must be > 0");
  if (lr_min < 0.0 || lr_min > lr_initial)
    throw ConfigError("train: need 0 <= lr_min <= lr_initial");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
    throw ConfigError("train: adam betas must lie in (0,1)");
  if (adam_eps <= 0.0) throw ConfigError("train: adam_eps must be > 0");
  if (checkpoint_every < 1) throw ConfigError("train: checkpoint_every must be >= 1");
}

double cosine_lr(int64_t iter, const TrainConfig& cfg) {
  if (iter < 0 || iter > cfg.iterations)
    throw ConfigError("cosine_lr: iteration " + std::to_string(iter) + " outside [0, " +
                      std::to_string(cfg.iterations) + "]");
  const double phase = static_cast<double>(iter) / static_cast<double>(cfg.iterations);
  return cfg.lr_min + (cfg.lr_initial - cfg.lr_min) * (1.0 + std::cos(M_PI * phase)) / 2.0;
}

void AdamState::init_like(const ParamSetT<float>& params) {
  m.clear();
  v.clear();
  for (const auto& [name, p] : params) {
    m.emplace_back(p.value.dims);
    v.emplace_back(p.value.dims);
  }
  step = 0;
}

PreparedSample prepare_sample(const MattingSample& sample) {
  if (!sample.ground_truth) throw Error("prepare_sample: missing ground-truth matte");
  check_same_size(sample);

  PreparedSample out;
  out.rgb = rgb_to_tensor(sample.image);
  out.trimap_plane = trimap_to_plane(sample.trimap);
  out.target.gt = alpha_to_tensor(*sample.ground_truth);
  out.target.mask = mask_to_tensor(unknown_mask(sample.trimap));
  if (sample.foreground && sample.background) {
    out.target.fg = rgb_to_tensor(*sample.foreground);
    out.target.bg = rgb_to_tensor(*sample.background);
    out.target.composite = rgb_to_tensor(sample.image);
  }
  return out;
}

MattingSample synthetic_sample(int size, uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<float> uni(0.f, 1.f);

  const int base = 8;
  auto noise_rgb = [&]() {
    RgbImage img(base, base);
    for (auto& v : img.data) v = uni(eng);
    return resize_bilinear(img, size, size);
  };

  AlphaMatte coarse(base, base);
  for (auto& v : coarse.data) v = uni(eng);
  AlphaMatte alpha = resize_bilinear(coarse, size, size);
  // Stretch so the matte carries exact 0/1 plateaus around a soft core.
  for (auto& v : alpha.data) v = std::clamp((v - 0.25f) * 2.f, 0.f, 1.f);

  MattingSample s;
  s.foreground = noise_rgb();
  s.background = noise_rgb();
  s.ground_truth = alpha;
  s.image = composite(*s.foreground, *s.background, alpha);
  s.trimap = generate_trimap(alpha, 2);
  return s;
}

MattingSample load_sample(const std::string& dataset_root, const ManifestEntry& entry) {
  const fs::path root(dataset_root);
  MattingSample s;
  s.image = load_rgb_png((root / entry.merged).string());
  s.trimap = load_trimap_png((root / entry.trimap).string());
  s.ground_truth = load_alpha_png((root / entry.alpha).string());
  s.foreground = load_rgb_png((root / entry.fg).string());
  s.background = load_rgb_png((root / entry.bg).string());
  check_same_size(s);
  return s;
}

Trainer::Trainer(ModelConfig model, TrainConfig train, AugmentationConfig aug,
                 std::string dataset_root, std::vector<ManifestEntry> manifest,
                 std::string out_dir)
    : model_cfg_(model),
      train_cfg_(train),
      aug_cfg_(aug),
      dataset_root_(std::move(dataset_root)),
      manifest_(std::move(manifest)),
      out_dir_(std::move(out_dir)) {
  train_cfg_.validate();
  aug_cfg_.validate();
  if (manifest_.empty()) throw ConfigError("trainer: empty manifest");
  if (aug_cfg_.train_size != model_cfg_.input_size)
    throw ConfigError("trainer: augment train_size " + std::to_string(aug_cfg_.train_size) +
                      " != model input_size " + std::to_string(model_cfg_.input_size));

  model_cfg_.validate();
  if (train_cfg_.stage == 2 && !model_cfg_.use_gfp)
    throw ConfigError("stage 2 adds the GFP branch; model.use_gfp must be true");

  net_ = std::make_unique<I2GFPNet>(model_cfg_);
  net_->init(model_cfg_.seed);
  adam_.init_like(net_->params());
  rng_.seed(train_cfg_.seed);

  if (!train_cfg_.resume_from.empty()) {
    const Checkpoint ck = load_checkpoint(train_cfg_.resume_from);
    if (!(ck.model == model_cfg_))
      throw ConfigError("resume: checkpoint model config differs from the requested one");
    if (ck.train.stage != train_cfg_.stage) throw ConfigError("resume: stage mismatch");
    if (!ck.has_optimizer) throw ConfigError("resume: archive has no optimizer state");

    restore_params(*net_, ck);
    size_t i = 0;
    for (auto& [name, p] : net_->params()) {
      if (i < ck.adam_m.size()) adam_.m[i] = ck.adam_m[i].second;
      if (i < ck.adam_v.size()) adam_.v[i] = ck.adam_v[i].second;
      ++i;
    }
    adam_.step = ck.adam_step;
    restore_engine(rng_, ck.rng_state);
    start_iteration_ = ck.iteration;
  } else if (train_cfg_.stage == 2) {
    if (train_cfg_.stage1_checkpoint.empty())
      throw ConfigError("stage 2 requires a stage-1 checkpoint (train.stage1_checkpoint)");
    const Checkpoint s1 = load_checkpoint(train_cfg_.stage1_checkpoint);
    ModelConfig expected = model_cfg_;
    expected.use_gfp = false;
    if (!(s1.model == expected))
      throw ConfigError("stage-1 checkpoint was trained with a different architecture");
    warm_start_stage2(*net_, s1);
  }
}

const MattingSample& Trainer::cached_sample(size_t index) {
  auto it = sample_cache_.find(index);
  if (it == sample_cache_.end()) {
    it = sample_cache_.emplace(index, load_sample(dataset_root_, manifest_[index])).first;
  }
  return it->second;
}

std::vector<PreparedSample> Trainer::draw_batch() {
  std::vector<PreparedSample> batch;
  batch.reserve(static_cast<size_t>(train_cfg_.batch_size));
  std::uniform_int_distribution<size_t> pick(0, manifest_.size() - 1);
  for (int b = 0; b < train_cfg_.batch_size; ++b) {
    const MattingSample& full = cached_sample(pick(rng_));
    const MattingSample cropped = crop_unknown_centered(full, aug_cfg_, rng_);
    batch.push_back(prepare_sample(augment(cropped, aug_cfg_, rng_)));
  }
  return batch;
}

StepResult Trainer::train_step(const std::vector<PreparedSample>& batch, int64_t iter0) {
  if (batch.empty()) throw Error("train_step: empty batch");
  net_->params().zero_grads();

  const float inv_batch = 1.f / static_cast<float>(batch.size());
  double l1 = 0, comp = 0, grad = 0, lap = 0;
  for (const auto& sample : batch) {
    Graph g(true);
    const int pred = net_->forward(g, g.leaf(sample.rgb), g.leaf(sample.trimap_plane));
    const LossNodes nodes = build_total_loss(g, pred, sample.target);
    const LossBreakdown b = read_losses(g, nodes);

    const std::pair<const char*, double> terms[4] = {
        {"l1", b.l1}, {"comp", b.comp}, {"grad", b.grad}, {"lap", b.lap}};
    for (const auto& [name, value] : terms)
      if (!std::isfinite(value))
        throw Error(std::string("non-finite loss term '") + name + "' at iteration " +
                    std::to_string(iter0 + 1));

    g.backward(nodes.total, inv_batch);
    l1 += b.l1;
    comp += b.comp;
    grad += b.grad;
    lap += b.lap;
  }

  for (const auto& [name, p] : net_->params())
    for (const float gv : p.grad.data)
      if (!std::isfinite(gv))
        throw Error("non-finite gradient in '" + name + "' at iteration " +
                    std::to_string(iter0 + 1));

  const double n = static_cast<double>(batch.size());
  StepResult r;
  r.loss = LossBreakdown::from_parts(l1 / n, comp / n, grad / n, lap / n);
  r.lr = cosine_lr(iter0, train_cfg_);
  apply_adam(r.lr);
  return r;
}

void Trainer::apply_adam(double lr) {
  adam_.step += 1;
  const double b1 = train_cfg_.beta1, b2 = train_cfg_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(adam_.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(adam_.step));

  size_t i = 0;
  for (auto& [name, p] : net_->params()) {
    Tensor& m = adam_.m[i];
    Tensor& v = adam_.v[i];
    for (size_t k = 0; k < p.value.data.size(); ++k) {
      const double g = p.grad.data[k];
      const double mk = b1 * m.data[k] + (1.0 - b1) * g;
      const double vk = b2 * v.data[k] + (1.0 - b2) * g * g;
      m.data[k] = static_cast<float>(mk);
      v.data[k] = static_cast<float>(vk);
      const double update = lr * (mk / bc1) / (std::sqrt(vk / bc2) + train_cfg_.adam_eps);
      p.value.data[k] = static_cast<float>(p.value.data[k] - update);
    }
    ++i;
  }
}

Checkpoint Trainer::snapshot(int64_t completed_iterations) const {
  Checkpoint ck;
  ck.model = model_cfg_;
  ck.train = train_cfg_;
  ck.iteration = completed_iterations;
  ck.rng_state = serialize_engine(rng_);
  ck.has_optimizer = true;
  ck.adam_step = adam_.step;
  size_t i = 0;
  for (const auto& [name, p] : net_->params()) {
    ck.params.emplace_back(name, p.value);
    ck.adam_m.emplace_back(name, adam_.m[i]);
    ck.adam_v.emplace_back(name, adam_.v[i]);
    ++i;
  }
  return ck;
}

Checkpoint Trainer::run() {
  fs::create_directories(out_dir_);
  const fs::path log_path = fs::path(out_dir_) / "train_log.jsonl";
  std::ofstream log(log_path,
                    start_iteration_ > 0 ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path.string());

  for (int64_t it0 = start_iteration_; it0 < train_cfg_.iterations; ++it0) {
    const auto batch = draw_batch();
    const StepResult r = train_step(batch, it0);
    history_.push_back(r);

    nlohmann::json line{{"iter", it0 + 1}, {"lr", r.lr},          {"l1", r.loss.l1},
                        {"comp", r.loss.comp}, {"grad", r.loss.grad}, {"lap", r.loss.lap},
                        {"total", r.loss.total}};
    log << line.dump() << "\n";

    const int64_t done = it0 + 1;
    if (done % train_cfg_.checkpoint_every == 0 || done == train_cfg_.iterations) {
      char name[64];
      std::snprintf(name, sizeof(name), "stage%d_iter%06lld.ckpt", train_cfg_.stage,
                    static_cast<long long>(done));
      save_checkpoint((fs::path(out_dir_) / name).string(), snapshot(done));
    }
  }
  log.flush();

  Checkpoint final = snapshot(train_cfg_.iterations);
  save_checkpoint((fs::path(out_dir_) / ("stage" + std::to_string(train_cfg_.stage) +
                                         "_final.ckpt"))
                      .string(),
                  final);
  return final;
}

void restore_params(I2GFPNet& net, const Checkpoint& ckpt) {
  for (auto& [name, p] : net.params()) {
    const Tensor* src = ckpt.find_param(name);
    if (!src || src->dims != p.value.dims)
      throw IoError("checkpoint: parameter " + name + " missing or reshaped");
    p.value = *src;
  }
}

void warm_start_stage2(I2GFPNet& net, const Checkpoint& stage1) {
  for (auto& [name, p] : net.params()) {
    const Tensor* src = stage1.find_param(name);
    if (src && src->dims == p.value.dims) {
      p.value = *src;
      continue;
    }
    if (src && name == "head/conv1/weight" && src->dims.size() == 4 &&
        p.value.dims.size() == 4 && src->dims[0] == p.value.dims[0] &&
        src->dims[1] < p.value.dims[1] && src->dims[2] == p.value.dims[2] &&
        src->dims[3] == p.value.dims[3]) {
      // Stage 2 widens the head input with GFP channels; keep the learned
      // slice and leave the new channels at their fresh init.
      const int co = src->dims[0], ci_old = src->dims[1], ci_new = p.value.dims[1];
      const int kk = src->dims[2] * src->dims[3];
      for (int o = 0; o < co; ++o)
        for (int c = 0; c < ci_old; ++c)
          for (int k = 0; k < kk; ++k)
            p.value.data[(static_cast<size_t>(o) * ci_new + c) * kk + k] =
                src->data[(static_cast<size_t>(o) * ci_old + c) * kk + k];
    }
  }
}

AuditReport gradient_audit(const ModelConfig& cfg, const ParamSetT<float>& params,
                           const PreparedSample& sample, int n_probes, uint64_t probe_seed,
                           double epsilon) {
  I2GFPNetD net(cfg);
  for (auto& [name, p] : net.params()) {
    const ParamT<float>* src = params.find(name);
    if (!src || src->value.dims != p.value.dims)
      throw Error("gradient_audit: parameter mismatch at " + name);
    p.value = tensor_cast<double>(src->value);
  }

  const TensorD rgb = tensor_cast<double>(sample.rgb);
  const TensorD plane = tensor_cast<double>(sample.trimap_plane);
  LossTarget<double> target;
  target.gt = tensor_cast<double>(sample.target.gt);
  target.mask = tensor_cast<double>(sample.target.mask);
  if (sample.target.fg) target.fg = tensor_cast<double>(*sample.target.fg);
  if (sample.target.bg) target.bg = tensor_cast<double>(*sample.target.bg);
  if (sample.target.composite) target.composite = tensor_cast<double>(*sample.target.composite);

  auto loss_value = [&]() {
    GraphD g(false);
    const int pred = net.forward(g, g.leaf(rgb), g.leaf(plane));
    return static_cast<double>(g.scalar(build_total_loss(g, pred, target).total));
  };

  net.params().zero_grads();
  {
    GraphD g(true);
    const int pred = net.forward(g, g.leaf(rgb), g.leaf(plane));
    g.backward(build_total_loss(g, pred, target).total);
  }

  std::vector<std::pair<std::string, ParamT<double>*>> flat;
  size_t total = 0;
  for (auto& [name, p] : net.params()) {
    flat.emplace_back(name, &p);
    total += p.value.size();
  }

  std::mt19937_64 eng(probe_seed);
  std::uniform_int_distribution<size_t> pick(0, total - 1);

  AuditReport report;
  for (int i = 0; i < n_probes; ++i) {
    size_t target_ix = pick(eng);
    size_t cursor = target_ix;
    size_t which = 0;
    while (cursor >= flat[which].second->value.size()) {
      cursor -= flat[which].second->value.size();
      ++which;
    }
    ParamT<double>& p = *flat[which].second;

    const double w0 = p.value.data[cursor];
    p.value.data[cursor] = w0 + epsilon;
    const double lp = loss_value();
    p.value.data[cursor] = w0 - epsilon;
    const double lm = loss_value();
    p.value.data[cursor] = w0;

    AuditProbe probe;
    probe.param = flat[which].first;
    probe.index = cursor;
    probe.analytic = p.grad.data[cursor];
    probe.fdiff = (lp - lm) / (2.0 * epsilon);
    const double denom = std::max(std::max(std::abs(probe.analytic), std::abs(probe.fdiff)), 1e-8);
    probe.rel_err = std::abs(probe.analytic - probe.fdiff) / denom;
    report.max_rel_err = std::max(report.max_rel_err, probe.rel_err);
    report.probes.push_back(std::move(probe));
  }
  return report;
}

}  // namespace i2gfp
