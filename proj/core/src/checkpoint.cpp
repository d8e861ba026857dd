#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "i2gfp/trainer.hpp"

namespace i2gfp {

namespace {

constexpr char kMagic[8] = {'I', '2', 'G', 'F', 'P', 'C', 'K', '1'};

nlohmann::json model_to_json(const ModelConfig& m) {
  return {{"input_size", m.input_size},
          {"base_channels", m.base_channels},
          {"width_divisor", m.width_divisor},
          {"shrink_channels", m.shrink_channels},
          {"use_ic", m.use_ic},
          {"use_gfp", m.use_gfp},
          {"gfp_kernel1", m.gfp_kernel1},
          {"gfp_kernel2", m.gfp_kernel2},
          {"gfp_channels", m.gfp_channels},
          {"seed", m.seed}};
}

ModelConfig model_from_json(const nlohmann::json& j) {
  ModelConfig m;
  m.input_size = j.at("input_size").get<int>();
  const auto bc = j.at("base_channels").get<std::vector<int>>();
  if (bc.size() != m.base_channels.size()) throw IoError("checkpoint: bad base_channels");
  std::copy(bc.begin(), bc.end(), m.base_channels.begin());
  m.width_divisor = j.at("width_divisor").get<int>();
  m.shrink_channels = j.at("shrink_channels").get<int>();
  m.use_ic = j.at("use_ic").get<bool>();
  m.use_gfp = j.at("use_gfp").get<bool>();
  m.gfp_kernel1 = j.at("gfp_kernel1").get<int>();
  m.gfp_kernel2 = j.at("gfp_kernel2").get<int>();
  m.gfp_channels = j.at("gfp_channels").get<int>();
  m.seed = j.at("seed").get<uint64_t>();
  return m;
}

nlohmann::json train_to_json(const TrainConfig& t) {
  return {{"stage", t.stage},
          {"iterations", t.iterations},
          {"batch_size", t.batch_size},
          {"lr_initial", t.lr_initial},
          {"lr_min", t.lr_min},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"adam_eps", t.adam_eps},
          {"checkpoint_every", t.checkpoint_every},
          {"seed", t.seed}};
}

TrainConfig train_from_json(const nlohmann::json& j) {
  TrainConfig t;
  t.stage = j.at("stage").get<int>();
  t.iterations = j.at("iterations").get<int64_t>();
  t.batch_size = j.at("batch_size").get<int>();
  t.lr_initial = j.at("lr_initial").get<double>();
  t.lr_min = j.at("lr_min").get<double>();
  t.beta1 = j.at("beta1").get<double>();
  t.beta2 = j.at("beta2").get<double>();
  t.adam_eps = j.at("adam_eps").get<double>();
  t.checkpoint_every = j.at("checkpoint_every").get<int64_t>();
  t.seed = j.at("seed").get<uint64_t>();
  return t;
}

void append_tensors(nlohmann::json& dir, std::vector<float>& blob, const std::string& prefix,
                    const std::vector<std::pair<std::string, Tensor>>& tensors) {
  for (const auto& [name, t] : tensors) {
    dir.push_back({{"name", prefix + name},
                   {"shape", t.dims},
                   {"offset", blob.size()},
                   {"count", t.data.size()}});
    blob.insert(blob.end(), t.data.begin(), t.data.end());
  }
}

}  // namespace

const Tensor* Checkpoint::find_param(const std::string& name) const {
  for (const auto& [n, t] : params)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json dir = nlohmann::json::array();
  std::vector<float> blob;
  append_tensors(dir, blob, "param/", ckpt.params);
  if (ckpt.has_optimizer) {
    append_tensors(dir, blob, "adam_m/", ckpt.adam_m);
    append_tensors(dir, blob, "adam_v/", ckpt.adam_v);
  }

  nlohmann::json header{{"kind", ckpt.has_optimizer ? "checkpoint" : "params"},
                        {"model_config", model_to_json(ckpt.model)},
                        {"train_config", train_to_json(ckpt.train)},
                        {"iteration", ckpt.iteration},
                        {"adam_step", ckpt.adam_step},
                        {"rng", ckpt.rng_state},
                        {"tensors", dir}};
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!out) throw IoError("short write on checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a checkpoint file: " + path);

  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw IoError("truncated checkpoint header: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const std::exception& e) {
    throw IoError("corrupt checkpoint header in " + path + ": " + e.what());
  }

  Checkpoint ckpt;
  ckpt.model = model_from_json(header.at("model_config"));
  ckpt.train = train_from_json(header.at("train_config"));
  ckpt.iteration = header.at("iteration").get<int64_t>();
  ckpt.adam_step = header.at("adam_step").get<int64_t>();
  ckpt.rng_state = header.at("rng").get<std::string>();
  ckpt.has_optimizer = header.at("kind").get<std::string>() == "checkpoint";

  std::vector<float> blob;
  {
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % sizeof(float) != 0) throw IoError("odd blob size in " + path);
    blob.resize(raw.size() / sizeof(float));
    std::memcpy(blob.data(), raw.data(), raw.size());
  }

  for (const auto& entry : header.at("tensors")) {
    const std::string full = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<int>>();
    const size_t offset = entry.at("offset").get<size_t>();
    const size_t count = entry.at("count").get<size_t>();
    if (offset + count > blob.size()) throw IoError("tensor out of range in " + path);

    Tensor t(shape);
    if (t.size() != count) throw IoError("shape/count mismatch for " + full + " in " + path);
    std::copy(blob.begin() + static_cast<long>(offset),
              blob.begin() + static_cast<long>(offset + count), t.data.begin());

    if (full.starts_with("param/")) {
      ckpt.params.emplace_back(full.substr(6), std::move(t));
    } else if (full.starts_with("adam_m/")) {
      ckpt.adam_m.emplace_back(full.substr(7), std::move(t));
    } else if (full.starts_with("adam_v/")) {
      ckpt.adam_v.emplace_back(full.substr(7), std::move(t));
    } else {
      throw IoError("unknown tensor section '" + full + "' in " + path);
    }
  }
  return ckpt;
}

}  // namespace i2gfp
