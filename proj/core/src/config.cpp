#include "i2gfp/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace i2gfp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_known(const std::string& key) {
  const auto& keys = KvConfig::known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

std::string env_name(const std::string& key) {
  std::string out = "I2GFP_";
  for (char c : key) out += (c == '.') ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

}  // namespace

const std::vector<std::string>& KvConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "model.input_size", "model.base_channels", "model.width_divisor", "model.shrink_channels",
      "model.use_ic", "model.use_gfp", "model.gfp_kernel1", "model.gfp_kernel2",
      "model.gfp_channels", "model.seed",
      "train.stage", "train.iterations", "train.batch_size", "train.lr_initial", "train.lr_min",
      "train.beta1", "train.beta2", "train.adam_eps", "train.checkpoint_every", "train.seed",
      "train.resume_from", "train.stage1_checkpoint", "train.out_dir", "train.manifest",
      "train.dataset_root",
      "data.foreground_dir", "data.alpha_dir", "data.background_dir", "data.output_dir",
      "data.backgrounds_per_foreground", "data.seed", "data.trimap_radius_min",
      "data.trimap_radius_max",
      "augment.crop_sizes", "augment.train_size", "augment.flip_probability", "augment.hue_delta",
      "augment.saturation_delta", "augment.brightness_delta", "augment.rotation_deg",
      "augment.translate_frac", "augment.scale_min", "augment.scale_max",
  };
  return keys;
}

KvConfig KvConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);

  KvConfig cfg;
  cfg.base_dir_ = fs::absolute(fs::path(path)).parent_path();

  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void KvConfig::apply_env() {
  for (const auto& key : known_keys()) {
    if (const char* v = std::getenv(env_name(key).c_str())) kv_[key] = v;
  }
}

void KvConfig::apply_override(const std::string& kev) {
  const auto eq = kev.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be key=value: " + kev);
  set(trim(kev.substr(0, eq)), trim(kev.substr(eq + 1)));
}

void KvConfig::set(const std::string& key, const std::string& value) {
  if (!is_known(key)) throw ConfigError("unknown config key '" + key + "'");
  kv_[key] = value;
}

std::string KvConfig::get_str(const std::string& key, const std::string& def) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

std::string KvConfig::require_str(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end() || it->second.empty())
    throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

int64_t KvConfig::get_int(const std::string& key, int64_t def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + it->second);
  }
}

double KvConfig::get_double(const std::string& key, double def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + it->second);
  }
}

bool KvConfig::get_bool(const std::string& key, bool def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: " + it->second);
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: " + it->second);
  }
}

std::vector<int> KvConfig::get_int_list(const std::string& key, std::vector<int> def) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<int> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not an integer list: " + it->second);
    }
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::string KvConfig::get_path(const std::string& key, const std::string& def) const {
  const auto it = kv_.find(key);
  const std::string raw = it == kv_.end() ? def : it->second;
  if (raw.empty()) return raw;
  const fs::path p(raw);
  return p.is_absolute() ? p.string() : (base_dir_ / p).lexically_normal().string();
}

std::string KvConfig::require_path(const std::string& key) const {
  require_str(key);
  return get_path(key, "");
}

std::string KvConfig::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
  return os.str();
}

ModelConfig model_from_config(const KvConfig& cfg) {
  ModelConfig m;
  m.input_size = static_cast<int>(cfg.get_int("model.input_size", m.input_size));
  const auto bc = cfg.get_int_list("model.base_channels",
                                   {m.base_channels.begin(), m.base_channels.end()});
  if (bc.size() != m.base_channels.size())
    throw ConfigError("model.base_channels: expected 5 entries");
  std::copy(bc.begin(), bc.end(), m.base_channels.begin());
  m.width_divisor = static_cast<int>(cfg.get_int("model.width_divisor", m.width_divisor));
  m.shrink_channels = static_cast<int>(cfg.get_int("model.shrink_channels", m.shrink_channels));
  m.use_ic = cfg.get_bool("model.use_ic", m.use_ic);
  m.use_gfp = cfg.get_bool("model.use_gfp", m.use_gfp);
  m.gfp_kernel1 = static_cast<int>(cfg.get_int("model.gfp_kernel1", m.gfp_kernel1));
  m.gfp_kernel2 = static_cast<int>(cfg.get_int("model.gfp_kernel2", m.gfp_kernel2));
  m.gfp_channels = static_cast<int>(cfg.get_int("model.gfp_channels", m.gfp_channels));
  m.seed = cfg.get_u64("model.seed", m.seed);
  m.validate();
  return m;
}

TrainConfig train_from_config(const KvConfig& cfg) {
  TrainConfig t;
  t.stage = static_cast<int>(cfg.get_int("train.stage", t.stage));
  t.iterations = cfg.get_int("train.iterations", t.iterations);
  t.batch_size = static_cast<int>(cfg.get_int("train.batch_size", t.batch_size));
  t.lr_initial = cfg.get_double("train.lr_initial", t.lr_initial);
  t.lr_min = cfg.get_double("train.lr_min", t.lr_min);
  t.beta1 = cfg.get_double("train.beta1", t.beta1);
  t.beta2 = cfg.get_double("train.beta2", t.beta2);
  t.adam_eps = cfg.get_double("train.adam_eps", t.adam_eps);
  t.checkpoint_every = cfg.get_int("train.checkpoint_every", t.checkpoint_every);
  t.seed = cfg.get_u64("train.seed", t.seed);
  t.resume_from = cfg.get_path("train.resume_from", "");
  t.stage1_checkpoint = cfg.get_path("train.stage1_checkpoint", "");
  t.validate();
  return t;
}

DatasetSpec dataset_from_config(const KvConfig& cfg) {
  DatasetSpec d;
  d.foreground_dir = cfg.require_path("data.foreground_dir");
  d.alpha_dir = cfg.require_path("data.alpha_dir");
  d.background_dir = cfg.require_path("data.background_dir");
  d.output_dir = cfg.require_path("data.output_dir");
  d.backgrounds_per_foreground =
      static_cast<int>(cfg.get_int("data.backgrounds_per_foreground", 1));
  d.seed = cfg.get_u64("data.seed", 0);
  d.trimap_radius_min = static_cast<int>(cfg.get_int("data.trimap_radius_min", 1));
  d.trimap_radius_max = static_cast<int>(cfg.get_int("data.trimap_radius_max", 15));
  return d;
}

AugmentationConfig augmentation_from_config(const KvConfig& cfg) {
  AugmentationConfig a;
  a.crop_sizes = cfg.get_int_list("augment.crop_sizes", a.crop_sizes);
  a.train_size = static_cast<int>(cfg.get_int("augment.train_size", a.train_size));
  a.flip_probability = cfg.get_double("augment.flip_probability", a.flip_probability);
  a.hue_delta = cfg.get_double("augment.hue_delta", a.hue_delta);
  a.saturation_delta = cfg.get_double("augment.saturation_delta", a.saturation_delta);
  a.brightness_delta = cfg.get_double("augment.brightness_delta", a.brightness_delta);
  a.rotation_deg = cfg.get_double("augment.rotation_deg", a.rotation_deg);
  a.translate_frac = cfg.get_double("augment.translate_frac", a.translate_frac);
  a.scale_min = cfg.get_double("augment.scale_min", a.scale_min);
  a.scale_max = cfg.get_double("augment.scale_max", a.scale_max);
  a.seed = cfg.get_u64("train.seed", a.seed);
  a.validate();
  return a;
}

}  // namespace i2gfp
