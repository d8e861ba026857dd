#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "i2gfp/network.hpp"
#include "i2gfp/pipeline.hpp"
#include "i2gfp/trainer.hpp"

namespace i2gfp {

// Flat `key = value` config file with '#' comments. Recognized keys are
// fixed; unknown keys are config errors so typos fail loudly. Values can be
// overridden by I2GFP_* environment variables (dots become underscores,
// uppercased) and by explicit key=value pairs, in that order.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig from_file(const std::string& path);
  static const std::vector<std::string>& known_keys();

  void apply_env();
  void apply_override(const std::string& key_equals_value);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_str(const std::string& key, const std::string& def) const;
  std::string require_str(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t def) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  uint64_t get_u64(const std::string& key, uint64_t def) const;
  std::vector<int> get_int_list(const std::string& key, std::vector<int> def) const;

  // Path values resolve relative to the config file's directory.
  std::string get_path(const std::string& key, const std::string& def) const;
  std::string require_path(const std::string& key) const;

  std::string echo() const;  // sorted key=value lines for logging

 private:
  std::map<std::string, std::string> kv_;
  std::filesystem::path base_dir_ = ".";
};

ModelConfig model_from_config(const KvConfig& cfg);
TrainConfig train_from_config(const KvConfig& cfg);
DatasetSpec dataset_from_config(const KvConfig& cfg);
AugmentationConfig augmentation_from_config(const KvConfig& cfg);

}  // namespace i2gfp
