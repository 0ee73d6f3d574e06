#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hetlink/dataset.hpp"
#include "hetlink/features.hpp"
#include "hetlink/trainer.hpp"

namespace hetlink {

enum class ConfigSource { Default, File, Env, Flag };
std::string_view to_string(ConfigSource source) noexcept;

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
  std::function<std::string(const std::string&)> normalize;  // canonical text; throws ConfigError
};

/// Every knob of every module as one flat key=value map. Later sources win
/// over earlier ones only when they rank higher: flag > env > file > default.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<ConfigKey>& schema();
  static bool known(std::string_view key);

  /// Throws ConfigError for unknown keys or values that fail validation.
  void set(std::string_view key, std::string value, ConfigSource source = ConfigSource::Flag);

  /// `key = value` lines; `#` starts a comment.
  void parse_file(std::istream& in, std::string_view source);
  void load_file(const std::filesystem::path& path);

  /// Reads HETLINK_<KEY> for every key (e.g. HETLINK_CHECKPOINT_DIR).
  void apply_env(const std::function<const char*(const char*)>& getenv);
  void apply_env();

  static std::string env_name(std::string_view key);

  const std::string& get(std::string_view key) const;
  ConfigSource source_of(std::string_view key) const;
  double number(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  bool flag(std::string_view key) const;

  /// Sorted `key=value` lines.
  std::string canonical() const;
  std::string hash() const;
  const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }

  std::uint64_t seed() const;
  std::array<double, 3> mixing_weights() const;
  SplitRatios split_ratios() const;
  SamplerConfig train_sampler() const;
  SamplerConfig eval_sampler() const;
  AlignMode align_mode() const;
  MissingPolicy missing_policy() const;
  EmbeddingFormat embedding_format() const;
  /// Model input width follows the alignment mode.
  TrainConfig train_config() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::map<std::string, ConfigSource, std::less<>> sources_;
};

}  // namespace hetlink
