#include "hetlink/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>

#include "hetlink/error.hpp"
#include "hetlink/io.hpp"
#include "hetlink/metrics.hpp"
#include "hetlink/model.hpp"

namespace hetlink {

namespace {

double to_number(std::string_view key, const std::string& text) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ConfigError, std::string(key) + ": '" + text + "' is not a finite number");
  }
  return v;
}

std::int64_t to_integer(std::string_view key, const std::string& text) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ConfigError, std::string(key) + ": '" + text + "' is not an integer");
  }
  return v;
}

using Normalize = std::function<std::string(const std::string&)>;

Normalize number_at_least(std::string key, double lo, bool strict = false) {
  return [key, lo, strict](const std::string& text) {
    const double v = to_number(key, text);
    if (strict ? !(v > lo) : !(v >= lo)) {
      throw Error(ErrorCode::ConfigError, key + " must be " + (strict ? "> " : ">= ") + format_double(lo));
    }
    return format_double(v);
  };
}

Normalize number_in(std::string key, double lo, double hi_exclusive) {
  return [key, lo, hi_exclusive](const std::string& text) {
    const double v = to_number(key, text);
    if (!(v >= lo && v < hi_exclusive)) {
      throw Error(ErrorCode::ConfigError,
                  key + " must be in [" + format_double(lo) + ", " + format_double(hi_exclusive) + ")");
    }
    return format_double(v);
  };
}

Normalize integer_at_least(std::string key, std::int64_t lo) {
  return [key, lo](const std::string& text) {
    const auto v = to_integer(key, text);
    if (v < lo) throw Error(ErrorCode::ConfigError, key + " must be >= " + std::to_string(lo));
    return std::to_string(v);
  };
}

Normalize seed_value(std::string key) {
  return [key](const std::string& text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(ErrorCode::ConfigError, key + ": '" + text + "' is not an unsigned 64-bit integer");
    }
    return std::to_string(v);
  };
}

Normalize boolean(std::string key) {
  return [key](const std::string& text) -> std::string {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes" || t == "on") return "true";
    if (t == "false" || t == "0" || t == "no" || t == "off") return "false";
    throw Error(ErrorCode::ConfigError, key + ": '" + text + "' is not a boolean");
  };
}

template <typename Parse>
Normalize choice(Parse parse) {
  return [parse](const std::string& text) { return std::string(to_string(parse(text))); };
}

Normalize any_text() {
  return [](const std::string& text) { return text; };
}

Normalize log_level() {
  return [](const std::string& text) -> std::string {
    static const std::array<std::string_view, 7> levels{"trace", "debug", "info", "warn", "error", "critical", "off"};
    if (std::find(levels.begin(), levels.end(), text) == levels.end()) {
      throw Error(ErrorCode::ConfigError, "log_level: '" + text + "' (trace|debug|info|warn|error|critical|off)");
    }
    return text;
  };
}

std::vector<ConfigKey> make_schema() {
  const std::string third = format_double(1.0 / 3);
  return {
      {"seed", "7", "master seed; split, init, dropout and batching streams derive from it", seed_value("seed")},
      {"split_ratios", "0.8,0.1,0.1", "train,val,test shares of the positive GD edges",
       [](const std::string& t) { return format_split_ratios(parse_split_ratios(t)); }},
      {"negative_mode", "constrained", "training-pool negatives: constrained (gene x disease) or unconstrained",
       choice(parse_negative_mode)},
      {"degree_aware", "true", "draw the disease endpoint proportionally to degree^alpha", boolean("degree_aware")},
      {"alpha", "1", "degree exponent for degree-aware sampling", number_at_least("alpha", 0.0)},
      {"degree_source", "total", "degree used by the sampler: total or gd", choice(parse_degree_source)},
      {"negative_gene_pool", "positives", "genes for constrained negatives: positives (same part) or all",
       choice(parse_gene_pool)},
      {"resample_train_negatives", "false", "redraw training negatives every epoch",
       boolean("resample_train_negatives")},
      {"mix_gg", third, "mixing weight of the gene-gene relation", number_at_least("mix_gg", 0.0)},
      {"mix_dd", third, "mixing weight of the disease-disease relation", number_at_least("mix_dd", 0.0)},
      {"mix_gd", third, "mixing weight of the gene-disease relation", number_at_least("mix_gd", 0.0)},
      {"align_mode", "default", "feature alignment: default (1792 block layout) or ablation (1024 padded)",
       choice(parse_align_mode)},
      {"missing", "error", "node without an embedding: error or zero", choice(parse_missing_policy)},
      {"embedding_format", "comma", "embedding value separator: comma or whitespace", choice(parse_embedding_format)},
      {"hidden_dim", "112", "first GCN layer width", integer_at_least("hidden_dim", 1)},
      {"embed_dim", "28", "output embedding width", integer_at_least("embed_dim", 1)},
      {"dropout", "0.5", "inverted dropout rate after each layer", number_in("dropout", 0.0, 1.0)},
      {"final_activation", "relu", "activation of the second layer: relu or none", choice(parse_final_activation)},
      {"learning_rate", "0.001", "AdamW step size", number_at_least("learning_rate", 0.0)},
      {"epochs", "100", "training epochs", integer_at_least("epochs", 1)},
      {"batch_size", "512", "training pairs per batch", integer_at_least("batch_size", 1)},
      {"w0", "1", "loss weight of negative pairs", number_at_least("w0", 0.0)},
      {"w1", "1", "loss weight of positive pairs", number_at_least("w1", 0.0)},
      {"weight_decay", "0.01", "decoupled weight decay", number_at_least("weight_decay", 0.0)},
      {"beta1", "0.9", "AdamW first-moment decay", number_in("beta1", 0.0, 1.0)},
      {"beta2", "0.999", "AdamW second-moment decay", number_in("beta2", 0.0, 1.0)},
      {"epsilon", "1e-08", "AdamW denominator guard", number_at_least("epsilon", 0.0, true)},
      {"full_graph_batching", "false", "run every batch on the whole graph instead of a subgraph",
       boolean("full_graph_batching")},
      {"one_hop_batches", "false", "use 1-hop batch subgraphs instead of the exact 2-hop closure",
       boolean("one_hop_batches")},
      {"threshold", "0.5", "probability at or above which a pair is predicted positive",
       number_in("threshold", 0.0, std::nextafter(1.0, 2.0))},
      {"checkpoint_dir", "", "where train writes the checkpoint; empty means the output directory", any_text()},
      {"log_level", "info", "spdlog level", log_level()},
  };
}

}  // namespace

std::string_view to_string(ConfigSource source) noexcept {
  switch (source) {
    case ConfigSource::Default: return "default";
    case ConfigSource::File: return "file";
    case ConfigSource::Env: return "env";
    case ConfigSource::Flag: return "flag";
  }
  return "?";
}

const std::vector<ConfigKey>& RunConfig::schema() {
  static const std::vector<ConfigKey> keys = make_schema();
  return keys;
}

namespace {

const ConfigKey* lookup(std::string_view key) {
  for (const auto& k : RunConfig::schema()) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

}  // namespace

bool RunConfig::known(std::string_view key) { return lookup(key) != nullptr; }

RunConfig::RunConfig() {
  for (const auto& k : schema()) {
    values_.emplace(k.name, k.normalize(k.default_value));
    sources_.emplace(k.name, ConfigSource::Default);
  }
}

void RunConfig::set(std::string_view key, std::string value, ConfigSource source) {
  const ConfigKey* k = lookup(key);
  if (!k) throw Error(ErrorCode::ConfigError, "unknown config key '" + std::string(key) + "'");
  auto src = sources_.find(key);
  if (static_cast<int>(source) < static_cast<int>(src->second)) return;
  values_.find(key)->second = k->normalize(value);
  src->second = source;
}

void RunConfig::parse_file(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError,
                  std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), ConfigSource::File);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  parse_file(in, path.string());
}

std::string RunConfig::env_name(std::string_view key) {
  std::string name = "HETLINK_";
  for (char c : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return name;
}

void RunConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
  for (const auto& k : schema()) {
    const std::string name = env_name(k.name);
    if (const char* v = getenv(name.c_str())) set(k.name, v, ConfigSource::Env);
  }
}

void RunConfig::apply_env() {
  apply_env([](const char* name) { return std::getenv(name); });
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::ConfigError, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

ConfigSource RunConfig::source_of(std::string_view key) const {
  const auto it = sources_.find(key);
  if (it == sources_.end()) throw Error(ErrorCode::ConfigError, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

double RunConfig::number(std::string_view key) const { return to_number(key, get(key)); }
std::int64_t RunConfig::integer(std::string_view key) const { return to_integer(key, get(key)); }
bool RunConfig::flag(std::string_view key) const { return get(key) == "true"; }

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const { return sha256_hex(canonical()); }

std::uint64_t RunConfig::seed() const { return std::stoull(get("seed")); }

std::array<double, 3> RunConfig::mixing_weights() const {
  return {number("mix_gg"), number("mix_dd"), number("mix_gd")};
}

SplitRatios RunConfig::split_ratios() const { return parse_split_ratios(get("split_ratios")); }

SamplerConfig RunConfig::train_sampler() const {
  SamplerConfig s = eval_sampler();
  s.mode = parse_negative_mode(get("negative_mode"));
  return s;
}

SamplerConfig RunConfig::eval_sampler() const {
  SamplerConfig s;
  s.mode = NegativeMode::Constrained;
  s.degree_aware = flag("degree_aware");
  s.alpha = number("alpha");
  s.degree_source = parse_degree_source(get("degree_source"));
  s.gene_pool = parse_gene_pool(get("negative_gene_pool"));
  return s;
}

AlignMode RunConfig::align_mode() const { return parse_align_mode(get("align_mode")); }
MissingPolicy RunConfig::missing_policy() const { return parse_missing_policy(get("missing")); }
EmbeddingFormat RunConfig::embedding_format() const { return parse_embedding_format(get("embedding_format")); }

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.learning_rate = number("learning_rate");
  c.epochs = static_cast<int>(integer("epochs"));
  c.batch_size = static_cast<std::size_t>(integer("batch_size"));
  c.w0 = number("w0");
  c.w1 = number("w1");
  c.weight_decay = number("weight_decay");
  c.beta1 = number("beta1");
  c.beta2 = number("beta2");
  c.epsilon = number("epsilon");
  c.seed = seed();
  c.resample_train_negatives = flag("resample_train_negatives");
  c.full_graph_batching = flag("full_graph_batching");
  c.one_hop_batches = flag("one_hop_batches");
  c.threshold = number("threshold");
  c.model.in_dim = aligned_width(align_mode());
  c.model.hidden_dim = static_cast<std::size_t>(integer("hidden_dim"));
  c.model.embed_dim = static_cast<std::size_t>(integer("embed_dim"));
  c.model.dropout = number("dropout");
  c.model.final_activation = parse_final_activation(get("final_activation"));
  return c;
}

}  // namespace hetlink
