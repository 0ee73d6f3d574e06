#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetlink/config.hpp"
#include "hetlink/dataset.hpp"
#include "hetlink/features.hpp"
#include "hetlink/graph.hpp"
#include "hetlink/io.hpp"
#include "hetlink/metrics.hpp"
#include "hetlink/synthetic.hpp"
#include "hetlink/trainer.hpp"

namespace hetlink {

namespace fs = std::filesystem;

// File names inside command output directories.
inline constexpr const char* kGraphFile = "graph.hlg";
inline constexpr const char* kManifestFile = "manifest.tsv";
inline constexpr const char* kSplitDescriptorFile = "split.json";
inline constexpr const char* kAuditFile = "audit.tsv";
inline constexpr const char* kCheckpointFile = "checkpoint.bin";
inline constexpr const char* kTrainLogFile = "train_log.tsv";
inline constexpr const char* kTimingFile = "timing.tsv";
inline constexpr const char* kRunDescriptorFile = "run.txt";
std::string split_manifest_name(SplitPart part);  // train.tsv, val.tsv, test.tsv

// ---------------------------------------------------------------------------

struct BuildGraphOptions {
  EdgeSources sources;
  fs::path out_dir;
};

struct BuildGraphOutput {
  AssembledGraph assembled;
  std::string manifest;
  fs::path bundle;
};

/// Writes the graph bundle and the count manifest.
BuildGraphOutput cmd_build_graph(const BuildGraphOptions& opts);

// ---------------------------------------------------------------------------

struct SplitOptions {
  fs::path graph;
  fs::path clusters;
  fs::path out_dir;
  RunConfig config;
};

struct SplitOutput {
  EdgeSplit split;
  LeakageReport audit;
};

/// Writes one manifest per part, the JSON descriptor and the audit report.
/// Throws LeakageDetected (after writing the audit) if any cluster leaks.
SplitOutput cmd_split(const SplitOptions& opts);

/// Re-checks existing manifests for cluster leakage without resplitting.
LeakageReport cmd_audit(const fs::path& graph, const fs::path& clusters, const fs::path& split_dir);

/// `cluster_id<TAB>parts` for every violating cluster.
std::string format_audit(const LeakageReport& report);

// ---------------------------------------------------------------------------

struct ArtifactPaths {
  fs::path graph;
  fs::path gene_embeddings;
  fs::path disease_embeddings;
  fs::path split_dir;
};

/// Everything training and scoring need, loaded and cross-checked.
struct Artifacts {
  HeteroGraph graph;
  FeatureMatrix features;
  EdgeSplit split;
  HeteroGraph train_graph;  // GG + DD + training GD positives
  PropagationOperator op;   // built on train_graph
  std::map<std::string, std::string> hashes;  // graph, gene_embeddings, disease_embeddings, split
};

/// Loads a split directory written by cmd_split. Throws ArtifactMismatch when
/// the descriptor names a different graph or a manifest was edited.
EdgeSplit load_split(const fs::path& split_dir, const HeteroGraph& graph, const std::string& graph_sha256,
                     std::string* split_sha256 = nullptr);

Artifacts load_artifacts(const ArtifactPaths& paths, const RunConfig& config);

struct TrainOptions {
  ArtifactPaths inputs;
  fs::path out_dir;
  RunConfig config;
};

struct TrainOutput {
  TrainResult result;
  Checkpoint checkpoint;
  fs::path checkpoint_path;
  std::string run_descriptor;
};

/// Trains, then writes the best checkpoint, the TSV log, per-epoch timings and
/// a key=value run descriptor.
TrainOutput cmd_train(const TrainOptions& opts);

/// Rebuilds the run config stored in a checkpoint.
RunConfig checkpoint_config(const Checkpoint& ckpt);

struct EvaluateOptions {
  fs::path checkpoint;
  ArtifactPaths inputs;
  SplitPart part = SplitPart::Val;
};

/// Scores one split part with the checkpoint; artifacts must match its hashes.
MetricReport cmd_evaluate(const EvaluateOptions& opts);

// ---------------------------------------------------------------------------

enum class PairStatus { Known, Heldout, Novel };
std::string_view to_string(PairStatus status) noexcept;

struct RankedPair {
  std::string query;
  std::string gene_id;
  std::string disease_id;
  double score = 0;
  double probability = 0;
  PairStatus status = PairStatus::Novel;
};

struct PredictOptions {
  fs::path checkpoint;
  ArtifactPaths inputs;
  std::vector<std::string> genes;     // rank diseases for each
  std::vector<std::string> diseases;  // rank genes for each
  std::size_t top_k = 0;              // per query; 0 keeps all
  bool exclude_known = false;
};

/// Ranks candidate partners of each query by decoder score, highest first.
/// Known means a GD edge of the training graph; heldout a GD edge outside it.
std::vector<RankedPair> cmd_predict(const PredictOptions& opts);
std::string format_ranking(const std::vector<RankedPair>& ranking);

// ---------------------------------------------------------------------------

struct AblateOptions {
  fs::path graph;
  fs::path clusters;
  fs::path gene_embeddings;
  fs::path disease_embeddings;
  fs::path out_dir;
  RunConfig config;
};

struct AblationRow {
  AlignMode align = AlignMode::Default;
  NegativeMode negatives = NegativeMode::Constrained;
  std::uint64_t seed = 0;
  MetricReport val;
  MetricReport test;
  fs::path run_dir;
  fs::path split_dir;
};

/// Runs split, train and evaluate for the 2x2 of alignment mode and training
/// negative mode with the base config's seed. Sub-runs land in out_dir.
std::vector<AblationRow> cmd_ablate(const AblateOptions& opts);
std::string format_ablation(const std::vector<AblationRow>& rows);

// ---------------------------------------------------------------------------

struct SynthOptions {
  PlantedConfig planted;
  fs::path out_dir;
};

/// Writes gg.tsv, dd.tsv, gd.tsv (with a score column), clusters.tsv and both
/// embedding files for a planted-structure task.
SyntheticTask cmd_synth(const SynthOptions& opts);

}  // namespace hetlink
