#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hetlink/graph.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

/// Gene id to sequence-cluster id (e.g. UniRef50). Genes missing from the
/// file fall into a singleton cluster named after the gene.
class ClusterMap {
 public:
  void assign(std::string gene_id, std::string cluster_id);
  std::string cluster_of(const std::string& gene_id) const;
  bool contains(const std::string& gene_id) const { return map_.contains(gene_id); }
  std::size_t size() const noexcept { return map_.size(); }

  static ClusterMap parse(std::istream& in, std::string_view source);
  static ClusterMap load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, std::string> map_;
};

/// A scored candidate pair. In type-constrained mode `u` is the gene and `v`
/// the disease; unconstrained negatives may pair any two kinds.
struct LabeledPair {
  NodeIndex u = 0;
  NodeIndex v = 0;
  int label = 0;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

enum class SplitPart : std::uint8_t { Train, Val, Test };
inline constexpr std::array<SplitPart, 3> kSplitParts{SplitPart::Train, SplitPart::Val, SplitPart::Test};
std::string_view to_string(SplitPart part) noexcept;
SplitPart parse_split_part(std::string_view text);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  double operator[](SplitPart p) const noexcept {
    return p == SplitPart::Train ? train : p == SplitPart::Val ? val : test;
  }
};

SplitRatios parse_split_ratios(std::string_view text);
std::string format_split_ratios(const SplitRatios& r);

struct PositiveSplit {
  std::array<std::vector<LabeledPair>, 3> parts;

  std::vector<LabeledPair>& operator[](SplitPart p) { return parts[static_cast<std::size_t>(p)]; }
  const std::vector<LabeledPair>& operator[](SplitPart p) const { return parts[static_cast<std::size_t>(p)]; }
  std::size_t total() const noexcept { return parts[0].size() + parts[1].size() + parts[2].size(); }
};

/// Assigns whole gene clusters to train/val/test.
///
/// Clusters (sorted by id, then shuffled with `seed`) go one at a time to the
/// part with the largest remaining deficit against its target edge count;
/// ties go to the earlier part. Every GD edge follows its gene's cluster.
PositiveSplit split_edges(const HeteroGraph& graph, const ClusterMap& clusters, const SplitRatios& ratios,
                          std::uint64_t seed);

struct LeakageReport {
  /// Clusters whose genes contribute positives to more than one part.
  std::vector<std::string> violating_clusters;

  std::size_t violations() const noexcept { return violating_clusters.size(); }
};

LeakageReport check_leakage(const HeteroGraph& graph, const PositiveSplit& split, const ClusterMap& clusters);

/// True when every part's share of positives is within `tolerance` of its ratio.
bool ratios_within_tolerance(const PositiveSplit& split, const SplitRatios& ratios, double tolerance);

enum class NegativeMode { Constrained, Unconstrained };
enum class DegreeSource { Total, GD };
/// Genes a constrained negative may use: those of the positives being matched, or every gene.
enum class GenePool { Positives, All };

std::string_view to_string(NegativeMode mode) noexcept;
std::string_view to_string(DegreeSource source) noexcept;
std::string_view to_string(GenePool pool) noexcept;
NegativeMode parse_negative_mode(std::string_view text);
DegreeSource parse_degree_source(std::string_view text);
GenePool parse_gene_pool(std::string_view text);

struct SamplerConfig {
  NegativeMode mode = NegativeMode::Constrained;
  bool degree_aware = true;
  double alpha = 1.0;
  DegreeSource degree_source = DegreeSource::Total;
  GenePool gene_pool = GenePool::Positives;
};

/// Draws indices with probability proportional to fixed non-negative weights.
class WeightedSampler {
 public:
  explicit WeightedSampler(std::vector<double> weights);

  std::size_t draw(Rng& rng) const;
  double total() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  std::size_t size() const noexcept { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

/// Weights deg(node)^alpha (0^0 taken as 1) for the given candidate nodes.
std::vector<double> degree_weights(const HeteroGraph& graph, std::span<const NodeIndex> nodes, double alpha,
                                   DegreeSource source);

/// Draws |positives| label-0 pairs that are neither graph edges nor already in `taken`.
///
/// Constrained mode pairs a gene drawn uniformly from the gene pool (the
/// positives' genes by default) with a disease drawn proportionally
/// to deg^alpha (or uniformly when degree weighting is off) and excludes every
/// GD edge of the graph. Unconstrained mode pairs a uniform node with a
/// weighted node of any kind and excludes edges of every relation. Drawn
/// pairs are added to `taken` when it is supplied.
std::vector<LabeledPair> sample_negatives(const HeteroGraph& graph, std::span<const LabeledPair> positives,
                                          const SamplerConfig& config, std::uint64_t seed,
                                          std::unordered_set<std::uint64_t>* taken = nullptr);

/// Positives plus frozen, balanced negatives for each part.
struct EdgeSplit {
  PositiveSplit positives;
  std::array<std::vector<LabeledPair>, 3> negatives;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  SamplerConfig sampler;       // training pool
  SamplerConfig eval_sampler;  // frozen val/test negatives

  const std::vector<LabeledPair>& negatives_of(SplitPart p) const { return negatives[static_cast<std::size_t>(p)]; }
  std::vector<LabeledPair>& negatives_of(SplitPart p) { return negatives[static_cast<std::size_t>(p)]; }

  /// Positives followed by negatives.
  std::vector<LabeledPair> pairs(SplitPart p) const;
};

/// Splits positives and samples negatives per part (val, then test, then
/// train) with a shared exclusion set so no negative repeats across parts.
/// `train_sampler` governs the training pool only; evaluation negatives use
/// `eval_sampler`.
EdgeSplit build_edge_split(const HeteroGraph& graph, const ClusterMap& clusters, const SplitRatios& ratios,
                           const SamplerConfig& train_sampler, const SamplerConfig& eval_sampler, std::uint64_t seed);

inline EdgeSplit build_edge_split(const HeteroGraph& graph, const ClusterMap& clusters, const SplitRatios& ratios,
                                  const SamplerConfig& sampler, std::uint64_t seed) {
  return build_edge_split(graph, clusters, ratios, sampler, sampler, seed);
}

/// Fresh training negatives for one epoch, disjoint from frozen val/test negatives.
std::vector<LabeledPair> resample_train_negatives(const HeteroGraph& graph, const EdgeSplit& split,
                                                  std::uint64_t seed, std::uint64_t epoch);

/// Graph whose GD relation keeps only the training positives; used for message passing.
HeteroGraph training_graph(const HeteroGraph& graph, const EdgeSplit& split);

/// Randomly permutes labels within each part; used for no-signal controls.
void permute_labels(EdgeSplit& split, std::uint64_t seed);

}  // namespace hetlink
