#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetlink/graph.hpp"
#include "hetlink/matrix.hpp"

namespace hetlink {

inline constexpr std::size_t kGeneDim = 1024;
inline constexpr std::size_t kDiseaseDim = 768;
inline constexpr std::size_t kAlignedDim = kGeneDim + kDiseaseDim;

constexpr std::size_t embedding_width(NodeKind kind) noexcept {
  return kind == NodeKind::Gene ? kGeneDim : kDiseaseDim;
}

struct RawEmbedding {
  std::string id;
  NodeKind kind = NodeKind::Gene;
  std::vector<double> values;
};

/// Value separator inside an embedding row. The id is always tab-separated.
enum class EmbeddingFormat { Comma, Whitespace };

/// Default: gene in [0,1024), disease in [1024,1792).
/// Ablation: width 1024, disease in [0,768) followed by 256 zeros.
enum class AlignMode { Default, Ablation };

enum class MissingPolicy { Error, ZeroFill };

std::string_view to_string(AlignMode mode) noexcept;
std::string_view to_string(MissingPolicy policy) noexcept;
std::string_view to_string(EmbeddingFormat format) noexcept;
AlignMode parse_align_mode(std::string_view text);
MissingPolicy parse_missing_policy(std::string_view text);
EmbeddingFormat parse_embedding_format(std::string_view text);

/// Reads `id<TAB>v1,v2,...` rows. `expected_width` defaults to the kind's width.
std::vector<RawEmbedding> parse_embeddings(std::istream& in, NodeKind kind, EmbeddingFormat format,
                                           std::string_view source,
                                           std::optional<std::size_t> expected_width = std::nullopt);

std::vector<RawEmbedding> load_embeddings(const std::filesystem::path& path, NodeKind kind,
                                          EmbeddingFormat format = EmbeddingFormat::Comma,
                                          std::optional<std::size_t> expected_width = std::nullopt);

void write_embeddings(std::ostream& out, const std::vector<RawEmbedding>& rows);

struct FeatureMatrix {
  Matrix values;
  AlignMode mode = AlignMode::Default;
  std::size_t zero_filled = 0;
  std::size_t skipped_unknown = 0;

  std::size_t width() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

std::size_t aligned_width(AlignMode mode, std::size_t gene_dim = kGeneDim, std::size_t disease_dim = kDiseaseDim);

/// Places each raw vector into its node's row of the aligned feature matrix.
///
/// Row order follows graph node indices. Embeddings for ids the graph does not
/// contain are skipped with a warning. Nodes without an embedding either raise
/// MissingEmbedding or become zero rows, depending on `policy`.
FeatureMatrix align_features(const HeteroGraph& graph, const std::vector<RawEmbedding>& raws, AlignMode mode,
                             MissingPolicy policy, std::size_t gene_dim = kGeneDim,
                             std::size_t disease_dim = kDiseaseDim);

/// Community labels used to plant a learnable signal into synthetic data.
struct PlantedStructure {
  std::vector<int> community;  // per node index, -1 for none
  int communities = 0;
  double signal = 0.8;  // share of each vector's variance carried by its community centroid
};

/// Deterministic unit-norm vectors, correlated within planted communities.
std::vector<RawEmbedding> synth_embeddings(const HeteroGraph& graph, std::uint64_t seed,
                                           const std::optional<PlantedStructure>& planted = std::nullopt,
                                           std::size_t gene_dim = kGeneDim, std::size_t disease_dim = kDiseaseDim);

}  // namespace hetlink
