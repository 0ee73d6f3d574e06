#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetlink/dataset.hpp"
#include "hetlink/graph.hpp"
#include "hetlink/model.hpp"

namespace hetlink {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Whole-file read and write; both throw IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// ---------------------------------------------------------------------------
// Edge lists

struct EdgeRow {
  std::string src;
  std::string dst;
  std::optional<double> score;
  std::size_t line = 0;
};

struct EdgeList {
  std::vector<EdgeRow> rows;
  bool has_score = false;
};

/// Reads a `src<TAB>dst[<TAB>score]` edge list. The header must name `src` and
/// `dst`; extra columns are ignored except `score`.
EdgeList parse_edge_list(std::istream& in, std::string_view source);
EdgeList load_edge_list(const std::filesystem::path& path);

/// Score cutoff of a named graph variant: graph1 0.9, graph2 0.5, graph3 0.1,
/// graph4 0.05; graph5 and graph6 keep every row.
std::optional<double> variant_threshold(std::string_view variant);

struct EdgeSources {
  std::optional<std::filesystem::path> gg;
  std::optional<std::filesystem::path> dd;
  std::optional<std::filesystem::path> gd;
  std::optional<double> gd_score_threshold;  // keep GD rows with score >= threshold
};

struct AssembledGraph {
  HeteroGraph graph;
  std::size_t dropped_by_threshold = 0;
  std::size_t dropped_self_loops = 0;
  std::size_t duplicate_rows = 0;
};

/// Builds a graph from per-relation edge lists. GG endpoints are genes, DD
/// endpoints diseases, GD rows are gene then disease. Nodes are created in
/// order of first appearance, files read GG, DD, GD.
AssembledGraph assemble_graph(const EdgeSources& sources);

// ---------------------------------------------------------------------------
// Graph bundle: `#hetlink-graph v1`, then `node<TAB>id<TAB>kind` lines in index
// order, then `edge<TAB>rel<TAB>src<TAB>dst` lines in insertion order.

void write_graph_bundle(std::ostream& out, const HeteroGraph& graph);
HeteroGraph read_graph_bundle(std::istream& in, std::string_view source);
HeteroGraph load_graph_bundle(const std::filesystem::path& path);

/// Two-line TSV: `genes diseases gga dda gda` and the counts.
std::string graph_manifest(const HeteroGraph& graph);

// ---------------------------------------------------------------------------
// Split manifests: `gene_id<TAB>disease_id<TAB>label` per part.

void write_split_manifest(std::ostream& out, const HeteroGraph& graph, std::span<const LabeledPair> pairs);
std::vector<LabeledPair> read_split_manifest(std::istream& in, const HeteroGraph& graph, std::string_view source);

// ---------------------------------------------------------------------------
// Checkpoints. Layout in docs/checkpoint-format.md.

struct Checkpoint {
  ModelParams params;
  double val_roc_auc = 0;
  std::int64_t best_epoch = 0;
  std::map<std::string, std::string> metadata;  // config snapshot and artifact hashes
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws ArtifactMismatch on a bad magic, version or digest, ParseError when the
/// file is shorter than the fixed header. Longer truncations fail the digest.
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hetlink
