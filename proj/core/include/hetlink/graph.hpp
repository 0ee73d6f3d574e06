#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hetlink/matrix.hpp"

namespace hetlink {

enum class NodeKind : std::uint8_t { Gene, Disease };
enum class Relation : std::uint8_t { GG, DD, GD };

inline constexpr std::array<Relation, 3> kRelations{Relation::GG, Relation::DD, Relation::GD};

std::string_view to_string(NodeKind kind) noexcept;
std::string_view to_string(Relation rel) noexcept;
NodeKind parse_node_kind(std::string_view text);
Relation parse_relation(std::string_view text);

using NodeIndex = std::uint32_t;

/// Unordered pair stored with first < second.
struct Edge {
  NodeIndex first;
  NodeIndex second;

  friend bool operator==(const Edge&, const Edge&) = default;
};

inline std::uint64_t pair_key(NodeIndex a, NodeIndex b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

/// Gene/disease graph with three undirected relations.
///
/// Node indices are dense and assigned in insertion order. Each relation keeps
/// its edges in insertion order alongside a hash set for O(1) membership.
class HeteroGraph {
 public:
  NodeIndex add_node(std::string external_id, NodeKind kind);

  /// Inserts the unordered pair {i, j}. Returns false when it was already present.
  bool add_edge(Relation rel, NodeIndex i, NodeIndex j);

  std::size_t node_count() const noexcept { return kinds_.size(); }
  std::size_t count(NodeKind kind) const noexcept;
  std::size_t edge_count(Relation rel) const noexcept { return edges_[slot(rel)].size(); }

  NodeKind kind(NodeIndex i) const { return kinds_.at(i); }
  const std::string& id(NodeIndex i) const { return ids_.at(i); }

  std::optional<NodeIndex> find(std::string_view external_id) const;
  /// Like find, but throws UnknownNode.
  NodeIndex index_of(std::string_view external_id) const;

  const std::vector<Edge>& edges(Relation rel) const noexcept { return edges_[slot(rel)]; }
  bool has_edge(Relation rel, NodeIndex i, NodeIndex j) const;
  bool has_any_edge(NodeIndex i, NodeIndex j) const;

  std::size_t degree(NodeIndex i, Relation rel) const;
  std::size_t degree(NodeIndex i) const;

  /// Sorted, de-duplicated union of neighbours over all relations.
  std::vector<std::vector<NodeIndex>> adjacency() const;

  std::vector<NodeIndex> nodes_of(NodeKind kind) const;

  /// Copy with the same nodes and GG/DD edges, and GD edges replaced by `gd`.
  HeteroGraph with_gd_edges(const std::vector<Edge>& gd) const;

 private:
  static std::size_t slot(Relation rel) noexcept { return static_cast<std::size_t>(rel); }

  std::vector<std::string> ids_;
  std::vector<NodeKind> kinds_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::array<std::vector<Edge>, 3> edges_;
  std::array<std::unordered_set<std::uint64_t>, 3> edge_keys_;
  std::array<std::vector<std::uint32_t>, 3> degrees_;
};

/// Compressed sparse row matrix with sorted column indices per row.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<NodeIndex> col_idx;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }
  double at(std::size_t i, std::size_t j) const;
  Matrix to_dense() const;

  /// this * dense, accumulating each row in column order.
  Matrix multiply(const Matrix& dense) const;

  static SparseMatrix identity(std::size_t n);
};

/// Convex mixture of the relation-normalized adjacencies.
struct PropagationOperator {
  SparseMatrix matrix;
  std::array<double, 3> weights{1.0 / 3, 1.0 / 3, 1.0 / 3};

  std::size_t size() const noexcept { return matrix.rows; }
};

/// D^{-1/2} (A_rel + I) D^{-1/2} over all graph nodes.
SparseMatrix normalize_relation(const HeteroGraph& graph, Relation rel);

/// Sum of weights[r] * mats[r]; weights must be non-negative and sum to 1.
PropagationOperator mix_relations(const std::array<SparseMatrix, 3>& mats,
                                  const std::array<double, 3>& weights);

PropagationOperator build_operator(const HeteroGraph& graph, const std::array<double, 3>& weights);

}  // namespace hetlink
