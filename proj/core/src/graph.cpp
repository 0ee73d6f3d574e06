#include "hetlink/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetlink/error.hpp"

namespace hetlink {

std::string_view to_string(NodeKind kind) noexcept {
  return kind == NodeKind::Gene ? "gene" : "disease";
}

std::string_view to_string(Relation rel) noexcept {
  switch (rel) {
    case Relation::GG: return "GG";
    case Relation::DD: return "DD";
    case Relation::GD: return "GD";
  }
  return "?";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "gene") return NodeKind::Gene;
  if (text == "disease") return NodeKind::Disease;
  throw Error(ErrorCode::ParseError, "unknown node kind '" + std::string(text) + "'");
}

Relation parse_relation(std::string_view text) {
  if (text == "GG") return Relation::GG;
  if (text == "DD") return Relation::DD;
  if (text == "GD") return Relation::GD;
  throw Error(ErrorCode::ParseError, "unknown relation '" + std::string(text) + "'");
}

NodeIndex HeteroGraph::add_node(std::string external_id, NodeKind kind) {
  const auto next = static_cast<NodeIndex>(kinds_.size());
  auto [it, inserted] = index_.try_emplace(external_id, next);
  if (!inserted) throw Error(ErrorCode::DuplicateNode, external_id);
  ids_.push_back(std::move(external_id));
  kinds_.push_back(kind);
  for (auto& d : degrees_) d.push_back(0);
  return next;
}

std::size_t HeteroGraph::count(NodeKind kind) const noexcept {
  return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), kind));
}

std::optional<NodeIndex> HeteroGraph::find(std::string_view external_id) const {
  auto it = index_.find(std::string(external_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex HeteroGraph::index_of(std::string_view external_id) const {
  if (auto i = find(external_id)) return *i;
  throw Error(ErrorCode::UnknownNode, std::string(external_id));
}

bool HeteroGraph::add_edge(Relation rel, NodeIndex i, NodeIndex j) {
  const std::size_t n = node_count();
  if (i >= n || j >= n) {
    throw Error(ErrorCode::IndexError,
                "edge (" + std::to_string(i) + ", " + std::to_string(j) + ") with " + std::to_string(n) + " nodes");
  }
  if (i == j) throw Error(ErrorCode::SelfLoopRejected, ids_[i]);

  const NodeKind ki = kinds_[i];
  const NodeKind kj = kinds_[j];
  bool ok = false;
  switch (rel) {
    case Relation::GG: ok = ki == NodeKind::Gene && kj == NodeKind::Gene; break;
    case Relation::DD: ok = ki == NodeKind::Disease && kj == NodeKind::Disease; break;
    case Relation::GD: ok = ki != kj; break;
  }
  if (!ok) {
    throw Error(ErrorCode::TypeConstraintViolation, std::string(to_string(rel)) + " edge between " + ids_[i] + " (" +
                                                        std::string(to_string(ki)) + ") and " + ids_[j] + " (" +
                                                        std::string(to_string(kj)) + ")");
  }

  if (!edge_keys_[slot(rel)].insert(pair_key(i, j)).second) return false;
  edges_[slot(rel)].push_back(Edge{std::min(i, j), std::max(i, j)});
  ++degrees_[slot(rel)][i];
  ++degrees_[slot(rel)][j];
  return true;
}

bool HeteroGraph::has_edge(Relation rel, NodeIndex i, NodeIndex j) const {
  return edge_keys_[slot(rel)].contains(pair_key(i, j));
}

bool HeteroGraph::has_any_edge(NodeIndex i, NodeIndex j) const {
  const auto key = pair_key(i, j);
  return std::any_of(edge_keys_.begin(), edge_keys_.end(), [key](const auto& s) { return s.contains(key); });
}

std::size_t HeteroGraph::degree(NodeIndex i, Relation rel) const { return degrees_[slot(rel)].at(i); }

std::size_t HeteroGraph::degree(NodeIndex i) const {
  return degree(i, Relation::GG) + degree(i, Relation::DD) + degree(i, Relation::GD);
}

std::vector<std::vector<NodeIndex>> HeteroGraph::adjacency() const {
  std::vector<std::vector<NodeIndex>> adj(node_count());
  for (const auto& rel_edges : edges_) {
    for (const Edge& e : rel_edges) {
      adj[e.first].push_back(e.second);
      adj[e.second].push_back(e.first);
    }
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

std::vector<NodeIndex> HeteroGraph::nodes_of(NodeKind kind) const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < kinds_.size(); ++i) {
    if (kinds_[i] == kind) out.push_back(i);
  }
  return out;
}

HeteroGraph HeteroGraph::with_gd_edges(const std::vector<Edge>& gd) const {
  HeteroGraph g;
  g.ids_ = ids_;
  g.kinds_ = kinds_;
  g.index_ = index_;
  for (auto& d : g.degrees_) d.assign(kinds_.size(), 0);
  for (Relation rel : {Relation::GG, Relation::DD}) {
    g.edges_[slot(rel)] = edges_[slot(rel)];
    g.edge_keys_[slot(rel)] = edge_keys_[slot(rel)];
    g.degrees_[slot(rel)] = degrees_[slot(rel)];
  }
  for (const Edge& e : gd) g.add_edge(Relation::GD, e.first, e.second);
  return g;
}

// ---------------------------------------------------------------------------

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto begin = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto end = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  auto it = std::lower_bound(begin, end, static_cast<NodeIndex>(j));
  if (it == end || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

Matrix SparseMatrix::to_dense() const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      out(static_cast<Eigen::Index>(i), col_idx[k]) = values[k];
    }
  }
  return out;
}

Matrix SparseMatrix::multiply(const Matrix& dense) const {
  if (static_cast<std::size_t>(dense.rows()) != cols) {
    throw Error(ErrorCode::ShapeError, "sparse " + std::to_string(rows) + "x" + std::to_string(cols) +
                                           " times dense with " + std::to_string(dense.rows()) + " rows");
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows), dense.cols());
  for (std::size_t i = 0; i < rows; ++i) {
    auto out_row = out.row(static_cast<Eigen::Index>(i));
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      out_row.noalias() += values[k] * dense.row(col_idx[k]);
    }
  }
  return out;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.resize(n + 1);
  std::iota(m.row_ptr.begin(), m.row_ptr.end(), std::size_t{0});
  m.col_idx.resize(n);
  std::iota(m.col_idx.begin(), m.col_idx.end(), NodeIndex{0});
  m.values.assign(n, 1.0);
  return m;
}

SparseMatrix normalize_relation(const HeteroGraph& graph, Relation rel) {
  const std::size_t n = graph.node_count();
  std::vector<std::vector<NodeIndex>> rows(n);
  for (NodeIndex i = 0; i < n; ++i) rows[i].push_back(i);
  for (const Edge& e : graph.edges(rel)) {
    rows[e.first].push_back(e.second);
    rows[e.second].push_back(e.first);
  }

  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(rows[i].size()));

  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.assign(1, 0);
  m.row_ptr.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end());
    for (NodeIndex j : row) {
      m.col_idx.push_back(j);
      m.values.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    m.row_ptr.push_back(m.col_idx.size());
  }
  return m;
}

PropagationOperator mix_relations(const std::array<SparseMatrix, 3>& mats, const std::array<double, 3>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidMixingWeights, "weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidMixingWeights, "weights sum to " + std::to_string(total));
  }
  const std::size_t n = mats[0].rows;
  for (const auto& m : mats) {
    if (m.rows != n || m.cols != n) throw Error(ErrorCode::ShapeError, "relation matrices differ in dimension");
  }

  PropagationOperator op;
  op.weights = weights;
  SparseMatrix& out = op.matrix;
  out.rows = out.cols = n;
  out.row_ptr.assign(1, 0);

  // Row-wise k-way merge of the sorted column lists; relations with zero
  // weight are skipped so a one-hot mixture reproduces its input exactly.
  std::vector<std::pair<NodeIndex, double>> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    scratch.clear();
    for (std::size_t r = 0; r < mats.size(); ++r) {
      if (weights[r] == 0.0) continue;
      const auto& m = mats[r];
      for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
        scratch.emplace_back(m.col_idx[k], weights[r] * m.values[k]);
      }
    }
    std::stable_sort(scratch.begin(), scratch.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < scratch.size();) {
      const NodeIndex col = scratch[k].first;
      double sum = 0.0;
      for (; k < scratch.size() && scratch[k].first == col; ++k) sum += scratch[k].second;
      out.col_idx.push_back(col);
      out.values.push_back(sum);
    }
    out.row_ptr.push_back(out.col_idx.size());
  }
  return op;
}

PropagationOperator build_operator(const HeteroGraph& graph, const std::array<double, 3>& weights) {
  return mix_relations({normalize_relation(graph, Relation::GG), normalize_relation(graph, Relation::DD),
                        normalize_relation(graph, Relation::GD)},
                       weights);
}

}  // namespace hetlink
