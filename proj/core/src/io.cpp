#include "hetlink/io.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hetlink/error.hpp"

namespace hetlink {

namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::array<unsigned char, 32> sha256_raw(std::string_view bytes) {
  std::array<unsigned char, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
    throw Error(ErrorCode::IoError, "SHA-256 computation failed");
  }
  return digest;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (unsigned char c : sha256_raw(bytes)) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 15]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

// ---------------------------------------------------------------------------

EdgeList parse_edge_list(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> src_col, dst_col, score_col;
  std::size_t columns = 0;
  EdgeList list;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    if (!src_col) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c] == "src") src_col = c;
        else if (fields[c] == "dst") dst_col = c;
        else if (fields[c] == "score") score_col = c;
      }
      if (!src_col || !dst_col) {
        throw Error(ErrorCode::ParseError, where(source, line_no) + ": header must name src and dst columns");
      }
      columns = fields.size();
      list.has_score = score_col.has_value();
      continue;
    }
    if (fields.size() != columns) {
      throw Error(ErrorCode::ParseError, where(source, line_no) + ": expected " + std::to_string(columns) +
                                             " fields, got " + std::to_string(fields.size()));
    }
    EdgeRow row;
    row.src = fields[*src_col];
    row.dst = fields[*dst_col];
    row.line = line_no;
    if (row.src.empty() || row.dst.empty()) {
      throw Error(ErrorCode::ParseError, where(source, line_no) + ": empty node id");
    }
    if (score_col) {
      const auto text = fields[*score_col];
      double v = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, where(source, line_no) + ": bad score '" + std::string(text) + "'");
      }
      row.score = v;
    }
    list.rows.push_back(std::move(row));
  }
  if (!src_col) throw Error(ErrorCode::ParseError, std::string(source) + ": missing src<TAB>dst header");
  return list;
}

EdgeList load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_edge_list(in, path.string());
}

std::optional<double> variant_threshold(std::string_view variant) {
  if (variant == "graph1") return 0.9;
  if (variant == "graph2") return 0.5;
  if (variant == "graph3") return 0.1;
  if (variant == "graph4") return 0.05;
  if (variant == "graph5" || variant == "graph6") return std::nullopt;
  throw Error(ErrorCode::ConfigError, "unknown graph variant '" + std::string(variant) + "' (graph1..graph6)");
}

AssembledGraph assemble_graph(const EdgeSources& sources) {
  AssembledGraph out;
  HeteroGraph& g = out.graph;

  auto node = [&g](const std::string& id, NodeKind kind, const std::string& at) {
    if (const auto idx = g.find(id)) {
      if (g.kind(*idx) != kind) {
        throw Error(ErrorCode::TypeConstraintViolation,
                    at + ": '" + id + "' used as " + std::string(to_string(kind)) + " but already a " +
                        std::string(to_string(g.kind(*idx))));
      }
      return *idx;
    }
    return g.add_node(id, kind);
  };

  auto ingest = [&](const std::filesystem::path& path, Relation rel, std::optional<double> threshold) {
    const auto list = load_edge_list(path);
    const NodeKind src_kind = rel == Relation::DD ? NodeKind::Disease : NodeKind::Gene;
    const NodeKind dst_kind = rel == Relation::GG ? NodeKind::Gene : NodeKind::Disease;
    if (threshold && !list.has_score) {
      throw Error(ErrorCode::MissingScoreColumn, path.string() + ": score threshold given but no score column");
    }
    for (const auto& row : list.rows) {
      const std::string at = where(path.string(), row.line);
      if (threshold && *row.score < *threshold) {
        ++out.dropped_by_threshold;
        continue;
      }
      if (row.src == row.dst) {
        ++out.dropped_self_loops;
        continue;
      }
      const NodeIndex a = node(row.src, src_kind, at);
      const NodeIndex b = node(row.dst, dst_kind, at);
      if (!g.add_edge(rel, a, b)) ++out.duplicate_rows;
    }
  };

  if (sources.gg) ingest(*sources.gg, Relation::GG, std::nullopt);
  if (sources.dd) ingest(*sources.dd, Relation::DD, std::nullopt);
  if (sources.gd) {
    ingest(*sources.gd, Relation::GD, sources.gd_score_threshold);
  } else if (sources.gd_score_threshold) {
    throw Error(ErrorCode::MissingScoreColumn, "score threshold given without a GD edge file");
  }
  if (out.dropped_self_loops) spdlog::warn("dropped {} self-loop rows", out.dropped_self_loops);
  if (out.duplicate_rows) spdlog::info("ignored {} duplicate edge rows", out.duplicate_rows);
  return out;
}

// ---------------------------------------------------------------------------

void write_graph_bundle(std::ostream& out, const HeteroGraph& graph) {
  out << "#hetlink-graph v1\n";
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    out << "node\t" << graph.id(i) << '\t' << to_string(graph.kind(i)) << '\n';
  }
  for (Relation rel : kRelations) {
    for (const Edge& e : graph.edges(rel)) {
      out << "edge\t" << to_string(rel) << '\t' << graph.id(e.first) << '\t' << graph.id(e.second) << '\n';
    }
  }
}

HeteroGraph read_graph_bundle(std::istream& in, std::string_view source) {
  HeteroGraph g;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (line != "#hetlink-graph v1") {
        throw Error(ErrorCode::ParseError, where(source, line_no) + ": not a graph bundle (expected '#hetlink-graph v1')");
      }
      header = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_tabs(line);
    try {
      if (f[0] == "node" && f.size() == 3) {
        g.add_node(std::string(f[1]), parse_node_kind(f[2]));
      } else if (f[0] == "edge" && f.size() == 4) {
        g.add_edge(parse_relation(f[1]), g.index_of(f[2]), g.index_of(f[3]));
      } else {
        throw Error(ErrorCode::ParseError, "unrecognised record");
      }
    } catch (const Error& e) {
      throw Error(e.code(), where(source, line_no) + ": " + e.what());
    }
  }
  if (!header) throw Error(ErrorCode::ParseError, std::string(source) + ": empty graph bundle");
  return g;
}

HeteroGraph load_graph_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_graph_bundle(in, path.string());
}

std::string graph_manifest(const HeteroGraph& graph) {
  std::ostringstream out;
  out << "genes\tdiseases\tgga\tdda\tgda\n"
      << graph.count(NodeKind::Gene) << '\t' << graph.count(NodeKind::Disease) << '\t'
      << graph.edge_count(Relation::GG) << '\t' << graph.edge_count(Relation::DD) << '\t'
      << graph.edge_count(Relation::GD) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

void write_split_manifest(std::ostream& out, const HeteroGraph& graph, std::span<const LabeledPair> pairs) {
  out << "gene_id\tdisease_id\tlabel\n";
  for (const auto& p : pairs) {
    out << graph.id(p.u) << '\t' << graph.id(p.v) << '\t' << p.label << '\n';
  }
}

std::vector<LabeledPair> read_split_manifest(std::istream& in, const HeteroGraph& graph, std::string_view source) {
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "gene_id\tdisease_id\tlabel") {
        throw Error(ErrorCode::ParseError, where(source, 1) + ": expected header gene_id<TAB>disease_id<TAB>label");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 3 || (f[2] != "0" && f[2] != "1")) {
      throw Error(ErrorCode::ParseError, where(source, line_no) + ": expected gene_id<TAB>disease_id<TAB>0|1");
    }
    const auto u = graph.find(f[0]);
    const auto v = graph.find(f[1]);
    if (!u || !v) {
      throw Error(ErrorCode::ArtifactMismatch,
                  where(source, line_no) + ": '" + std::string(!u ? f[0] : f[1]) + "' is not in the graph");
    }
    pairs.push_back({*u, *v, f[2] == "1" ? 1 : 0});
  }
  if (line_no == 0) throw Error(ErrorCode::ParseError, std::string(source) + ": empty split manifest");
  return pairs;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'H', 'L', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::ParseError, "checkpoint truncated");
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t u64() {
    const auto s = take(8);
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(s[b]);
    return v;
  }
  std::uint32_t u32() {
    const auto s = take(4);
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(s[b]);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const noexcept { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_matrix(std::string& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

Matrix get_matrix(Reader& r, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
  return m;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const ModelConfig& c = ckpt.params.config;
  const auto& w0 = ckpt.params.w0;
  const auto& w1 = ckpt.params.w1;
  if (static_cast<std::size_t>(w0.rows()) != c.in_dim || static_cast<std::size_t>(w0.cols()) != c.hidden_dim ||
      static_cast<std::size_t>(w1.rows()) != c.hidden_dim || static_cast<std::size_t>(w1.cols()) != c.embed_dim) {
    throw Error(ErrorCode::ShapeError, "weight shapes disagree with the model config");
  }
  std::string meta;
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw Error(ErrorCode::ConfigError, "checkpoint metadata key/value contains a separator: " + k);
    }
    meta += k + "=" + v + "\n";
  }

  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u32(out, 0);
  put_u64(out, c.in_dim);
  put_u64(out, c.hidden_dim);
  put_u64(out, c.embed_dim);
  put_f64(out, c.dropout);
  put_u32(out, c.final_activation == FinalActivation::Relu ? 0 : 1);
  put_u32(out, 0);
  put_f64(out, ckpt.val_roc_auc);
  put_u64(out, static_cast<std::uint64_t>(ckpt.best_epoch));
  put_u64(out, meta.size());
  out += meta;
  put_matrix(out, w0);
  put_matrix(out, w1);
  const auto digest = sha256_raw(out);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (std::memcmp(bytes.data(), kMagic, std::min(bytes.size(), sizeof kMagic)) != 0) {
    throw Error(ErrorCode::ArtifactMismatch, "not a hetlink checkpoint");
  }
  // magic, version, 3 shapes, dropout, activation, val auc, epoch, metadata length, digest
  constexpr std::size_t kFixed = sizeof kMagic + 8 + 24 + 8 + 8 + 8 + 8 + 8 + 32;
  if (bytes.size() < kFixed) {
    throw Error(ErrorCode::ParseError, "checkpoint truncated at " + std::to_string(bytes.size()) + " bytes");
  }
  const auto body = bytes.substr(0, bytes.size() - 32);
  const auto digest = sha256_raw(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), 32) != 0) {
    throw Error(ErrorCode::ArtifactMismatch, "checkpoint digest does not match its contents");
  }

  Reader r(body);
  r.take(sizeof kMagic);
  const auto version = r.u32();
  if (version != kVersion) {
    throw Error(ErrorCode::ArtifactMismatch, "unsupported checkpoint version " + std::to_string(version));
  }
  r.u32();
  Checkpoint ckpt;
  ModelConfig& c = ckpt.params.config;
  c.in_dim = r.u64();
  c.hidden_dim = r.u64();
  c.embed_dim = r.u64();
  c.dropout = r.f64();
  const auto act = r.u32();
  if (act > 1) throw Error(ErrorCode::ParseError, "unknown final activation code " + std::to_string(act));
  c.final_activation = act == 0 ? FinalActivation::Relu : FinalActivation::None;
  r.u32();
  ckpt.val_roc_auc = r.f64();
  ckpt.best_epoch = static_cast<std::int64_t>(r.u64());
  const auto meta_len = r.u64();
  const std::string_view meta = r.take(meta_len);
  std::size_t start = 0;
  while (start < meta.size()) {
    const auto nl = meta.find('\n', start);
    const auto line = meta.substr(start, nl - start);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::ParseError, "bad checkpoint metadata line");
    ckpt.metadata.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    start = nl + 1;
  }
  // Guard the allocation below against absurd shapes in a well-hashed but foreign file.
  const std::size_t remaining = body.size() - r.pos();
  if (c.in_dim * c.hidden_dim + c.hidden_dim * c.embed_dim != remaining / 8 || remaining % 8 != 0) {
    throw Error(ErrorCode::ParseError, "checkpoint weight block has the wrong size");
  }
  ckpt.params.w0 = get_matrix(r, c.in_dim, c.hidden_dim);
  ckpt.params.w1 = get_matrix(r, c.hidden_dim, c.embed_dim);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace hetlink
