#include "hetlink/features.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "hetlink/error.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

std::string_view to_string(AlignMode mode) noexcept { return mode == AlignMode::Default ? "default" : "ablation"; }

std::string_view to_string(MissingPolicy policy) noexcept {
  return policy == MissingPolicy::Error ? "error" : "zero";
}

std::string_view to_string(EmbeddingFormat format) noexcept {
  return format == EmbeddingFormat::Comma ? "comma" : "whitespace";
}

AlignMode parse_align_mode(std::string_view text) {
  if (text == "default") return AlignMode::Default;
  if (text == "ablation") return AlignMode::Ablation;
  throw Error(ErrorCode::ConfigError, "align mode must be default|ablation, got '" + std::string(text) + "'");
}

MissingPolicy parse_missing_policy(std::string_view text) {
  if (text == "error") return MissingPolicy::Error;
  if (text == "zero" || text == "zero_fill") return MissingPolicy::ZeroFill;
  throw Error(ErrorCode::ConfigError, "missing policy must be error|zero, got '" + std::string(text) + "'");
}

EmbeddingFormat parse_embedding_format(std::string_view text) {
  if (text == "comma") return EmbeddingFormat::Comma;
  if (text == "whitespace") return EmbeddingFormat::Whitespace;
  throw Error(ErrorCode::ConfigError, "embedding format must be comma|whitespace, got '" + std::string(text) + "'");
}

namespace {

bool is_sep(char c, EmbeddingFormat format) {
  if (format == EmbeddingFormat::Comma) return c == ',';
  return c == ' ' || c == '\t';
}

std::vector<double> parse_values(std::string_view body, EmbeddingFormat format, const std::string& id) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    if (format == EmbeddingFormat::Whitespace) {
      while (pos < body.size() && is_sep(body[pos], format)) ++pos;
      if (pos == body.size()) break;
    }
    std::size_t end = pos;
    while (end < body.size() && !is_sep(body[end], format)) ++end;
    std::string_view token = body.substr(pos, end - pos);
    while (!token.empty() && (token.front() == ' ')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::CorruptEmbedding, id + ": bad value '" + std::string(token) + "'");
    }
    out.push_back(value);
    if (end == body.size()) break;
    pos = end + 1;
  }
  return out;
}

}  // namespace

std::vector<RawEmbedding> parse_embeddings(std::istream& in, NodeKind kind, EmbeddingFormat format,
                                           std::string_view source, std::optional<std::size_t> expected_width) {
  const std::size_t width = expected_width.value_or(embedding_width(kind));
  std::vector<RawEmbedding> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line_no) + ": expected id<TAB>values");
    }
    RawEmbedding row;
    row.id = line.substr(0, tab);
    row.kind = kind;
    row.values = parse_values(std::string_view(line).substr(tab + 1), format, row.id);
    if (row.values.size() != width) {
      throw Error(ErrorCode::DimensionMismatch, row.id + ": expected " + std::to_string(width) + ", got " +
                                                    std::to_string(row.values.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawEmbedding> load_embeddings(const std::filesystem::path& path, NodeKind kind, EmbeddingFormat format,
                                          std::optional<std::size_t> expected_width) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_embeddings(in, kind, format, path.string(), expected_width);
}

void write_embeddings(std::ostream& out, const std::vector<RawEmbedding>& rows) {
  char buf[32];
  for (const auto& row : rows) {
    out << row.id << '\t';
    for (std::size_t k = 0; k < row.values.size(); ++k) {
      if (k) out << ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row.values[k]);
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

std::size_t aligned_width(AlignMode mode, std::size_t gene_dim, std::size_t disease_dim) {
  return mode == AlignMode::Default ? gene_dim + disease_dim : std::max(gene_dim, disease_dim);
}

FeatureMatrix align_features(const HeteroGraph& graph, const std::vector<RawEmbedding>& raws, AlignMode mode,
                             MissingPolicy policy, std::size_t gene_dim, std::size_t disease_dim) {
  const std::size_t width = aligned_width(mode, gene_dim, disease_dim);
  FeatureMatrix fm;
  fm.mode = mode;
  fm.values = Matrix::Zero(static_cast<Eigen::Index>(graph.node_count()), static_cast<Eigen::Index>(width));

  std::vector<bool> filled(graph.node_count(), false);
  for (const auto& raw : raws) {
    const auto idx = graph.find(raw.id);
    if (!idx) {
      spdlog::warn("embedding for '{}' has no graph node; skipped", raw.id);
      ++fm.skipped_unknown;
      continue;
    }
    const NodeKind kind = graph.kind(*idx);
    const std::size_t expected = kind == NodeKind::Gene ? gene_dim : disease_dim;
    if (kind != raw.kind || raw.values.size() != expected) {
      throw Error(ErrorCode::DimensionMismatch, raw.id + ": expected " + std::to_string(expected) + " values for a " +
                                                    std::string(to_string(kind)) + ", got " +
                                                    std::to_string(raw.values.size()));
    }
    // Default mode shifts disease vectors past the gene block; every other
    // placement starts at column 0 and relies on the zero initialisation.
    const std::size_t offset = (mode == AlignMode::Default && kind == NodeKind::Disease) ? gene_dim : 0;
    auto row = fm.values.row(static_cast<Eigen::Index>(*idx));
    for (std::size_t k = 0; k < raw.values.size(); ++k) row(static_cast<Eigen::Index>(offset + k)) = raw.values[k];
    filled[*idx] = true;
  }

  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    if (filled[i]) continue;
    if (policy == MissingPolicy::Error) throw Error(ErrorCode::MissingEmbedding, graph.id(i));
    ++fm.zero_filled;
  }
  if (fm.zero_filled > 0) spdlog::warn("{} node(s) without embeddings were zero-filled", fm.zero_filled);
  return fm;
}

namespace {

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

}  // namespace

std::vector<RawEmbedding> synth_embeddings(const HeteroGraph& graph, std::uint64_t seed,
                                           const std::optional<PlantedStructure>& planted, std::size_t gene_dim,
                                           std::size_t disease_dim) {
  // Community centroids live separately in the gene and disease spaces.
  std::unordered_map<int, std::vector<double>> gene_centroids;
  std::unordered_map<int, std::vector<double>> disease_centroids;
  if (planted) {
    for (int c = 0; c < planted->communities; ++c) {
      Rng g = Rng::stream(seed, "centroid/gene", static_cast<std::uint64_t>(c));
      Rng d = Rng::stream(seed, "centroid/disease", static_cast<std::uint64_t>(c));
      gene_centroids.emplace(c, random_unit(g, gene_dim));
      disease_centroids.emplace(c, random_unit(d, disease_dim));
    }
  }

  std::vector<RawEmbedding> out;
  out.reserve(graph.node_count());
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    const NodeKind kind = graph.kind(i);
    const std::size_t dim = kind == NodeKind::Gene ? gene_dim : disease_dim;
    Rng rng = Rng::stream(seed, "node", i);
    std::vector<double> v = random_unit(rng, dim);

    const int c = planted && i < planted->community.size() ? planted->community[i] : -1;
    if (c >= 0) {
      const auto& mu = kind == NodeKind::Gene ? gene_centroids.at(c) : disease_centroids.at(c);
      const double a = std::sqrt(planted->signal);
      const double b = std::sqrt(1.0 - planted->signal);
      double norm = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        v[k] = a * mu[k] + b * v[k];
        norm += v[k] * v[k];
      }
      norm = std::sqrt(norm);
      for (auto& x : v) x /= norm;
    }
    out.push_back(RawEmbedding{graph.id(i), kind, std::move(v)});
  }
  return out;
}

}  // namespace hetlink
