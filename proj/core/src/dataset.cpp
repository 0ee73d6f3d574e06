#include "hetlink/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "hetlink/error.hpp"

namespace hetlink {

void ClusterMap::assign(std::string gene_id, std::string cluster_id) {
  map_.insert_or_assign(std::move(gene_id), std::move(cluster_id));
}

std::string ClusterMap::cluster_of(const std::string& gene_id) const {
  auto it = map_.find(gene_id);
  return it == map_.end() ? "singleton:" + gene_id : it->second;
}

ClusterMap ClusterMap::parse(std::istream& in, std::string_view source) {
  ClusterMap m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && line == "gene_id\tcluster_id") continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(ErrorCode::ParseError,
                  std::string(source) + ":" + std::to_string(line_no) + ": expected gene_id<TAB>cluster_id");
    }
    m.assign(line.substr(0, tab), line.substr(tab + 1));
  }
  return m;
}

ClusterMap ClusterMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse(in, path.string());
}

std::string_view to_string(SplitPart part) noexcept {
  switch (part) {
    case SplitPart::Train: return "train";
    case SplitPart::Val: return "val";
    case SplitPart::Test: return "test";
  }
  return "?";
}

SplitPart parse_split_part(std::string_view text) {
  if (text == "train") return SplitPart::Train;
  if (text == "val") return SplitPart::Val;
  if (text == "test") return SplitPart::Test;
  throw Error(ErrorCode::ConfigError, "split part must be train|val|test, got '" + std::string(text) + "'");
}

SplitRatios parse_split_ratios(std::string_view text) {
  std::vector<double> parts;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad split ratio '" + item + "'");
    }
  }
  if (parts.size() != 3) throw Error(ErrorCode::ConfigError, "split ratios need three values");
  SplitRatios r{parts[0], parts[1], parts[2]};
  if (r.train < 0 || r.val < 0 || r.test < 0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::ConfigError, "split ratios must be non-negative and sum to 1");
  }
  return r;
}

std::string format_split_ratios(const SplitRatios& r) {
  std::ostringstream os;
  os << r.train << ',' << r.val << ',' << r.test;
  return os.str();
}

namespace {

NodeIndex gene_endpoint(const HeteroGraph& graph, NodeIndex a, NodeIndex b) {
  return graph.kind(a) == NodeKind::Gene ? a : b;
}

}  // namespace

PositiveSplit split_edges(const HeteroGraph& graph, const ClusterMap& clusters, const SplitRatios& ratios,
                          std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::ConfigError, "split ratios must be non-negative and sum to 1");
  }

  const auto& edges = graph.edges(Relation::GD);
  std::map<std::string, std::vector<std::size_t>> by_cluster;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const NodeIndex gene = gene_endpoint(graph, edges[k].first, edges[k].second);
    by_cluster[clusters.cluster_of(graph.id(gene))].push_back(k);
  }
  if (by_cluster.size() < 3) {
    throw Error(ErrorCode::InsufficientClusters,
                std::to_string(by_cluster.size()) + " gene cluster(s) carry GD edges; at least 3 are needed");
  }

  std::vector<const std::vector<std::size_t>*> order;
  order.reserve(by_cluster.size());
  for (const auto& [name, members] : by_cluster) order.push_back(&members);
  Rng rng = Rng::stream(seed, "split/clusters");
  rng.shuffle(std::span(order));

  const double total = static_cast<double>(edges.size());
  std::array<double, 3> assigned{0, 0, 0};
  std::vector<std::uint8_t> part_of(edges.size(), 0);
  for (const auto* members : order) {
    std::size_t best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < 3; ++p) {
      const double deficit = ratios[kSplitParts[p]] * total - assigned[p];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = p;
      }
    }
    assigned[best] += static_cast<double>(members->size());
    for (std::size_t k : *members) part_of[k] = static_cast<std::uint8_t>(best);
  }

  PositiveSplit split;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const NodeIndex gene = gene_endpoint(graph, edges[k].first, edges[k].second);
    const NodeIndex disease = gene == edges[k].first ? edges[k].second : edges[k].first;
    split.parts[part_of[k]].push_back(LabeledPair{gene, disease, 1});
  }
  return split;
}

LeakageReport check_leakage(const HeteroGraph& graph, const PositiveSplit& split, const ClusterMap& clusters) {
  std::map<std::string, std::set<std::size_t>> parts_of;
  for (std::size_t p = 0; p < 3; ++p) {
    for (const auto& pair : split.parts[p]) {
      if (pair.label != 1) continue;
      const NodeIndex gene = gene_endpoint(graph, pair.u, pair.v);
      parts_of[clusters.cluster_of(graph.id(gene))].insert(p);
    }
  }
  LeakageReport report;
  for (const auto& [cluster, parts] : parts_of) {
    if (parts.size() > 1) report.violating_clusters.push_back(cluster);
  }
  return report;
}

bool ratios_within_tolerance(const PositiveSplit& split, const SplitRatios& ratios, double tolerance) {
  const double total = static_cast<double>(split.total());
  if (total == 0) return true;
  for (SplitPart p : kSplitParts) {
    const double share = static_cast<double>(split[p].size()) / total;
    if (std::abs(share - ratios[p]) > tolerance) return false;
  }
  return true;
}

std::string_view to_string(NegativeMode mode) noexcept {
  return mode == NegativeMode::Constrained ? "constrained" : "unconstrained";
}

std::string_view to_string(DegreeSource source) noexcept { return source == DegreeSource::Total ? "total" : "gd"; }

std::string_view to_string(GenePool pool) noexcept { return pool == GenePool::Positives ? "positives" : "all"; }

NegativeMode parse_negative_mode(std::string_view text) {
  if (text == "constrained") return NegativeMode::Constrained;
  if (text == "unconstrained") return NegativeMode::Unconstrained;
  throw Error(ErrorCode::ConfigError, "negative mode must be constrained|unconstrained, got '" + std::string(text) + "'");
}

DegreeSource parse_degree_source(std::string_view text) {
  if (text == "total") return DegreeSource::Total;
  if (text == "gd") return DegreeSource::GD;
  throw Error(ErrorCode::ConfigError, "degree source must be total|gd, got '" + std::string(text) + "'");
}

GenePool parse_gene_pool(std::string_view text) {
  if (text == "positives") return GenePool::Positives;
  if (text == "all") return GenePool::All;
  throw Error(ErrorCode::ConfigError, "gene pool must be positives|all, got '" + std::string(text) + "'");
}

WeightedSampler::WeightedSampler(std::vector<double> weights) : cumulative_(std::move(weights)) {
  double acc = 0.0;
  for (double& w : cumulative_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::ConfigError, "sampling weights must be finite and >= 0");
    acc += w;
    w = acc;
  }
}

std::size_t WeightedSampler::draw(Rng& rng) const {
  const double target = rng.uniform() * total();
  // First index whose cumulative weight exceeds the target; zero-weight
  // entries share their predecessor's cumulative value and are never chosen.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::vector<double> degree_weights(const HeteroGraph& graph, std::span<const NodeIndex> nodes, double alpha,
                                   DegreeSource source) {
  std::vector<double> w;
  w.reserve(nodes.size());
  for (NodeIndex i : nodes) {
    const auto deg =
        static_cast<double>(source == DegreeSource::Total ? graph.degree(i) : graph.degree(i, Relation::GD));
    w.push_back(alpha == 0.0 ? 1.0 : std::pow(deg, alpha));
  }
  return w;
}

namespace {

constexpr int kInnerRetries = 32;

LabeledPair oriented(const HeteroGraph& graph, NodeIndex a, NodeIndex b) {
  const NodeKind ka = graph.kind(a);
  const NodeKind kb = graph.kind(b);
  if (ka != kb) return ka == NodeKind::Gene ? LabeledPair{a, b, 0} : LabeledPair{b, a, 0};
  return a < b ? LabeledPair{a, b, 0} : LabeledPair{b, a, 0};
}

}  // namespace

std::vector<LabeledPair> sample_negatives(const HeteroGraph& graph, std::span<const LabeledPair> positives,
                                          const SamplerConfig& config, std::uint64_t seed,
                                          std::unordered_set<std::uint64_t>* taken) {
  const std::size_t count = positives.size();
  std::vector<LabeledPair> out;
  if (count == 0) return out;
  out.reserve(count);

  std::unordered_set<std::uint64_t> local;
  auto& used = taken ? *taken : local;
  const bool constrained = config.mode == NegativeMode::Constrained;

  // By default constrained negatives draw genes from the positives' own gene
  // pool, so a part never mixes in genes from another part's clusters.
  std::vector<NodeIndex> genes;
  if (config.gene_pool == GenePool::All) {
    genes = graph.nodes_of(NodeKind::Gene);
  } else {
    for (const auto& p : positives) genes.push_back(graph.kind(p.u) == NodeKind::Gene ? p.u : p.v);
    std::sort(genes.begin(), genes.end());
    genes.erase(std::unique(genes.begin(), genes.end()), genes.end());
  }
  const std::vector<NodeIndex> diseases = graph.nodes_of(NodeKind::Disease);
  std::vector<NodeIndex> all(graph.node_count());
  for (NodeIndex i = 0; i < all.size(); ++i) all[i] = i;

  // The uniform side and the weighted side of each draw.
  const std::vector<NodeIndex>& uniform_side = constrained ? genes : all;
  const std::vector<NodeIndex>& weighted_side = constrained ? diseases : all;
  std::vector<double> weights = config.degree_aware
                                    ? degree_weights(graph, weighted_side, config.alpha, config.degree_source)
                                    : std::vector<double>(weighted_side.size(), 1.0);
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    weights.assign(weighted_side.size(), 1.0);
  }

  auto is_candidate = [&](NodeIndex a, NodeIndex b) {
    if (a == b) return false;
    if (constrained) return graph.kind(a) != graph.kind(b) && !graph.has_edge(Relation::GD, a, b);
    return !graph.has_any_edge(a, b);
  };

  // Size of the reachable candidate space, so impossible requests fail fast.
  double available = 0.0;
  if (constrained) {
    std::unordered_map<NodeIndex, std::size_t> pool_edges;
    for (const Edge& e : graph.edges(Relation::GD)) {
      const NodeIndex g = graph.kind(e.first) == NodeKind::Gene ? e.first : e.second;
      if (std::binary_search(genes.begin(), genes.end(), g)) ++pool_edges[g == e.first ? e.second : e.first];
    }
    for (std::size_t k = 0; k < diseases.size(); ++k) {
      if (weights[k] > 0.0) {
        auto it = pool_edges.find(diseases[k]);
        available += static_cast<double>(genes.size() - (it == pool_edges.end() ? 0 : it->second));
      }
    }
  } else {
    const double n = static_cast<double>(all.size());
    available = n * (n - 1) / 2 - static_cast<double>(graph.edge_count(Relation::GG) +
                                                      graph.edge_count(Relation::DD) +
                                                      graph.edge_count(Relation::GD));
  }
  for (std::uint64_t key : used) {
    const auto a = static_cast<NodeIndex>(key >> 32);
    const auto b = static_cast<NodeIndex>(key & 0xffffffffu);
    if (!is_candidate(a, b)) continue;
    if (constrained && !std::binary_search(genes.begin(), genes.end(), graph.kind(a) == NodeKind::Gene ? a : b)) {
      continue;
    }
    available -= 1.0;
  }
  if (uniform_side.empty() || weighted_side.empty() || available < static_cast<double>(count)) {
    throw Error(ErrorCode::NegativeSpaceExhausted,
                "requested " + std::to_string(count) + " negatives, " +
                    std::to_string(static_cast<long long>(std::max(available, 0.0))) + " candidates remain");
  }

  const WeightedSampler sampler(std::move(weights));
  Rng rng(seed);
  const std::size_t max_attempts = 100 * count + 10000;
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt == max_attempts) {
      throw Error(ErrorCode::NegativeSpaceExhausted,
                  "gave up after " + std::to_string(max_attempts) + " rejected draws with " +
                      std::to_string(out.size()) + " of " + std::to_string(count) + " negatives");
    }
    const NodeIndex w = weighted_side[sampler.draw(rng)];
    // Only the uniform endpoint is redrawn on collision, which keeps the
    // weighted endpoint's marginal intact until it saturates.
    for (int r = 0; r < kInnerRetries; ++r) {
      const NodeIndex u = uniform_side[rng.below(uniform_side.size())];
      if (!is_candidate(u, w)) continue;
      if (!used.insert(pair_key(u, w)).second) continue;
      out.push_back(oriented(graph, u, w));
      break;
    }
  }
  return out;
}

std::vector<LabeledPair> EdgeSplit::pairs(SplitPart p) const {
  std::vector<LabeledPair> out = positives[p];
  const auto& neg = negatives_of(p);
  out.insert(out.end(), neg.begin(), neg.end());
  return out;
}

EdgeSplit build_edge_split(const HeteroGraph& graph, const ClusterMap& clusters, const SplitRatios& ratios,
                           const SamplerConfig& train_sampler, const SamplerConfig& eval_sampler, std::uint64_t seed) {
  EdgeSplit split;
  split.seed = seed;
  split.ratios = ratios;
  split.sampler = train_sampler;
  split.eval_sampler = eval_sampler;
  split.positives = split_edges(graph, clusters, ratios, seed);

  // Evaluation negatives first, so they do not depend on the training sampler.
  std::unordered_set<std::uint64_t> taken;
  for (SplitPart p : {SplitPart::Val, SplitPart::Test, SplitPart::Train}) {
    const auto& cfg = p == SplitPart::Train ? train_sampler : eval_sampler;
    split.negatives_of(p) = sample_negatives(graph, split.positives[p], cfg,
                                             Rng::stream(seed, "negatives", static_cast<std::uint64_t>(p)).next_u64(),
                                             &taken);
  }
  return split;
}

std::vector<LabeledPair> resample_train_negatives(const HeteroGraph& graph, const EdgeSplit& split,
                                                  std::uint64_t seed, std::uint64_t epoch) {
  std::unordered_set<std::uint64_t> taken;
  for (SplitPart p : {SplitPart::Val, SplitPart::Test}) {
    for (const auto& pair : split.negatives_of(p)) taken.insert(pair_key(pair.u, pair.v));
  }
  return sample_negatives(graph, split.positives[SplitPart::Train], split.sampler,
                          Rng::stream(seed, "negatives/resample", epoch).next_u64(), &taken);
}

HeteroGraph training_graph(const HeteroGraph& graph, const EdgeSplit& split) {
  std::vector<Edge> gd;
  gd.reserve(split.positives[SplitPart::Train].size());
  for (const auto& pair : split.positives[SplitPart::Train]) {
    gd.push_back(Edge{std::min(pair.u, pair.v), std::max(pair.u, pair.v)});
  }
  return graph.with_gd_edges(gd);
}

void permute_labels(EdgeSplit& split, std::uint64_t seed) {
  for (SplitPart p : kSplitParts) {
    std::vector<LabeledPair> pairs = split.pairs(p);
    std::vector<int> labels;
    labels.reserve(pairs.size());
    for (const auto& pair : pairs) labels.push_back(pair.label);
    Rng rng = Rng::stream(seed, "permute_labels", static_cast<std::uint64_t>(p));
    rng.shuffle(std::span(labels));

    auto& pos = split.positives[p];
    auto& neg = split.negatives_of(p);
    pos.clear();
    neg.clear();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      pairs[k].label = labels[k];
      (labels[k] == 1 ? pos : neg).push_back(pairs[k]);
    }
  }
}

}  // namespace hetlink
