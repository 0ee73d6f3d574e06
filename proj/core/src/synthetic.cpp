#include "hetlink/synthetic.hpp"

#include <cstdio>
#include <string>

#include "hetlink/error.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

namespace {

std::string node_name(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", prefix, i);
  return buf;
}

}  // namespace

SyntheticTask make_planted_task(const PlantedConfig& config) {
  if (config.communities < 1 || config.genes < static_cast<std::size_t>(config.communities) ||
      config.diseases < static_cast<std::size_t>(config.communities)) {
    throw Error(ErrorCode::ConfigError, "need at least one gene and one disease per community");
  }
  if (config.gd_edges > config.genes * config.diseases / 2) {
    throw Error(ErrorCode::ConfigError, "too many GD edges requested for the node counts");
  }

  SyntheticTask task;
  HeteroGraph& g = task.graph;
  const auto k = static_cast<std::size_t>(config.communities);
  task.planted.communities = config.communities;
  task.planted.signal = config.signal;

  std::vector<std::vector<NodeIndex>> genes_in(k), diseases_in(k);
  for (std::size_t i = 0; i < config.genes; ++i) {
    const NodeIndex n = g.add_node(node_name('G', i), NodeKind::Gene);
    genes_in[i % k].push_back(n);
    task.planted.community.push_back(static_cast<int>(i % k));
  }
  for (std::size_t i = 0; i < config.diseases; ++i) {
    const NodeIndex n = g.add_node(node_name('D', i), NodeKind::Disease);
    diseases_in[i % k].push_back(n);
    task.planted.community.push_back(static_cast<int>(i % k));
  }
  const std::vector<NodeIndex> all_diseases = g.nodes_of(NodeKind::Disease);

  Rng rng = Rng::stream(config.seed, "synthetic/edges");
  auto pick = [&rng](const std::vector<NodeIndex>& v) { return v[rng.below(v.size())]; };

  const std::size_t max_attempts = 100 * config.gd_edges + 1000;
  for (std::size_t attempt = 0; g.edge_count(Relation::GD) < config.gd_edges; ++attempt) {
    if (attempt == max_attempts) throw Error(ErrorCode::ConfigError, "could not place the requested GD edges");
    const std::size_t c = rng.below(k);
    const NodeIndex gene = pick(genes_in[c]);
    const NodeIndex disease = rng.bernoulli(config.within) ? pick(diseases_in[c]) : pick(all_diseases);
    if (g.add_edge(Relation::GD, gene, disease)) task.gd_scores.push_back(rng.uniform(0.05, 1.0));
  }

  // Context edges stay inside communities.
  for (std::size_t c = 0; c < k; ++c) {
    for (const auto* members : {&genes_in[c], &diseases_in[c]}) {
      if (members->size() < 2) continue;
      const bool genes = members == &genes_in[c];
      const std::size_t per_node = genes ? config.gg_per_gene : config.dd_per_disease;
      const Relation rel = genes ? Relation::GG : Relation::DD;
      for (NodeIndex a : *members) {
        for (std::size_t e = 0; e < per_node; ++e) {
          const NodeIndex b = pick(*members);
          if (a != b) g.add_edge(rel, a, b);
        }
      }
    }
  }

  // Sequence clusters nest inside communities, as homologous genes tend to share function.
  Rng cluster_rng = Rng::stream(config.seed, "synthetic/clusters");
  for (std::size_t i = 0; i < config.genes; ++i) {
    const std::size_t c = i % k;
    const std::size_t sub = cluster_rng.below(std::max<std::size_t>(1, config.clusters_per_community));
    task.clusters.assign(g.id(static_cast<NodeIndex>(i)), "UR50_" + std::to_string(c) + "_" + std::to_string(sub));
  }

  task.embeddings = synth_embeddings(g, Rng::stream(config.seed, "synthetic/features").next_u64(), task.planted,
                                     config.gene_dim, config.disease_dim);
  return task;
}

}  // namespace hetlink
