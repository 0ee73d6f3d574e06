#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hetlink/dataset.hpp"
#include "hetlink/features.hpp"
#include "hetlink/graph.hpp"

namespace hetlink {

struct PlantedConfig {
  std::size_t genes = 200;
  std::size_t diseases = 200;
  std::size_t gd_edges = 2000;
  int communities = 10;
  double within = 0.97;  // chance a GD edge stays inside its community
  std::size_t gg_per_gene = 2;
  std::size_t dd_per_disease = 2;
  std::size_t clusters_per_community = 12;
  double signal = 0.8;
  std::uint64_t seed = 7;
  std::size_t gene_dim = kGeneDim;
  std::size_t disease_dim = kDiseaseDim;
};

/// Graph, cluster map and embeddings with a community structure that links
/// features to GD edges, so a model has something to learn.
struct SyntheticTask {
  HeteroGraph graph;
  PlantedStructure planted;
  ClusterMap clusters;
  std::vector<double> gd_scores;  // one per GD edge, in edge order
  std::vector<RawEmbedding> embeddings;
};

SyntheticTask make_planted_task(const PlantedConfig& config);

}  // namespace hetlink
