#include "hetlink/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "hetlink/error.hpp"
#include "hetlink/model.hpp"
#include "json.hpp"

namespace hetlink {

using nlohmann::json;

std::string split_manifest_name(SplitPart part) { return std::string(to_string(part)) + ".tsv"; }

namespace {

json sampler_json(const SamplerConfig& s) {
  return {{"mode", std::string(to_string(s.mode))},
          {"degree_aware", s.degree_aware},
          {"alpha", s.alpha},
          {"degree_source", std::string(to_string(s.degree_source))},
          {"gene_pool", std::string(to_string(s.gene_pool))}};
}

SamplerConfig sampler_from_json(const json& j) {
  SamplerConfig s;
  s.mode = parse_negative_mode(j.at("mode").get<std::string>());
  s.degree_aware = j.at("degree_aware").get<bool>();
  s.alpha = j.at("alpha").get<double>();
  s.degree_source = parse_degree_source(j.at("degree_source").get<std::string>());
  s.gene_pool = parse_gene_pool(j.at("gene_pool").get<std::string>());
  return s;
}

void check_hash(const std::string& what, const std::string& expected, const std::string& actual) {
  if (expected != actual) {
    throw Error(ErrorCode::ArtifactMismatch,
                what + " hash " + actual.substr(0, 12) + " does not match the recorded " + expected.substr(0, 12));
  }
}

HeteroGraph graph_from_bytes(const std::string& bytes, const fs::path& path) {
  std::istringstream in(bytes);
  return read_graph_bundle(in, path.string());
}

std::vector<RawEmbedding> embeddings_from_bytes(const std::string& bytes, const fs::path& path, NodeKind kind,
                                                EmbeddingFormat format) {
  std::istringstream in(bytes);
  return parse_embeddings(in, kind, format, path.string());
}

std::string descriptor_text(const std::map<std::string, std::string>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

void apply_log_level(const RunConfig& config) {
  spdlog::set_level(spdlog::level::from_str(config.get("log_level")));
}

}  // namespace

// ---------------------------------------------------------------------------

BuildGraphOutput cmd_build_graph(const BuildGraphOptions& opts) {
  BuildGraphOutput out;
  out.assembled = assemble_graph(opts.sources);
  std::ostringstream bundle;
  write_graph_bundle(bundle, out.assembled.graph);
  out.bundle = opts.out_dir / kGraphFile;
  write_file(out.bundle, bundle.str());
  out.manifest = graph_manifest(out.assembled.graph);
  write_file(opts.out_dir / kManifestFile, out.manifest);
  spdlog::info("graph: {} genes, {} diseases, {}/{}/{} GG/DD/GD edges ({} GD rows below threshold)",
               out.assembled.graph.count(NodeKind::Gene), out.assembled.graph.count(NodeKind::Disease),
               out.assembled.graph.edge_count(Relation::GG), out.assembled.graph.edge_count(Relation::DD),
               out.assembled.graph.edge_count(Relation::GD), out.assembled.dropped_by_threshold);
  return out;
}

// ---------------------------------------------------------------------------

std::string format_audit(const LeakageReport& report) {
  std::string out = "violating_clusters\t" + std::to_string(report.violations()) + "\n";
  for (const auto& c : report.violating_clusters) out += "cluster\t" + c + "\n";
  return out;
}

SplitOutput cmd_split(const SplitOptions& opts) {
  apply_log_level(opts.config);
  const std::string graph_bytes = read_file(opts.graph);
  const HeteroGraph graph = graph_from_bytes(graph_bytes, opts.graph);
  const std::string cluster_bytes = read_file(opts.clusters);
  std::istringstream cluster_in(cluster_bytes);
  const ClusterMap clusters = ClusterMap::parse(cluster_in, opts.clusters.string());

  SplitOutput out;
  const RunConfig& cfg = opts.config;
  try {
    out.split = build_edge_split(graph, clusters, cfg.split_ratios(), cfg.train_sampler(), cfg.eval_sampler(),
                                 cfg.seed());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientClusters) throw;
    throw Error(ErrorCode::InsufficientClusters,
                std::string(e.what()) +
                    "; every split part needs its own cluster, so supply a finer cluster map or more GD edges");
  }
  out.audit = check_leakage(graph, out.split.positives, clusters);

  json manifests = json::object();
  for (SplitPart p : kSplitParts) {
    std::ostringstream os;
    write_split_manifest(os, graph, out.split.pairs(p));
    const std::string text = os.str();
    write_file(opts.out_dir / split_manifest_name(p), text);
    manifests[std::string(to_string(p))] = sha256_hex(text);
  }
  json counts = json::object();
  for (SplitPart p : kSplitParts) {
    counts[std::string(to_string(p))] = {{"positives", out.split.positives[p].size()},
                                         {"negatives", out.split.negatives_of(p).size()}};
  }
  const json descriptor = {
      {"format", "hetlink-split v1"},
      {"seed", out.split.seed},
      {"ratios", {out.split.ratios.train, out.split.ratios.val, out.split.ratios.test}},
      {"sampler", {{"train", sampler_json(out.split.sampler)}, {"eval", sampler_json(out.split.eval_sampler)}}},
      {"graph_sha256", sha256_hex(graph_bytes)},
      {"clusters_sha256", sha256_hex(cluster_bytes)},
      {"manifests_sha256", manifests},
      {"counts", counts},
      {"leakage_violations", out.audit.violations()},
  };
  write_file(opts.out_dir / kSplitDescriptorFile, descriptor.dump(2) + "\n");
  write_file(opts.out_dir / kAuditFile, format_audit(out.audit));

  if (out.audit.violations() > 0) {
    throw Error(ErrorCode::LeakageDetected, std::to_string(out.audit.violations()) + " clusters span split parts");
  }
  return out;
}

EdgeSplit load_split(const fs::path& split_dir, const HeteroGraph& graph, const std::string& graph_sha256,
                     std::string* split_sha256) {
  const std::string desc_bytes = read_file(split_dir / kSplitDescriptorFile);
  json desc;
  try {
    desc = json::parse(desc_bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, (split_dir / kSplitDescriptorFile).string() + ": " + e.what());
  }
  check_hash("graph", desc.at("graph_sha256").get<std::string>(), graph_sha256);

  EdgeSplit split;
  split.seed = desc.at("seed").get<std::uint64_t>();
  const auto& r = desc.at("ratios");
  split.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
  split.sampler = sampler_from_json(desc.at("sampler").at("train"));
  split.eval_sampler = sampler_from_json(desc.at("sampler").at("eval"));
  for (SplitPart p : kSplitParts) {
    const fs::path path = split_dir / split_manifest_name(p);
    const std::string text = read_file(path);
    check_hash(path.filename().string(), desc.at("manifests_sha256").at(std::string(to_string(p))), sha256_hex(text));
    std::istringstream in(text);
    for (const auto& pair : read_split_manifest(in, graph, path.string())) {
      (pair.label ? split.positives[p] : split.negatives_of(p)).push_back(pair);
    }
  }
  if (split_sha256) *split_sha256 = sha256_hex(desc_bytes);
  return split;
}

LeakageReport cmd_audit(const fs::path& graph_path, const fs::path& clusters_path, const fs::path& split_dir) {
  const HeteroGraph graph = load_graph_bundle(graph_path);
  const ClusterMap clusters = ClusterMap::load(clusters_path);
  // Manifests are read as they are; hashes are not checked so edited files can be audited.
  PositiveSplit positives;
  for (SplitPart p : kSplitParts) {
    const fs::path path = split_dir / split_manifest_name(p);
    const std::string text = read_file(path);
    std::istringstream in(text);
    for (const auto& pair : read_split_manifest(in, graph, path.string())) {
      if (pair.label) positives[p].push_back(pair);
    }
  }
  return check_leakage(graph, positives, clusters);
}

// ---------------------------------------------------------------------------

Artifacts load_artifacts(const ArtifactPaths& paths, const RunConfig& config) {
  Artifacts a;
  const std::string graph_bytes = read_file(paths.graph);
  a.hashes["graph"] = sha256_hex(graph_bytes);
  a.graph = graph_from_bytes(graph_bytes, paths.graph);

  std::string split_sha;
  a.split = load_split(paths.split_dir, a.graph, a.hashes["graph"], &split_sha);
  a.hashes["split"] = split_sha;

  const std::string gene_bytes = read_file(paths.gene_embeddings);
  const std::string disease_bytes = read_file(paths.disease_embeddings);
  a.hashes["gene_embeddings"] = sha256_hex(gene_bytes);
  a.hashes["disease_embeddings"] = sha256_hex(disease_bytes);
  auto raws = embeddings_from_bytes(gene_bytes, paths.gene_embeddings, NodeKind::Gene, config.embedding_format());
  auto diseases =
      embeddings_from_bytes(disease_bytes, paths.disease_embeddings, NodeKind::Disease, config.embedding_format());
  raws.insert(raws.end(), std::make_move_iterator(diseases.begin()), std::make_move_iterator(diseases.end()));
  a.features = align_features(a.graph, raws, config.align_mode(), config.missing_policy());

  a.train_graph = training_graph(a.graph, a.split);
  a.op = build_operator(a.train_graph, config.mixing_weights());
  return a;
}

RunConfig checkpoint_config(const Checkpoint& ckpt) {
  RunConfig config;
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.rfind("config.", 0) == 0) config.set(k.substr(7), v, ConfigSource::Flag);
  }
  return config;
}

namespace {

void verify_against_checkpoint(const Checkpoint& ckpt, const Artifacts& a) {
  for (const auto& [name, actual] : a.hashes) {
    const auto it = ckpt.metadata.find(name + "_sha256");
    if (it == ckpt.metadata.end()) {
      throw Error(ErrorCode::ArtifactMismatch, "checkpoint does not record a " + name + " hash");
    }
    check_hash(name, it->second, actual);
  }
}

}  // namespace

TrainOutput cmd_train(const TrainOptions& opts) {
  apply_log_level(opts.config);
  const RunConfig& config = opts.config;
  const TrainConfig tcfg = config.train_config();
  tcfg.validate();
  Artifacts a = load_artifacts(opts.inputs, config);

  TrainOutput out;
  out.result = train(a.graph, a.op.matrix, a.features.values, a.split, tcfg);
  const TrainLog& log = out.result.log;
  const double best_auc = log.best_epoch > 0 ? log.epochs[static_cast<std::size_t>(log.best_epoch - 1)].val.roc_auc : 0.0;

  out.checkpoint.params = out.result.best;
  out.checkpoint.val_roc_auc = best_auc;
  out.checkpoint.best_epoch = log.best_epoch;
  for (const auto& [k, v] : config.values()) {
    // Where the checkpoint lives does not change what it contains.
    if (k != "checkpoint_dir" && k != "log_level") out.checkpoint.metadata["config." + k] = v;
  }
  for (const auto& [name, sha] : a.hashes) out.checkpoint.metadata[name + "_sha256"] = sha;
  out.checkpoint.metadata["split_seed"] = std::to_string(a.split.seed);

  const fs::path ckpt_dir = config.get("checkpoint_dir").empty() ? opts.out_dir : fs::path(config.get("checkpoint_dir"));
  out.checkpoint_path = ckpt_dir / kCheckpointFile;
  const std::string ckpt_bytes = encode_checkpoint(out.checkpoint);
  write_file(out.checkpoint_path, ckpt_bytes);

  const std::string log_text = format_train_log(log);
  write_file(opts.out_dir / kTrainLogFile, log_text);
  std::string timing = "epoch\tseconds\n";
  for (const auto& r : log.epochs) timing += std::to_string(r.epoch) + "\t" + format_double(r.seconds) + "\n";
  write_file(opts.out_dir / kTimingFile, timing);

  std::map<std::string, std::string> desc;
  desc["command"] = "train";
  for (const auto& [k, v] : config.values()) desc["config." + k] = v;
  desc["config_sha256"] = config.hash();
  for (const auto& [name, sha] : a.hashes) desc[name + "_sha256"] = sha;
  desc["split_seed"] = std::to_string(a.split.seed);
  desc["train_seed"] = std::to_string(tcfg.seed);
  desc["features_zero_filled"] = std::to_string(a.features.zero_filled);
  desc["initial_loss"] = format_double(log.initial_loss);
  desc["best_epoch"] = std::to_string(log.best_epoch);
  desc["best_val_rocauc"] = format_double(best_auc);
  desc["checkpoint_sha256"] = sha256_hex(ckpt_bytes);
  desc["train_log_sha256"] = sha256_hex(log_text);
  out.run_descriptor = descriptor_text(desc);
  write_file(opts.out_dir / kRunDescriptorFile, out.run_descriptor);
  spdlog::info("best epoch {} with validation ROC-AUC {:.4f}", log.best_epoch, best_auc);
  return out;
}

MetricReport cmd_evaluate(const EvaluateOptions& opts) {
  const Checkpoint ckpt = load_checkpoint(opts.checkpoint);
  const RunConfig config = checkpoint_config(ckpt);
  const Artifacts a = load_artifacts(opts.inputs, config);
  verify_against_checkpoint(ckpt, a);
  return evaluate_pairs(ckpt.params, a.op.matrix, a.features.values, a.split.pairs(opts.part),
                        config.number("threshold"));
}

// ---------------------------------------------------------------------------

std::string_view to_string(PairStatus status) noexcept {
  switch (status) {
    case PairStatus::Known: return "known";
    case PairStatus::Heldout: return "heldout";
    case PairStatus::Novel: return "novel";
  }
  return "?";
}

std::vector<RankedPair> cmd_predict(const PredictOptions& opts) {
  const Checkpoint ckpt = load_checkpoint(opts.checkpoint);
  const RunConfig config = checkpoint_config(ckpt);
  const Artifacts a = load_artifacts(opts.inputs, config);
  verify_against_checkpoint(ckpt, a);

  struct Query {
    std::string id;
    NodeIndex node;
  };
  std::vector<Query> queries;
  auto resolve = [&](const std::string& id, NodeKind kind) {
    const auto idx = a.graph.find(id);
    if (!idx || a.graph.kind(*idx) != kind) {
      throw Error(ErrorCode::UnknownEntity, id + " (no " + std::string(to_string(kind)) + " with this id)");
    }
    queries.push_back({id, *idx});
  };
  for (const auto& id : opts.genes) resolve(id, NodeKind::Gene);
  for (const auto& id : opts.diseases) resolve(id, NodeKind::Disease);

  const ForwardTrace trace = encode(ckpt.params, a.op.matrix, a.features.values, false, 0);
  std::vector<RankedPair> ranking;
  for (const auto& q : queries) {
    const NodeKind other = a.graph.kind(q.node) == NodeKind::Gene ? NodeKind::Disease : NodeKind::Gene;
    const std::vector<NodeIndex> candidates = a.graph.nodes_of(other);
    std::vector<NodePair> pairs;
    pairs.reserve(candidates.size());
    for (NodeIndex c : candidates) pairs.push_back({q.node, c});
    const Decoded d = decode_pairs(trace.z, pairs);

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d.scores[x] > d.scores[y]; });

    std::size_t kept = 0;
    for (std::size_t k : order) {
      if (opts.top_k && kept == opts.top_k) break;
      const NodeIndex c = candidates[k];
      PairStatus status = PairStatus::Novel;
      if (a.train_graph.has_edge(Relation::GD, q.node, c)) status = PairStatus::Known;
      else if (a.graph.has_edge(Relation::GD, q.node, c)) status = PairStatus::Heldout;
      if (opts.exclude_known && status == PairStatus::Known) continue;
      const NodeIndex gene = other == NodeKind::Disease ? q.node : c;
      const NodeIndex disease = other == NodeKind::Disease ? c : q.node;
      ranking.push_back({q.id, a.graph.id(gene), a.graph.id(disease), d.scores[k], d.probabilities[k], status});
      ++kept;
    }
  }
  return ranking;
}

std::string format_ranking(const std::vector<RankedPair>& ranking) {
  std::string out = "query\tgene_id\tdisease_id\tscore\tprobability\tstatus\n";
  for (const auto& r : ranking) {
    out += r.query + "\t" + r.gene_id + "\t" + r.disease_id + "\t" + format_double(r.score) + "\t" +
           format_double(r.probability) + "\t" + std::string(to_string(r.status)) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<AblationRow> cmd_ablate(const AblateOptions& opts) {
  // Default configuration last, as in the usual ablation table layout.
  const std::array<std::pair<AlignMode, NegativeMode>, 4> grid{{
      {AlignMode::Ablation, NegativeMode::Constrained},
      {AlignMode::Default, NegativeMode::Unconstrained},
      {AlignMode::Ablation, NegativeMode::Unconstrained},
      {AlignMode::Default, NegativeMode::Constrained},
  }};
  std::vector<AblationRow> rows;
  std::set<NegativeMode> split_done;
  for (const auto& [align, neg] : grid) {
    RunConfig config = opts.config;
    config.set("align_mode", std::string(to_string(align)), ConfigSource::Flag);
    config.set("negative_mode", std::string(to_string(neg)), ConfigSource::Flag);
    config.set("checkpoint_dir", "", ConfigSource::Flag);

    AblationRow row;
    row.align = align;
    row.negatives = neg;
    row.seed = config.seed();
    row.split_dir = opts.out_dir / ("split-" + std::string(to_string(neg)));
    row.run_dir = opts.out_dir / ("run-" + std::string(to_string(align)) + "-" + std::string(to_string(neg)));
    if (split_done.insert(neg).second) cmd_split({opts.graph, opts.clusters, row.split_dir, config});
    const ArtifactPaths inputs{opts.graph, opts.gene_embeddings, opts.disease_embeddings, row.split_dir};
    const TrainOutput trained = cmd_train({inputs, row.run_dir, config});
    row.val = cmd_evaluate({trained.checkpoint_path, inputs, SplitPart::Val});
    row.test = cmd_evaluate({trained.checkpoint_path, inputs, SplitPart::Test});
    spdlog::info("ablation {} / {}: val ROC-AUC {:.4f}, test ROC-AUC {:.4f}", to_string(align), to_string(neg),
                 row.val.roc_auc, row.test.roc_auc);
    rows.push_back(std::move(row));
  }
  write_file(opts.out_dir / "ablation.tsv", format_ablation(rows));
  return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::string out = "default_aggregation\tconstrained_negatives\tseed";
  for (const char* part : {"val", "test"}) {
    for (const char* m : {"acc", "f1", "prec", "rec", "rocauc"}) out += std::string("\t") + part + "_" + m;
  }
  out += "\n";
  for (const auto& r : rows) {
    out += std::string(r.align == AlignMode::Default ? "Y" : "N") + "\t" +
           (r.negatives == NegativeMode::Constrained ? "Y" : "N") + "\t" + std::to_string(r.seed);
    for (const MetricReport* m : {&r.val, &r.test}) {
      for (double v : {m->accuracy, m->f1, m->precision, m->recall, m->roc_auc}) out += "\t" + format_double(v);
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

SyntheticTask cmd_synth(const SynthOptions& opts) {
  SyntheticTask task = make_planted_task(opts.planted);
  const HeteroGraph& g = task.graph;
  for (Relation rel : {Relation::GG, Relation::DD}) {
    std::string text = "src\tdst\n";
    for (const Edge& e : g.edges(rel)) text += g.id(e.first) + "\t" + g.id(e.second) + "\n";
    write_file(opts.out_dir / (rel == Relation::GG ? "gg.tsv" : "dd.tsv"), text);
  }
  std::string gd = "src\tdst\tscore\n";
  const auto& gd_edges = g.edges(Relation::GD);
  for (std::size_t k = 0; k < gd_edges.size(); ++k) {
    const Edge& e = gd_edges[k];
    const NodeIndex gene = g.kind(e.first) == NodeKind::Gene ? e.first : e.second;
    const NodeIndex disease = gene == e.first ? e.second : e.first;
    gd += g.id(gene) + "\t" + g.id(disease) + "\t" + format_double(task.gd_scores[k]) + "\n";
  }
  write_file(opts.out_dir / "gd.tsv", gd);

  std::string clusters = "gene_id\tcluster_id\n";
  for (NodeIndex i : g.nodes_of(NodeKind::Gene)) clusters += g.id(i) + "\t" + task.clusters.cluster_of(g.id(i)) + "\n";
  write_file(opts.out_dir / "clusters.tsv", clusters);

  for (NodeKind kind : {NodeKind::Gene, NodeKind::Disease}) {
    std::vector<RawEmbedding> rows;
    for (const auto& r : task.embeddings) {
      if (r.kind == kind) rows.push_back(r);
    }
    std::ostringstream os;
    write_embeddings(os, rows);
    write_file(opts.out_dir / (kind == NodeKind::Gene ? "gene_embeddings.tsv" : "disease_embeddings.tsv"), os.str());
  }
  return task;
}

}  // namespace hetlink
