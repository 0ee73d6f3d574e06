// hetlink: build graphs, split, train, evaluate and rank gene-disease links.
//
// Exit status: 0 on success, 2 when inputs fail validation or an audit finds
// leakage, 1 for anything else.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetlink/error.hpp"
#include "hetlink/pipeline.hpp"

namespace {

using namespace hetlink;

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

// Config keys exposed as --flags on a subcommand, plus --config FILE.
struct ConfigFlags {
  std::optional<std::string> file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "key = value config file (flags > env > file > defaults)")
        ->check(CLI::ExistingFile);
    for (const auto& key : RunConfig::schema()) {
      app->add_option_function<std::string>(
          "--" + dashed(key.name), [this, name = key.name](const std::string& v) { values[name] = v; },
          key.help + " [" + key.default_value + "]");
    }
  }

  RunConfig resolve() const {
    RunConfig config;
    if (file) config.load_file(*file);
    config.apply_env();
    for (const auto& [k, v] : values) config.set(k, v, ConfigSource::Flag);
    return config;
  }
};

struct ArtifactFlags {
  std::string graph, genes, diseases, split;

  void attach(CLI::App* app) {
    app->add_option("--graph", graph, "graph bundle from build-graph")->required()->check(CLI::ExistingFile);
    app->add_option("--gene-embeddings", genes, "gene embedding TSV")->required()->check(CLI::ExistingFile);
    app->add_option("--disease-embeddings", diseases, "disease embedding TSV")->required()->check(CLI::ExistingFile);
    app->add_option("--split", split, "split directory from split")->required()->check(CLI::ExistingDirectory);
  }

  ArtifactPaths paths() const { return {graph, genes, diseases, split}; }
};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("hetlink"));

  CLI::App app{"Gene-disease link prediction on a heterogeneous graph"};
  app.require_subcommand(1);

  // build-graph
  auto* build = app.add_subcommand("build-graph", "assemble a graph bundle from per-relation edge lists");
  std::optional<std::string> gg, dd, gd, variant;
  std::optional<double> threshold;
  std::string build_out;
  build->add_option("--gg", gg, "gene-gene edge list (src, dst)")->check(CLI::ExistingFile);
  build->add_option("--dd", dd, "disease-disease edge list (src, dst)")->check(CLI::ExistingFile);
  build->add_option("--gd", gd, "gene-disease edge list (src, dst[, score])")->check(CLI::ExistingFile);
  auto* thr_opt = build->add_option("--score-threshold", threshold, "keep GD rows with score >= this");
  build->add_option("--variant", variant, "graph1..graph6 score cutoff preset")->excludes(thr_opt);
  build->add_option("--out", build_out, "output directory")->required();

  // split
  auto* split = app.add_subcommand("split", "cluster-grouped split with frozen negatives and a leakage audit");
  std::string split_graph, split_clusters, split_out;
  std::optional<std::string> audit_only;
  ConfigFlags split_cfg;
  split->add_option("--graph", split_graph, "graph bundle")->required()->check(CLI::ExistingFile);
  split->add_option("--clusters", split_clusters, "gene_id<TAB>cluster_id map")->required()->check(CLI::ExistingFile);
  split->add_option("--out", split_out, "output directory");
  split->add_option("--audit-only", audit_only, "audit an existing split directory instead of splitting")
      ->check(CLI::ExistingDirectory);
  split_cfg.attach(split);

  // train
  auto* trn = app.add_subcommand("train", "train the encoder and keep the best-validation checkpoint");
  ArtifactFlags train_in;
  std::string train_out;
  ConfigFlags train_cfg;
  train_in.attach(trn);
  trn->add_option("--out", train_out, "output directory for the log and run descriptor")->required();
  train_cfg.attach(trn);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score a split part with a checkpoint");
  ArtifactFlags eval_in;
  std::string eval_ckpt, which = "val";
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval_in.attach(eval);
  eval->add_option("--which", which, "val or test")->check(CLI::IsMember({"train", "val", "test"}));

  // predict
  auto* pred = app.add_subcommand("predict", "rank candidate partners for genes or diseases");
  ArtifactFlags pred_in;
  std::string pred_ckpt;
  std::optional<std::string> pred_out;
  std::vector<std::string> q_genes, q_diseases;
  std::size_t top_k = 0;
  bool exclude_known = false;
  pred->add_option("--checkpoint", pred_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  pred_in.attach(pred);
  pred->add_option("--gene", q_genes, "gene id to rank diseases for (repeatable)");
  pred->add_option("--disease", q_diseases, "disease id to rank genes for (repeatable)");
  pred->add_option("--top-k", top_k, "rows per query, 0 for all");
  pred->add_flag("--exclude-known", exclude_known, "drop pairs that are edges of the training graph");
  pred->add_option("--out", pred_out, "write the ranking here instead of stdout");

  // ablate
  auto* abl = app.add_subcommand("ablate", "2x2 of feature alignment and negative sampling");
  std::string abl_graph, abl_clusters, abl_genes, abl_diseases, abl_out;
  ConfigFlags abl_cfg;
  abl->add_option("--graph", abl_graph, "graph bundle")->required()->check(CLI::ExistingFile);
  abl->add_option("--clusters", abl_clusters, "cluster map")->required()->check(CLI::ExistingFile);
  abl->add_option("--gene-embeddings", abl_genes, "gene embedding TSV")->required()->check(CLI::ExistingFile);
  abl->add_option("--disease-embeddings", abl_diseases, "disease embedding TSV")->required()->check(CLI::ExistingFile);
  abl->add_option("--out", abl_out, "output directory")->required();
  abl_cfg.attach(abl);

  // synth
  auto* syn = app.add_subcommand("synth", "write a planted-structure synthetic dataset");
  SynthOptions synth_opts;
  std::string synth_out;
  syn->add_option("--out", synth_out, "output directory")->required();
  syn->add_option("--genes", synth_opts.planted.genes, "gene count");
  syn->add_option("--diseases", synth_opts.planted.diseases, "disease count");
  syn->add_option("--gd-edges", synth_opts.planted.gd_edges, "gene-disease edge count");
  syn->add_option("--communities", synth_opts.planted.communities, "planted communities");
  syn->add_option("--seed", synth_opts.planted.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build) {
      BuildGraphOptions opts;
      if (gg) opts.sources.gg = *gg;
      if (dd) opts.sources.dd = *dd;
      if (gd) opts.sources.gd = *gd;
      opts.sources.gd_score_threshold = variant ? variant_threshold(*variant) : threshold;
      opts.out_dir = build_out;
      std::cout << cmd_build_graph(opts).manifest;
    } else if (*split) {
      if (audit_only) {
        const LeakageReport report = cmd_audit(split_graph, split_clusters, *audit_only);
        std::cout << format_audit(report);
        return report.violations() ? 2 : 0;
      }
      if (split_out.empty()) throw Error(ErrorCode::ConfigError, "split needs --out unless --audit-only is given");
      const SplitOutput out = cmd_split({split_graph, split_clusters, split_out, split_cfg.resolve()});
      std::cout << format_audit(out.audit);
    } else if (*trn) {
      const TrainOutput out = cmd_train({train_in.paths(), train_out, train_cfg.resolve()});
      std::cout << "checkpoint\t" << out.checkpoint_path.string() << "\n"
                << "best_epoch\t" << out.result.log.best_epoch << "\n"
                << "best_val_rocauc\t" << format_double(out.checkpoint.val_roc_auc) << "\n";
    } else if (*eval) {
      const MetricReport m = cmd_evaluate({eval_ckpt, eval_in.paths(), parse_split_part(which)});
      std::cout << metric_header() << "\n" << metric_row(m) << "\n";
    } else if (*pred) {
      if (q_genes.empty() && q_diseases.empty()) {
        throw Error(ErrorCode::ConfigError, "predict needs at least one --gene or --disease");
      }
      const auto ranking = cmd_predict({pred_ckpt, pred_in.paths(), q_genes, q_diseases, top_k, exclude_known});
      const std::string text = format_ranking(ranking);
      if (pred_out) write_file(*pred_out, text);
      else std::cout << text;
    } else if (*abl) {
      const auto rows = cmd_ablate({abl_graph, abl_clusters, abl_genes, abl_diseases, abl_out, abl_cfg.resolve()});
      std::cout << format_ablation(rows);
    } else if (*syn) {
      synth_opts.out_dir = synth_out;
      const SyntheticTask task = cmd_synth(synth_opts);
      std::cout << graph_manifest(task.graph);
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.is_validation_failure() ? 2 : 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
