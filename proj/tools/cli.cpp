#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hgen/config_json.hpp"
#include "hgen/error.hpp"
#include "hgen/metapath.hpp"

namespace hgen::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ParseError(std::string(what) + ": cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
  return j;
}

void write_json_file(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <typename T>
std::vector<T> parse_list(const std::string& csv, const char* what) {
  std::vector<T> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      if constexpr (std::is_same_v<T, double>)
        out.push_back(std::stod(item));
      else if constexpr (std::is_same_v<T, int>)
        out.push_back(std::stoi(item));
      else
        out.push_back(static_cast<T>(std::stoull(item)));
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": bad list entry '" + item + "'");
    }
  }
  return out;
}

SyntheticSpec load_synth_spec(const std::string& path) {
  ordered_json j = read_json_file(path, "synth spec");
  SyntheticSpec spec;
  spec.num_target_nodes = 120;
  spec.num_classes = 3;
  Index feature_dim = 8;
  double center_scale = 1.0;
  spec.noise_scale = 1.0;
  spec.aux_types = {{"a", 40, 0.15, 0.03}, {"b", 30, 0.12, 0.04}};
  bool explicit_centers = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n") spec.num_target_nodes = value.get<Index>();
      else if (key == "num_classes") spec.num_classes = value.get<int>();
      else if (key == "feature_dim") feature_dim = value.get<Index>();
      else if (key == "center_scale") center_scale = value.get<double>();
      else if (key == "noise") spec.noise_scale = value.get<double>();
      else if (key == "target_type") spec.target_type = value.get<std::string>();
      else if (key == "train_ratio") spec.train_ratio = value.get<double>();
      else if (key == "val_ratio") spec.val_ratio = value.get<double>();
      else if (key == "test_ratio") spec.test_ratio = value.get<double>();
      else if (key == "seed") spec.seed = value.get<std::uint64_t>();
      else if (key == "centers") {
        spec.class_centers = value.get<std::vector<std::vector<double>>>();
        explicit_centers = true;
      } else if (key == "aux_types") {
        spec.aux_types.clear();
        for (const auto& aux : value) {
          SyntheticAuxType at;
          at.name = aux.at("name").get<std::string>();
          at.count = aux.at("count").get<Index>();
          at.p_intra = aux.at("p_intra").get<double>();
          at.p_inter = aux.at("p_inter").get<double>();
          spec.aux_types.push_back(std::move(at));
        }
      } else {
        throw ValidationError("synth spec: unknown key '" + key + "'");
      }
    }
  } catch (const ordered_json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  if (!explicit_centers)
    spec.class_centers = SyntheticSpec::default_centers(spec.num_classes,
                                                        feature_dim, center_scale);
  return spec;
}

ordered_json history_to_json(const RunConfig& cfg, const TrainHistory& hist) {
  ordered_json j;
  j["config"] = configs_to_json(cfg.model, cfg.train);
  j["graph_file"] = cfg.graph;
  j["best_epoch"] = hist.best_epoch;
  j["best_val_acc"] = hist.best_val_acc;
  ordered_json epochs = ordered_json::array();
  for (const EpochRecord& rec : hist.epochs) {
    ordered_json e;
    e["train_loss"] = rec.train_loss;
    e["train_acc"] = rec.train_acc;
    e["val_loss"] = rec.val_loss;
    e["val_acc"] = rec.val_acc;
    e["s_l1"] = rec.s_l1;
    e["solo_val_acc"] = rec.solo_val_acc;
    e["fusion_weight_min"] = rec.fusion_weight_min;
    e["fusion_weight_max"] = rec.fusion_weight_max;
    epochs.push_back(std::move(e));
  }
  j["epochs"] = std::move(epochs);
  // timing lives in its own section so determinism checks can drop it
  double total = 0.0;
  for (double s : hist.epoch_seconds) total += s;
  j["timing"] = {{"epoch_seconds", hist.epoch_seconds},
                 {"total_seconds", total}};
  return j;
}

ordered_json eval_to_json(const EvalReport& report, bool with_timing) {
  ordered_json j;
  j["accuracy"] = report.accuracy;
  j["macro_auc"] = report.macro_auc;
  ordered_json per_class = ordered_json::array();
  for (const auto& auc : report.per_class_auc) {
    if (auc) per_class.push_back(*auc);
    else per_class.push_back(nullptr);
  }
  j["per_class_auc"] = std::move(per_class);
  j["solo_accuracies"] = report.solo_accuracies;
  j["allele_accuracies"] = report.allele_accuracies;
  j["allele_accuracy_mean"] = report.allele_accuracy_mean;
  j["allele_accuracy_std"] = report.allele_accuracy_std;
  if (with_timing)
    j["timing"] = {{"seconds_per_epoch", report.seconds_per_epoch}};
  return j;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd ms;
  if (values.empty()) return ms;
  ms.mean = std::accumulate(values.begin(), values.end(), 0.0) /
            static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - ms.mean) * (v - ms.mean);
  ms.std = std::sqrt(var / static_cast<double>(values.size()));
  return ms;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  ordered_json j = read_json_file(path, "config");
  for (const auto& [key, value] : j.items()) {
    if (apply_config_key(key, value, cfg.model, cfg.train)) continue;
    try {
      if (key == "graph") cfg.graph = value.get<std::string>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "seeds") cfg.seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "lambdas") cfg.lambdas = value.get<std::vector<double>>();
      else if (key == "ks") cfg.ks = value.get<std::vector<int>>();
      else if (key == "bench_epochs") cfg.bench_epochs = value.get<int>();
      else if (key == "bench_warmup") cfg.bench_warmup = value.get<int>();
      else throw ValidationError("config: unknown key '" + key + "'");
    } catch (const ordered_json::exception& e) {
      throw ValidationError("config: bad value for key '" + key + "': " + e.what());
    }
  }
  return cfg;
}

int cmd_synth(const std::string& spec_file, const std::string& out_path) {
  SyntheticSpec spec = load_synth_spec(spec_file);
  HeteroGraph g = generate_synthetic(spec);
  save_heterograph(g, out_path);
  Index edge_total = 0;
  for (const auto& [name, et] : g.edge_lists)
    edge_total += static_cast<Index>(et.pairs.size());
  std::cout << "wrote " << out_path << ": n=" << g.num_targets()
            << " classes=" << g.num_classes()
            << " meta_paths=" << g.meta_paths.size()
            << " edges=" << edge_total << '\n';
  for (const auto& [name, et] : g.edge_lists)
    std::cout << "  " << name << ": " << et.pairs.size() << " edges\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  HeteroGraph g = load_heterograph(cfg.graph);
  fs::create_directories(cfg.out);
  std::vector<std::uint64_t> seeds =
      cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.train.seed} : cfg.seeds;
  const bool suffixed = seeds.size() > 1;

  std::vector<double> accs, aucs;
  for (std::uint64_t seed : seeds) {
    RunConfig run = cfg;
    run.train.seed = seed;
    EnsembleModel model(g, run.model, run.train);
    TrainHistory hist = train(model);
    EvalReport report = evaluate(model);
    if (!hist.epoch_seconds.empty())
      report.seconds_per_epoch =
          std::accumulate(hist.epoch_seconds.begin(), hist.epoch_seconds.end(),
                          0.0) /
          static_cast<double>(hist.epoch_seconds.size());

    const std::string suffix = suffixed ? "_seed" + std::to_string(seed) : "";
    save_checkpoint(model, fs::path(cfg.out) / ("checkpoint" + suffix + ".json"));
    write_json_file(fs::path(cfg.out) / ("history" + suffix + ".json"),
                    history_to_json(run, hist));
    write_json_file(fs::path(cfg.out) / ("eval" + suffix + ".json"),
                    eval_to_json(report, /*with_timing=*/true));
    std::cout << "seed " << seed << ": best_epoch=" << hist.best_epoch
              << " val_acc=" << hist.best_val_acc
              << " test_acc=" << report.accuracy
              << " test_auc=" << report.macro_auc << '\n';
    accs.push_back(report.accuracy);
    aucs.push_back(report.macro_auc);
  }

  if (suffixed) {
    MeanStd acc = mean_std(accs), auc = mean_std(aucs);
    ordered_json agg;
    agg["seeds"] = seeds;
    agg["test_accuracy"] = {{"mean", acc.mean}, {"std", acc.std}, {"values", accs}};
    agg["macro_auc"] = {{"mean", auc.mean}, {"std", auc.std}, {"values", aucs}};
    write_json_file(fs::path(cfg.out) / "aggregate.json", agg);
    std::cout << "aggregate: acc=" << acc.mean << "±" << acc.std
              << " auc=" << auc.mean << "±" << auc.std << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& graph,
             const std::string& out_dir) {
  HeteroGraph g = load_heterograph(graph);
  EnsembleModel model = load_checkpoint(checkpoint, g);
  EvalReport report = evaluate(model);
  ordered_json j = eval_to_json(report, /*with_timing=*/false);
  fs::create_directories(out_dir);
  write_json_file(fs::path(out_dir) / "eval.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  if (cfg.ks.empty() && cfg.lambdas.empty())
    throw ValidationError(
        "bench: need a non-empty sweep list (ks and/or lambdas)");
  HeteroGraph g = load_heterograph(cfg.graph);
  fs::create_directories(cfg.out);
  std::vector<std::uint64_t> seeds =
      cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.train.seed} : cfg.seeds;
  ordered_json summary;

  if (!cfg.ks.empty()) {
    // mean optimization-step time per ensemble size
    std::unique_ptr<EnsembleModel> model;
    int current_k = -1;
    auto run_epoch = [&](int k) {
      if (current_k != k) {
        RunConfig run = cfg;
        run.model.num_replicas = k;
        model = std::make_unique<EnsembleModel>(g, run.model, run.train);
        current_k = k;
      }
      model->train_step();
    };
    TimingReport timing =
        time_epochs(run_epoch, cfg.ks, cfg.bench_epochs, cfg.bench_warmup);
    model.reset();

    auto csv = open_csv(fs::path(cfg.out) / "runtime_vs_k.csv");
    csv << "k,mean_epoch_seconds\n";
    for (std::size_t i = 0; i < timing.k_values.size(); ++i)
      csv << timing.k_values[i] << ',' << timing.mean_seconds[i] << '\n';

    summary["runtime"] = {
        {"k", timing.k_values},
        {"mean_seconds", timing.mean_seconds},
        {"raw_seconds", timing.raw_seconds},
        {"fit", {{"slope", timing.fit.slope},
                 {"intercept", timing.fit.intercept},
                 {"r2", timing.fit.r2}}}};
    std::cout << "runtime fit: slope=" << timing.fit.slope
              << " r2=" << timing.fit.r2 << '\n';
  }

  if (!cfg.lambdas.empty()) {
    auto csv = open_csv(fs::path(cfg.out) / "lambda_sweep.csv");
    csv << "lambda,seed,path,solo_accuracy\n";
    ordered_json sweep = ordered_json::array();
    for (double lambda : cfg.lambdas) {
      std::vector<double> solo_accs;
      std::vector<double> s_l1s;
      for (std::uint64_t seed : seeds) {
        RunConfig run = cfg;
        run.train.reg_weight = lambda;
        run.train.seed = seed;
        EnsembleModel model(g, run.model, run.train);
        TrainHistory hist = train(model);
        EvalReport report = evaluate(model);
        for (std::size_t p = 0; p < report.solo_accuracies.size(); ++p) {
          csv << lambda << ',' << seed << ',' << p << ','
              << report.solo_accuracies[p] << '\n';
          solo_accs.push_back(report.solo_accuracies[p]);
        }
        s_l1s.push_back(hist.epochs.back().s_l1);
      }
      ordered_json entry;
      entry["lambda"] = lambda;
      entry["solo_accuracies"] = solo_accs;
      if (solo_accs.size() >= 2) {
        SpreadStats spread = diversity_stats(solo_accs);
        entry["solo_accuracy_std"] = spread.stddev;
        entry["solo_accuracy_iqr"] = spread.iqr;
      }
      entry["final_s_l1_mean"] = mean_std(s_l1s).mean;
      sweep.push_back(std::move(entry));
    }
    summary["lambda_sweep"] = std::move(sweep);
  }

  {
    // allele vs ensemble accuracy distributions
    auto csv = open_csv(fs::path(cfg.out) / "allele_variance.csv");
    csv << "seed,kind,accuracy\n";
    std::vector<double> ensemble_accs, allele_accs;
    for (std::uint64_t seed : seeds) {
      RunConfig run = cfg;
      run.train.seed = seed;
      EnsembleModel model(g, run.model, run.train);
      train(model);
      EvalReport report = evaluate(model);
      csv << seed << ",ensemble," << report.accuracy << '\n';
      ensemble_accs.push_back(report.accuracy);
      for (double a : report.allele_accuracies) {
        csv << seed << ",allele," << a << '\n';
        allele_accs.push_back(a);
      }
    }
    MeanStd ens = mean_std(ensemble_accs), all = mean_std(allele_accs);
    summary["allele_variance"] = {
        {"ensemble_mean", ens.mean},
        {"ensemble_std", ens.std},
        {"allele_mean", all.mean},
        {"allele_std", all.std}};
  }

  write_json_file(fs::path(cfg.out) / "bench_summary.json", summary);
  return 0;
}

namespace {

// applies explicitly passed flags on top of the config-file values
struct FlagOverrides {
  std::string mode, backbone, seeds, lambdas, ks, graph, out;
  std::uint64_t seed = 0;
  double lambda = 0.0, edge_drop = 0.0;
  int k = 0, threads = 0;
  bool no_regularizer = false, no_feature_drop = false;
};

void apply_overrides(const CLI::App& sub, const FlagOverrides& flags,
                     RunConfig& cfg) {
  if (sub.count("--graph")) cfg.graph = flags.graph;
  if (sub.count("--out")) cfg.out = flags.out;
  if (sub.count("--mode")) cfg.model.mode = mode_from_string(flags.mode);
  if (sub.count("--backbone"))
    cfg.model.allele.backbone = backbone_from_string(flags.backbone);
  if (sub.count("--seed")) cfg.train.seed = flags.seed;
  if (sub.count("--seeds"))
    cfg.seeds = parse_list<std::uint64_t>(flags.seeds, "--seeds");
  if (sub.count("--lambda")) cfg.train.reg_weight = flags.lambda;
  if (sub.count("--lambdas"))
    cfg.lambdas = parse_list<double>(flags.lambdas, "--lambdas");
  if (sub.count("--k")) cfg.model.num_replicas = flags.k;
  if (sub.count("--ks")) cfg.ks = parse_list<int>(flags.ks, "--ks");
  if (sub.count("--threads")) cfg.train.threads = flags.threads;
  if (flags.no_regularizer) cfg.train.regularizer = false;
  if (sub.count("--edge-drop")) cfg.train.edge_drop = flags.edge_drop;
  if (flags.no_feature_drop) cfg.train.feature_drop = false;
}

void add_run_flags(CLI::App* sub, FlagOverrides& flags) {
  sub->add_option("--graph", flags.graph, "graph file (overrides config)");
  sub->add_option("--out", flags.out, "output directory");
  sub->add_option("--mode", flags.mode, "hgen|naive_weighting|hard_voting");
  sub->add_option("--backbone", flags.backbone, "gcn|sage|gat");
  sub->add_option("--seed", flags.seed, "run seed");
  sub->add_option("--seeds", flags.seeds, "comma-separated seed list");
  sub->add_option("--lambda", flags.lambda, "regularizer weight");
  sub->add_option("--lambdas", flags.lambdas, "comma-separated lambda sweep");
  sub->add_option("--k", flags.k, "allele learners per meta-path");
  sub->add_option("--ks", flags.ks, "comma-separated k sweep");
  sub->add_option("--threads", flags.threads, "branch worker threads (0 = auto)");
  sub->add_flag("--no-regularizer", flags.no_regularizer,
                "drop the correlation regularizer from the objective");
  sub->add_option("--edge-drop", flags.edge_drop,
                  "per-allele edge drop rate (structure augmentation)");
  sub->add_flag("--no-feature-drop", flags.no_feature_drop,
                "disable feature dropout");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"hgen: heterogeneous graph ensemble learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  FlagOverrides flags;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic heterograph");
  std::string synth_spec = "synth_spec.json";
  std::string synth_out = "graph.json";
  synth->add_option("--config", synth_spec, "synthetic spec file");
  synth->add_option("--out", synth_out, "output graph file");

  CLI::App* train_cmd = app.add_subcommand("train", "train an ensemble model");
  train_cmd->add_option("--config", config_path, "run config file");
  add_run_flags(train_cmd, flags);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ckpt_path, eval_graph, eval_out = "out";
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval_cmd->add_option("--graph", eval_graph, "graph file")->required();
  eval_cmd->add_option("--out", eval_out, "output directory");

  CLI::App* bench_cmd = app.add_subcommand("bench", "reproduce figure data");
  bench_cmd->add_option("--config", config_path, "run config file");
  add_run_flags(bench_cmd, flags);

  std::vector<const char*> argv;
  argv.push_back("hgen");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (train_cmd->parsed()) {
      apply_overrides(*train_cmd, flags, cfg);
      return cmd_train(cfg);
    }
    if (eval_cmd->parsed()) return cmd_eval(ckpt_path, eval_graph, eval_out);
    if (bench_cmd->parsed()) {
      apply_overrides(*bench_cmd, flags, cfg);
      return cmd_bench(cfg);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace hgen::cli
