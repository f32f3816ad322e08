#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgen/ensemble.hpp"

namespace hgen::cli {

/// Everything a run needs: model/train settings plus paths and sweep
/// lists. Populated from defaults, then the --config file, then flags.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string graph = "graph.json";
  std::string out = "out";
  std::vector<std::uint64_t> seeds;  // empty = single train.seed run
  std::vector<double> lambdas;
  std::vector<int> ks;
  int bench_epochs = 5;
  int bench_warmup = 2;
};

/// Parses a flat key-value config document; unknown keys are hard errors.
RunConfig load_run_config(const std::string& path);

/// Entry point behind the binary; returns the process exit status
/// (0 success, 1 runtime failure, 2 usage/validation).
int run(const std::vector<std::string>& args);

// Individual commands (exposed for tests).
int cmd_synth(const std::string& spec_file, const std::string& out_path);
int cmd_train(const RunConfig& cfg);
int cmd_eval(const std::string& checkpoint, const std::string& graph,
             const std::string& out_dir);
int cmd_bench(const RunConfig& cfg);

}  // namespace hgen::cli
