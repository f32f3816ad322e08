#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hgen/fusion.hpp"
#include "hgen/gnn.hpp"
#include "hgen/hetero_graph.hpp"
#include "hgen/metrics.hpp"

namespace hgen {

enum class EnsembleMode { hgen, naive_weighting, hard_voting };
EnsembleMode mode_from_string(const std::string& s);
std::string to_string(EnsembleMode m);

struct TrainConfig {
  double lr = 5e-3;
  double weight_decay = 5e-4;
  int max_epochs = 300;
  int patience = 30;
  double reg_weight = 0.1;  // lambda on the correlation regularizer
  bool regularizer = true;
  bool feature_drop = true;   // off forces dropout rate 0
  double edge_drop = 0.0;     // per-allele structure drop rate; 0 disables
  std::uint64_t seed = 0;
  int threads = 0;            // 0 = one per meta-path branch (capped by hw)
  bool exclude_s_diagonal = false;
  bool freeze_fusion_projector = false;
  std::string trace_export_dir;  // when set, per-epoch fusion weights dumped

  void validate() const;
};

struct ModelConfig {
  AlleleConfig allele;
  int num_replicas = 3;      // k base learners per meta-path
  Index attention_dim = 16;  // a
  Index decoder_hidden = 0;  // 0 = single linear decoder layer
  EnsembleMode mode = EnsembleMode::hgen;
};

/// Mean-pooled per-path embeddings, their Gram matrix, and its L1 norm.
struct CorrelationReport {
  Matrix pooled;  // m x h
  Matrix s;       // m x m, symmetric PSD
  double s_l1 = 0.0;
};

struct AttentionSnapshot {
  Matrix raw;
  Matrix normalized;
  Matrix weights;
};

struct ForwardOutput {
  Matrix logits;                      // summed decoder outputs, n x q
  std::vector<Matrix> branch_logits;  // per meta-path decoder outputs
  CorrelationReport report;
  std::vector<AttentionSnapshot> traces;
};

/// Full ensemble: m meta-path branches, each with k allele learners, one
/// fusion block, and one decoder. Owns a copy of the graph's target data
/// and every compiled operator, so forwards need no external state.
class EnsembleModel {
 public:
  EnsembleModel(const HeteroGraph& g, ModelConfig mc, TrainConfig tc);

  int num_paths() const { return static_cast<int>(branch_ops_.size()); }
  int num_replicas() const { return mcfg_.num_replicas; }
  Index num_targets() const { return features_.rows(); }
  Index feature_dim() const { return features_.cols(); }
  int num_classes() const { return num_classes_; }

  const ModelConfig& model_config() const { return mcfg_; }
  const TrainConfig& train_config() const { return tcfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  const std::vector<int>& labels() const { return labels_; }
  const std::vector<Index>& train_idx() const { return train_idx_; }
  const std::vector<Index>& val_idx() const { return val_idx_; }
  const std::vector<Index>& test_idx() const { return test_idx_; }
  const std::vector<std::string>& path_names() const { return path_names_; }

  AlleleLearner& allele(int path, int replica) {
    return alleles_[static_cast<std::size_t>(path)][static_cast<std::size_t>(replica)];
  }
  const FusionParams& fusion(int path) const {
    return fusion_[static_cast<std::size_t>(path)];
  }
  const PathOperators& operators(int path, int replica) const;

  struct BranchOut {
    Tensor fused;
    Tensor pooled;  // 1 x h column means of fused
    Tensor logits;  // n x q
    AttentionTrace trace;
  };
  BranchOut compute_branch(int path, TapeBinder& binder, bool train_mode);

  /// Decoder of branch `path` applied to any n x h embedding.
  Tensor decode(int path, TapeBinder& binder, const Tensor& h);

  Tensor features_tensor() const { return Tensor(features_); }

  /// One optimization step (fresh dropout masks, forward, loss, backward,
  /// Adam). Branches run on `threads` workers; gradients reduce in fixed
  /// path order, so results are identical to serial execution.
  struct StepStats {
    double loss = 0.0;
    double ce = 0.0;
    double s_l1 = 0.0;
    double weight_min = 0.0;
    double weight_max = 0.0;
  };
  StepStats train_step();

  /// Forward + backward only: accumulates gradients into the store without
  /// touching parameter values (gradient checks build on this).
  StepStats compute_gradients();

  std::vector<std::string> serialize_rng_states() const;
  void restore_rng_states(const std::vector<std::string>& states);

 private:
  struct Decoder {
    int w_hidden = -1;
    int b_hidden = -1;
    int w_out = -1;
    int b_out = -1;
  };

  ModelConfig mcfg_;
  TrainConfig tcfg_;
  Matrix features_;
  std::vector<int> labels_;
  std::vector<Index> train_idx_, val_idx_, test_idx_;
  std::vector<std::string> path_names_;
  int num_classes_ = 0;
  // [path][0] shared operators, or [path][replica] when edge drop is on
  std::vector<std::vector<PathOperators>> branch_ops_;
  std::vector<std::vector<AlleleLearner>> alleles_;  // [path][replica]
  std::vector<FusionParams> fusion_;
  std::vector<Decoder> decoders_;
  ParamStore params_;
};

/// Value-level forward pass (no gradients). Train mode draws fresh dropout
/// masks from the allele streams.
ForwardOutput forward(EnsembleModel& model, bool train_mode);

/// Objective value: mean cross-entropy over train_idx plus
/// lambda * ||S||_1 when the regularizer is on.
double loss_value(const Matrix& logits, const std::vector<int>& labels,
                  const std::vector<Index>& train_idx,
                  const CorrelationReport& report, double reg_weight,
                  bool regularizer_on, bool exclude_diagonal = false);

struct EpochRecord {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double s_l1 = 0.0;
  std::vector<double> solo_val_acc;
  double fusion_weight_min = 0.0;
  double fusion_weight_max = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<double> epoch_seconds;  // timing, segregated from records
  int best_epoch = -1;
  double best_val_acc = 0.0;
};

/// Full training loop with early stopping on validation accuracy;
/// restores the best-validation parameters. Aborts with TrainingError on a
/// non-finite loss. Deterministic given the config seed.
TrainHistory train(EnsembleModel& model);

struct Prediction {
  std::vector<int> classes;
  Matrix probabilities;  // rows sum to 1
};

/// hgen / naive_weighting: argmax of softmax over summed logits.
/// hard_voting: each (path, replica) allele votes the argmax of its own
/// decoded logits; majority wins; probabilities are vote shares. All ties
/// break to the lowest class index.
Prediction predict(EnsembleModel& model);

/// Test accuracy of branch `path`'s decoder output alone.
double solo_metapath_accuracy(EnsembleModel& model, int path);

/// Test accuracy of every (path, replica) allele through its branch
/// decoder; row-major by path then replica.
std::vector<double> allele_test_accuracies(EnsembleModel& model);

/// Evaluation on the test split (accuracy, macro AUC, solo and allele
/// accuracies).
EvalReport evaluate(EnsembleModel& model);

/// Checkpoint: named parameter tensors with shapes, config echo, graph
/// fingerprint, and rng states. Round-trip exact.
void save_checkpoint(const EnsembleModel& model,
                     const std::filesystem::path& path);
EnsembleModel load_checkpoint(const std::filesystem::path& path,
                              const HeteroGraph& g);

}  // namespace hgen
