#include "hgen/ensemble.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hgen/config_json.hpp"
#include "hgen/error.hpp"

namespace hgen {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr std::uint64_t kFusionTag = 0xf051;
constexpr std::uint64_t kDecoderTag = 0xdec0;
constexpr std::uint64_t kEdgeDropTag = 0xed0b;

// Runs fn(0..count-1) on up to `threads` workers. Work is partitioned
// statically so any scheduling is irrelevant to the numeric result; the
// caller performs ordered reductions afterwards.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  int workers = threads > 0 ? threads : (hw > 0 ? hw : 1);
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    int best = 0;
    for (Index c = 1; c < m.cols(); ++c)
      if (m(r, c) > m(r, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

struct HeadOut {
  Tensor yhat;
  Tensor pooled_all;
  Tensor s;
  Tensor ce;
  Tensor loss;
  double s_l1 = 0.0;
};

HeadOut compute_head(const std::vector<Tensor>& branch_logits,
                     const std::vector<Tensor>& branch_pooled,
                     const std::vector<int>& labels,
                     const std::vector<Index>& train_idx, double reg_weight,
                     bool regularizer_on, bool exclude_diagonal) {
  HeadOut out;
  out.yhat = branch_logits.front();
  for (std::size_t i = 1; i < branch_logits.size(); ++i)
    out.yhat = add(out.yhat, branch_logits[i]);

  out.pooled_all = concat_rows(branch_pooled);
  out.s = matmul(out.pooled_all, transpose(out.pooled_all));
  out.s_l1 = l1_norm(Tensor(out.s.value())).scalar_value();

  out.ce = softmax_cross_entropy(out.yhat, labels, train_idx);
  if (regularizer_on && reg_weight != 0.0) {
    Tensor penalized = out.s;
    if (exclude_diagonal) {
      const Index m = out.s.rows();
      Matrix mask(m, m, 1.0);
      for (Index i = 0; i < m; ++i) mask(i, i) = 0.0;
      penalized = mul(penalized, Tensor(std::move(mask)));
    }
    out.loss = add(out.ce, scale(l1_norm(penalized), reg_weight));
  } else {
    out.loss = out.ce;
  }
  return out;
}

}  // namespace

EnsembleMode mode_from_string(const std::string& s) {
  if (s == "hgen") return EnsembleMode::hgen;
  if (s == "naive_weighting") return EnsembleMode::naive_weighting;
  if (s == "hard_voting") return EnsembleMode::hard_voting;
  throw ValidationError("unknown mode '" + s +
                        "' (expected hgen|naive_weighting|hard_voting)");
}

std::string to_string(EnsembleMode m) {
  switch (m) {
    case EnsembleMode::hgen: return "hgen";
    case EnsembleMode::naive_weighting: return "naive_weighting";
    case EnsembleMode::hard_voting: return "hard_voting";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ValidationError("train config: lr must be > 0");
  if (weight_decay < 0.0)
    throw ValidationError("train config: weight_decay must be >= 0");
  if (max_epochs < 1)
    throw ValidationError("train config: max_epochs must be >= 1");
  if (patience < 1) throw ValidationError("train config: patience must be >= 1");
  if (reg_weight < 0.0)
    throw ValidationError("train config: lambda must be >= 0");
  if (edge_drop < 0.0 || edge_drop >= 1.0)
    throw ValidationError("train config: edge_drop must be in [0, 1)");
  if (threads < 0) throw ValidationError("train config: threads must be >= 0");
}

EnsembleModel::EnsembleModel(const HeteroGraph& g, ModelConfig mc, TrainConfig tc)
    : mcfg_(std::move(mc)), tcfg_(std::move(tc)) {
  tcfg_.validate();
  g.validate();
  if (g.meta_paths.empty())
    throw ValidationError("model: graph declares no meta-paths");
  if (mcfg_.num_replicas < 1)
    throw ValidationError("model: need at least one replica");
  if (mcfg_.attention_dim < 1)
    throw ValidationError("model: attention_dim must be >= 1");
  if (mcfg_.decoder_hidden < 0)
    throw ValidationError("model: decoder_hidden must be >= 0");

  features_ = g.features;
  labels_ = g.labels;
  train_idx_ = g.train_idx;
  val_idx_ = g.val_idx;
  test_idx_ = g.test_idx;
  num_classes_ = g.num_classes();

  mcfg_.allele.seed = tcfg_.seed;
  if (!tcfg_.feature_drop) mcfg_.allele.dropout = 0.0;
  mcfg_.allele.validate();

  const int m = static_cast<int>(g.meta_paths.size());
  const int k = mcfg_.num_replicas;
  const Index f = features_.cols();
  const Index h = mcfg_.allele.hidden_dim;

  for (int i = 0; i < m; ++i) {
    MetaPathGraph mpg = compile_metapath(g, g.meta_paths[static_cast<std::size_t>(i)]);
    path_names_.push_back(mpg.path_name);
    std::vector<PathOperators> ops;
    if (tcfg_.edge_drop > 0.0) {
      for (int j = 0; j < k; ++j) {
        ops.push_back(PathOperators::build(drop_edges(
            mpg, tcfg_.edge_drop,
            Rng::derive(tcfg_.seed, kEdgeDropTag, static_cast<std::uint64_t>(i),
                        static_cast<std::uint64_t>(j)))));
      }
    } else {
      ops.push_back(PathOperators::build(std::move(mpg)));
    }
    branch_ops_.push_back(std::move(ops));
  }

  for (int i = 0; i < m; ++i) {
    std::vector<AlleleLearner> row;
    row.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
      row.emplace_back(params_, mcfg_.allele, f, i, j);
    alleles_.push_back(std::move(row));
  }

  for (int i = 0; i < m; ++i) {
    Rng init(Rng::derive(tcfg_.seed, kFusionTag, static_cast<std::uint64_t>(i)));
    fusion_.push_back(
        FusionParams::create(params_, i, k, h, mcfg_.attention_dim, init));
    if (tcfg_.freeze_fusion_projector)
      params_.at(fusion_.back().projector).frozen = true;
  }

  for (int i = 0; i < m; ++i) {
    Rng init(Rng::derive(tcfg_.seed, kDecoderTag, static_cast<std::uint64_t>(i)));
    Decoder dec;
    const std::string prefix = "decoder." + std::to_string(i) + ".";
    if (mcfg_.decoder_hidden > 0) {
      dec.w_hidden = params_.add(prefix + "w_hidden",
                                 glorot_uniform(h, mcfg_.decoder_hidden, init));
      dec.b_hidden = params_.add(prefix + "b_hidden",
                                 Matrix(1, mcfg_.decoder_hidden));
      dec.w_out = params_.add(
          prefix + "w_out", glorot_uniform(mcfg_.decoder_hidden, num_classes_, init));
    } else {
      dec.w_out = params_.add(prefix + "w_out",
                              glorot_uniform(h, num_classes_, init));
    }
    dec.b_out = params_.add(prefix + "b_out", Matrix(1, num_classes_));
    decoders_.push_back(dec);
  }
}

const PathOperators& EnsembleModel::operators(int path, int replica) const {
  const auto& ops = branch_ops_[static_cast<std::size_t>(path)];
  return ops.size() == 1 ? ops[0] : ops[static_cast<std::size_t>(replica)];
}

Tensor EnsembleModel::decode(int path, TapeBinder& binder, const Tensor& h) {
  const Decoder& dec = decoders_[static_cast<std::size_t>(path)];
  Tensor x = h;
  if (dec.w_hidden >= 0)
    x = relu(add(matmul(x, binder.use(dec.w_hidden)), binder.use(dec.b_hidden)));
  return add(matmul(x, binder.use(dec.w_out)), binder.use(dec.b_out));
}

EnsembleModel::BranchOut EnsembleModel::compute_branch(int path,
                                                       TapeBinder& binder,
                                                       bool train_mode) {
  const int k = num_replicas();
  const Tensor features = features_tensor();
  std::vector<Tensor> embeds;
  embeds.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    embeds.push_back(allele(path, j).embed(binder, operators(path, j), features,
                                           train_mode));

  BranchOut out;
  out.trace = mcfg_.mode == EnsembleMode::hgen
                  ? attention_scores(binder, fusion_[static_cast<std::size_t>(path)],
                                     embeds)
                  : uniform_trace(num_targets(), k);
  out.fused = fuse(out.trace, embeds);
  // mean pooling over all target nodes -> 1 x h graph embedding
  const Index n = num_targets();
  Tensor pool_row(Matrix(1, n, 1.0 / static_cast<double>(n)));
  out.pooled = matmul(pool_row, out.fused);
  out.logits = decode(path, binder, out.fused);
  return out;
}

ForwardOutput forward(EnsembleModel& model, bool train_mode) {
  const int m = model.num_paths();
  std::vector<EnsembleModel::BranchOut> branches(static_cast<std::size_t>(m));
  std::vector<std::unique_ptr<TapeBinder>> binders;
  binders.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    binders.push_back(std::make_unique<TapeBinder>(model.params(), nullptr));
  parallel_for(m, model.train_config().threads, [&](int i) {
    branches[static_cast<std::size_t>(i)] =
        model.compute_branch(i, *binders[static_cast<std::size_t>(i)], train_mode);
  });

  std::vector<Tensor> logits, pooled;
  for (int i = 0; i < m; ++i) {
    logits.push_back(branches[static_cast<std::size_t>(i)].logits);
    pooled.push_back(branches[static_cast<std::size_t>(i)].pooled);
  }
  HeadOut head = compute_head(logits, pooled, model.labels(), model.train_idx(),
                              model.train_config().reg_weight,
                              model.train_config().regularizer,
                              model.train_config().exclude_s_diagonal);

  ForwardOutput out;
  out.logits = head.yhat.value();
  for (int i = 0; i < m; ++i)
    out.branch_logits.push_back(branches[static_cast<std::size_t>(i)].logits.value());
  out.report.pooled = head.pooled_all.value();
  out.report.s = head.s.value();
  out.report.s_l1 = head.s_l1;
  if (model.model_config().mode == EnsembleMode::hgen) {
    for (int i = 0; i < m; ++i) {
      const auto& tr = branches[static_cast<std::size_t>(i)].trace;
      out.traces.push_back(
          {tr.raw.value(), tr.normalized.value(), tr.weights.value()});
    }
  }
  return out;
}

double loss_value(const Matrix& logits, const std::vector<int>& labels,
                  const std::vector<Index>& train_idx,
                  const CorrelationReport& report, double reg_weight,
                  bool regularizer_on, bool exclude_diagonal) {
  const double ce =
      softmax_cross_entropy(Tensor(logits), labels, train_idx).scalar_value();
  if (!regularizer_on || reg_weight == 0.0) return ce;
  double reg = 0.0;
  for (Index r = 0; r < report.s.rows(); ++r)
    for (Index c = 0; c < report.s.cols(); ++c) {
      if (exclude_diagonal && r == c) continue;
      reg += std::abs(report.s(r, c));
    }
  return ce + reg_weight * reg;
}

EnsembleModel::StepStats EnsembleModel::train_step() {
  StepStats stats = compute_gradients();
  AdamConfig adam;
  adam.lr = tcfg_.lr;
  adam.weight_decay = tcfg_.weight_decay;
  params_.step(adam);
  return stats;
}

EnsembleModel::StepStats EnsembleModel::compute_gradients() {
  params_.zero_grads();
  const int m = num_paths();

  struct Slot {
    std::unique_ptr<Tape> tape;
    std::unique_ptr<TapeBinder> binder;
    BranchOut out;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(m));
  for (auto& s : slots) {
    s.tape = std::make_unique<Tape>();
    s.binder = std::make_unique<TapeBinder>(params_, s.tape.get());
  }
  parallel_for(m, tcfg_.threads, [&](int i) {
    auto& s = slots[static_cast<std::size_t>(i)];
    s.out = compute_branch(i, *s.binder, /*train_mode=*/true);
  });

  Tape head;
  std::vector<Tensor> logits_leaves, pooled_leaves;
  for (int i = 0; i < m; ++i) {
    logits_leaves.push_back(head.leaf(slots[static_cast<std::size_t>(i)].out.logits.value()));
    pooled_leaves.push_back(head.leaf(slots[static_cast<std::size_t>(i)].out.pooled.value()));
  }
  HeadOut ho = compute_head(logits_leaves, pooled_leaves, labels_, train_idx_,
                            tcfg_.reg_weight, tcfg_.regularizer,
                            tcfg_.exclude_s_diagonal);

  StepStats stats;
  stats.loss = ho.loss.scalar_value();
  stats.ce = ho.ce.scalar_value();
  stats.s_l1 = ho.s_l1;
  stats.weight_min = std::numeric_limits<double>::infinity();
  stats.weight_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : slots) {
    const Matrix& w = s.out.trace.weights.value();
    for (Index i = 0, n = w.size(); i < n; ++i) {
      stats.weight_min = std::min(stats.weight_min, w.data()[i]);
      stats.weight_max = std::max(stats.weight_max, w.data()[i]);
    }
  }
  if (!std::isfinite(stats.loss))
    throw TrainingError("non-finite loss (ce=" + std::to_string(stats.ce) +
                        ", s_l1=" + std::to_string(stats.s_l1) + ")");

  head.backward(ho.loss);
  parallel_for(m, tcfg_.threads, [&](int i) {
    auto& s = slots[static_cast<std::size_t>(i)];
    if (head.has_grad(logits_leaves[static_cast<std::size_t>(i)]))
      s.tape->seed(s.out.logits, head.grad(logits_leaves[static_cast<std::size_t>(i)]));
    if (head.has_grad(pooled_leaves[static_cast<std::size_t>(i)]))
      s.tape->seed(s.out.pooled, head.grad(pooled_leaves[static_cast<std::size_t>(i)]));
    s.tape->run_backward();
  });
  // fixed path order: results identical to serial execution
  for (auto& s : slots) s.binder->write_back_grads();
  return stats;
}

namespace {

void export_traces(const std::string& dir, int epoch,
                   const std::vector<AttentionSnapshot>& traces) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    fs::path file = fs::path(dir) / ("trace_epoch" + std::to_string(epoch) +
                                     "_path" + std::to_string(i) + ".csv");
    std::ofstream out(file);
    const Matrix& w = traces[i].weights;
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) {
        if (c) out << ',';
        out << w(r, c);
      }
      out << '\n';
    }
  }
}

}  // namespace

TrainHistory train(EnsembleModel& model) {
  const TrainConfig& tc = model.train_config();
  TrainHistory hist;
  hist.best_val_acc = -1.0;
  std::vector<Matrix> best_values;

  for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EnsembleModel::StepStats stats;
    try {
      stats = model.train_step();
    } catch (const TrainingError& e) {
      throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
    }

    ForwardOutput ev = forward(model, /*train_mode=*/false);
    const std::vector<int> preds = argmax_rows(ev.logits);

    EpochRecord rec;
    rec.train_loss = stats.loss;
    rec.s_l1 = stats.s_l1;
    rec.fusion_weight_min = stats.weight_min;
    rec.fusion_weight_max = stats.weight_max;
    rec.train_acc = accuracy(preds, model.labels(), model.train_idx());
    const bool has_val = !model.val_idx().empty();
    const auto& monitor_idx = has_val ? model.val_idx() : model.train_idx();
    rec.val_acc = accuracy(preds, model.labels(), monitor_idx);
    rec.val_loss =
        loss_value(ev.logits, model.labels(), monitor_idx, ev.report,
                   tc.reg_weight, tc.regularizer, tc.exclude_s_diagonal);
    for (std::size_t i = 0; i < ev.branch_logits.size(); ++i) {
      const std::vector<int> solo = argmax_rows(ev.branch_logits[i]);
      rec.solo_val_acc.push_back(accuracy(solo, model.labels(), monitor_idx));
    }
    hist.epochs.push_back(rec);
    hist.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());

    if (!tc.trace_export_dir.empty())
      export_traces(tc.trace_export_dir, epoch, ev.traces);

    if (rec.val_acc > hist.best_val_acc) {
      hist.best_val_acc = rec.val_acc;
      hist.best_epoch = epoch;
      best_values = model.params().snapshot_values();
    } else if (epoch - hist.best_epoch >= tc.patience) {
      break;
    }
  }
  if (!best_values.empty()) model.params().restore_values(best_values);
  return hist;
}

Prediction predict(EnsembleModel& model) {
  Prediction pred;
  const Index n = model.num_targets();
  const int q = model.num_classes();
  if (model.model_config().mode != EnsembleMode::hard_voting) {
    ForwardOutput ev = forward(model, /*train_mode=*/false);
    pred.probabilities = softmax_rows(ev.logits);
    pred.classes = argmax_rows(pred.probabilities);
    return pred;
  }
  // one vote per (path, replica) allele through its branch decoder
  Matrix votes(n, q);
  TapeBinder binder(model.params(), nullptr);
  const Tensor features = model.features_tensor();
  for (int i = 0; i < model.num_paths(); ++i) {
    for (int j = 0; j < model.num_replicas(); ++j) {
      Tensor h = model.allele(i, j).embed(binder, model.operators(i, j),
                                          features, /*train_mode=*/false);
      const std::vector<int> cls = argmax_rows(model.decode(i, binder, h).value());
      for (Index r = 0; r < n; ++r) votes(r, cls[static_cast<std::size_t>(r)]) += 1.0;
    }
  }
  const double total = static_cast<double>(model.num_paths()) *
                       static_cast<double>(model.num_replicas());
  pred.probabilities = dense::scaled(votes, 1.0 / total);
  pred.classes = argmax_rows(pred.probabilities);
  return pred;
}

double solo_metapath_accuracy(EnsembleModel& model, int path) {
  if (path < 0 || path >= model.num_paths())
    throw ValidationError("solo_metapath_accuracy: path index out of range");
  ForwardOutput ev = forward(model, /*train_mode=*/false);
  const std::vector<int> preds =
      argmax_rows(ev.branch_logits[static_cast<std::size_t>(path)]);
  return accuracy(preds, model.labels(), model.test_idx());
}

std::vector<double> allele_test_accuracies(EnsembleModel& model) {
  std::vector<double> out;
  TapeBinder binder(model.params(), nullptr);
  const Tensor features = model.features_tensor();
  for (int i = 0; i < model.num_paths(); ++i) {
    for (int j = 0; j < model.num_replicas(); ++j) {
      Tensor h = model.allele(i, j).embed(binder, model.operators(i, j),
                                          features, /*train_mode=*/false);
      const std::vector<int> preds = argmax_rows(model.decode(i, binder, h).value());
      out.push_back(accuracy(preds, model.labels(), model.test_idx()));
    }
  }
  return out;
}

EvalReport evaluate(EnsembleModel& model) {
  EvalReport report;
  Prediction pred = predict(model);
  report.accuracy = accuracy(pred.classes, model.labels(), model.test_idx());
  AucReport auc = macro_auc(pred.probabilities, model.labels(), model.test_idx());
  report.macro_auc = auc.macro_auc;
  report.per_class_auc = auc.per_class;

  ForwardOutput ev = forward(model, /*train_mode=*/false);
  for (std::size_t i = 0; i < ev.branch_logits.size(); ++i) {
    const std::vector<int> solo = argmax_rows(ev.branch_logits[i]);
    report.solo_accuracies.push_back(
        accuracy(solo, model.labels(), model.test_idx()));
  }

  report.allele_accuracies = allele_test_accuracies(model);
  if (report.allele_accuracies.size() >= 2) {
    SpreadStats spread = diversity_stats(report.allele_accuracies);
    report.allele_accuracy_std = spread.stddev;
  }
  double sum = 0.0;
  for (double a : report.allele_accuracies) sum += a;
  report.allele_accuracy_mean =
      report.allele_accuracies.empty()
          ? 0.0
          : sum / static_cast<double>(report.allele_accuracies.size());
  return report;
}

std::vector<std::string> EnsembleModel::serialize_rng_states() const {
  std::vector<std::string> out;
  for (const auto& row : alleles_)
    for (const auto& a : row) out.push_back(a.dropout_rng().serialize());
  return out;
}

void EnsembleModel::restore_rng_states(const std::vector<std::string>& states) {
  std::size_t expect = 0;
  for (const auto& row : alleles_) expect += row.size();
  if (states.size() != expect)
    throw ValidationError("checkpoint: rng state count mismatch");
  std::size_t p = 0;
  for (auto& row : alleles_)
    for (auto& a : row) a.set_dropout_rng(Rng::deserialize(states[p++]));
}

void save_checkpoint(const EnsembleModel& model,
                     const std::filesystem::path& path) {
  ordered_json j;
  j["format"] = "hgen-checkpoint-v1";
  j["config"] = configs_to_json(model.model_config(), model.train_config());
  ordered_json graph;
  graph["num_targets"] = model.num_targets();
  graph["feature_dim"] = model.feature_dim();
  graph["num_classes"] = model.num_classes();
  graph["path_names"] = model.path_names();
  j["graph"] = std::move(graph);

  ordered_json params = ordered_json::array();
  for (const Param& p : model.params().all()) {
    ordered_json pj;
    pj["name"] = p.name;
    pj["rows"] = p.value.rows();
    pj["cols"] = p.value.cols();
    pj["values"] = std::vector<double>(p.value.values().begin(),
                                       p.value.values().end());
    params.push_back(std::move(pj));
  }
  j["params"] = std::move(params);
  j["rng"] = model.serialize_rng_states();

  std::ofstream out(path);
  if (!out) throw Error("checkpoint: cannot write " + path.string());
  out << j.dump() << '\n';
}

EnsembleModel load_checkpoint(const std::filesystem::path& path,
                              const HeteroGraph& g) {
  std::ifstream in(path);
  if (!in) throw ParseError("checkpoint: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "hgen-checkpoint-v1")
      throw ParseError("checkpoint: unknown format tag");
    ModelConfig mc;
    TrainConfig tc;
    configs_from_json(j.at("config"), mc, tc);

    EnsembleModel model(g, mc, tc);
    const auto& gj = j.at("graph");
    if (gj.at("num_targets").get<Index>() != model.num_targets() ||
        gj.at("feature_dim").get<Index>() != model.feature_dim() ||
        gj.at("num_classes").get<int>() != model.num_classes() ||
        gj.at("path_names").get<std::vector<std::string>>() != model.path_names())
      throw ValidationError(
          "checkpoint: graph shape mismatch (targets/features/classes/meta-paths "
          "differ from the checkpointed model)");

    const auto& params = j.at("params");
    if (params.size() != model.params().size())
      throw ValidationError("checkpoint: parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& pj = params[i];
      Param& p = model.params().at(static_cast<int>(i));
      if (pj.at("name").get<std::string>() != p.name)
        throw ValidationError("checkpoint: parameter name mismatch at index " +
                              std::to_string(i));
      const Index rows = pj.at("rows").get<Index>();
      const Index cols = pj.at("cols").get<Index>();
      if (rows != p.value.rows() || cols != p.value.cols())
        throw ValidationError("checkpoint: shape mismatch for parameter " + p.name);
      const auto values = pj.at("values").get<std::vector<double>>();
      if (static_cast<Index>(values.size()) != rows * cols)
        throw ValidationError("checkpoint: value count mismatch for " + p.name);
      std::copy(values.begin(), values.end(), p.value.values().begin());
    }
    model.restore_rng_states(j.at("rng").get<std::vector<std::string>>());
    return model;
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace hgen
