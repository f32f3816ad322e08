#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hgen/matrix.hpp"

namespace hgen {

/// Exact-match fraction of preds against labels on idx.
double accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                const std::vector<Index>& idx);

/// Macro one-vs-rest AUC with midrank tie handling. Classes without both a
/// positive and a negative example on idx are skipped and reported.
struct AucReport {
  double macro_auc = 0.0;
  std::vector<std::optional<double>> per_class;  // nullopt = not scorable
  std::vector<int> skipped_classes;
};
AucReport macro_auc(const Matrix& probs, const std::vector<int>& labels,
                    const std::vector<Index>& idx);

/// Population standard deviation and interquartile range (linear
/// interpolation quantiles). Needs at least two values.
struct SpreadStats {
  double stddev = 0.0;
  double iqr = 0.0;
};
SpreadStats diversity_stats(const std::vector<double>& values);

/// Least-squares line fit with coefficient of determination.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& xs,
                     const std::vector<double>& ys);

/// Times `run_epoch(k)` for each k: `warmup` untimed calls, then `epochs`
/// timed calls, and fits mean epoch time against k. Raw timings kept so
/// reports can include them.
struct TimingReport {
  std::vector<int> k_values;
  std::vector<std::vector<double>> raw_seconds;  // per k, per timed epoch
  std::vector<double> mean_seconds;              // per k
  LinearFit fit;
};
TimingReport time_epochs(const std::function<void(int)>& run_epoch,
                         const std::vector<int>& k_values, int epochs,
                         int warmup);

/// Full evaluation summary for one trained model on its test split.
struct EvalReport {
  double accuracy = 0.0;
  double macro_auc = 0.0;
  std::vector<std::optional<double>> per_class_auc;
  std::vector<double> solo_accuracies;    // per meta-path
  std::vector<double> allele_accuracies;  // per (path, replica), row-major
  double allele_accuracy_mean = 0.0;
  double allele_accuracy_std = 0.0;
  double seconds_per_epoch = 0.0;  // timing side-channel
};

}  // namespace hgen
