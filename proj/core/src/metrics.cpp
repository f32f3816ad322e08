#include "hgen/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "hgen/error.hpp"

namespace hgen {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                const std::vector<Index>& idx) {
  if (idx.empty()) throw ValidationError("accuracy: empty index set");
  Index correct = 0;
  for (Index i : idx)
    if (preds[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(i)])
      ++correct;
  return static_cast<double>(correct) / static_cast<double>(idx.size());
}

namespace {

// Rank-based AUC of scores for the positive set, midranks on ties.
double binary_auc_midrank(const std::vector<double>& scores,
                          const std::vector<bool>& positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  std::size_t p = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (positive[t]) {
      pos_rank_sum += rank[t];
      ++p;
    }
  const std::size_t m = n - p;
  return (pos_rank_sum - static_cast<double>(p) * (static_cast<double>(p) + 1.0) / 2.0) /
         (static_cast<double>(p) * static_cast<double>(m));
}

}  // namespace

AucReport macro_auc(const Matrix& probs, const std::vector<int>& labels,
                    const std::vector<Index>& idx) {
  if (idx.empty()) throw ValidationError("macro_auc: empty index set");
  const int q = static_cast<int>(probs.cols());
  AucReport report;
  report.per_class.assign(static_cast<std::size_t>(q), std::nullopt);
  double total = 0.0;
  int scorable = 0;
  for (int c = 0; c < q; ++c) {
    std::vector<double> scores;
    std::vector<bool> positive;
    scores.reserve(idx.size());
    std::size_t pos = 0;
    for (Index i : idx) {
      scores.push_back(probs(i, c));
      const bool is_pos = labels[static_cast<std::size_t>(i)] == c;
      positive.push_back(is_pos);
      if (is_pos) ++pos;
    }
    if (pos == 0 || pos == idx.size()) {
      report.skipped_classes.push_back(c);
      continue;
    }
    const double auc = binary_auc_midrank(scores, positive);
    report.per_class[static_cast<std::size_t>(c)] = auc;
    total += auc;
    ++scorable;
  }
  if (scorable == 0)
    throw ValidationError("macro_auc: no scorable class on this index set");
  report.macro_auc = total / static_cast<double>(scorable);
  return report;
}

SpreadStats diversity_stats(const std::vector<double>& values) {
  if (values.size() < 2)
    throw ValidationError("diversity_stats: need at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double pos = p * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - std::floor(pos);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  return {std::sqrt(var), quantile(0.75) - quantile(0.25)};
}

LinearFit linear_fit(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ValidationError("linear_fit: need >= 2 matching points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("linear_fit: degenerate x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r2 = 1.0;  // constant y fits any line through it
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ss_res += e * e;
    }
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

TimingReport time_epochs(const std::function<void(int)>& run_epoch,
                         const std::vector<int>& k_values, int epochs,
                         int warmup) {
  if (k_values.size() < 2)
    throw ValidationError("time_epochs: need at least two k values");
  if (epochs < 1) throw ValidationError("time_epochs: need at least one epoch");
  using clock = std::chrono::steady_clock;
  TimingReport report;
  report.k_values = k_values;
  for (int k : k_values) {
    for (int w = 0; w < warmup; ++w) run_epoch(k);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(epochs));
    for (int e = 0; e < epochs; ++e) {
      const auto t0 = clock::now();
      run_epoch(k);
      const auto t1 = clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    const double mean =
        std::accumulate(times.begin(), times.end(), 0.0) /
        static_cast<double>(times.size());
    report.raw_seconds.push_back(std::move(times));
    report.mean_seconds.push_back(mean);
  }
  std::vector<double> xs(k_values.begin(), k_values.end());
  report.fit = linear_fit(xs, report.mean_seconds);
  return report;
}

}  // namespace hgen
