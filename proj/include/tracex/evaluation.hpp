#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracex/records.hpp"

namespace tracex {

struct ScoredPair {
  bool is_link = false;
  double score = 0.0;  // higher means more link-like
  bool defined = true;
};

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney normalization). Undefined pairs are
/// ignored. Throws ConfigError unless both classes are present.
double roc_auc(std::span<const ScoredPair> scored);

struct PrPoint {
  double recall = 0.0;
  double precision = 1.0;
};

/// (recall, precision) at every distinct score threshold in descending order,
/// preceded by the (0, 1) origin. Tied scores form one threshold.
std::vector<PrPoint> pr_curve(std::span<const ScoredPair> scored);
/// Trapezoidal area under pr_curve. Throws ConfigError without positives.
double pr_auc(std::span<const ScoredPair> scored);
/// Step-wise sum of (r_k - r_{k-1}) * p_k over the same curve.
double average_precision(std::span<const ScoredPair> scored);

/// Sample Pearson r; nullopt when either side has zero variance. Throws
/// ConfigError for mismatched lengths or fewer than two observations.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 when n == 1
  double ci95_half_width = 0.0;
};

/// Throws ConfigError on an empty list.
SummaryStats summarize(std::span<const double> values);

struct LabelSide {
  std::optional<SummaryStats> stats;  // unset when no defined values
  std::size_t undefined = 0;
};
struct SegregatedMetric {
  LabelSide link;
  LabelSide non_link;
};
using Segregated = std::map<Metric, SegregatedMetric>;

Segregated segregate_by_label(const std::vector<PairRecord>& records, std::span<const Metric> metrics);

struct CorrelationCell {
  Metric metric_a;
  Metric metric_b;
  std::optional<double> pearson_r;
  std::size_t n = 0;
};

std::vector<CorrelationCell> correlation_table(const std::vector<PairRecord>& records,
                                               std::span<const Metric> semantic_metrics,
                                               std::span<const Metric> info_metrics);

/// Distances are negated so that higher scores always mean "more link-like".
std::vector<ScoredPair> scores_for(const std::vector<PairRecord>& records, Metric m);

struct LinkPrediction {
  Metric metric;
  std::optional<double> pr_auc, roc_auc, average_precision;
  std::size_t defined = 0;
  std::size_t undefined = 0;
};
LinkPrediction evaluate_scorer(const std::vector<PairRecord>& records, Metric m);

inline constexpr Metric kSemanticMetrics[] = {Metric::kWmdSim, Metric::kScm, Metric::kCosSim, Metric::kEuc};
inline constexpr Metric kInfoMetrics[] = {Metric::kMi, Metric::kLoss, Metric::kNoise, Metric::kSi};

}  // namespace tracex
