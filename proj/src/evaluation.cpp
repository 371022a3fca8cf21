#include "tracex/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "tracex/error.hpp"

namespace tracex {

namespace {

std::vector<ScoredPair> defined_only(std::span<const ScoredPair> scored) {
  std::vector<ScoredPair> out;
  out.reserve(scored.size());
  for (const auto& s : scored)
    if (s.defined) out.push_back(s);
  return out;
}

}  // namespace

double roc_auc(std::span<const ScoredPair> scored) {
  auto v = defined_only(scored);
  std::sort(v.begin(), v.end(), [](const ScoredPair& a, const ScoredPair& b) { return a.score < b.score; });
  double positives = 0, negatives = 0, rank_sum = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j].score == v[i].score) ++j;
    // Ranks i+1 .. j share their average.
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (v[k].is_link) {
        positives += 1;
        rank_sum += avg_rank;
      } else {
        negatives += 1;
      }
    }
    i = j;
  }
  if (positives == 0 || negatives == 0) throw ConfigError("ROC AUC needs at least one link and one non-link");
  const double u = rank_sum - positives * (positives + 1) / 2.0;
  return u / (positives * negatives);
}

std::vector<PrPoint> pr_curve(std::span<const ScoredPair> scored) {
  auto v = defined_only(scored);
  std::stable_sort(v.begin(), v.end(), [](const ScoredPair& a, const ScoredPair& b) { return a.score > b.score; });
  double positives = 0;
  for (const auto& s : v) positives += s.is_link ? 1 : 0;
  if (positives == 0) throw ConfigError("precision-recall needs at least one link");

  std::vector<PrPoint> curve{{0.0, 1.0}};
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j].score == v[i].score) {
      (v[j].is_link ? tp : fp) += 1;
      ++j;
    }
    curve.push_back({tp / positives, tp / (tp + fp)});
    i = j;
  }
  return curve;
}

double pr_auc(std::span<const ScoredPair> scored) {
  const auto c = pr_curve(scored);
  double area = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    area += (c[k].recall - c[k - 1].recall) * (c[k].precision + c[k - 1].precision) / 2.0;
  }
  return area;
}

double average_precision(std::span<const ScoredPair> scored) {
  const auto c = pr_curve(scored);
  double ap = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) ap += (c[k].recall - c[k - 1].recall) * c[k].precision;
  return ap;
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("pearson: sequences differ in length");
  if (xs.size() < 2) throw ConfigError("pearson: need at least two observations");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw ConfigError("cannot summarize an empty list");
  SummaryStats s;
  s.n = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.ci95_half_width = 1.96 * s.std / std::sqrt(static_cast<double>(s.n));
  return s;
}

Segregated segregate_by_label(const std::vector<PairRecord>& records, std::span<const Metric> metrics) {
  Segregated out;
  for (auto m : metrics) {
    std::vector<double> link, non_link;
    SegregatedMetric seg;
    for (const auto& r : records) {
      auto v = metric_value(r, m);
      auto& side = r.pair.is_link ? seg.link : seg.non_link;
      if (!v) {
        ++side.undefined;
        continue;
      }
      (r.pair.is_link ? link : non_link).push_back(*v);
    }
    if (!link.empty()) seg.link.stats = summarize(link);
    if (!non_link.empty()) seg.non_link.stats = summarize(non_link);
    out.emplace(m, seg);
  }
  return out;
}

std::vector<CorrelationCell> correlation_table(const std::vector<PairRecord>& records,
                                               std::span<const Metric> semantic_metrics,
                                               std::span<const Metric> info_metrics) {
  std::vector<CorrelationCell> cells;
  for (auto a : semantic_metrics) {
    for (auto b : info_metrics) {
      std::vector<double> xs, ys;
      for (const auto& r : records) {
        auto x = metric_value(r, a);
        auto y = metric_value(r, b);
        if (x && y) {
          xs.push_back(*x);
          ys.push_back(*y);
        }
      }
      CorrelationCell cell{a, b, std::nullopt, xs.size()};
      if (xs.size() >= 2) cell.pearson_r = pearson(xs, ys);
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<ScoredPair> scores_for(const std::vector<PairRecord>& records, Metric m) {
  const bool distance = m == Metric::kWmd || m == Metric::kCos || m == Metric::kEuc;
  std::vector<ScoredPair> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto v = metric_value(r, m);
    out.push_back(ScoredPair{r.pair.is_link, v ? (distance ? -*v : *v) : 0.0, v.has_value()});
  }
  return out;
}

LinkPrediction evaluate_scorer(const std::vector<PairRecord>& records, Metric m) {
  const auto scored = scores_for(records, m);
  LinkPrediction lp{m, std::nullopt, std::nullopt, std::nullopt, 0, 0};
  bool pos = false, neg = false;
  for (const auto& s : scored) {
    if (!s.defined) {
      ++lp.undefined;
      continue;
    }
    ++lp.defined;
    (s.is_link ? pos : neg) = true;
  }
  if (pos) {
    lp.pr_auc = pr_auc(scored);
    lp.average_precision = average_precision(scored);
  }
  if (pos && neg) lp.roc_auc = roc_auc(scored);
  return lp;
}

}  // namespace tracex
