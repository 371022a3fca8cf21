#include "tracex/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tracex/error.hpp"

namespace tracex {

namespace {

using ojson = nlohmann::ordered_json;

constexpr Metric kAllMetrics[] = {
    Metric::kHx,  Metric::kHy,  Metric::kHpool,   Metric::kMi,  Metric::kLoss, Metric::kNoise,
    Metric::kSi,  Metric::kSx,  Metric::kD1,      Metric::kD2,  Metric::kD3,   Metric::kOverlap,
    Metric::kWmd, Metric::kScm, Metric::kCos,     Metric::kEuc, Metric::kWmdSim, Metric::kCosSim,
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
  out << '\n';
}

bool id_less(const CandidatePair& a, const CandidatePair& b) {
  return std::tie(a.source_id, a.target_id) < std::tie(b.source_id, b.target_id);
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x == 0.0 ? 0.0 : x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson stats_json(const SummaryStats& s) {
  return ojson{{"n", s.n}, {"mean", s.mean}, {"std", s.std}, {"ci95", s.ci95_half_width}};
}

std::string by_links_label(Metric m) {
  switch (m) {
    case Metric::kScm: return "SCM";
    case Metric::kWmdSim: return "WMD";
    case Metric::kCos: return "COS";
    case Metric::kEuc: return "EUC";
    case Metric::kHx: return "H(X)";
    case Metric::kHy: return "H(Y)";
    case Metric::kLoss: return "loss[H_pool-H(Y)]";
    case Metric::kNoise: return "noise[H_pool-H(X)]";
    case Metric::kMi: return "MI";
    case Metric::kSi: return "Si";
    case Metric::kSx: return "Sx";
    default: return std::string(metric_name(m));
  }
}

CaseListing make_case(CaseKind kind, const PairRecord& r, double value, std::size_t rank) {
  return CaseListing{kind, r.pair, r.info, value, rank};
}

}  // namespace

InformationRow information_row(const std::vector<PairRecord>& records, const std::string& experiment,
                               const std::string& testbed) {
  InformationRow row;
  row.experiment = experiment;
  row.testbed = testbed;
  std::vector<double> si, sx;
  for (const auto& r : records) {
    if (!r.info.complete()) {
      ++row.undefined;
      continue;
    }
    ++row.pairs;
    row.h_x += *r.info.h_x;
    row.h_y += *r.info.h_y;
    row.d1 += *r.info.d1;
    row.loss += *r.info.loss;
    row.d2 += *r.info.d2;
    row.noise += *r.info.noise;
    row.d3 += *r.info.d3;
    row.mi += *r.info.mi;
    si.push_back(r.info.si);
    sx.push_back(r.info.sx);
  }
  if (row.pairs == 0) throw DataError("information table for '" + testbed + "' has no pair with two non-empty sides");
  const double n = static_cast<double>(row.pairs);
  for (double* v : {&row.h_x, &row.h_y, &row.d1, &row.loss, &row.d2, &row.noise, &row.d3, &row.mi}) *v /= n;
  row.si = summarize(si);
  row.sx = summarize(sx);
  return row;
}

const std::vector<std::string>& information_columns() {
  static const std::vector<std::string> cols = {
      "experiment", "testbed", "pairs", "H(X)", "H(Y)", "D1", "loss[H_pool-H(Y)]", "D2",
      "noise[H_pool-H(X)]", "D3", "MI", "Si", "Sx", "aggregation"};
  return cols;
}

void write_information_csv(std::ostream& out, const std::vector<InformationRow>& rows) {
  write_row(out, information_columns());
  for (const auto& r : rows) {
    write_row(out, {r.experiment, r.testbed, std::to_string(r.pairs), format_number(r.h_x), format_number(r.h_y),
                    format_number(r.d1), format_number(r.loss), format_number(r.d2), format_number(r.noise),
                    format_number(r.d3), format_number(r.mi), format_mean_std(r.si.mean, r.si.std),
                    format_mean_std(r.sx.mean, r.sx.std), "per_pair"});
  }
}

const std::vector<Metric>& by_links_metrics() {
  static const std::vector<Metric> m = {Metric::kScm, Metric::kWmdSim, Metric::kCos,   Metric::kEuc,
                                        Metric::kHx,  Metric::kHy,     Metric::kLoss,  Metric::kNoise,
                                        Metric::kMi,  Metric::kSi,     Metric::kSx};
  return m;
}

ByLinksRow by_links_row(const std::vector<PairRecord>& records, const std::string& experiment,
                        const std::string& testbed) {
  ByLinksRow row;
  row.experiment = experiment;
  row.testbed = testbed;
  for (const auto& r : records) (r.pair.is_link ? row.links : row.non_links) += 1;
  row.segregated = segregate_by_label(records, by_links_metrics());
  return row;
}

const std::vector<std::string>& by_links_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"experiment", "testbed", "links", "non_links"};
    for (auto m : by_links_metrics()) {
      c.push_back(by_links_label(m) + "_Link");
      c.push_back(by_links_label(m) + "_NoL");
    }
    return c;
  }();
  return cols;
}

void write_by_links_csv(std::ostream& out, const std::vector<ByLinksRow>& rows) {
  write_row(out, by_links_columns());
  for (const auto& r : rows) {
    std::vector<std::string> cells = {r.experiment, r.testbed, std::to_string(r.links), std::to_string(r.non_links)};
    for (auto m : by_links_metrics()) {
      const auto& seg = r.segregated.at(m);
      for (const LabelSide* side : {&seg.link, &seg.non_link}) {
        if (!side->stats) {
          cells.emplace_back();
        } else if (m == Metric::kSi || m == Metric::kSx) {
          cells.push_back(format_mean_std(side->stats->mean, side->stats->std));
        } else {
          cells.push_back(format_number(side->stats->mean));
        }
      }
    }
    write_row(out, cells);
  }
}

void write_correlations_csv(std::ostream& out, const std::string& experiment, const std::string& testbed,
                            const std::vector<CorrelationCell>& cells) {
  write_row(out, {"experiment", "testbed", "metric_a", "metric_b", "pearson_r", "n"});
  for (const auto& c : cells) {
    write_row(out, {experiment, testbed, std::string(metric_name(c.metric_a)), std::string(metric_name(c.metric_b)),
                    c.pearson_r ? format_number(*c.pearson_r) : std::string{}, std::to_string(c.n)});
  }
}

const std::vector<Metric>& performance_metrics() {
  static const std::vector<Metric> m = {Metric::kWmdSim, Metric::kScm, Metric::kCos,     Metric::kEuc,
                                        Metric::kMi,     Metric::kSi,  Metric::kOverlap};
  return m;
}

PerformanceRow performance_row(const std::vector<PairRecord>& records, const std::string& experiment,
                               const std::string& testbed) {
  PerformanceRow row{experiment, testbed, {}};
  for (auto m : performance_metrics()) row.scorers.push_back(evaluate_scorer(records, m));
  return row;
}

const std::vector<std::string>& performance_columns() {
  static const std::vector<std::string> cols = {
      "experiment", "testbed", "WMD_AUC", "WMD_ROC", "SCM_AUC", "SCM_ROC", "COS_AUC", "COS_ROC", "EUC_AUC",
      "EUC_ROC",    "MI_AUC",  "MI_ROC",  "Si_AUC",  "Si_ROC",  "overlap_AUC", "overlap_ROC"};
  return cols;
}

void write_performance_csv(std::ostream& out, const std::vector<PerformanceRow>& rows) {
  write_row(out, performance_columns());
  for (const auto& r : rows) {
    std::vector<std::string> cells = {r.experiment, r.testbed};
    for (const auto& s : r.scorers) {
      cells.push_back(s.pr_auc ? format_number(*s.pr_auc) : std::string{});
      cells.push_back(s.roc_auc ? format_number(*s.roc_auc) : std::string{});
    }
    write_row(out, cells);
  }
}

std::string_view case_kind_name(CaseKind k) {
  switch (k) {
    case CaseKind::kMaxLoss: return "max_loss";
    case CaseKind::kMinLoss: return "min_loss";
    case CaseKind::kMaxNoise: return "max_noise";
    case CaseKind::kMinNoise: return "min_noise";
    case CaseKind::kInfoImbalance: return "info_imbalance";
    case CaseKind::kOrphanLink: return "orphan_link";
    case CaseKind::kNullShared: return "null_shared";
  }
  return "?";
}

std::vector<CaseListing> extreme_cases(const std::vector<PairRecord>& records, Metric metric, std::size_t k) {
  if (k == 0) throw ConfigError("extreme cases need k >= 1");
  if (metric != Metric::kLoss && metric != Metric::kNoise) throw ConfigError("extreme cases rank by loss or noise");
  std::vector<std::pair<double, const PairRecord*>> defined;
  for (const auto& r : records)
    if (auto v = metric_value(r, metric)) defined.emplace_back(*v, &r);

  const bool loss = metric == Metric::kLoss;
  std::vector<CaseListing> out;
  auto take = [&](bool descending) {
    auto v = defined;
    std::sort(v.begin(), v.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return descending ? a.first > b.first : a.first < b.first;
      return id_less(a.second->pair, b.second->pair);
    });
    const CaseKind kind = descending ? (loss ? CaseKind::kMaxLoss : CaseKind::kMaxNoise)
                                     : (loss ? CaseKind::kMinLoss : CaseKind::kMinNoise);
    for (std::size_t i = 0; i < std::min(k, v.size()); ++i) out.push_back(make_case(kind, *v[i].second, v[i].first, i + 1));
  };
  take(true);
  take(false);
  return out;
}

std::vector<CaseListing> info_imbalance(const std::vector<PairRecord>& records, std::size_t k) {
  std::vector<std::pair<double, const PairRecord*>> v;
  for (const auto& r : records)
    if (r.info.d1) v.emplace_back(*r.info.d1, &r);
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.first) != std::abs(b.first)) return std::abs(a.first) > std::abs(b.first);
    return id_less(a.second->pair, b.second->pair);
  });
  std::vector<CaseListing> out;
  for (std::size_t i = 0; i < std::min(k, v.size()); ++i)
    out.push_back(make_case(CaseKind::kInfoImbalance, *v[i].second, v[i].first, i + 1));
  return out;
}

void OrphanPolicy::validate() const {
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("orphan quantile must lie strictly inside (0, 1)");
  if (metric != Metric::kMi && metric != Metric::kSi) throw ConfigError("orphan metric must be mi or si");
}

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<CaseListing> detect_orphans(const std::vector<PairRecord>& records, const OrphanPolicy& policy) {
  policy.validate();
  std::vector<double> link_values;
  for (const auto& r : records)
    if (r.pair.is_link)
      if (auto v = metric_value(r, policy.metric)) link_values.push_back(*v);
  if (link_values.empty()) throw DataError("orphan detection needs at least one true link with a defined value");
  const double threshold = quantile_linear(std::move(link_values), policy.quantile);

  std::vector<std::pair<double, const PairRecord*>> hits;
  for (const auto& r : records) {
    if (r.pair.is_link) continue;
    auto v = metric_value(r, policy.metric);
    if (v && *v >= threshold) hits.emplace_back(*v, &r);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return id_less(a.second->pair, b.second->pair);
  });
  std::vector<CaseListing> out;
  for (std::size_t i = 0; i < hits.size(); ++i)
    out.push_back(make_case(CaseKind::kOrphanLink, *hits[i].second, hits[i].first, i + 1));
  return out;
}

NullSharedCensus null_shared_census(const std::vector<PairRecord>& records) {
  NullSharedCensus c;
  for (const auto& r : records) {
    if (!r.info.null_shared) continue;
    ++c.count_total;
    if (r.pair.is_link) ++c.count_links;
  }
  return c;
}

std::vector<CaseListing> null_shared_links(const std::vector<PairRecord>& records) {
  std::vector<const PairRecord*> v;
  for (const auto& r : records)
    if (r.pair.is_link && r.info.null_shared) v.push_back(&r);
  std::sort(v.begin(), v.end(), [](const PairRecord* a, const PairRecord* b) { return id_less(a->pair, b->pair); });
  std::vector<CaseListing> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(make_case(CaseKind::kNullShared, *v[i], 0.0, i + 1));
  return out;
}

void write_cases_jsonl(std::ostream& out, const std::vector<CaseListing>& cases) {
  for (const auto& c : cases) {
    ojson j;
    j["kind"] = case_kind_name(c.kind);
    j["rank"] = c.rank;
    j["source_id"] = c.pair.source_id;
    j["target_id"] = c.pair.target_id;
    j["is_link"] = c.pair.is_link;
    j["value"] = c.value;
    j["h_x"] = opt_json(c.metrics.h_x);
    j["h_y"] = opt_json(c.metrics.h_y);
    j["mi"] = opt_json(c.metrics.mi);
    j["loss"] = opt_json(c.metrics.loss);
    j["noise"] = opt_json(c.metrics.noise);
    j["d1"] = opt_json(c.metrics.d1);
    j["si"] = c.metrics.si;
    j["null_shared"] = c.metrics.null_shared;
    out << j.dump() << '\n';
  }
}

void write_scatter_svg(std::ostream& out, const std::vector<PairRecord>& records, ScatterColor color,
                       const std::string& title) {
  struct Point {
    double x, y, c;
    bool link;
  };
  std::vector<Point> pts;
  for (const auto& r : records) {
    const auto c = color == ScatterColor::kLoss ? r.info.loss : r.info.noise;
    if (r.dist.wmd_sim && r.info.mi && c) pts.push_back({*r.dist.wmd_sim, *r.info.mi, *c, r.pair.is_link});
  }
  constexpr double W = 640, H = 480, left = 70, right = 130, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1, c0 = 0, c1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts[0].x;
    y0 = y1 = pts[0].y;
    c0 = c1 = pts[0].c;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
      c0 = std::min(c0, p.c), c1 = std::max(c1, p.c);
    }
  }
  auto widen = [](double& a, double& b) {
    if (b - a < 1e-12) {
      a -= 0.5;
      b += 0.5;
    }
  };
  widen(x0, x1);
  widen(y0, y1);
  const double cspan = c1 - c0 > 1e-12 ? c1 - c0 : 1.0;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
  auto rgb = [](double t) {
    // blue (low) to red (high)
    const int r = static_cast<int>(std::lround(44 + t * (215 - 44)));
    const int g = static_cast<int>(std::lround(123 + t * (25 - 123)));
    const int b = static_cast<int>(std::lround(182 + t * (28 - 182)));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };
  const char* cname = color == ScatterColor::kLoss ? "loss (bits)" : "noise (bits)";

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(left + pw / 2, 1) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  out << "<line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(top + ph, 1) << "\" x2=\"" << fixed(left + pw, 1)
      << "\" y2=\"" << fixed(top + ph, 1) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(top, 1) << "\" x2=\"" << fixed(left, 1) << "\" y2=\""
      << fixed(top + ph, 1) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << fixed(sx(xv), 1) << "\" y=\"" << fixed(top + ph + 16, 1)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fixed(xv, 3) << "</text>\n";
    out << "<text x=\"" << fixed(left - 6, 1) << "\" y=\"" << fixed(sy(yv) + 3, 1)
        << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(yv, 2) << "</text>\n";
  }
  out << "<text x=\"" << fixed(left + pw / 2, 1) << "\" y=\"" << fixed(H - 16, 1)
      << "\" text-anchor=\"middle\" font-size=\"12\">WMD similarity</text>\n";
  out << "<text x=\"18\" y=\"" << fixed(top + ph / 2, 1) << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
      << fixed(top + ph / 2, 1) << ")\">Mutual Information (bits)</text>\n";
  for (const auto& p : pts) {
    out << "<circle cx=\"" << fixed(sx(p.x), 2) << "\" cy=\"" << fixed(sy(p.y), 2) << "\" r=\"" << (p.link ? 4 : 2.5)
        << "\" fill=\"" << rgb((p.c - c0) / cspan) << "\"" << (p.link ? " stroke=\"black\"" : "") << "/>\n";
  }
  // legend
  const double lx = left + pw + 30;
  out << "<text x=\"" << fixed(lx, 1) << "\" y=\"" << fixed(top, 1) << "\" font-size=\"11\">" << cname << "</text>\n";
  for (int i = 0; i < 10; ++i) {
    out << "<rect x=\"" << fixed(lx, 1) << "\" y=\"" << fixed(top + 10 + i * 16, 1)
        << "\" width=\"16\" height=\"16\" fill=\"" << rgb(1.0 - i / 9.0) << "\"/>\n";
  }
  out << "<text x=\"" << fixed(lx + 22, 1) << "\" y=\"" << fixed(top + 22, 1) << "\" font-size=\"10\">" << fixed(c1, 2)
      << "</text>\n";
  out << "<text x=\"" << fixed(lx + 22, 1) << "\" y=\"" << fixed(top + 10 + 9 * 16 + 12, 1) << "\" font-size=\"10\">"
      << fixed(c0, 2) << "</text>\n";
  out << "<circle cx=\"" << fixed(lx + 8, 1) << "\" cy=\"" << fixed(top + 200, 1)
      << "\" r=\"4\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fixed(lx + 18, 1) << "\" y=\"" << fixed(top + 204, 1) << "\" font-size=\"10\">link</text>\n";
  if (pts.empty()) {
    out << "<text x=\"" << fixed(left + pw / 2, 1) << "\" y=\"" << fixed(top + ph / 2, 1)
        << "\" text-anchor=\"middle\" font-size=\"12\">no defined pairs</text>\n";
  }
  out << "</svg>\n";
}

std::vector<CaseListing> all_cases(const std::vector<PairRecord>& records, const ReportOptions& opt) {
  std::vector<CaseListing> out;
  auto append = [&](std::vector<CaseListing> v) { out.insert(out.end(), v.begin(), v.end()); };
  append(extreme_cases(records, Metric::kLoss, opt.case_k));
  append(extreme_cases(records, Metric::kNoise, opt.case_k));
  append(info_imbalance(records, opt.case_k));
  const bool has_link = std::any_of(records.begin(), records.end(), [&](const PairRecord& r) {
    return r.pair.is_link && metric_value(r, opt.orphans.metric).has_value();
  });
  if (has_link) append(detect_orphans(records, opt.orphans));
  append(null_shared_links(records));
  return out;
}

std::string evaluation_json(const std::vector<PairRecord>& records, const ReportOptions& opt) {
  ojson j;
  j["experiment"] = opt.experiment;
  j["testbed"] = opt.testbed;
  j["aggregation"] = "per_pair";
  std::size_t links = 0;
  for (const auto& r : records) links += r.pair.is_link ? 1 : 0;
  j["counts"] = {{"pairs", records.size()}, {"links", links}, {"non_links", records.size() - links}};

  ojson undefined = ojson::object();
  ojson summaries = ojson::object();
  for (auto m : kAllMetrics) {
    std::vector<double> vals;
    for (const auto& r : records)
      if (auto v = metric_value(r, m)) vals.push_back(*v);
    undefined[std::string(metric_name(m))] = records.size() - vals.size();
    summaries[std::string(metric_name(m))] = vals.empty() ? ojson(nullptr) : stats_json(summarize(vals));
  }
  j["undefined"] = undefined;

  ojson lp = ojson::array();
  for (auto m : performance_metrics()) {
    const auto e = evaluate_scorer(records, m);
    lp.push_back({{"metric", metric_name(m)},
                  {"pr_auc", opt_json(e.pr_auc)},
                  {"roc_auc", opt_json(e.roc_auc)},
                  {"average_precision", opt_json(e.average_precision)},
                  {"defined", e.defined},
                  {"undefined", e.undefined}});
  }
  j["link_prediction"] = lp;
  j["summaries"] = summaries;

  ojson seg = ojson::object();
  for (const auto& [m, s] : segregate_by_label(records, kAllMetrics)) {
    auto side = [](const LabelSide& l) {
      return ojson{{"stats", l.stats ? stats_json(*l.stats) : ojson(nullptr)}, {"undefined", l.undefined}};
    };
    seg[std::string(metric_name(m))] = {{"link", side(s.link)}, {"non_link", side(s.non_link)}};
  }
  j["segregated"] = seg;

  ojson corr = ojson::array();
  for (const auto& c : correlation_table(records, kSemanticMetrics, kInfoMetrics)) {
    corr.push_back({{"metric_a", metric_name(c.metric_a)},
                    {"metric_b", metric_name(c.metric_b)},
                    {"pearson_r", opt_json(c.pearson_r)},
                    {"n", c.n}});
  }
  j["correlations"] = corr;

  const auto census = null_shared_census(records);
  j["null_shared"] = {{"count_total", census.count_total}, {"count_links", census.count_links}};
  j["orphan_policy"] = {{"quantile", opt.orphans.quantile}, {"metric", metric_name(opt.orphans.metric)}};
  return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

void emit_report(const std::filesystem::path& dir, const std::vector<PairRecord>& records,
                 const ReportOptions& opt) {
  opt.orphans.validate();
  auto render = [](auto&& fn) {
    std::ostringstream s;
    fn(s);
    return s.str();
  };
  write_text_file(dir / "pairs.csv", render([&](std::ostream& s) { write_records_csv(s, records); }));
  write_text_file(dir / "pairs.jsonl", render([&](std::ostream& s) { write_records_jsonl(s, records); }));

  const bool any_complete =
      std::any_of(records.begin(), records.end(), [](const PairRecord& r) { return r.info.complete(); });
  std::vector<InformationRow> info_rows;
  if (any_complete) info_rows.push_back(information_row(records, opt.experiment, opt.testbed));
  write_text_file(dir / "information.csv", render([&](std::ostream& s) { write_information_csv(s, info_rows); }));

  std::vector<ByLinksRow> by_links;
  if (!records.empty()) by_links.push_back(by_links_row(records, opt.experiment, opt.testbed));
  write_text_file(dir / "by_links.csv", render([&](std::ostream& s) { write_by_links_csv(s, by_links); }));

  write_text_file(dir / "correlations.csv", render([&](std::ostream& s) {
                    std::vector<CorrelationCell> cells;
                    if (!records.empty()) cells = correlation_table(records, kSemanticMetrics, kInfoMetrics);
                    write_correlations_csv(s, opt.experiment, opt.testbed, cells);
                  }));

  std::vector<PerformanceRow> perf;
  if (!records.empty()) perf.push_back(performance_row(records, opt.experiment, opt.testbed));
  write_text_file(dir / "performance.csv", render([&](std::ostream& s) { write_performance_csv(s, perf); }));

  write_text_file(dir / "cases.jsonl",
                  render([&](std::ostream& s) { write_cases_jsonl(s, all_cases(records, opt)); }));
  write_text_file(dir / "scatter_loss.svg", render([&](std::ostream& s) {
                    write_scatter_svg(s, records, ScatterColor::kLoss, opt.testbed + ": similarity vs MI vs loss");
                  }));
  write_text_file(dir / "scatter_noise.svg", render([&](std::ostream& s) {
                    write_scatter_svg(s, records, ScatterColor::kNoise, opt.testbed + ": similarity vs MI vs noise");
                  }));
  write_text_file(dir / "evaluation.json", evaluation_json(records, opt));
}

}  // namespace tracex
