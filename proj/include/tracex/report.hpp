#pragma once

// Views over a per-pair record stream. Nothing here consults artifacts or
// embeddings, so every table can be rebuilt from pairs.csv alone.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracex/evaluation.hpp"
#include "tracex/records.hpp"

namespace tracex {

struct InformationRow {
  std::string experiment;
  std::string testbed;
  std::size_t pairs = 0;      // pairs with both sides non-empty
  std::size_t undefined = 0;  // pairs with an empty side
  double h_x = 0, h_y = 0, d1 = 0;
  double loss = 0, d2 = 0;    // loss = H_pool - H(Y); mi + loss = h_x
  double noise = 0, d3 = 0;   // noise = H_pool - H(X); mi + noise = h_y
  double mi = 0;
  SummaryStats si, sx;
};

/// Per-pair means over complete records. Throws DataError when no record is
/// complete.
InformationRow information_row(const std::vector<PairRecord>& records, const std::string& experiment,
                               const std::string& testbed);

const std::vector<std::string>& information_columns();
void write_information_csv(std::ostream& out, const std::vector<InformationRow>& rows);

struct ByLinksRow {
  std::string experiment;
  std::string testbed;
  std::size_t links = 0;
  std::size_t non_links = 0;
  Segregated segregated;
};

/// Metrics in by_links column order (SCM, WMD, COS, EUC, H(X), H(Y), loss,
/// noise, MI, Si, Sx).
const std::vector<Metric>& by_links_metrics();
ByLinksRow by_links_row(const std::vector<PairRecord>& records, const std::string& experiment,
                        const std::string& testbed);
const std::vector<std::string>& by_links_columns();
void write_by_links_csv(std::ostream& out, const std::vector<ByLinksRow>& rows);

void write_correlations_csv(std::ostream& out, const std::string& experiment, const std::string& testbed,
                            const std::vector<CorrelationCell>& cells);

struct PerformanceRow {
  std::string experiment;
  std::string testbed;
  std::vector<LinkPrediction> scorers;  // performance_metrics() order
};
/// WMD, SCM, COS, EUC, then the information scorers MI, Si and overlap.
const std::vector<Metric>& performance_metrics();
PerformanceRow performance_row(const std::vector<PairRecord>& records, const std::string& experiment,
                               const std::string& testbed);
const std::vector<std::string>& performance_columns();
void write_performance_csv(std::ostream& out, const std::vector<PerformanceRow>& rows);

enum class CaseKind { kMaxLoss, kMinLoss, kMaxNoise, kMinNoise, kInfoImbalance, kOrphanLink, kNullShared };
std::string_view case_kind_name(CaseKind k);

struct CaseListing {
  CaseKind kind;
  CandidatePair pair;
  InfoRecord metrics;
  double value = 0.0;  // the metric that defines the listing
  std::size_t rank = 0;
};

/// Top-k (max) and bottom-k (min) pairs by loss or noise; ties break by
/// (source_id, target_id). Undefined values are skipped.
std::vector<CaseListing> extreme_cases(const std::vector<PairRecord>& records, Metric metric, std::size_t k);

/// Pairs ranked by |d1| descending.
std::vector<CaseListing> info_imbalance(const std::vector<PairRecord>& records, std::size_t k);

struct OrphanPolicy {
  double quantile = 0.99;
  Metric metric = Metric::kMi;  // kMi or kSi

  void validate() const;
};

/// Linear interpolation at h = (n - 1) q over sorted values. Throws
/// ConfigError on an empty list or q outside [0, 1].
double quantile_linear(std::vector<double> values, double q);

/// Non-links at or above the link-population quantile, descending. Throws
/// DataError when the records contain no link with a defined value.
std::vector<CaseListing> detect_orphans(const std::vector<PairRecord>& records, const OrphanPolicy& policy);

struct NullSharedCensus {
  std::size_t count_total = 0;
  std::size_t count_links = 0;
};
NullSharedCensus null_shared_census(const std::vector<PairRecord>& records);
/// Links whose shared vector is null, in id order.
std::vector<CaseListing> null_shared_links(const std::vector<PairRecord>& records);

void write_cases_jsonl(std::ostream& out, const std::vector<CaseListing>& cases);

enum class ScatterColor { kLoss, kNoise };
/// x = WMD similarity, y = MI, colour = loss or noise. Pairs missing any of
/// the three are skipped.
void write_scatter_svg(std::ostream& out, const std::vector<PairRecord>& records, ScatterColor color,
                       const std::string& title);

struct ReportOptions {
  std::string experiment = "EX";
  std::string testbed = "testbed";
  std::size_t case_k = 10;
  OrphanPolicy orphans;
};

/// All case listings for a record set: extremes for loss and noise, D1
/// imbalance, orphans (skipped without links) and null-shared links.
std::vector<CaseListing> all_cases(const std::vector<PairRecord>& records, const ReportOptions& opt);

/// evaluation.json body as text (two-space indented, trailing newline).
std::string evaluation_json(const std::vector<PairRecord>& records, const ReportOptions& opt);

/// Writes information.csv, by_links.csv, correlations.csv, performance.csv,
/// cases.jsonl, scatter_{loss,noise}.svg and evaluation.json into `dir`.
/// Throws IoError when a file cannot be written.
void emit_report(const std::filesystem::path& dir, const std::vector<PairRecord>& records,
                 const ReportOptions& opt);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tracex
