#pragma once

// Per-candidate record stream: the single source every report view is
// computed from.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracex/corpus.hpp"
#include "tracex/infotheory.hpp"
#include "tracex/semantics.hpp"

namespace tracex {

struct PairRecord {
  CandidatePair pair;
  InfoRecord info;
  DistanceRecord dist;
};

enum class Metric {
  kHx, kHy, kHpool, kMi, kLoss, kNoise, kSi, kSx, kD1, kD2, kD3, kOverlap,
  kWmd, kScm, kCos, kEuc, kWmdSim, kCosSim,
};

std::string_view metric_name(Metric m);
std::optional<Metric> metric_from_name(std::string_view name);
std::optional<double> metric_value(const PairRecord& r, Metric m);

/// Fixed CSV column order: the information columns first, then the semantic
/// columns, then the overlap scorer.
const std::vector<std::string>& record_columns();

void write_records_csv(std::ostream& out, const std::vector<PairRecord>& records);
void write_records_jsonl(std::ostream& out, const std::vector<PairRecord>& records);

/// Reads a stream produced by write_records_csv. Throws DataError on header
/// or arity mismatches.
std::vector<PairRecord> read_records_csv(std::istream& in);

/// Shortest round-trip decimal for a double; used by every text emitter.
std::string format_number(double x);
/// Fixed two-decimal rendering, and "mean[std]" with two decimals on both.
std::string format_fixed2(double x);
std::string format_mean_std(double mean, double std);

}  // namespace tracex
