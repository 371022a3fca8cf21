#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "tracex/error.hpp"
#include "tracex/records.hpp"

namespace tracex {

namespace {

constexpr std::array<std::pair<Metric, std::string_view>, 18> kMetricNames = {{
    {Metric::kHx, "h_x"},       {Metric::kHy, "h_y"},         {Metric::kHpool, "h_pool"},
    {Metric::kMi, "mi"},        {Metric::kLoss, "loss"},      {Metric::kNoise, "noise"},
    {Metric::kSi, "si"},        {Metric::kSx, "sx"},          {Metric::kD1, "d1"},
    {Metric::kD2, "d2"},        {Metric::kD3, "d3"},          {Metric::kOverlap, "overlap"},
    {Metric::kWmd, "wmd"},      {Metric::kScm, "scm"},        {Metric::kCos, "cos"},
    {Metric::kEuc, "euc"},      {Metric::kWmdSim, "wmd_sim"}, {Metric::kCosSim, "cos_sim"},
}};

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; }

// One CSV record; a quoted field may span physical lines.
bool read_csv_record(std::istream& in, std::string& record, std::size_t& line_no) {
  if (!std::getline(in, record)) return false;
  ++line_no;
  auto open_quote = [](const std::string& s) {
    return std::count(s.begin(), s.end(), '"') % 2 == 1;
  };
  std::string more;
  while (open_quote(record) && std::getline(in, more)) {
    ++line_no;
    record += '\n';
    record += more;
  }
  if (!record.empty() && record.back() == '\r') record.pop_back();
  return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::optional<double> parse_opt(const std::string& s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  double x = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw DataError("record stream line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return x;
}

bool parse_flag(const std::string& s, std::size_t line_no) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw DataError("record stream line " + std::to_string(line_no) + ": bad flag '" + s + "'");
}

}  // namespace

std::string_view metric_name(Metric m) {
  for (const auto& [k, name] : kMetricNames)
    if (k == m) return name;
  return "?";
}

std::optional<Metric> metric_from_name(std::string_view name) {
  for (const auto& [k, n] : kMetricNames)
    if (n == name) return k;
  return std::nullopt;
}

std::optional<double> metric_value(const PairRecord& r, Metric m) {
  switch (m) {
    case Metric::kHx: return r.info.h_x;
    case Metric::kHy: return r.info.h_y;
    case Metric::kHpool: return r.info.h_pool;
    case Metric::kMi: return r.info.mi;
    case Metric::kLoss: return r.info.loss;
    case Metric::kNoise: return r.info.noise;
    case Metric::kSi: return r.info.si;
    case Metric::kSx: return r.info.sx;
    case Metric::kD1: return r.info.d1;
    case Metric::kD2: return r.info.d2;
    case Metric::kD3: return r.info.d3;
    case Metric::kOverlap:
      return r.info.complete() ? std::optional<double>(r.info.overlap) : std::nullopt;
    case Metric::kWmd: return r.dist.wmd;
    case Metric::kScm: return r.dist.scm;
    case Metric::kCos: return r.dist.cos;
    case Metric::kEuc: return r.dist.euc;
    case Metric::kWmdSim: return r.dist.wmd_sim;
    case Metric::kCosSim: return r.dist.cos_sim;
  }
  return std::nullopt;
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "source_id", "target_id", "is_link", "h_x",     "h_y",     "h_pool",      "mi",
      "loss",      "noise",     "si",      "sx",      "d1",      "null_shared", "wmd",
      "scm",       "cos",       "euc",     "wmd_sim", "cos_sim", "wmd_relaxed", "overlap"};
  return cols;
}

std::string format_number(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string format_fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string format_mean_std(double mean, double std) { return format_fixed2(mean) + "[" + format_fixed2(std) + "]"; }

void write_records_csv(std::ostream& out, const std::vector<PairRecord>& records) {
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    const auto& f = r.info;
    const auto& d = r.dist;
    out << csv_escape(r.pair.source_id) << ',' << csv_escape(r.pair.target_id) << ',' << (r.pair.is_link ? 1 : 0)
        << ',' << opt(f.h_x) << ',' << opt(f.h_y) << ',' << opt(f.h_pool) << ',' << opt(f.mi) << ','
        << opt(f.loss) << ',' << opt(f.noise) << ',' << format_number(f.si) << ',' << format_number(f.sx) << ','
        << opt(f.d1) << ',' << (f.null_shared ? 1 : 0) << ',' << opt(d.wmd) << ',' << opt(d.scm) << ','
        << opt(d.cos) << ',' << opt(d.euc) << ',' << opt(d.wmd_sim) << ',' << opt(d.cos_sim) << ','
        << (d.wmd_relaxed ? 1 : 0) << ',' << (f.complete() ? format_number(f.overlap) : std::string{}) << '\n';
  }
}

void write_records_jsonl(std::ostream& out, const std::vector<PairRecord>& records) {
  using ojson = nlohmann::ordered_json;
  auto val = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  for (const auto& r : records) {
    const auto& f = r.info;
    const auto& d = r.dist;
    ojson j;
    j["source_id"] = r.pair.source_id;
    j["target_id"] = r.pair.target_id;
    j["is_link"] = r.pair.is_link;
    j["h_x"] = val(f.h_x);
    j["h_y"] = val(f.h_y);
    j["h_pool"] = val(f.h_pool);
    j["mi"] = val(f.mi);
    j["loss"] = val(f.loss);
    j["noise"] = val(f.noise);
    j["si"] = f.si;
    j["sx"] = f.sx;
    j["d1"] = val(f.d1);
    j["d2"] = val(f.d2);
    j["d3"] = val(f.d3);
    j["null_shared"] = f.null_shared;
    j["wmd"] = val(d.wmd);
    j["scm"] = val(d.scm);
    j["cos"] = val(d.cos);
    j["euc"] = val(d.euc);
    j["wmd_sim"] = val(d.wmd_sim);
    j["cos_sim"] = val(d.cos_sim);
    j["wmd_relaxed"] = d.wmd_relaxed;
    j["overlap"] = f.complete() ? ojson(f.overlap) : ojson(nullptr);
    out << j.dump() << '\n';
  }
}

std::vector<PairRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!read_csv_record(in, line, line_no)) throw DataError("record stream is empty (missing header)");
  const auto header = split_csv_line(line);
  if (header != record_columns()) throw DataError("record stream header does not match the expected columns");

  std::vector<PairRecord> out;
  while (read_csv_record(in, line, line_no)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw DataError("record stream line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    PairRecord r;
    r.pair.source_id = f[0];
    r.pair.target_id = f[1];
    r.pair.is_link = parse_flag(f[2], line_no);
    auto& info = r.info;
    info.h_x = parse_opt(f[3], line_no);
    info.h_y = parse_opt(f[4], line_no);
    info.h_pool = parse_opt(f[5], line_no);
    info.mi = parse_opt(f[6], line_no);
    info.loss = parse_opt(f[7], line_no);
    info.noise = parse_opt(f[8], line_no);
    info.si = parse_opt(f[9], line_no).value_or(0.0);
    info.sx = parse_opt(f[10], line_no).value_or(0.0);
    info.d1 = parse_opt(f[11], line_no);
    info.null_shared = parse_flag(f[12], line_no);
    info.source_empty = !info.h_x.has_value();
    info.target_empty = !info.h_y.has_value();
    if (info.h_y && info.loss) info.d2 = *info.h_y - *info.loss;
    if (info.h_x && info.noise) info.d3 = *info.h_x - *info.noise;
    auto& d = r.dist;
    d.wmd = parse_opt(f[13], line_no);
    d.scm = parse_opt(f[14], line_no);
    d.cos = parse_opt(f[15], line_no);
    d.euc = parse_opt(f[16], line_no);
    d.wmd_sim = parse_opt(f[17], line_no);
    d.cos_sim = parse_opt(f[18], line_no);
    d.wmd_relaxed = parse_flag(f[19], line_no);
    info.overlap = parse_opt(f[20], line_no).value_or(0.0);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tracex
