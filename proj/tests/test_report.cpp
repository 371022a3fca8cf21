#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"
#include "tracex/error.hpp"
#include "tracex/report.hpp"

using namespace tracex;

namespace {

TokenCounts bag(std::initializer_list<std::pair<const char*, long>> items) {
  TokenCounts c;
  for (const auto& [t, n] : items) {
    c.counts[t] = n;
    c.total += n;
  }
  return c;
}

PairRecord make_record(const std::string& s, const std::string& t, bool link, const TokenCounts& a,
                       const TokenCounts& b) {
  PairRecord r;
  r.pair.source_id = s;
  r.pair.target_id = t;
  r.pair.is_link = link;
  r.info = info_record(a, b);
  if (r.info.complete()) {
    r.dist.wmd = 1.0 - r.info.overlap;
    r.dist.wmd_sim = similarity_from_distance(*r.dist.wmd);
    r.dist.scm = r.info.overlap;
    r.dist.cos = 1.0 - r.info.overlap;
    r.dist.cos_sim = similarity_from_distance(*r.dist.cos);
    r.dist.euc = 2.0 * (1.0 - r.info.overlap);
  }
  return r;
}

std::vector<PairRecord> random_records(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<PairRecord> out;
  for (std::size_t k = 0; k < n; ++k) {
    TokenCounts a, b;
    for (int v = 0; v < 6; ++v) {
      const long x = static_cast<long>(rng() % 4), y = static_cast<long>(rng() % 4);
      if (x) a.counts["t" + std::to_string(v)] = x, a.total += x;
      if (y) b.counts["t" + std::to_string(v)] = y, b.total += y;
    }
    out.push_back(make_record("s" + std::to_string(k / 5), "t" + std::to_string(k % 5), rng() % 3 == 0, a, b));
  }
  return out;
}

std::string render_csv(const std::vector<PairRecord>& r) {
  std::ostringstream s;
  write_records_csv(s, r);
  return s.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST(RecordsCsv, RoundTrip) {
  auto recs = random_records(1, 40);
  recs.push_back(make_record("empty", "x", true, TokenCounts{}, bag({{"a", 1}})));
  recs.back().dist.wmd_relaxed = true;
  const auto text = render_csv(recs);
  std::istringstream in(text);
  const auto back = read_records_csv(in);
  ASSERT_EQ(back.size(), recs.size());
  EXPECT_EQ(render_csv(back), text);
  EXPECT_TRUE(back.back().info.source_empty);
  EXPECT_EQ(back[3].info.d2, recs[3].info.d2);
  EXPECT_EQ(first_line(text).find("source_id,target_id,is_link,h_x"), 0u);
}

TEST(RecordsCsv, RejectsBadInput) {
  std::istringstream bad_header("a,b,c\n");
  EXPECT_THROW(read_records_csv(bad_header), Error);
  const auto text = render_csv(random_records(2, 2));
  std::istringstream truncated(text.substr(0, text.rfind(',')) + "\n");
  EXPECT_THROW(read_records_csv(truncated), Error);
}

TEST(RecordsCsv, QuotesAwkwardIds) {
  std::vector<PairRecord> recs = {make_record("a,\"b\"", "line\nbreak", false, bag({{"x", 1}}), bag({{"x", 2}}))};
  std::istringstream in(render_csv(recs));
  const auto back = read_records_csv(in);
  EXPECT_EQ(back[0].pair.source_id, "a,\"b\"");
  EXPECT_EQ(back[0].pair.target_id, "line\nbreak");
}

TEST(Formatting, Numbers) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_fixed2(3.14159), "3.14");
  EXPECT_EQ(format_mean_std(4.921, 1.249), "4.92[1.25]");
}

TEST(InformationRow, MeansSatisfyIdentities) {
  const auto recs = random_records(3, 60);
  const auto row = information_row(recs, "EX1", "tb");
  EXPECT_EQ(row.pairs, 60u);
  EXPECT_NEAR(row.mi + row.loss, row.h_x, 1e-9);
  EXPECT_NEAR(row.mi + row.noise, row.h_y, 1e-9);
  EXPECT_NEAR(row.d1, row.h_y - row.h_x, 1e-9);
  EXPECT_NEAR(row.d2, row.h_y - row.loss, 1e-9);
  EXPECT_NEAR(row.d3, row.h_x - row.noise, 1e-9);
}

TEST(InformationRow, IdenticalPairsHaveNoLossOrNoise) {
  std::vector<PairRecord> recs;
  for (int k = 0; k < 5; ++k) recs.push_back(make_record("s", "t" + std::to_string(k), true, bag({{"a", k + 1}, {"b", 2}}), bag({{"a", k + 1}, {"b", 2}})));
  const auto row = information_row(recs, "EX", "tb");
  EXPECT_NEAR(row.loss, 0.0, 1e-12);
  EXPECT_NEAR(row.noise, 0.0, 1e-12);
}

TEST(InformationRow, ColumnsAndEmptyInput) {
  const std::vector<std::string> expected = {"experiment", "testbed", "pairs", "H(X)", "H(Y)", "D1",
                                             "loss[H_pool-H(Y)]", "D2", "noise[H_pool-H(X)]", "D3", "MI", "Si",
                                             "Sx", "aggregation"};
  EXPECT_EQ(information_columns(), expected);
  std::vector<PairRecord> partial = {make_record("a", "b", false, TokenCounts{}, bag({{"x", 1}}))};
  EXPECT_THROW(information_row(partial, "EX", "tb"), Error);
  std::ostringstream s;
  write_information_csv(s, {});
  EXPECT_EQ(s.str(), "experiment,testbed,pairs,H(X),H(Y),D1,loss[H_pool-H(Y)],D2,noise[H_pool-H(X)],D3,MI,Si,Sx,aggregation\n");
}

TEST(ByLinks, ColumnOrder) {
  const auto& c = by_links_columns();
  const std::vector<std::string> head = {"experiment", "testbed", "links", "non_links", "SCM_Link", "SCM_NoL",
                                         "WMD_Link", "WMD_NoL", "COS_Link", "COS_NoL", "EUC_Link", "EUC_NoL"};
  ASSERT_GE(c.size(), head.size());
  EXPECT_EQ(std::vector<std::string>(c.begin(), c.begin() + head.size()), head);
  EXPECT_EQ(c.size(), 4u + 2u * 11u);
  EXPECT_EQ(by_links_metrics().size(), 11u);
  EXPECT_EQ(by_links_metrics().front(), Metric::kScm);
}

TEST(ByLinks, PlantedOverlapSeparatesSi) {
  std::vector<PairRecord> recs;
  for (int k = 0; k < 6; ++k) {
    const auto src = bag({{"a", 3}, {"b", 2}, {"c", 1}});
    recs.push_back(make_record("s", "l" + std::to_string(k), true, src, bag({{"a", 2}, {"b", 2}, {"c", 1}})));
    recs.push_back(make_record("s", "n" + std::to_string(k), false, src, bag({{"z", 4}, {"a", 1}})));
  }
  const auto row = by_links_row(recs, "EX", "tb");
  EXPECT_EQ(row.links, 6u);
  EXPECT_EQ(row.non_links, 6u);
  EXPECT_GT(row.segregated.at(Metric::kSi).link.stats->mean, row.segregated.at(Metric::kSi).non_link.stats->mean);
  EXPECT_GT(row.segregated.at(Metric::kMi).link.stats->mean, row.segregated.at(Metric::kMi).non_link.stats->mean);
}

TEST(ExtremeCases, MaxThenMinWithIdTieBreak) {
  std::vector<PairRecord> recs = {make_record("b", "x", false, bag({{"a", 1}}), bag({{"a", 1}})),
                                  make_record("a", "y", false, bag({{"a", 1}}), bag({{"a", 1}})),
                                  make_record("a", "x", false, bag({{"a", 1}}), bag({{"a", 1}}))};
  const auto c = extreme_cases(recs, Metric::kLoss, 1);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].kind, CaseKind::kMaxLoss);
  EXPECT_EQ(c[1].kind, CaseKind::kMinLoss);
  EXPECT_EQ(c[0].pair.source_id, "a");
  EXPECT_EQ(c[0].pair.target_id, "x");
  EXPECT_EQ(c[1].pair.target_id, "x");
  EXPECT_THROW(extreme_cases(recs, Metric::kLoss, 0), Error);
  EXPECT_THROW(extreme_cases(recs, Metric::kMi, 1), Error);
}

TEST(ExtremeCases, OrdersByValue) {
  const auto recs = random_records(4, 30);
  const auto c = extreme_cases(recs, Metric::kNoise, 5);
  ASSERT_EQ(c.size(), 10u);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_GE(c[k - 1].value, c[k].value);
  for (std::size_t k = 6; k < 10; ++k) EXPECT_LE(c[k - 1].value, c[k].value);
  EXPECT_EQ(c[0].rank, 1u);
  EXPECT_EQ(c[5].kind, CaseKind::kMinNoise);
  double max_noise = -1e9;
  for (const auto& r : recs) max_noise = std::max(max_noise, *r.info.noise);
  EXPECT_EQ(c[0].value, max_noise);
}

TEST(InfoImbalance, RanksByAbsoluteD1) {
  std::vector<PairRecord> recs = {make_record("a", "x", false, bag({{"a", 1}}), bag({{"a", 1}, {"b", 1}})),
                                  make_record("a", "y", false, bag({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}}), bag({{"a", 1}})),
                                  make_record("a", "z", false, bag({{"a", 1}}), bag({{"a", 1}}))};
  const auto c = info_imbalance(recs, 3);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].pair.target_id, "y");
  EXPECT_EQ(c[0].value, -2.0);
  EXPECT_EQ(c[1].pair.target_id, "x");
  EXPECT_EQ(c[2].value, 0.0);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_EQ(quantile_linear({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(quantile_linear({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_EQ(quantile_linear({7}, 0.3), 7.0);
  std::vector<double> hundred;
  for (int k = 1; k <= 100; ++k) hundred.push_back(k);
  EXPECT_DOUBLE_EQ(quantile_linear(hundred, 0.99), 99.01);
  EXPECT_THROW(quantile_linear({}, 0.5), Error);
  EXPECT_THROW(quantile_linear({1}, 1.5), Error);
}

TEST(Orphans, HighMiNonLinkIsDetected) {
  std::vector<PairRecord> recs;
  for (int k = 0; k < 10; ++k)
    recs.push_back(make_record("s" + std::to_string(k), "t", true, bag({{"a", 1}, {"b", 1}}), bag({{"a", 1}, {"c", 1}})));
  recs.push_back(make_record("z", "t", false, bag({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}}),
                             bag({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}})));
  recs.push_back(make_record("y", "t", false, bag({{"q", 1}}), bag({{"r", 1}})));
  const auto c = detect_orphans(recs, OrphanPolicy{0.99, Metric::kMi});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].pair.source_id, "z");
  EXPECT_EQ(c[0].kind, CaseKind::kOrphanLink);
  EXPECT_EQ(c[0].value, 2.0);
}

TEST(Orphans, PolicyAndPreconditions) {
  std::vector<PairRecord> no_links = {make_record("a", "b", false, bag({{"x", 1}}), bag({{"x", 1}}))};
  try {
    detect_orphans(no_links, OrphanPolicy{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
  EXPECT_THROW((OrphanPolicy{1.0, Metric::kMi}.validate()), Error);
  EXPECT_THROW((OrphanPolicy{0.5, Metric::kLoss}.validate()), Error);
  EXPECT_NO_THROW((OrphanPolicy{0.5, Metric::kSi}.validate()));
}

TEST(NullShared, Census) {
  std::vector<PairRecord> same, disjoint;
  for (int k = 0; k < 4; ++k) {
    same.push_back(make_record("s", "t" + std::to_string(k), k < 2, bag({{"a", 1}, {"b", 2}}), bag({{"a", 1}, {"b", 2}})));
    disjoint.push_back(make_record("s" + std::to_string(k), "t", k < 3, bag({{"a", 1}}), bag({{"b", 1}})));
  }
  EXPECT_EQ(null_shared_census(same).count_total, 0u);
  EXPECT_EQ(null_shared_census(same).count_links, 0u);
  EXPECT_EQ(null_shared_census(disjoint).count_total, 4u);
  EXPECT_EQ(null_shared_census(disjoint).count_links, 3u);
  const auto links = null_shared_links(disjoint);
  ASSERT_EQ(links.size(), 3u);
  EXPECT_EQ(links[0].pair.source_id, "s0");
  EXPECT_EQ(links[2].kind, CaseKind::kNullShared);
}

TEST(Cases, JsonlLines) {
  const auto recs = random_records(5, 25);
  ReportOptions opt;
  opt.case_k = 2;
  const auto cases = all_cases(recs, opt);
  std::ostringstream s;
  write_cases_jsonl(s, cases);
  const auto text = s.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), cases.size());
  EXPECT_NE(text.find("\"kind\":\"max_loss\""), std::string::npos);
  EXPECT_NE(text.find("\"kind\":\"info_imbalance\""), std::string::npos);
}

TEST(Scatter, AxisLabels) {
  std::ostringstream s;
  write_scatter_svg(s, random_records(6, 20), ScatterColor::kNoise, "tb <1>");
  const auto svg = s.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("WMD similarity"), std::string::npos);
  EXPECT_NE(svg.find("Mutual Information (bits)"), std::string::npos);
  EXPECT_NE(svg.find("tb &lt;1&gt;"), std::string::npos);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
}

TEST(EmitReport, DeterministicBytes) {
  const auto recs = random_records(7, 50);
  testutil::TempDir d;
  ReportOptions opt;
  opt.testbed = "rnd";
  emit_report(d / "a", recs, opt);
  emit_report(d / "b", recs, opt);
  for (const char* f : {"pairs.csv", "pairs.jsonl", "information.csv", "by_links.csv", "correlations.csv",
                        "performance.csv", "cases.jsonl", "scatter_loss.svg", "scatter_noise.svg", "evaluation.json"}) {
    const auto a = testutil::read_file(d / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, testutil::read_file(d / "b" / f)) << f;
  }
}

TEST(EmitReport, EmptyRecordSetGivesHeadersOnly) {
  testutil::TempDir d;
  emit_report(d.path(), {}, ReportOptions{});
  for (const char* f : {"pairs.csv", "information.csv", "by_links.csv", "correlations.csv", "performance.csv"}) {
    const auto text = testutil::read_file(d / f);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1) << f;
  }
  EXPECT_EQ(testutil::read_file(d / "cases.jsonl"), "");
}

TEST(EmitReport, UnwritablePathIsIoError) {
  testutil::TempDir d;
  testutil::write_file(d / "file", "x");
  try {
    emit_report(d / "file" / "sub", random_records(8, 3), ReportOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(EvaluationJson, Sections) {
  const auto text = evaluation_json(random_records(9, 30), ReportOptions{});
  for (const char* key : {"\"aggregation\": \"per_pair\"", "\"link_prediction\"", "\"segregated\"", "\"correlations\"",
                          "\"null_shared\"", "\"orphan_policy\""})
    EXPECT_NE(text.find(key), std::string::npos) << key;
  EXPECT_EQ(text.back(), '\n');
}
