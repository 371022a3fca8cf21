#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"
#include "tracex/corpus.hpp"
#include "tracex/error.hpp"
#include "tracex/tokenize.hpp"

using namespace tracex;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::string manifest_json(const std::string& extra = "") {
  return R"({"name": "tb", "link_type": "uc2src", "language_tag": "en", "source_dir": "src",
             "target_dir": "tgt", "oracle_file": "oracle.txt")" +
         extra + "}";
}

void make_layout(const TempDir& d, const std::vector<std::string>& srcs, const std::vector<std::string>& tgts,
                 const std::string& oracle, const std::string& extra = "") {
  for (const auto& s : srcs) write_file(d / ("src/" + s + ".txt"), "source " + s + " text\n");
  for (const auto& t : tgts) write_file(d / ("tgt/" + t + ".java"), "class " + t + " {}\n");
  write_file(d / "oracle.txt", oracle);
  write_file(d / "manifest.json", manifest_json(extra));
}

}  // namespace

TEST(ParseOracle, SkipsCommentsAndBlankLines) {
  const auto links = parse_oracle("# header\n\nUC1 A.java B.java\r\n  \nUC2\tC.java\n");
  ASSERT_EQ(links.size(), 3u);
  EXPECT_EQ(links[0], (TraceLink{"UC1", "A.java"}));
  EXPECT_EQ(links[1], (TraceLink{"UC1", "B.java"}));
  EXPECT_EQ(links[2], (TraceLink{"UC2", "C.java"}));
}

TEST(ParseOracle, LineWithoutTargetsNamesTheLine) {
  try {
    parse_oracle("UC1 A\nUC2\n");
    FAIL() << "expected DataError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadTestbed, ResolvesFileNameIdsAndCounts) {
  TempDir d;
  make_layout(d, {"UC1", "UC2"}, {"A", "B", "C"}, "UC1 A.java B.java\nUC2 C\nUC2 C.java\n");
  const auto tb = load_testbed(d / "manifest.json");
  EXPECT_EQ(tb.name, "tb");
  EXPECT_EQ(tb.link_type, "uc2src");
  ASSERT_EQ(tb.sources.size(), 2u);
  ASSERT_EQ(tb.targets.size(), 3u);
  EXPECT_EQ(tb.links.size(), 3u);  // duplicate record collapses
  EXPECT_TRUE(tb.is_link("UC1", "A"));
  EXPECT_TRUE(tb.is_link("UC2", "C"));
  EXPECT_EQ(tb.counts(), (TestbedCounts{6, 3, 3}));
}

TEST(LoadTestbed, EmptyOracleHasNoLinks) {
  TempDir d;
  make_layout(d, {"a", "b"}, {"x", "y", "z"}, "");
  const auto tb = load_testbed(d / "manifest.json");
  EXPECT_EQ(tb.counts(), (TestbedCounts{6, 0, 6}));
}

TEST(LoadTestbed, UnknownOracleIdsAreListed) {
  TempDir d;
  make_layout(d, {"UC1"}, {"A"}, "UC1 A\nUC99 A\nUC1 Nope\n");
  try {
    load_testbed(d / "manifest.json");
    FAIL() << "expected DataError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("UC99"), std::string::npos);
    EXPECT_NE(msg.find("Nope"), std::string::npos);
  }
}

TEST(LoadTestbed, MissingPiecesAreDataErrors) {
  TempDir d;
  EXPECT_THROW(load_testbed(d / "nothing.json"), Error);
  write_file(d / "manifest.json", manifest_json());
  try {
    load_testbed(d / "manifest.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
  write_file(d / "bad.json", "{not json");
  EXPECT_THROW(load_testbed(d / "bad.json"), Error);
}

TEST(LoadTestbed, DuplicateStemsAreRejected) {
  TempDir d;
  make_layout(d, {"UC1"}, {"A"}, "UC1 A\n");
  write_file(d / "tgt/A.txt", "other\n");
  EXPECT_THROW(load_testbed(d / "manifest.json"), Error);
}

TEST(LoadTestbed, CountsReconcileWithManifest) {
  TempDir d;
  make_layout(d, {"a", "b"}, {"x", "y"}, "a x\n", R"(, "counts": {"all": 4, "links": 1, "non_links": 3})");
  EXPECT_NO_THROW(load_testbed(d / "manifest.json"));
  write_file(d / "manifest.json", manifest_json(R"(, "counts": {"all": 4, "links": 2, "non_links": 2})"));
  EXPECT_THROW(load_testbed(d / "manifest.json"), Error);
}

TEST(LoadTestbed, LibEstShapedLayout) {
  // 21 requirements x 52 code files with 352 oracle pairs.
  TempDir d;
  std::vector<std::string> srcs, tgts;
  for (int i = 0; i < 21; ++i) srcs.push_back("RQ" + std::to_string(i));
  for (int j = 0; j < 52; ++j) tgts.push_back("est_" + std::to_string(j));
  std::string oracle;
  int written = 0;
  for (int i = 0; i < 21 && written < 352; ++i) {
    oracle += srcs[i];
    for (int j = 0; j < 52 && written < 352; ++j) {
      if ((i * 7 + j) % 3 != 0) continue;
      oracle += " " + tgts[j] + ".c";
      ++written;
    }
    oracle += "\n";
  }
  ASSERT_EQ(written, 352);
  make_layout(d, srcs, tgts, oracle, R"(, "counts": {"all": 1092, "links": 352, "non_links": 740})");
  const auto tb = load_testbed(d / "manifest.json");
  EXPECT_EQ(tb.counts(), (TestbedCounts{1092, 352, 740}));
  const auto cands = enumerate_candidates(tb);
  ASSERT_EQ(cands.size(), 1092u);
  std::size_t links = 0;
  for (const auto& c : cands) links += c.is_link;
  EXPECT_EQ(links, 352u);
}

TEST(EnumerateCandidates, OrderedAndLabelled) {
  Testbed tb;
  tb.sources = {Artifact{"b", Role::kSource, "", ""}, Artifact{"a", Role::kSource, "", ""}};
  tb.targets = {Artifact{"y", Role::kTarget, "", ""}, Artifact{"x", Role::kTarget, "", ""}};
  tb.links = {TraceLink{"a", "x"}};
  const auto c = enumerate_candidates(tb);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[0].source_id, "a");
  EXPECT_EQ(c[0].target_id, "x");
  EXPECT_TRUE(c[0].is_link);
  EXPECT_EQ(c[1].target_id, "y");
  EXPECT_EQ(c[2].source_id, "b");
  EXPECT_EQ(c[3].target_id, "y");
  for (std::size_t k = 1; k < 4; ++k) EXPECT_FALSE(c[k].is_link);
  EXPECT_EQ(tb.sources[c[0].source_index].id, "a");
  EXPECT_EQ(tb.targets[c[0].target_index].id, "x");
  EXPECT_EQ(enumerate_candidates(tb), c);
}

TEST(EnumerateCandidates, NoTargetsGivesNothing) {
  Testbed tb;
  tb.sources = {Artifact{"a", Role::kSource, "x", ""}};
  EXPECT_TRUE(enumerate_candidates(tb).empty());
}

TEST(EnumerateCandidates, LabelsRoundTripTheLinkSet) {
  const auto tb = generate_synthetic(3, 7, 11, 0.5);
  std::set<TraceLink> labelled;
  for (const auto& c : enumerate_candidates(tb))
    if (c.is_link) labelled.insert({c.source_id, c.target_id});
  EXPECT_EQ(labelled, tb.links);
}

TEST(Synthetic, DeterministicBySeed) {
  const auto a = generate_synthetic(7, 5, 9, 0.5);
  const auto b = generate_synthetic(7, 5, 9, 0.5);
  ASSERT_EQ(a.targets.size(), b.targets.size());
  for (std::size_t i = 0; i < a.sources.size(); ++i) EXPECT_EQ(a.sources[i].raw_text, b.sources[i].raw_text);
  for (std::size_t j = 0; j < a.targets.size(); ++j) EXPECT_EQ(a.targets[j].raw_text, b.targets[j].raw_text);
  EXPECT_EQ(a.links, b.links);
  const auto c = generate_synthetic(8, 5, 9, 0.5);
  EXPECT_NE(a.sources[0].raw_text, c.sources[0].raw_text);
}

TEST(Synthetic, FullOverlapCopiesTheMultiset) {
  const auto tb = generate_synthetic(1, 1, 1, 1.0);
  ASSERT_EQ(tb.links.size(), 1u);
  EXPECT_EQ(count_tokens(conventional_tokenize(tb.sources[0].raw_text)),
            count_tokens(conventional_tokenize(tb.targets[0].raw_text)));
}

TEST(Synthetic, ZeroOverlapIsDisjointAndSourcesNeverShare) {
  const auto tb = generate_synthetic(5, 4, 8, 0.0);
  auto vocab = [](const Artifact& a) {
    const auto t = conventional_tokenize(a.raw_text);
    return std::set<std::string>(t.begin(), t.end());
  };
  for (const auto& l : tb.links) {
    const Artifact* s = nullptr;
    const Artifact* t = nullptr;
    for (const auto& a : tb.sources)
      if (a.id == l.source_id) s = &a;
    for (const auto& a : tb.targets)
      if (a.id == l.target_id) t = &a;
    ASSERT_TRUE(s && t);
    for (const auto& w : vocab(*t)) EXPECT_EQ(vocab(*s).count(w), 0u);
  }
  for (std::size_t i = 0; i < tb.sources.size(); ++i)
    for (std::size_t k = i + 1; k < tb.sources.size(); ++k)
      for (const auto& w : vocab(tb.sources[i])) EXPECT_EQ(vocab(tb.sources[k]).count(w), 0u);
}

TEST(Synthetic, LinkStructure) {
  const auto tb = generate_synthetic(2, 3, 7, 0.5);
  EXPECT_EQ(tb.counts(), (TestbedCounts{21, 7, 14}));
  for (std::size_t j = 0; j < tb.targets.size(); ++j)
    EXPECT_TRUE(tb.is_link(tb.sources[j % 3].id, tb.targets[j].id));
}

TEST(Synthetic, RejectsBadParameters) {
  EXPECT_THROW(generate_synthetic(1, 0, 3, 0.5), Error);
  EXPECT_THROW(generate_synthetic(1, 3, 3, 1.5), Error);
  EXPECT_THROW(generate_synthetic(1, 3, 3, -0.1), Error);
}

TEST(SaveTestbed, RoundTripsThroughLoad) {
  TempDir d;
  const auto tb = generate_synthetic(11, 4, 6, 0.75);
  const auto manifest = save_testbed(tb, d.path() / "out");
  const auto back = load_testbed(manifest);
  EXPECT_EQ(back.name, tb.name);
  EXPECT_EQ(back.links, tb.links);
  ASSERT_EQ(back.sources.size(), tb.sources.size());
  for (std::size_t i = 0; i < tb.sources.size(); ++i) {
    EXPECT_EQ(back.sources[i].id, tb.sources[i].id);
    EXPECT_EQ(back.sources[i].raw_text, tb.sources[i].raw_text);
  }
}

TEST(Artifact, EmptyTextIsFlagged) {
  Testbed tb;
  tb.sources = {Artifact{"a", Role::kSource, " \n\t", ""}};
  tb.targets = {Artifact{"x", Role::kTarget, "words here", ""}};
  const auto e = tb.empty_artifacts();
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0]->id, "a");
}
