// Acceptance runner: one PASS/FAIL/SKIP line per criterion; exits non-zero
// when a gating criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tracex/corpus.hpp"
#include "tracex/evaluation.hpp"
#include "tracex/infotheory.hpp"
#include "tracex/pipeline.hpp"
#include "tracex/semantics.hpp"
#include "tracex/tokenize.hpp"
#include "tracex/transport.hpp"

namespace fs = std::filesystem;
using namespace tracex;

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string header_of(const fs::path& p) {
  const auto text = read_file(p);
  return text.substr(0, text.find('\n'));
}

TokenCounts random_counts(std::mt19937_64& rng, const std::string& prefix, std::size_t vocab) {
  TokenCounts c;
  while (c.total == 0) {
    c = {};
    for (std::size_t k = 0; k < vocab; ++k) {
      const long n = static_cast<long>(rng() % 4 == 0 ? 0 : rng() % 25);
      if (n > 0) c.counts[prefix + std::to_string(k)] = n, c.total += n;
    }
  }
  return c;
}

Outcome identity_fixture() {
  const auto t0 = Clock::now();
  std::ifstream in(fs::path(TRACEX_FIXTURES) / "published_information.csv");
  if (!in) return {Verdict::kFail, "fixture file missing"};
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  double worst = 0.0;
  std::string worst_row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) return {Verdict::kFail, "malformed fixture row: " + line};
    const double hx = std::stod(f[2]), hy = std::stod(f[3]), d1 = std::stod(f[4]), noise = std::stod(f[5]),
                 d2 = std::stod(f[6]), loss = std::stod(f[7]), d3 = std::stod(f[8]), mi = std::stod(f[9]);
    const double errs[] = {std::abs(mi + noise - hx), std::abs(mi + loss - hy), std::abs(std::abs(d1) - std::abs(hy - hx)),
                           std::abs(d2 - (hy - noise)), std::abs(d3 - (hx - loss))};
    for (double e : errs) {
      if (e > worst) {
        worst = e;
        worst_row = f[0] + "/" + f[1];
      }
    }
    ++rows;
  }
  const double elapsed = seconds_since(t0);
  const bool ok = rows == 13 && worst <= 0.03 + 1e-12 && elapsed < 1.0;
  return {ok ? Verdict::kPass : Verdict::kFail, std::to_string(rows) + " rows, max deviation " + fmt(worst, 3) +
                                                    (worst_row.empty() ? "" : " (" + worst_row + ")") + ", " +
                                                    fmt(elapsed, 3) + " s"};
}

Outcome worked_example() {
  const auto toks = conventional_tokenize("B dtimeout");
  const double h = entropy(count_tokens(toks));
  const bool ok = toks == TokenSeq{"dtimeout"} && h == 0.0;
  return {ok ? Verdict::kPass : Verdict::kFail, "tokens=" + std::to_string(toks.size()) + ", H=" + fmt(h, 6)};
}

Outcome snippet_calibration() {
  const std::string snippet =
      "import sys\nimport traceback\n\ndef fireException(message):\n    try:\n"
      "        with open(\"buddy_script_error.txt\",\"w\") as file:\n        file.write(str(message))\n"
      "        print(message)\n        traceback.print_exc()\n        sys.exit(-1)\n    except IOError:\n"
      "        traceback.print_exc()\n        sys.exit(-1)\n";
  const double h = entropy(count_tokens(conventional_tokenize(snippet)));
  const bool ok = std::abs(h - 4.16) <= 0.5;
  return {ok ? Verdict::kPass : Verdict::kFail, "H(y)=" + fmt(h, 3) + " vs 4.16 +/- 0.5 (non-gating)"};
}

Outcome msi_example() {
  TokenCounts a, b;
  a.counts = {{"for", 14}, {"if", 3}, {"return", 10}};
  a.total = 27;
  b.counts = {{"for", 10}, {"return", 20}};
  b.total = 30;
  const auto m = min_shared_counts(a, b);
  const double si = msi_entropy(a, b), sx = msi_extropy(a, b);
  const bool vec_ok = m.counts == std::map<std::string, long>{{"for", 10}, {"if", 0}, {"return", 10}};
  const bool ok = vec_ok && si == 1.0 && sx == si;
  return {ok ? Verdict::kPass : Verdict::kFail,
          std::string("min vector ") + (vec_ok ? "matches" : "differs") + ", Si=" + fmt(si, 17) + ", Sx=" + fmt(sx, 17)};
}

Outcome property_suites() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2023);
  std::size_t failures = 0;
  constexpr int kCases = 10000;
  for (int i = 0; i < kCases; ++i) {
    const auto c = random_counts(rng, "t", 1 + rng() % 12);
    const double h = entropy(c);
    if (h < 0.0 || h > std::log2(static_cast<double>(TokenDistribution(c).support_size())) + 1e-12) ++failures;
  }
  for (int i = 0; i < kCases; ++i) {
    const auto a = random_counts(rng, "t", 1 + rng() % 10), b = random_counts(rng, "t", 1 + rng() % 10);
    const auto r = info_record(a, b);
    if (std::abs(*r.mi - (*r.h_x + *r.h_y - *r.h_pool)) > 1e-9) ++failures;
    if (std::abs(*r.mi + *r.loss - *r.h_x) > 1e-9) ++failures;
    if (std::abs(*r.mi + *r.noise - *r.h_y) > 1e-9) ++failures;
  }
  for (int i = 0; i < kCases; ++i) {
    const auto a = random_counts(rng, "t", 1 + rng() % 10), b = random_counts(rng, "t", 1 + rng() % 10);
    if (std::abs(pooled_mutual_information(a, b) - pooled_mutual_information(b, a)) > 1e-12) ++failures;
    if (!(min_shared_counts(a, b) == min_shared_counts(b, a))) ++failures;
  }
  for (int i = 0; i < kCases; ++i) {
    const auto a = random_counts(rng, "a", 1 + rng() % 10), b = random_counts(rng, "b", 1 + rng() % 10);
    const double wa = static_cast<double>(a.total) / static_cast<double>(a.total + b.total);
    const double hb = wa >= 1.0 ? 0.0 : -wa * std::log2(wa) - (1 - wa) * std::log2(1 - wa);
    if (std::abs(entropy(pool(a, b)) - (wa * entropy(a) + (1 - wa) * entropy(b) + hb)) > 1e-9) ++failures;
  }
  const double elapsed = seconds_since(t0);
  const bool ok = failures == 0 && elapsed < 30.0;
  return {ok ? Verdict::kPass : Verdict::kFail, "4 suites x " + std::to_string(kCases) + " inputs, " +
                                                    std::to_string(failures) + " violations, " + fmt(elapsed, 2) + " s"};
}

Outcome transport_oracle() {
  std::mt19937_64 rng(55);
  std::normal_distribution<float> g(0.0f, 1.0f);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 1 + rng() % 5, vocab = 12;
    std::vector<std::string> names;
    std::vector<float> data;
    for (std::size_t i = 0; i < vocab; ++i) {
      names.push_back("w" + std::to_string(i));
      for (std::size_t k = 0; k < dim; ++k) data.push_back(g(rng));
    }
    const EmbeddingMatrix m(names, dim, data);
    auto bag = [&]() {
      TokenCounts c;
      const std::size_t support = 1 + rng() % 5;
      while (c.counts.size() < support) {
        const long n = 1 + static_cast<long>(rng() % 6);
        if (c.counts.emplace("w" + std::to_string(rng() % vocab), n).second) c.total += n;
      }
      return c;
    };
    const auto a = bag(), b = bag();
    std::vector<long> wa, wb;
    std::vector<std::size_t> ra, rb;
    for (const auto& [t, n] : a.counts) wa.push_back(n), ra.push_back(*m.find(t));
    for (const auto& [t, n] : b.counts) wb.push_back(n), rb.push_back(*m.find(t));
    std::vector<double> cost;
    for (auto i : ra)
      for (auto j : rb) cost.push_back(euclidean_distance(m.row(i), m.row(j)));
    worst = std::max(worst, std::abs(wmd(a, b, m)->distance - oracle::normalized_transport(wa, wb, cost)));
  }
  std::size_t below = 0;
  {
    std::vector<std::string> names;
    std::vector<float> data;
    for (int i = 0; i < 40; ++i) {
      names.push_back("w" + std::to_string(i));
      for (int k = 0; k < 8; ++k) data.push_back(g(rng));
    }
    const EmbeddingMatrix m(names, 8, data);
    for (int trial = 0; trial < 10000; ++trial) {
      TokenCounts a, b;
      for (auto* c : {&a, &b}) {
        const std::size_t support = 1 + rng() % 8;
        while (c->counts.size() < support) {
          const long n = 1 + static_cast<long>(rng() % 6);
          if (c->counts.emplace("w" + std::to_string(rng() % 40), n).second) c->total += n;
        }
      }
      const EmbeddedBag ea(a, m), eb(b, m);
      if (wmd(ea, eb, m)->distance < relaxed_wmd(ea, eb, m) - 1e-9) ++below;
    }
  }
  const bool ok = worst <= 1e-6 && below == 0;
  return {ok ? Verdict::kPass : Verdict::kFail, "500 oracle cases, max |diff| " + fmt(worst * 1e9, 3) +
                                                    "e-9; exact<relaxed in " + std::to_string(below) + "/10000"};
}

Outcome roc_oracle() {
  std::mt19937_64 rng(66);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    std::vector<double> pos, neg;
    const int levels = 1 + static_cast<int>(rng() % 40);
    std::vector<ScoredPair> s;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = static_cast<double>(rng() % levels) * 0.37;
      const bool link = k == 0 || (k != 1 && rng() % 3 == 0);
      (link ? pos : neg).push_back(v);
      s.push_back({link, v, true});
    }
    if (roc_auc(s) != oracle::brute_roc(pos, neg)) ++mismatches;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredPair> s;
  for (int k = 0; k < 10000; ++k) s.push_back({k % 4 == 0, u(rng), true});
  std::vector<bool> labels;
  for (const auto& x : s) labels.push_back(x.is_link);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t k = 0; k < s.size(); ++k) s[k].is_link = labels[k];
  const double shuffled = roc_auc(s);
  const bool ok = mismatches == 0 && std::abs(shuffled - 0.5) <= 0.05;
  return {ok ? Verdict::kPass : Verdict::kFail, std::to_string(mismatches) + "/1000 oracle mismatches; shuffled AUC " +
                                                    fmt(shuffled)};
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.train.dim = 16;
  cfg.seed = 7;
  cfg.vectorizer = Vectorizer::kSkipgram;
  const auto high = analyze_testbed(generate_synthetic(11, 30, 30, 0.9), cfg);
  const auto mi = evaluate_scorer(high.records, Metric::kMi).roc_auc;
  const auto wmd_sim = evaluate_scorer(high.records, Metric::kWmdSim).roc_auc;

  auto zero_cfg = cfg;
  zero_cfg.vectorizer = Vectorizer::kNone;
  const auto zero = analyze_testbed(generate_synthetic(11, 30, 30, 0.0), zero_cfg);
  std::size_t planted = 0, bad = 0;
  for (const auto& r : zero.records) {
    if (!r.pair.is_link) continue;
    ++planted;
    if (r.info.si != 0.0 || !r.info.null_shared) ++bad;
  }
  const double elapsed = seconds_since(t0);
  const bool ok = mi && wmd_sim && *mi >= 0.9 && *wmd_sim >= 0.9 && planted > 0 && bad == 0 && elapsed < 120.0;
  return {ok ? Verdict::kPass : Verdict::kFail,
          "overlap 0.9: ROC(MI)=" + (mi ? fmt(*mi) : "n/a") + " ROC(WMD sim)=" + (wmd_sim ? fmt(*wmd_sim) : "n/a") +
              "; overlap 0: " + std::to_string(bad) + "/" + std::to_string(planted) +
              " planted links with shared mass; " + fmt(elapsed, 2) + " s"};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("'") + TRACEX_CLI + "' " + args + " >'" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  return files;
}

Outcome determinism(const fs::path& work, fs::path& report_dir) {
  const auto testbed = work / "synthetic";
  const auto out = work / "reports";
  const auto log = work / "cli.log";
  if (run_cli("synth --seed 21 --sources 12 --targets 20 --overlap 0.7 -o '" + testbed.string() + "'", log) != 0)
    return {Verdict::kFail, "synth failed: " + read_file(log)};
  const std::string analyze = "analyze -m '" + (testbed / "manifest.json").string() +
                              "' --dim 16 --epochs 5 --seed 3 --vectorizer both --experiment EX1 -o '" +
                              out.string() + "'";
  if (run_cli(analyze, log) != 0) return {Verdict::kFail, "first analyze failed: " + read_file(log)};
  const auto first = snapshot(out);
  if (run_cli(analyze, log) != 0) return {Verdict::kFail, "second analyze failed: " + read_file(log)};
  const auto second = snapshot(out);
  for (const auto& e : fs::directory_iterator(out))
    if (e.is_directory()) report_dir = e.path();
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != bytes) ++differing;
  }
  const bool ok = !first.empty() && first.size() == second.size() && differing == 0;
  return {ok ? Verdict::kPass : Verdict::kFail, std::to_string(first.size()) + " files compared, " +
                                                    std::to_string(differing) + " differ"};
}

Outcome shape_conformance(const fs::path& dir) {
  if (dir.empty()) return {Verdict::kFail, "no report directory from the determinism run"};
  std::vector<std::string> problems;
  auto expect_header = [&](const char* file, const std::string& expected) {
    const auto got = header_of(dir / file);
    if (got != expected) problems.push_back(std::string(file) + " header: " + got);
  };
  expect_header("performance.csv",
                "experiment,testbed,WMD_AUC,WMD_ROC,SCM_AUC,SCM_ROC,COS_AUC,COS_ROC,EUC_AUC,EUC_ROC,MI_AUC,MI_ROC,"
                "Si_AUC,Si_ROC,overlap_AUC,overlap_ROC");
  expect_header("information.csv",
                "experiment,testbed,pairs,H(X),H(Y),D1,loss[H_pool-H(Y)],D2,noise[H_pool-H(X)],D3,MI,Si,Sx,"
                "aggregation");
  std::string by_links = "experiment,testbed,links,non_links";
  for (const char* m : {"SCM", "WMD", "COS", "EUC", "H(X)", "H(Y)", "loss[H_pool-H(Y)]", "noise[H_pool-H(X)]", "MI",
                        "Si", "Sx"})
    by_links += std::string(",") + m + "_Link," + m + "_NoL";
  expect_header("by_links.csv", by_links);
  expect_header("correlations.csv", "experiment,testbed,metric_a,metric_b,pearson_r,n");

  const auto corr = read_file(dir / "correlations.csv");
  std::set<std::string> combos;
  std::istringstream in(corr);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = split_csv_line(line);
    if (f.size() >= 4) combos.insert(f[2] + "|" + f[3]);
  }
  for (const char* a : {"wmd_sim", "scm", "cos_sim", "euc"})
    for (const char* b : {"mi", "loss", "noise", "si"})
      if (!combos.count(std::string(a) + "|" + b)) problems.push_back(std::string("missing correlation ") + a + "/" + b);

  for (const char* f : {"pairs.csv", "pairs.jsonl", "cases.jsonl", "scatter_loss.svg", "scatter_noise.svg",
                        "evaluation.json", "run.json"})
    if (!fs::exists(dir / f)) problems.push_back(std::string("missing ") + f);

  if (!problems.empty()) return {Verdict::kFail, problems.front()};
  return {Verdict::kPass,
          "performance/information/by_links/correlations column sets conform; absolute published values are not "
          "reproducible at desk scale"};
}

Outcome public_direction() {
  const char* manifest = std::getenv("TRACEX_COEST_MANIFEST");
  if (!manifest || !*manifest) return {Verdict::kSkip, "TRACEX_COEST_MANIFEST not set (non-gating)"};
  try {
    RunConfig cfg;
    cfg.vectorizer = Vectorizer::kNone;
    const auto r = analyze_testbed(load_testbed(manifest), cfg);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& rec : r.records)
      if (rec.info.d1) sum += *rec.info.d1, ++n;
    if (n == 0) return {Verdict::kFail, "no complete pairs (non-gating)"};
    const double mean = sum / static_cast<double>(n);
    return {mean > 0 ? Verdict::kPass : Verdict::kFail,
            r.testbed + ": mean D1=" + fmt(mean) + " over " + std::to_string(n) + " pairs (non-gating)"};
  } catch (const std::exception& e) {
    return {Verdict::kFail, std::string(e.what()) + " (non-gating)"};
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_work");
  fs::remove_all(work);
  fs::create_directories(work);

  int gating_failures = 0;
  auto report = [&](const std::string& id, bool gating, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::kPass ? "[PASS]" : o.verdict == Verdict::kFail ? "[FAIL]" : "[SKIP]";
    std::cout << tag << " criterion " << id << ": " << o.detail << std::endl;
    if (gating && o.verdict == Verdict::kFail) ++gating_failures;
  };

  fs::path report_dir;
  report("1", true, identity_fixture);
  report("2", true, worked_example);
  report("2b", false, snippet_calibration);
  report("3", true, msi_example);
  report("4", true, property_suites);
  report("5", true, transport_oracle);
  report("6", true, roc_oracle);
  report("7", true, end_to_end);
  report("8", true, [&] { return determinism(work, report_dir); });
  report("9", true, [&] { return shape_conformance(report_dir); });
  report("10", false, public_direction);

  std::cout << (gating_failures ? "acceptance: FAILED (" + std::to_string(gating_failures) + " gating)"
                                : std::string("acceptance: all gating criteria passed"))
            << std::endl;
  return gating_failures ? 1 : 0;
}
