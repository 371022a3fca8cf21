#include "tracex/tracex.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tracex/corpus.hpp"
#include "tracex/error.hpp"
#include "tracex/evaluation.hpp"
#include "tracex/infotheory.hpp"
#include "tracex/pipeline.hpp"
#include "tracex/report.hpp"
#include "tracex/tokenize.hpp"

struct tracex_testbed {
  tracex::Testbed tb;
};

struct tracex_result {
  tracex::AnalysisResult result;
  tracex::RunConfig config;
};

namespace {

using ojson = nlohmann::ordered_json;

thread_local std::string g_last_error;

template <typename Fn>
tracex_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TRACEX_OK;
  } catch (const tracex::Error& e) {
    g_last_error = e.what();
    return static_cast<tracex_status>(static_cast<int>(e.kind()));
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return TRACEX_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TRACEX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TRACEX_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw tracex::ConfigError(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tracex::RunConfig config_from(const char* json) {
  if (!json || !*json) {
    tracex::RunConfig c;
    c.train.seed = c.seed;
    return c;
  }
  return tracex::run_config_from_json(json);
}

tracex::Metric metric_arg(const char* name) {
  require(name, "metric");
  auto m = tracex::metric_from_name(name);
  if (!m) throw tracex::ConfigError(std::string("unknown metric '") + name + "'");
  return *m;
}

std::vector<tracex::TokenSeq> read_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<tracex::TokenSeq> docs;
  if (!fs::exists(path)) throw tracex::DataError("corpus path does not exist: " + path.string());
  if (fs::is_regular_file(path) && path.extension() == ".json") {
    const auto tb = tracex::load_testbed(path);
    for (const auto* side : {&tb.sources, &tb.targets})
      for (const auto& a : *side) docs.push_back(tracex::conventional_tokenize(a.raw_text));
    return docs;
  }
  auto read_file = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw tracex::DataError("cannot read " + p.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  };
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back(tracex::conventional_tokenize(read_file(f)));
    return docs;
  }
  std::istringstream lines(read_file(path));
  std::string line;
  while (std::getline(lines, line)) docs.push_back(tracex::conventional_tokenize(line));
  return docs;
}

ojson result_summary(const tracex::AnalysisResult& r) {
  return ojson{{"testbed", r.testbed},
               {"pairs", r.records.size()},
               {"links", r.counts.links},
               {"empty_artifacts", r.empty_artifacts},
               {"undefined",
                {{"info", r.undefined.info},
                 {"wmd", r.undefined.wmd},
                 {"scm", r.undefined.scm},
                 {"cos", r.undefined.cos},
                 {"euc", r.undefined.euc}}},
               {"relaxed_wmd_pairs", r.relaxed_wmd},
               {"bpe", {{"merges", r.bpe_merges}, {"stopped_early", r.bpe_stopped_early}}},
               {"embedding_vocab", r.embedding_vocab}};
}

}  // namespace

extern "C" {

const char* tracex_version(void) { return "0.1.0"; }

const char* tracex_last_error(void) { return g_last_error.c_str(); }

void tracex_string_free(char* s) { std::free(s); }

tracex_status tracex_testbed_load(const char* manifest_path, tracex_testbed** out) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out, "out");
    *out = new tracex_testbed{tracex::load_testbed(manifest_path)};
  });
}

tracex_status tracex_testbed_synthesize(uint64_t seed, size_t n_sources, size_t n_targets, double overlap,
                                        tracex_testbed** out) {
  return guarded([&] {
    require(out, "out");
    *out = new tracex_testbed{tracex::generate_synthetic(seed, n_sources, n_targets, overlap)};
  });
}

tracex_status tracex_testbed_save(const tracex_testbed* tb, const char* dir) {
  return guarded([&] {
    require(tb, "testbed");
    require(dir, "dir");
    tracex::save_testbed(tb->tb, dir);
  });
}

tracex_status tracex_testbed_counts(const tracex_testbed* tb, size_t* all, size_t* links, size_t* non_links) {
  return guarded([&] {
    require(tb, "testbed");
    const auto c = tb->tb.counts();
    if (all) *all = c.all;
    if (links) *links = c.links;
    if (non_links) *non_links = c.non_links;
  });
}

tracex_status tracex_testbed_summary_json(const tracex_testbed* tb, char** out_json) {
  return guarded([&] {
    require(tb, "testbed");
    require(out_json, "out_json");
    const auto& t = tb->tb;
    const auto c = t.counts();
    std::vector<std::string> empties;
    for (const auto* a : t.empty_artifacts()) empties.push_back(a->id);
    ojson j{{"name", t.name},
            {"link_type", t.link_type},
            {"language_tag", t.language_tag},
            {"sources", t.sources.size()},
            {"targets", t.targets.size()},
            {"counts", {{"all", c.all}, {"links", c.links}, {"non_links", c.non_links}}},
            {"empty_artifacts", empties}};
    *out_json = dup_string(j.dump(2));
  });
}

void tracex_testbed_free(tracex_testbed* tb) { delete tb; }

tracex_status tracex_analyze(const tracex_testbed* tb, const char* config_json, tracex_result** out) {
  return guarded([&] {
    require(tb, "testbed");
    require(out, "out");
    auto cfg = config_from(config_json);
    auto res = tracex::analyze_testbed(tb->tb, cfg);
    *out = new tracex_result{std::move(res), std::move(cfg)};
  });
}

tracex_status tracex_result_size(const tracex_result* r, size_t* n) {
  return guarded([&] {
    require(r, "result");
    require(n, "n");
    *n = r->result.records.size();
  });
}

tracex_status tracex_result_pair(const tracex_result* r, size_t index, const char** source_id,
                                 const char** target_id, int* is_link) {
  return guarded([&] {
    require(r, "result");
    if (index >= r->result.records.size()) throw tracex::ConfigError("pair index out of range");
    const auto& p = r->result.records[index].pair;
    if (source_id) *source_id = p.source_id.c_str();
    if (target_id) *target_id = p.target_id.c_str();
    if (is_link) *is_link = p.is_link ? 1 : 0;
  });
}

tracex_status tracex_result_metric(const tracex_result* r, size_t index, const char* metric, double* value,
                                   int* defined) {
  return guarded([&] {
    require(r, "result");
    require(value, "value");
    if (index >= r->result.records.size()) throw tracex::ConfigError("pair index out of range");
    const auto v = tracex::metric_value(r->result.records[index], metric_arg(metric));
    *value = v.value_or(0.0);
    if (defined) *defined = v ? 1 : 0;
  });
}

tracex_status tracex_result_roc_auc(const tracex_result* r, const char* metric, double* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    const auto scored = tracex::scores_for(r->result.records, metric_arg(metric));
    *out = tracex::roc_auc(scored);
  });
}

tracex_status tracex_result_pr_auc(const tracex_result* r, const char* metric, double* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    const auto scored = tracex::scores_for(r->result.records, metric_arg(metric));
    *out = tracex::pr_auc(scored);
  });
}

tracex_status tracex_result_write(const tracex_result* r, const char* config_json, const char* dir) {
  return guarded([&] {
    require(r, "result");
    require(dir, "dir");
    const auto cfg = (config_json && *config_json) ? tracex::run_config_from_json(config_json) : r->config;
    tracex::write_analysis(dir, r->result, cfg);
  });
}

tracex_status tracex_result_summary_json(const tracex_result* r, char** out_json) {
  return guarded([&] {
    require(r, "result");
    require(out_json, "out_json");
    *out_json = dup_string(result_summary(r->result).dump(2));
  });
}

void tracex_result_free(tracex_result* r) { delete r; }

tracex_status tracex_run_analyze(const char* config_json, char** out_summary_json) {
  return guarded([&] {
    require(out_summary_json, "out_summary_json");
    const auto cfg = config_from(config_json);
    std::ostringstream log;
    const auto results = tracex::run_analyze(cfg, &log);
    ojson j;
    j["out_dir"] = cfg.out_dir.generic_string();
    ojson tbs = ojson::array();
    for (const auto& r : results) {
      auto s = result_summary(r);
      s["report_dir"] = (cfg.out_dir / r.testbed).generic_string();
      tbs.push_back(s);
    }
    j["testbeds"] = tbs;
    j["log"] = log.str();
    *out_summary_json = dup_string(j.dump(2));
  });
}

tracex_status tracex_validate(const char* manifest_path, char** out_report_json) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out_report_json, "out_report_json");
    const auto tb = tracex::load_testbed(manifest_path);
    const auto c = tb.counts();
    std::vector<std::string> empties;
    for (const auto* a : tb.empty_artifacts()) empties.push_back(a->id);
    ojson j{{"manifest", manifest_path},
            {"valid", true},
            {"name", tb.name},
            {"sources", tb.sources.size()},
            {"targets", tb.targets.size()},
            {"counts", {{"all", c.all}, {"links", c.links}, {"non_links", c.non_links}}},
            {"empty_artifacts", empties}};
    *out_report_json = dup_string(j.dump(2));
  });
}

tracex_status tracex_train_bpe(const char* corpus_path, size_t vocab_size, const char* out_path,
                               char** out_summary_json) {
  return guarded([&] {
    require(corpus_path, "corpus_path");
    require(out_path, "out_path");
    const auto model = tracex::train_bpe(read_corpus(corpus_path), vocab_size);
    tracex::save_bpe(model, out_path);
    if (out_summary_json) {
      ojson j{{"out", out_path},
              {"target_vocab_size", vocab_size},
              {"alphabet", model.alphabet.size()},
              {"merges", model.merges.size()},
              {"vocab_size", model.alphabet.size() + model.merges.size()},
              {"stopped_early", model.stopped_early()}};
      *out_summary_json = dup_string(j.dump(2));
    }
  });
}

tracex_status tracex_train_embeddings(const char* config_json, const char* out_path, char** out_summary_json) {
  return guarded([&] {
    require(out_path, "out_path");
    auto cfg = config_from(config_json);
    if (cfg.manifests.empty()) throw tracex::ConfigError("no testbed manifest given");
    cfg.train.seed = cfg.seed;
    const auto tb = tracex::load_testbed(cfg.manifests.front());
    const auto pc = tracex::prepare_corpus(tb, cfg);
    std::vector<tracex::TokenSeq> corpus = pc.sources;
    corpus.insert(corpus.end(), pc.targets.begin(), pc.targets.end());
    tracex::TrainStats stats;
    const auto m = tracex::train_skipgram(corpus, cfg.train, &stats);
    tracex::save_embeddings(m, out_path);
    if (out_summary_json) {
      ojson j{{"out", out_path},
              {"vocab", m.size()},
              {"dim", m.dim()},
              {"epoch_loss", stats.epoch_loss}};
      *out_summary_json = dup_string(j.dump(2));
    }
  });
}

tracex_status tracex_cases(const char* pairs_csv_path, double orphan_quantile, const char* orphan_metric,
                           size_t k, char** out_jsonl) {
  return guarded([&] {
    require(pairs_csv_path, "pairs_csv_path");
    require(out_jsonl, "out_jsonl");
    std::ifstream f(pairs_csv_path, std::ios::binary);
    if (!f) throw tracex::DataError(std::string("cannot read ") + pairs_csv_path);
    const auto records = tracex::read_records_csv(f);
    tracex::ReportOptions opt;
    opt.case_k = k;
    if (k == 0) throw tracex::ConfigError("k must be at least 1");
    opt.orphans.quantile = orphan_quantile;
    const std::string om = orphan_metric ? orphan_metric : "mi";
    if (om != "mi" && om != "si") throw tracex::ConfigError("orphan metric must be mi or si");
    opt.orphans.metric = om == "mi" ? tracex::Metric::kMi : tracex::Metric::kSi;
    opt.orphans.validate();
    std::ostringstream s;
    tracex::write_cases_jsonl(s, tracex::all_cases(records, opt));
    *out_jsonl = dup_string(s.str());
  });
}

tracex_status tracex_info_texts(const char* source_text, const char* target_text, tracex_info* out) {
  return guarded([&] {
    require(source_text, "source_text");
    require(target_text, "target_text");
    require(out, "out");
    const auto r = tracex::info_record(tracex::count_tokens(tracex::conventional_tokenize(source_text)),
                                       tracex::count_tokens(tracex::conventional_tokenize(target_text)));
    tracex_info i{};
    i.has_h_x = r.h_x ? 1 : 0;
    i.has_h_y = r.h_y ? 1 : 0;
    i.has_pair = r.complete() ? 1 : 0;
    i.h_x = r.h_x.value_or(0.0);
    i.h_y = r.h_y.value_or(0.0);
    i.h_pool = r.h_pool.value_or(0.0);
    i.mi = r.mi.value_or(0.0);
    i.loss = r.loss.value_or(0.0);
    i.noise = r.noise.value_or(0.0);
    i.d1 = r.d1.value_or(0.0);
    i.d2 = r.d2.value_or(0.0);
    i.d3 = r.d3.value_or(0.0);
    i.si = r.si;
    i.sx = r.sx;
    i.overlap = r.overlap;
    i.null_shared = r.null_shared ? 1 : 0;
    *out = i;
  });
}

}  // extern "C"
