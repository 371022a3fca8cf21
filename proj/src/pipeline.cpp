#include "tracex/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "tracex/error.hpp"
#include "tracex/semantics.hpp"

namespace tracex {

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::string join(const TokenSeq& seq) {
  std::string out;
  for (const auto& t : seq) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

bool finite_or_unset(const std::optional<double>& v) { return !v || std::isfinite(*v); }

void check_finite(const PairRecord& r) {
  const auto& i = r.info;
  const auto& d = r.dist;
  const bool ok = finite_or_unset(i.h_x) && finite_or_unset(i.h_y) && finite_or_unset(i.h_pool) &&
                  finite_or_unset(i.mi) && finite_or_unset(i.loss) && finite_or_unset(i.noise) &&
                  std::isfinite(i.si) && std::isfinite(i.sx) && std::isfinite(i.overlap) &&
                  finite_or_unset(d.wmd) && finite_or_unset(d.scm) && finite_or_unset(d.cos) &&
                  finite_or_unset(d.euc);
  if (!ok) throw NumericError("non-finite value for pair " + r.pair.source_id + " -> " + r.pair.target_id);
}

std::vector<double> to_double(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

std::string_view preproc_name(Preproc p) {
  switch (p) {
    case Preproc::kConventional: return "conventional";
    case Preproc::kBpe8k: return "bpe8k";
    case Preproc::kBpe32k: return "bpe32k";
  }
  return "?";
}

Preproc preproc_from_name(std::string_view s) {
  if (s == "conventional") return Preproc::kConventional;
  if (s == "bpe8k") return Preproc::kBpe8k;
  if (s == "bpe32k") return Preproc::kBpe32k;
  throw ConfigError("unknown preprocessing '" + std::string(s) + "' (conventional, bpe8k, bpe32k)");
}

std::string_view vectorizer_name(Vectorizer v) {
  switch (v) {
    case Vectorizer::kSkipgram: return "skipgram";
    case Vectorizer::kPvdbow: return "pvdbow";
    case Vectorizer::kBoth: return "both";
    case Vectorizer::kNone: return "none";
  }
  return "?";
}

Vectorizer vectorizer_from_name(std::string_view s) {
  if (s == "skipgram") return Vectorizer::kSkipgram;
  if (s == "pvdbow") return Vectorizer::kPvdbow;
  if (s == "both") return Vectorizer::kBoth;
  if (s == "none") return Vectorizer::kNone;
  throw ConfigError("unknown vectorizer '" + std::string(s) + "' (skipgram, pvdbow, both, none)");
}

std::size_t bpe_vocab_size(Preproc p) {
  switch (p) {
    case Preproc::kBpe8k: return 8000;
    case Preproc::kBpe32k: return 32000;
    default: return 0;
  }
}

void RunConfig::validate() const {
  train.validate();
  orphans.validate();
  if (case_k == 0) throw ConfigError("case_k must be at least 1");
  if (bpe_model && preproc == Preproc::kConventional) {
    throw ConfigError("a BPE model was given but preprocessing is conventional");
  }
  if (embeddings && vectorizer == Vectorizer::kPvdbow) {
    throw ConfigError("loaded word embeddings are unused by the pvdbow vectorizer");
  }
}

RunConfig run_config_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "manifests", "preproc", "bpe_model", "vectorizer", "embeddings", "dim",       "window",  "negatives",
      "epochs",    "learning_rate", "min_count", "seed", "out_dir",    "experiment", "orphan_quantile",
      "orphan_metric", "case_k", "threads", "lowercase", "split_camel", "min_len", "version"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  }
  RunConfig c;
  for (const auto& m : get_or<std::vector<std::string>>(j, "manifests", {})) c.manifests.emplace_back(m);
  c.preproc = preproc_from_name(get_or<std::string>(j, "preproc", "conventional"));
  if (auto p = get_or<std::string>(j, "bpe_model", ""); !p.empty()) c.bpe_model = p;
  c.vectorizer = vectorizer_from_name(get_or<std::string>(j, "vectorizer", "skipgram"));
  if (auto p = get_or<std::string>(j, "embeddings", ""); !p.empty()) c.embeddings = p;
  auto non_negative = [&](const char* key, std::size_t fallback) {
    const auto v = get_or<long long>(j, key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string("config key '") + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  };
  c.train.dim = non_negative("dim", c.train.dim);
  c.train.window = non_negative("window", c.train.window);
  c.train.negatives = non_negative("negatives", c.train.negatives);
  c.train.epochs = non_negative("epochs", c.train.epochs);
  c.train.min_count = non_negative("min_count", c.train.min_count);
  c.train.learning_rate = get_or<double>(j, "learning_rate", c.train.learning_rate);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir.string());
  c.experiment = get_or<std::string>(j, "experiment", c.experiment);
  c.orphans.quantile = get_or<double>(j, "orphan_quantile", c.orphans.quantile);
  const auto om = get_or<std::string>(j, "orphan_metric", "mi");
  if (om != "mi" && om != "si") throw ConfigError("orphan_metric must be mi or si");
  c.orphans.metric = om == "mi" ? Metric::kMi : Metric::kSi;
  c.case_k = non_negative("case_k", c.case_k);
  c.threads = non_negative("threads", 0);
  c.tokenizer.lowercase = get_or<bool>(j, "lowercase", true);
  c.tokenizer.split_camel = get_or<bool>(j, "split_camel", true);
  c.tokenizer.min_len = non_negative("min_len", c.tokenizer.min_len);
  c.train.seed = c.seed;
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  ojson j;
  std::vector<std::string> manifests;
  for (const auto& m : c.manifests) manifests.push_back(m.generic_string());
  j["manifests"] = manifests;
  j["preproc"] = preproc_name(c.preproc);
  j["bpe_model"] = c.bpe_model ? ojson(c.bpe_model->generic_string()) : ojson(nullptr);
  j["vectorizer"] = vectorizer_name(c.vectorizer);
  j["embeddings"] = c.embeddings ? ojson(c.embeddings->generic_string()) : ojson(nullptr);
  j["dim"] = c.train.dim;
  j["window"] = c.train.window;
  j["negatives"] = c.train.negatives;
  j["epochs"] = c.train.epochs;
  j["learning_rate"] = c.train.learning_rate;
  j["min_count"] = c.train.min_count;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir.generic_string();
  j["experiment"] = c.experiment;
  j["orphan_quantile"] = c.orphans.quantile;
  j["orphan_metric"] = metric_name(c.orphans.metric);
  j["case_k"] = c.case_k;
  j["lowercase"] = c.tokenizer.lowercase;
  j["split_camel"] = c.tokenizer.split_camel;
  j["min_len"] = c.tokenizer.min_len;
  return j.dump(2);
}

std::size_t resolve_threads(std::size_t requested) {
  if (const char* env = std::getenv("TRACEX_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v <= 0) throw ConfigError("TRACEX_THREADS must be a positive integer, got '" + std::string(env) + "'");
    return static_cast<std::size_t>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

PreparedCorpus prepare_corpus(const Testbed& tb, const RunConfig& cfg) {
  PreparedCorpus pc;
  for (const auto& a : tb.sources) pc.sources.push_back(conventional_tokenize(a.raw_text, cfg.tokenizer));
  for (const auto& a : tb.targets) pc.targets.push_back(conventional_tokenize(a.raw_text, cfg.tokenizer));
  if (cfg.preproc == Preproc::kConventional) return pc;

  if (cfg.bpe_model) {
    pc.bpe = load_bpe(*cfg.bpe_model);
  } else {
    std::vector<TokenSeq> corpus = pc.sources;
    corpus.insert(corpus.end(), pc.targets.begin(), pc.targets.end());
    pc.bpe = train_bpe(corpus, bpe_vocab_size(cfg.preproc));
  }
  for (auto* side : {&pc.sources, &pc.targets})
    for (auto& seq : *side) seq = bpe_encode(*pc.bpe, join(seq));
  return pc;
}

AnalysisResult analyze_testbed(const Testbed& tb, const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.train.seed = cfg.seed;
  cfg.validate();

  AnalysisResult res;
  res.testbed = tb.name;
  res.counts = tb.counts();
  for (const auto* a : tb.empty_artifacts()) res.empty_artifacts.push_back(a->id);

  const auto pc = prepare_corpus(tb, cfg);
  if (pc.bpe) {
    res.bpe_merges = pc.bpe->merges.size();
    res.bpe_stopped_early = pc.bpe->stopped_early();
  }

  std::vector<TokenCounts> src_counts, tgt_counts;
  for (const auto& s : pc.sources) src_counts.push_back(count_tokens(s));
  for (const auto& s : pc.targets) tgt_counts.push_back(count_tokens(s));

  const bool want_words = cfg.vectorizer == Vectorizer::kSkipgram || cfg.vectorizer == Vectorizer::kBoth;
  const bool want_docs = cfg.vectorizer == Vectorizer::kPvdbow || cfg.vectorizer == Vectorizer::kBoth;

  std::optional<EmbeddingMatrix> words;
  if (want_words) {
    if (cfg.embeddings) {
      words = load_embeddings(*cfg.embeddings);
    } else {
      std::vector<TokenSeq> corpus = pc.sources;
      corpus.insert(corpus.end(), pc.targets.begin(), pc.targets.end());
      words = train_skipgram(corpus, cfg.train);
    }
    res.embedding_vocab = words->size();
  }

  // Per-artifact caches: word bags for WMD/SCM, one document vector for COS/EUC.
  std::vector<std::unique_ptr<EmbeddedBag>> src_bags, tgt_bags;
  std::vector<std::optional<std::vector<double>>> src_vecs(tb.sources.size()), tgt_vecs(tb.targets.size());
  if (words) {
    for (const auto& c : src_counts) src_bags.push_back(std::make_unique<EmbeddedBag>(c, *words));
    for (const auto& c : tgt_counts) tgt_bags.push_back(std::make_unique<EmbeddedBag>(c, *words));
  }
  if (want_docs) {
    std::vector<std::pair<std::string, TokenSeq>> docs;
    for (std::size_t i = 0; i < tb.sources.size(); ++i) docs.emplace_back("s:" + tb.sources[i].id, pc.sources[i]);
    for (std::size_t i = 0; i < tb.targets.size(); ++i) docs.emplace_back("t:" + tb.targets[i].id, pc.targets[i]);
    const auto dv = train_pvdbow(docs, cfg.train);
    for (std::size_t i = 0; i < tb.sources.size(); ++i)
      if (dv.trained[i]) src_vecs[i] = to_double(dv.vector(i));
    for (std::size_t i = 0; i < tb.targets.size(); ++i) {
      const std::size_t d = tb.sources.size() + i;
      if (dv.trained[d]) tgt_vecs[i] = to_double(dv.vector(d));
    }
  } else if (words) {
    for (std::size_t i = 0; i < tb.sources.size(); ++i)
      if (!src_bags[i]->empty()) src_vecs[i] = mean_doc_vector(src_counts[i], *words).values;
    for (std::size_t i = 0; i < tb.targets.size(); ++i)
      if (!tgt_bags[i]->empty()) tgt_vecs[i] = mean_doc_vector(tgt_counts[i], *words).values;
  }

  const auto candidates = enumerate_candidates(tb);
  res.records.resize(candidates.size());
  const std::size_t workers = std::min<std::size_t>(resolve_threads(cfg.threads), std::max<std::size_t>(1, candidates.size()));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t k = w; k < candidates.size(); k += workers) {
        const auto& c = candidates[k];
        PairRecord& r = res.records[k];
        r.pair = c;
        r.info = info_record(src_counts[c.source_index], tgt_counts[c.target_index]);
        PairRepresentation rep;
        if (words) {
          rep.words = &*words;
          rep.source_bag = src_bags[c.source_index].get();
          rep.target_bag = tgt_bags[c.target_index].get();
        }
        if (src_vecs[c.source_index] && tgt_vecs[c.target_index]) {
          rep.source_vec = std::span<const double>(*src_vecs[c.source_index]);
          rep.target_vec = std::span<const double>(*tgt_vecs[c.target_index]);
        }
        r.dist = distance_record(rep);
        check_finite(r);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& r : res.records) {
    if (!r.info.complete()) ++res.undefined.info;
    if (!r.dist.wmd) ++res.undefined.wmd;
    if (!r.dist.scm) ++res.undefined.scm;
    if (!r.dist.cos) ++res.undefined.cos;
    if (!r.dist.euc) ++res.undefined.euc;
    if (r.dist.wmd_relaxed) ++res.relaxed_wmd;
  }
  return res;
}

void write_analysis(const std::filesystem::path& dir, const AnalysisResult& result, const RunConfig& cfg) {
  ReportOptions opt;
  opt.experiment = cfg.experiment;
  opt.testbed = result.testbed;
  opt.case_k = cfg.case_k;
  opt.orphans = cfg.orphans;
  emit_report(dir, result.records, opt);

  ojson run;
  run["tool"] = "tracex";
  run["version"] = kVersion;
  run["config"] = ojson::parse(run_config_to_json(cfg));
  run["testbed"] = result.testbed;
  run["counts"] = {{"all", result.counts.all}, {"links", result.counts.links}, {"non_links", result.counts.non_links}};
  run["empty_artifacts"] = result.empty_artifacts;
  run["undefined_pairs"] = {{"info", result.undefined.info},
                            {"wmd", result.undefined.wmd},
                            {"scm", result.undefined.scm},
                            {"cos", result.undefined.cos},
                            {"euc", result.undefined.euc}};
  run["relaxed_wmd_pairs"] = result.relaxed_wmd;
  run["bpe"] = {{"merges", result.bpe_merges}, {"stopped_early", result.bpe_stopped_early}};
  run["embedding_vocab"] = result.embedding_vocab;
  write_text_file(dir / "run.json", run.dump(2) + "\n");
}

std::vector<AnalysisResult> run_analyze(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  if (cfg.manifests.empty()) throw ConfigError("no testbed manifest given");
  std::vector<AnalysisResult> out;
  for (const auto& m : cfg.manifests) {
    const Testbed tb = load_testbed(m);
    auto res = analyze_testbed(tb, cfg);
    if (res.testbed.empty()) res.testbed = m.stem().string();
    const auto dir = cfg.out_dir / res.testbed;
    write_analysis(dir, res, cfg);
    if (log) {
      *log << "[" << res.testbed << "] pairs=" << res.records.size() << " links=" << res.counts.links
           << " undefined: info=" << res.undefined.info << " wmd=" << res.undefined.wmd
           << " scm=" << res.undefined.scm << " cos=" << res.undefined.cos << " euc=" << res.undefined.euc;
      if (res.relaxed_wmd) *log << " relaxed_wmd=" << res.relaxed_wmd;
      *log << "\n";
      if (!res.empty_artifacts.empty()) {
        *log << "[" << res.testbed << "] warning: " << res.empty_artifacts.size() << " empty artifact(s)\n";
      }
      if (res.bpe_stopped_early) {
        *log << "[" << res.testbed << "] warning: BPE training stopped early after " << res.bpe_merges
             << " merges (no pair occurs twice)\n";
      }
    }
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace tracex
