#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracex/corpus.hpp"
#include "tracex/embeddings.hpp"
#include "tracex/records.hpp"
#include "tracex/report.hpp"
#include "tracex/tokenize.hpp"

namespace tracex {

enum class Preproc { kConventional, kBpe8k, kBpe32k };
/// skipgram feeds WMD, SCM and mean-vector COS/EUC; pvdbow feeds COS/EUC from
/// paragraph vectors; both combines the word metrics of the first with the
/// document metrics of the second.
enum class Vectorizer { kSkipgram, kPvdbow, kBoth, kNone };

std::string_view preproc_name(Preproc p);
Preproc preproc_from_name(std::string_view s);
std::string_view vectorizer_name(Vectorizer v);
Vectorizer vectorizer_from_name(std::string_view s);
std::size_t bpe_vocab_size(Preproc p);  // 0 for conventional

struct RunConfig {
  std::vector<std::filesystem::path> manifests;
  Preproc preproc = Preproc::kConventional;
  std::optional<std::filesystem::path> bpe_model;   // trained on the testbed when unset
  Vectorizer vectorizer = Vectorizer::kSkipgram;
  std::optional<std::filesystem::path> embeddings;  // word vectors; trained when unset
  TrainConfig train;                                // train.seed is overwritten by seed
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "reports";
  std::string experiment = "EX";
  OrphanPolicy orphans;
  std::size_t case_k = 10;
  std::size_t threads = 0;  // TRACEX_THREADS wins when set; 0 means hardware concurrency
  TokenizerConfig tokenizer;

  void validate() const;
};

/// Reads the keys of run_config_to_json; missing keys keep their defaults.
/// Throws ConfigError on unknown keys or bad values.
RunConfig run_config_from_json(std::string_view json_text);
/// Deterministic description of the configuration (no thread count).
std::string run_config_to_json(const RunConfig& cfg);

/// Worker count: TRACEX_THREADS when set, else `requested` if non-zero, else
/// hardware concurrency. Throws ConfigError when TRACEX_THREADS is not a
/// positive integer.
std::size_t resolve_threads(std::size_t requested);

struct UndefinedCounts {
  std::size_t info = 0;  // pairs with an empty side
  std::size_t wmd = 0;
  std::size_t scm = 0;
  std::size_t cos = 0;
  std::size_t euc = 0;
};

struct AnalysisResult {
  std::string testbed;
  TestbedCounts counts;
  std::vector<std::string> empty_artifacts;
  std::vector<PairRecord> records;  // enumerate_candidates order
  UndefinedCounts undefined;
  std::size_t relaxed_wmd = 0;
  std::size_t bpe_merges = 0;
  bool bpe_stopped_early = false;
  std::size_t embedding_vocab = 0;
};

/// Tokenizes every artifact once, fits the requested models, and computes
/// every candidate pair in parallel. Throws NumericError if a value is not
/// finite.
AnalysisResult analyze_testbed(const Testbed& tb, const RunConfig& cfg);

/// Writes the report tree for one analysed testbed into `dir`, plus run.json.
void write_analysis(const std::filesystem::path& dir, const AnalysisResult& result, const RunConfig& cfg);

/// Loads each manifest, analyses it and writes `<out_dir>/<testbed name>/`.
/// A short per-testbed summary (undefined counts, warnings) goes to `log`.
std::vector<AnalysisResult> run_analyze(const RunConfig& cfg, std::ostream* log);

/// Token streams for every artifact under the chosen preprocessing. The BPE
/// model is trained on the conventional streams unless provided.
struct PreparedCorpus {
  std::vector<TokenSeq> sources;
  std::vector<TokenSeq> targets;
  std::optional<BpeModel> bpe;
};
PreparedCorpus prepare_corpus(const Testbed& tb, const RunConfig& cfg);

}  // namespace tracex
