#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tracex {

using TokenSeq = std::vector<std::string>;

/// Token multiset. Zero-count entries only appear in vectors produced by
/// min_shared_counts, which materializes the union vocabulary.
struct TokenCounts {
  std::map<std::string, long> counts;
  long total = 0;

  bool empty() const { return total == 0; }
  long at(const std::string& token) const {
    auto it = counts.find(token);
    return it == counts.end() ? 0 : it->second;
  }
  bool operator==(const TokenCounts&) const = default;
};

struct TokenizerConfig {
  bool lowercase = true;
  bool split_camel = true;
  std::size_t min_len = 2;  // in code points
  std::optional<std::set<std::string>> stopwords;
};

/// Splits on non-alphanumeric runs, then on camelCase and letter/digit
/// boundaries, lowercases, and drops short tokens and stopwords. Bytes >= 0x80
/// are treated as word characters so UTF-8 letters survive intact.
TokenSeq conventional_tokenize(std::string_view text, const TokenizerConfig& cfg = {});

TokenCounts count_tokens(const TokenSeq& seq);

inline constexpr std::string_view kEndOfWord = "</w>";

/// Byte-pair-encoding model with end-of-word-marker merges.
struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;  // in training order
  std::set<std::string> alphabet;                           // base characters
  std::size_t target_vocab_size = 0;

  /// Base characters plus one symbol per merge.
  std::set<std::string> vocab() const;
  /// True when training stopped before reaching target_vocab_size.
  bool stopped_early() const { return alphabet.size() + merges.size() < target_vocab_size; }
};

/// Greedy most-frequent-adjacent-pair training over word frequencies. The
/// vocabulary counts base characters plus merged symbols; a word's last
/// character carries the `</w>` marker. Ties go to the lexicographically
/// smallest pair. Stops at vocab_size or when no pair occurs at least twice.
BpeModel train_bpe(const std::vector<TokenSeq>& corpus, std::size_t vocab_size);

/// Whitespace-splits `text` and encodes each word with the model's merges.
TokenSeq bpe_encode(const BpeModel& model, std::string_view text);

/// Inverse of bpe_encode up to whitespace normalization.
std::string bpe_decode(const TokenSeq& tokens);

std::string bpe_to_json(const BpeModel& model);
BpeModel bpe_from_json(std::string_view json_text);
void save_bpe(const BpeModel& model, const std::filesystem::path& path);
BpeModel load_bpe(const std::filesystem::path& path);

/// Splits UTF-8 text into code points; invalid bytes become single-byte units.
std::vector<std::string> utf8_chars(std::string_view word);

}  // namespace tracex
