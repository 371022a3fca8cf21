#include "tracex/tokenize.hpp"

#include <algorithm>
#include <limits>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "tracex/error.hpp"

namespace tracex {

namespace {

enum class CharClass { kUpper, kLower, kDigit, kOther };

CharClass classify(unsigned char c) {
  if (c >= 'A' && c <= 'Z') return CharClass::kUpper;
  if (c >= 'a' && c <= 'z') return CharClass::kLower;
  if (c >= '0' && c <= '9') return CharClass::kDigit;
  if (c >= 0x80) return CharClass::kLower;  // UTF-8 lead/continuation bytes
  return CharClass::kOther;
}

bool is_letter(CharClass c) { return c == CharClass::kUpper || c == CharClass::kLower; }

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

// Split positions inside one alphanumeric run.
void split_run(std::string_view run, bool split_camel, std::vector<std::string_view>& out) {
  if (!split_camel) {
    out.push_back(run);
    return;
  }
  std::size_t start = 0;
  for (std::size_t i = 1; i < run.size(); ++i) {
    const auto prev = classify(static_cast<unsigned char>(run[i - 1]));
    const auto cur = classify(static_cast<unsigned char>(run[i]));
    bool cut = false;
    if (prev == CharClass::kLower && cur == CharClass::kUpper) cut = true;  // fireException
    if (prev == CharClass::kUpper && cur == CharClass::kUpper && i + 1 < run.size() &&
        classify(static_cast<unsigned char>(run[i + 1])) == CharClass::kLower &&
        static_cast<unsigned char>(run[i + 1]) < 0x80) {
      cut = true;  // HTTPServer -> HTTP | Server
    }
    if ((is_letter(prev) && cur == CharClass::kDigit) || (prev == CharClass::kDigit && is_letter(cur))) cut = true;
    if (cut) {
      out.push_back(run.substr(start, i - start));
      start = i;
    }
  }
  out.push_back(run.substr(start));
}

}  // namespace

TokenSeq conventional_tokenize(std::string_view text, const TokenizerConfig& cfg) {
  TokenSeq out;
  std::vector<std::string_view> pieces;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && classify(static_cast<unsigned char>(text[i])) == CharClass::kOther) ++i;
    const std::size_t start = i;
    while (i < text.size() && classify(static_cast<unsigned char>(text[i])) != CharClass::kOther) ++i;
    if (i > start) split_run(text.substr(start, i - start), cfg.split_camel, pieces);
  }
  for (auto piece : pieces) {
    if (code_points(piece) < cfg.min_len || piece.empty()) continue;
    std::string tok(piece);
    if (cfg.lowercase) {
      for (auto& c : tok)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (cfg.stopwords && cfg.stopwords->count(tok)) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

TokenCounts count_tokens(const TokenSeq& seq) {
  TokenCounts tc;
  for (const auto& t : seq) ++tc.counts[t];
  tc.total = static_cast<long>(seq.size());
  return tc;
}

std::vector<std::string> utf8_chars(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto c = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    if (i + len > word.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::set<std::string> BpeModel::vocab() const {
  std::set<std::string> v = alphabet;
  for (const auto& [a, b] : merges) v.insert(a + b);
  return v;
}

namespace {

using Pair = std::pair<std::string, std::string>;

struct ByCountThenPair {
  bool operator()(const std::pair<long, Pair>& x, const std::pair<long, Pair>& y) const {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  }
};

std::vector<std::string> initial_symbols(std::string_view word) {
  auto syms = utf8_chars(word);
  if (!syms.empty()) syms.back() += kEndOfWord;
  return syms;
}

bool merge_in_place(std::vector<std::string>& syms, const Pair& p) {
  bool changed = false;
  std::vector<std::string> out;
  out.reserve(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) {
    if (i + 1 < syms.size() && syms[i] == p.first && syms[i + 1] == p.second) {
      out.push_back(syms[i] + syms[i + 1]);
      ++i;
      changed = true;
    } else {
      out.push_back(std::move(syms[i]));
    }
  }
  syms = std::move(out);
  return changed;
}

class PairStats {
 public:
  void add(const Pair& p, long delta) {
    auto it = counts_.find(p);
    const long old = it == counts_.end() ? 0 : it->second;
    if (old > 0) queue_.erase({old, p});
    const long now = old + delta;
    if (now > 0) {
      counts_[p] = now;
      queue_.insert({now, p});
    } else if (it != counts_.end()) {
      counts_.erase(it);
    }
  }
  bool empty() const { return queue_.empty(); }
  const std::pair<long, Pair>& best() const { return *queue_.begin(); }

 private:
  std::map<Pair, long> counts_;
  std::set<std::pair<long, Pair>, ByCountThenPair> queue_;
};

}  // namespace

BpeModel train_bpe(const std::vector<TokenSeq>& corpus, std::size_t vocab_size) {
  std::map<std::string, long> word_freq;
  for (const auto& seq : corpus)
    for (const auto& w : seq)
      if (!w.empty()) ++word_freq[w];

  BpeModel model;
  model.target_vocab_size = vocab_size;
  for (const auto& [w, f] : word_freq)
    for (auto& ch : utf8_chars(w)) model.alphabet.insert(std::move(ch));
  if (vocab_size <= model.alphabet.size()) {
    throw ConfigError("BPE vocab_size " + std::to_string(vocab_size) +
                      " must exceed the base character count " + std::to_string(model.alphabet.size()));
  }

  std::vector<std::vector<std::string>> words;
  std::vector<long> freqs;
  for (const auto& [w, f] : word_freq) {
    words.push_back(initial_symbols(w));
    freqs.push_back(f);
  }

  PairStats stats;
  std::map<Pair, std::set<std::size_t>> where;
  auto account = [&](std::size_t wi, long sign) {
    const auto& s = words[wi];
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      Pair p{s[k], s[k + 1]};
      stats.add(p, sign * freqs[wi]);
      if (sign > 0) where[p].insert(wi);
    }
  };
  for (std::size_t wi = 0; wi < words.size(); ++wi) account(wi, +1);

  while (model.alphabet.size() + model.merges.size() < vocab_size) {
    if (stats.empty() || stats.best().first < 2) break;
    const Pair best = stats.best().second;
    const auto candidates = where[best];
    for (auto wi : candidates) {
      auto probe = words[wi];
      if (!merge_in_place(probe, best)) continue;
      account(wi, -1);
      words[wi] = std::move(probe);
      account(wi, +1);
    }
    where.erase(best);
    model.merges.push_back(best);
  }
  return model;
}

namespace {

class BpeEncoder {
 public:
  explicit BpeEncoder(const BpeModel& model) {
    for (std::size_t r = 0; r < model.merges.size(); ++r) ranks_[model.merges[r]].push_back(r);
  }

  // Lowest pending rank first. Ranks at or below the last applied merge are
  // never revisited, which makes this identical to applying the merge list in
  // training order while skipping merges that cannot fire.
  void encode_word(std::string_view word, TokenSeq& out) const {
    auto syms = initial_symbols(word);
    std::size_t floor = 0;
    while (syms.size() > 1) {
      std::size_t best_rank = std::numeric_limits<std::size_t>::max();
      const Pair* best = nullptr;
      Pair probe;
      for (std::size_t k = 0; k + 1 < syms.size(); ++k) {
        probe.first = syms[k];
        probe.second = syms[k + 1];
        auto it = ranks_.find(probe);
        if (it == ranks_.end()) continue;
        auto r = std::lower_bound(it->second.begin(), it->second.end(), floor);
        if (r != it->second.end() && *r < best_rank) {
          best_rank = *r;
          best = &it->first;
        }
      }
      if (!best) break;
      merge_in_place(syms, *best);
      floor = best_rank + 1;
    }
    for (auto& s : syms) out.push_back(std::move(s));
  }

 private:
  std::map<Pair, std::vector<std::size_t>> ranks_;  // ascending
};

}  // namespace

TokenSeq bpe_encode(const BpeModel& model, std::string_view text) {
  BpeEncoder enc(model);
  TokenSeq out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) enc.encode_word(text.substr(start, i - start), out);
  }
  return out;
}

std::string bpe_decode(const TokenSeq& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    std::string_view v(t);
    if (v.size() >= kEndOfWord.size() && v.substr(v.size() - kEndOfWord.size()) == kEndOfWord) {
      out.append(v.substr(0, v.size() - kEndOfWord.size()));
      out += ' ';
    } else {
      out.append(v);
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string bpe_to_json(const BpeModel& model) {
  nlohmann::json j;
  j["vocab_size"] = model.target_vocab_size;
  j["merges"] = nlohmann::json::array();
  for (const auto& [a, b] : model.merges) j["merges"].push_back({a, b});
  j["alphabet"] = model.alphabet;
  return j.dump();
}

BpeModel bpe_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("BPE model is not valid JSON: ") + e.what());
  }
  if (!j.contains("vocab_size") || !j.contains("merges") || !j["merges"].is_array()) {
    throw DataError("BPE model JSON needs 'vocab_size' and 'merges'");
  }
  BpeModel m;
  m.target_vocab_size = j["vocab_size"].get<std::size_t>();
  for (const auto& pair : j["merges"]) {
    if (!pair.is_array() || pair.size() != 2) throw DataError("BPE merge entries must be [left, right] pairs");
    m.merges.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
  }
  if (j.contains("alphabet")) {
    m.alphabet = j["alphabet"].get<std::set<std::string>>();
  } else {
    for (const auto& [a, b] : m.merges) {
      for (const auto* side : {&a, &b}) {
        std::string s = *side;
        if (s.size() >= kEndOfWord.size() && s.ends_with(kEndOfWord)) s.resize(s.size() - kEndOfWord.size());
        for (auto& ch : utf8_chars(s)) m.alphabet.insert(std::move(ch));
      }
    }
  }
  return m;
}

void save_bpe(const BpeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write BPE model to " + path.string());
  out << bpe_to_json(model) << '\n';
}

BpeModel load_bpe(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open BPE model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return bpe_from_json(ss.str());
}

}  // namespace tracex
