#include "tracex/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "tracex/error.hpp"

namespace tracex {

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> vocab, std::size_t dim, std::vector<float> data)
    : vocab_(std::move(vocab)), dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw DataError("embedding dimension must be at least 1");
  if (data_.size() != vocab_.size() * dim_) throw DataError("embedding data size does not match vocab x dim");
  for (float x : data_)
    if (!std::isfinite(x)) throw DataError("embedding matrix contains NaN or Inf");
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) throw DataError("duplicate embedding token '" + vocab_[i] + "'");
  }
}

std::span<const float> EmbeddingMatrix::operator[](const std::string& token) const {
  auto i = find(token);
  if (!i) throw DataError("token '" + token + "' has no embedding");
  return row(*i);
}

void TrainConfig::validate() const {
  if (dim == 0 || window == 0 || negatives == 0 || epochs == 0 || min_count == 0 || !(learning_rate > 0.0)) {
    throw ConfigError("training parameters (dim, window, negatives, epochs, min_count, learning_rate) must be positive");
  }
}

std::optional<std::size_t> DocVectors::find_doc(const std::string& id) const {
  for (std::size_t i = 0; i < doc_ids.size(); ++i)
    if (doc_ids[i] == id) return i;
  return std::nullopt;
}

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

struct Vocabulary {
  std::vector<std::string> tokens;
  std::vector<long> counts;
  std::unordered_map<std::string, std::size_t> index;
};

// Frequency-descending, ties by token, so the layout is reproducible.
Vocabulary build_vocabulary(const std::vector<const TokenSeq*>& seqs, std::size_t min_count) {
  std::map<std::string, long> freq;
  for (const auto* s : seqs)
    for (const auto& t : *s) ++freq[t];
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [t, c] : freq)
    if (c >= static_cast<long>(min_count)) kept.emplace_back(t, c);
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [t, c] : kept) {
    v.index.emplace(t, v.tokens.size());
    v.tokens.push_back(t);
    v.counts.push_back(c);
  }
  return v;
}

std::vector<double> noise_cdf(const std::vector<long>& counts) {
  std::vector<double> cdf(counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) cdf[i] = (acc += std::pow(static_cast<double>(counts[i]), 0.75));
  for (auto& x : cdf) x /= acc;
  return cdf;
}

std::size_t sample(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<std::size_t> to_indices(const TokenSeq& s, const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<std::size_t> out;
  out.reserve(s.size());
  for (const auto& t : s) {
    auto it = index.find(t);
    if (it != index.end()) out.push_back(it->second);
  }
  return out;
}

double sigmoid(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

// -log sigmoid(x), stable for large |x|.
double neg_log_sigmoid(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

// One negative-sampling update of `input` toward predicting `positive`.
// Returns the loss of the update. A null `output` write pointer freezes the
// output matrix.
double ns_update(float* input, const float* output, float* output_write, std::size_t dim, std::size_t positive,
                 std::size_t negatives, const std::vector<double>& cdf, Rng& rng, double alpha,
                 std::vector<float>& grad) {
  std::fill(grad.begin(), grad.end(), 0.0f);
  double loss = 0.0;
  for (std::size_t d = 0; d <= negatives; ++d) {
    std::size_t target = positive;
    double label = 1.0;
    if (d > 0) {
      target = sample(cdf, rng);
      if (target == positive) continue;
      label = 0.0;
    }
    const float* out = output + target * dim;
    double f = 0.0;
    for (std::size_t k = 0; k < dim; ++k) f += static_cast<double>(input[k]) * out[k];
    loss += label > 0 ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
    const double g = (label - sigmoid(f)) * alpha;
    for (std::size_t k = 0; k < dim; ++k) grad[k] += static_cast<float>(g * out[k]);
    if (output_write) {
      float* w = output_write + target * dim;
      for (std::size_t k = 0; k < dim; ++k) w[k] += static_cast<float>(g * input[k]);
    }
  }
  for (std::size_t k = 0; k < dim; ++k) input[k] += grad[k];
  return loss;
}

void init_uniform(std::vector<float>& v, std::size_t dim, Rng& rng) {
  for (auto& x : v) x = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));
}

void check_finite(const std::vector<float>& v, const char* what) {
  for (float x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(what) + " produced a non-finite value");
}

double decayed(double lr, std::size_t done, std::size_t total) {
  const double frac = total ? static_cast<double>(done) / static_cast<double>(total + 1) : 0.0;
  return std::max(lr * (1.0 - frac), lr * 1e-4);
}

}  // namespace

EmbeddingMatrix train_skipgram(const std::vector<TokenSeq>& corpus, const TrainConfig& cfg, TrainStats* stats) {
  cfg.validate();
  std::vector<const TokenSeq*> seqs;
  for (const auto& s : corpus) seqs.push_back(&s);
  const auto vocab = build_vocabulary(seqs, cfg.min_count);
  if (vocab.tokens.empty()) throw DataError("skip-gram corpus has an empty effective vocabulary");

  std::vector<std::vector<std::size_t>> sentences;
  std::size_t corpus_words = 0;
  for (const auto& s : corpus) {
    auto idx = to_indices(s, vocab.index);
    corpus_words += idx.size();
    if (!idx.empty()) sentences.push_back(std::move(idx));
  }

  Rng rng(cfg.seed);
  const std::size_t dim = cfg.dim;
  std::vector<float> input(vocab.tokens.size() * dim);
  std::vector<float> output(vocab.tokens.size() * dim, 0.0f);
  init_uniform(input, dim, rng);
  const auto cdf = noise_cdf(vocab.counts);
  std::vector<float> grad(dim);
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t total = cfg.epochs * corpus_words;
  std::size_t done = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss = 0.0;
    std::size_t updates = 0;
    for (auto si : order) {
      const auto& sent = sentences[si];
      for (std::size_t pos = 0; pos < sent.size(); ++pos, ++done) {
        const double alpha = decayed(cfg.learning_rate, done, total);
        const std::size_t reach = cfg.window - rng.below(cfg.window);
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + reach);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          loss += ns_update(input.data() + sent[pos] * dim, output.data(), output.data(), dim, sent[c],
                            cfg.negatives, cdf, rng, alpha, grad);
          ++updates;
        }
      }
    }
    if (stats) stats->epoch_loss.push_back(updates ? loss / static_cast<double>(updates) : 0.0);
  }
  check_finite(input, "skip-gram training");
  return EmbeddingMatrix(vocab.tokens, dim, std::move(input));
}

DocVectors train_pvdbow(const std::vector<std::pair<std::string, TokenSeq>>& docs, const TrainConfig& cfg,
                        TrainStats* stats) {
  cfg.validate();
  std::vector<const TokenSeq*> seqs;
  for (const auto& [id, s] : docs) seqs.push_back(&s);
  const auto vocab = build_vocabulary(seqs, cfg.min_count);

  DocVectors dv;
  dv.dim = cfg.dim;
  dv.config = cfg;
  dv.vocab = vocab.tokens;
  dv.vocab_index = vocab.index;

  std::vector<std::vector<std::size_t>> bodies;
  std::size_t corpus_words = 0;
  for (const auto& [id, s] : docs) {
    dv.doc_ids.push_back(id);
    bodies.push_back(to_indices(s, vocab.index));
    dv.trained.push_back(!bodies.back().empty());
    corpus_words += bodies.back().size();
  }
  if (corpus_words == 0) throw DataError("PV-DBOW needs at least one document with in-vocabulary tokens");

  Rng rng(cfg.seed);
  const std::size_t dim = cfg.dim;
  dv.vectors.resize(docs.size() * dim);
  init_uniform(dv.vectors, dim, rng);
  dv.output_weights.assign(vocab.tokens.size() * dim, 0.0f);
  dv.noise_cdf = noise_cdf(vocab.counts);
  std::vector<float> grad(dim);
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t total = cfg.epochs * corpus_words;
  std::size_t done = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss = 0.0;
    std::size_t updates = 0;
    for (auto d : order) {
      for (auto w : bodies[d]) {
        const double alpha = decayed(cfg.learning_rate, done++, total);
        loss += ns_update(dv.vectors.data() + d * dim, dv.output_weights.data(), dv.output_weights.data(), dim, w,
                          cfg.negatives, dv.noise_cdf, rng, alpha, grad);
        ++updates;
      }
    }
    if (stats) stats->epoch_loss.push_back(updates ? loss / static_cast<double>(updates) : 0.0);
  }
  check_finite(dv.vectors, "PV-DBOW training");
  check_finite(dv.output_weights, "PV-DBOW training");
  return dv;
}

std::vector<float> infer_doc_vector(const TokenSeq& tokens, const DocVectors& dv, std::size_t steps) {
  const auto body = to_indices(tokens, dv.vocab_index);
  if (body.empty()) throw DataError("cannot infer a document vector: no token overlaps the trained vocabulary");

  Rng rng(dv.config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<float> vec(dv.dim);
  init_uniform(vec, dv.dim, rng);
  std::vector<float> grad(dv.dim);
  const std::size_t total = steps * body.size();
  std::size_t done = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    for (auto w : body) {
      const double alpha = decayed(dv.config.learning_rate, done++, total);
      ns_update(vec.data(), dv.output_weights.data(), nullptr, dv.dim, w, dv.config.negatives, dv.noise_cdf, rng,
                alpha, grad);
    }
  }
  check_finite(vec, "document inference");
  return vec;
}

EmbeddingMatrix parse_embeddings(std::string_view text, const std::string& origin) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    return true;
  };
  auto fields_of = [](std::string_view line) {
    std::vector<std::string_view> f;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      std::size_t s = i;
      while (i < line.size() && line[i] != ' ') ++i;
      if (i > s) f.push_back(line.substr(s, i - s));
    }
    return f;
  };
  auto where = [&]() { return origin + ":" + std::to_string(line_no); };

  std::string_view line;
  if (!next_line(line)) throw DataError("embedding file " + origin + " is empty (missing header)");
  const auto header = fields_of(line);
  std::size_t count = 0, dim = 0;
  auto parse_size = [](std::string_view s, std::size_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], count) || !parse_size(header[1], dim) || dim == 0) {
    throw DataError("malformed embedding header at " + where() + ": expected '<vocab_count> <dim>'");
  }

  std::vector<std::string> vocab;
  std::vector<float> data;
  vocab.reserve(count);
  data.reserve(count * dim);
  std::unordered_map<std::string, std::size_t> seen;
  while (next_line(line)) {
    if (line.find_first_not_of(' ') == std::string_view::npos) continue;
    const auto f = fields_of(line);
    if (f.size() != dim + 1) {
      throw DataError("embedding row at " + where() + " has " + std::to_string(f.size() - 1) +
                      " values, expected " + std::to_string(dim));
    }
    std::string token(f[0]);
    if (!seen.emplace(token, vocab.size()).second) {
      throw DataError("duplicate embedding token '" + token + "' at " + where());
    }
    for (std::size_t k = 1; k <= dim; ++k) {
      float x = 0.0f;
      auto [p, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), x);
      if (ec != std::errc() || p != f[k].data() + f[k].size() || !std::isfinite(x)) {
        throw DataError("bad float '" + std::string(f[k]) + "' at " + where());
      }
      data.push_back(x);
    }
    vocab.push_back(std::move(token));
  }
  if (vocab.size() != count) {
    throw DataError("embedding file " + origin + " declares " + std::to_string(count) + " rows but has " +
                    std::to_string(vocab.size()));
  }
  return EmbeddingMatrix(std::move(vocab), dim, std::move(data));
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_embeddings(ss.str(), path.string());
}

std::string format_embeddings(const EmbeddingMatrix& m) {
  std::string out = std::to_string(m.size()) + " " + std::to_string(m.dim()) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.vocab()[i];
    for (float x : m.row(i)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out += ' ';
      out.append(buf, p);
    }
    out += '\n';
  }
  return out;
}

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write embedding file " + path.string());
  out << format_embeddings(m);
}

MeanVector mean_doc_vector(const TokenCounts& counts, const EmbeddingMatrix& m) {
  MeanVector mv;
  mv.values.assign(m.dim(), 0.0);
  for (const auto& [tok, c] : counts.counts) {
    if (c <= 0) continue;
    auto i = m.find(tok);
    if (!i) {
      mv.oov_tokens += c;
      continue;
    }
    mv.in_vocab_tokens += c;
    const auto row = m.row(*i);
    for (std::size_t k = 0; k < m.dim(); ++k) mv.values[k] += static_cast<double>(c) * row[k];
  }
  if (mv.in_vocab_tokens == 0) throw DataError("no in-vocabulary tokens to average");
  for (auto& x : mv.values) x /= static_cast<double>(mv.in_vocab_tokens);
  return mv;
}

}  // namespace tracex
