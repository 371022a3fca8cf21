#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tracex/tokenize.hpp"

namespace tracex {

/// Dense token vectors, row-major. Tokens are unique; entries are finite.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  /// Validates uniqueness, arity and finiteness; throws DataError otherwise.
  EmbeddingMatrix(std::vector<std::string> vocab, std::size_t dim, std::vector<float> data);

  const std::vector<std::string>& vocab() const { return vocab_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vocab_.size(); }
  const std::vector<float>& data() const { return data_; }

  std::optional<std::size_t> find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> operator[](const std::string& token) const;

 private:
  std::vector<std::string> vocab_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct TrainConfig {
  std::size_t dim = 50;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 20;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of its start value
  std::size_t min_count = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainStats {
  /// Mean negative-sampling loss per (input, output) update, one per epoch.
  std::vector<double> epoch_loss;
};

/// Skip-gram with negative sampling (unigram^0.75 noise), symmetric reduced
/// window, linear learning-rate decay. Single-threaded; bit-deterministic for a
/// fixed seed.
EmbeddingMatrix train_skipgram(const std::vector<TokenSeq>& corpus, const TrainConfig& cfg,
                               TrainStats* stats = nullptr);

/// PV-DBOW paragraph vectors. The output (word) matrix and noise table are
/// kept so unseen documents can be inferred against them.
struct DocVectors {
  std::vector<std::string> doc_ids;
  std::size_t dim = 0;
  std::vector<float> vectors;          // doc_ids.size() x dim
  std::vector<bool> trained;           // false for documents with no in-vocab tokens
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> vocab_index;
  std::vector<float> output_weights;   // vocab.size() x dim
  std::vector<double> noise_cdf;
  TrainConfig config;

  std::span<const float> vector(std::size_t doc) const { return {vectors.data() + doc * dim, dim}; }
  std::optional<std::size_t> find_doc(const std::string& id) const;
};

DocVectors train_pvdbow(const std::vector<std::pair<std::string, TokenSeq>>& docs, const TrainConfig& cfg,
                        TrainStats* stats = nullptr);

/// Gradient steps on a fresh seeded vector with the output matrix frozen.
/// Throws DataError when no token is in the trained vocabulary.
std::vector<float> infer_doc_vector(const TokenSeq& tokens, const DocVectors& dv, std::size_t steps);

/// Plain-text interchange format: "<count> <dim>" then "<token> <f1> ... <fdim>".
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
EmbeddingMatrix parse_embeddings(std::string_view text, const std::string& origin = "<memory>");
void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
std::string format_embeddings(const EmbeddingMatrix& m);

struct MeanVector {
  std::vector<double> values;
  long in_vocab_tokens = 0;
  long oov_tokens = 0;
};

/// Count-weighted mean of in-vocabulary token vectors; OOV tokens are dropped
/// and counted. Throws DataError when no token is in the vocabulary.
MeanVector mean_doc_vector(const TokenCounts& counts, const EmbeddingMatrix& m);

}  // namespace tracex
