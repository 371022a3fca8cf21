#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracex/embeddings.hpp"
#include "tracex/tokenize.hpp"

namespace tracex {

/// 1 - cos(u, v), clamped to [0, 2]. Throws ConfigError on a zero vector or a
/// dimension mismatch.
double cosine_distance(std::span<const double> u, std::span<const double> v);
double cosine_distance(std::span<const float> u, std::span<const float> v);

/// ||u - v||_2. Throws ConfigError on a dimension mismatch.
double euclidean_distance(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const float> u, std::span<const float> v);

/// 1 / (1 + d): the distance-to-similarity transform used for WMD and COS.
inline double similarity_from_distance(double d) { return 1.0 / (1.0 + d); }

/// A token bag restricted to the embedding vocabulary, with unit-normalized
/// vectors and its self soft-cosine norm cached for repeated pair scoring.
class EmbeddedBag {
 public:
  EmbeddedBag(const TokenCounts& counts, const EmbeddingMatrix& m);

  bool empty() const { return rows_.empty(); }
  std::size_t support() const { return rows_.size(); }
  const std::vector<std::size_t>& rows() const { return rows_; }  // embedding row per term
  const std::vector<double>& weights() const { return weights_; }  // raw counts
  double total() const { return total_; }
  long oov_tokens() const { return oov_tokens_; }
  std::span<const double> unit(std::size_t term) const { return {unit_.data() + term * dim_, dim_}; }
  double self_norm() const { return self_norm_; }  // sum_ij s_ij w_i w_j

 private:
  std::vector<std::size_t> rows_;
  std::vector<double> weights_;
  std::vector<double> unit_;
  std::size_t dim_ = 0;
  double total_ = 0.0;
  long oov_tokens_ = 0;
  double self_norm_ = 0.0;
};

/// Term similarity s_ij = max(0, cos(v_i, v_j))^2 with s_ii = 1.
double term_similarity(std::span<const double> unit_i, std::span<const double> unit_j, bool same_term);

/// Soft cosine over in-vocabulary terms; nullopt when a side has none.
std::optional<double> soft_cosine(const TokenCounts& a, const TokenCounts& b, const EmbeddingMatrix& m);
std::optional<double> soft_cosine(const EmbeddedBag& a, const EmbeddedBag& b);

struct WmdResult {
  double distance = 0.0;
  bool relaxed = false;  // true when the relaxed lower bound stands in for the exact value
};

/// Largest support product solved exactly; above it the relaxed bound is used.
inline constexpr std::size_t kExactWmdCellLimit = 65536;

/// Word Mover's Distance with Euclidean ground cost over normalized
/// in-vocabulary weights; nullopt when a side has no in-vocabulary token.
std::optional<WmdResult> wmd(const TokenCounts& a, const TokenCounts& b, const EmbeddingMatrix& m);
std::optional<WmdResult> wmd(const EmbeddedBag& a, const EmbeddedBag& b, const EmbeddingMatrix& m,
                             std::size_t exact_cell_limit = kExactWmdCellLimit);

/// max of the two one-sided nearest-neighbour relaxations.
double relaxed_wmd(const EmbeddedBag& a, const EmbeddedBag& b, const EmbeddingMatrix& m);

/// Per-pair semantic bundle. Unset fields are undefined for the pair.
struct DistanceRecord {
  std::optional<double> wmd, scm, cos, euc, wmd_sim, cos_sim;
  bool wmd_relaxed = false;
};

struct PairRepresentation {
  const EmbeddedBag* source_bag = nullptr;  // word-level (WMD, SCM)
  const EmbeddedBag* target_bag = nullptr;
  const EmbeddingMatrix* words = nullptr;
  std::optional<std::span<const double>> source_vec;  // document-level (COS, EUC)
  std::optional<std::span<const double>> target_vec;
};

DistanceRecord distance_record(const PairRepresentation& rep);

}  // namespace tracex
