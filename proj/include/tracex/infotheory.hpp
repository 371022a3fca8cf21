#pragma once

// Information measures over token count vectors. All quantities are in bits.
//
// The pair's joint information is operationalized by pooling: the two token
// multisets are concatenated and H_pool is the entropy of the result. Under
// that construction
//
//   mi    = H(X) + H(Y) - H_pool      (an overlap score; may be negative)
//   loss  = H_pool - H(Y)             (source information unexplained by target)
//   noise = H_pool - H(X)             (target information absent from source)
//
// so mi + loss == H(X) and mi + noise == H(Y).

#include <optional>
#include <string>
#include <vector>

#include "tracex/tokenize.hpp"

namespace tracex {

/// Normalized token distribution; holds strictly positive probabilities only.
class TokenDistribution {
 public:
  /// Throws ConfigError when counts.total == 0.
  explicit TokenDistribution(const TokenCounts& counts);

  const std::map<std::string, double>& probs() const { return probs_; }
  std::size_t support_size() const { return probs_.size(); }

 private:
  std::map<std::string, double> probs_;
};

/// -sum p log2 p over the given probabilities; zero entries contribute 0.
double entropy_of(const std::vector<double>& probs);
double entropy(const TokenDistribution& d);
/// Convenience: entropy of a count vector (0 for an empty vector).
double entropy(const TokenCounts& counts);

/// -log2 p(token). Throws ConfigError if the token is outside the support.
double self_information(const TokenDistribution& d, const std::string& token);

/// Per-token sum of counts.
TokenCounts pool(const TokenCounts& a, const TokenCounts& b);

double pooled_mutual_information(const TokenCounts& a, const TokenCounts& b);

struct ConditionalEntropies {
  double loss = 0.0;
  double noise = 0.0;
};
ConditionalEntropies conditional_entropies(const TokenCounts& a, const TokenCounts& b);

/// Per-token minimum over the union vocabulary; zero entries are kept.
TokenCounts min_shared_counts(const TokenCounts& a, const TokenCounts& b);

/// Entropy of the normalized minimum-shared vector (0 if it is null).
double msi_entropy(const TokenCounts& a, const TokenCounts& b);
/// Extropy -sum (1-p) log2 (1-p) of the normalized minimum-shared vector,
/// over every stored entry including explicit zeros (0 if it is null).
double msi_extropy(const TokenCounts& a, const TokenCounts& b);
double extropy_of(const std::vector<double>& probs);

/// Per-pair bundle. Fields needing an empty side stay unset; si/sx/null_shared
/// are always defined.
struct InfoRecord {
  std::optional<double> h_x, h_y, h_pool;
  std::optional<double> mi, loss, noise;
  std::optional<double> d1;  // h_y - h_x
  std::optional<double> d2;  // h_y - loss
  std::optional<double> d3;  // h_x - noise
  double si = 0.0;
  double sx = 0.0;
  bool null_shared = true;
  /// Shared token mass sum(min) / min(total_x, total_y); 0 when a side is empty.
  double overlap = 0.0;
  bool source_empty = false;
  bool target_empty = false;

  bool complete() const { return !source_empty && !target_empty; }
};

InfoRecord info_record(const TokenCounts& source, const TokenCounts& target);

}  // namespace tracex
