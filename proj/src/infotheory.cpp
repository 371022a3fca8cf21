#include "tracex/infotheory.hpp"

#include <algorithm>
#include <cmath>

#include "tracex/error.hpp"

namespace tracex {

TokenDistribution::TokenDistribution(const TokenCounts& counts) {
  if (counts.total <= 0) throw ConfigError("cannot build a distribution from an empty token vector");
  const auto total = static_cast<double>(counts.total);
  for (const auto& [tok, c] : counts.counts) {
    if (c > 0) probs_.emplace(tok, static_cast<double>(c) / total);
  }
}

double entropy_of(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

double extropy_of(const std::vector<double>& probs) {
  double j = 0.0;
  for (double p : probs) {
    const double q = 1.0 - p;
    if (q > 0.0) j -= q * std::log2(q);
  }
  return j;
}

double entropy(const TokenDistribution& d) {
  double h = 0.0;
  for (const auto& [tok, p] : d.probs()) h -= p * std::log2(p);
  return h;
}

double entropy(const TokenCounts& counts) {
  if (counts.total <= 0) return 0.0;
  return entropy(TokenDistribution(counts));
}

double self_information(const TokenDistribution& d, const std::string& token) {
  auto it = d.probs().find(token);
  if (it == d.probs().end()) throw ConfigError("token '" + token + "' is not in the distribution's support");
  return -std::log2(it->second);
}

TokenCounts pool(const TokenCounts& a, const TokenCounts& b) {
  TokenCounts out = a;
  for (const auto& [tok, c] : b.counts) {
    if (c > 0) out.counts[tok] += c;
  }
  out.total = a.total + b.total;
  return out;
}

namespace {

void require_both(const TokenCounts& a, const TokenCounts& b, const char* what) {
  if (a.total <= 0 || b.total <= 0) throw ConfigError(std::string(what) + " needs two non-empty token vectors");
}

std::vector<double> normalized(const TokenCounts& c) {
  std::vector<double> p;
  p.reserve(c.counts.size());
  const auto total = static_cast<double>(c.total);
  for (const auto& [tok, n] : c.counts) p.push_back(total > 0 ? static_cast<double>(n) / total : 0.0);
  return p;
}

// Complements as (total - n) / total so a two-outcome vector yields the same
// terms as its entropy.
double extropy_of_counts(const TokenCounts& c) {
  double j = 0.0;
  const auto total = static_cast<double>(c.total);
  for (const auto& [tok, n] : c.counts) {
    const double q = static_cast<double>(c.total - n) / total;
    if (q > 0.0) j -= q * std::log2(q);
  }
  return j;
}

}  // namespace

double pooled_mutual_information(const TokenCounts& a, const TokenCounts& b) {
  require_both(a, b, "mutual information");
  return entropy(a) + entropy(b) - entropy(pool(a, b));
}

ConditionalEntropies conditional_entropies(const TokenCounts& a, const TokenCounts& b) {
  require_both(a, b, "conditional entropy");
  const double h_pool = entropy(pool(a, b));
  return {h_pool - entropy(b), h_pool - entropy(a)};
}

TokenCounts min_shared_counts(const TokenCounts& a, const TokenCounts& b) {
  TokenCounts out;
  for (const auto& [tok, c] : a.counts) out.counts[tok] = std::min(c, b.at(tok));
  for (const auto& [tok, c] : b.counts) out.counts.try_emplace(tok, 0);
  for (const auto& [tok, c] : out.counts) out.total += c;
  return out;
}

double msi_entropy(const TokenCounts& a, const TokenCounts& b) {
  const auto shared = min_shared_counts(a, b);
  return shared.total > 0 ? entropy_of(normalized(shared)) : 0.0;
}

double msi_extropy(const TokenCounts& a, const TokenCounts& b) {
  const auto shared = min_shared_counts(a, b);
  return shared.total > 0 ? extropy_of_counts(shared) : 0.0;
}

InfoRecord info_record(const TokenCounts& source, const TokenCounts& target) {
  InfoRecord r;
  r.source_empty = source.total <= 0;
  r.target_empty = target.total <= 0;

  if (!r.source_empty) r.h_x = entropy(source);
  if (!r.target_empty) r.h_y = entropy(target);
  if (!r.source_empty || !r.target_empty) r.h_pool = entropy(pool(source, target));

  if (r.complete()) {
    const double hx = *r.h_x, hy = *r.h_y, hp = *r.h_pool;
    r.mi = hx + hy - hp;
    r.loss = hp - hy;
    r.noise = hp - hx;
    r.d1 = hy - hx;
    r.d2 = hy - *r.loss;
    r.d3 = hx - *r.noise;
  }

  const auto shared = min_shared_counts(source, target);
  r.null_shared = shared.total == 0;
  if (!r.null_shared) {
    const auto p = normalized(shared);
    r.si = entropy_of(p);
    r.sx = extropy_of_counts(shared);
  }
  if (r.complete()) {
    r.overlap = static_cast<double>(shared.total) / static_cast<double>(std::min(source.total, target.total));
  }
  return r;
}

}  // namespace tracex
