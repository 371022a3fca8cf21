#include "tracex/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tracex/error.hpp"
#include "tracex/transport.hpp"

namespace tracex {

namespace {

template <typename T>
double cosine_distance_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw ConfigError("cosine distance: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += static_cast<double>(u[k]) * v[k];
    nu += static_cast<double>(u[k]) * u[k];
    nv += static_cast<double>(v[k]) * v[k];
  }
  if (nu == 0.0 || nv == 0.0) throw ConfigError("cosine distance is undefined for a zero vector");
  return std::clamp(1.0 - dot / (std::sqrt(nu) * std::sqrt(nv)), 0.0, 2.0);
}

template <typename T>
double euclidean_distance_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw ConfigError("euclidean distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = static_cast<double>(u[k]) - static_cast<double>(v[k]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

double cosine_distance(std::span<const double> u, std::span<const double> v) { return cosine_distance_impl(u, v); }
double cosine_distance(std::span<const float> u, std::span<const float> v) { return cosine_distance_impl(u, v); }
double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  return euclidean_distance_impl(u, v);
}
double euclidean_distance(std::span<const float> u, std::span<const float> v) {
  return euclidean_distance_impl(u, v);
}

double term_similarity(std::span<const double> unit_i, std::span<const double> unit_j, bool same_term) {
  if (same_term) return 1.0;
  const double c = std::max(0.0, dot(unit_i, unit_j));
  return c * c;
}

EmbeddedBag::EmbeddedBag(const TokenCounts& counts, const EmbeddingMatrix& m) : dim_(m.dim()) {
  for (const auto& [tok, c] : counts.counts) {
    if (c <= 0) continue;
    auto row = m.find(tok);
    if (!row) {
      oov_tokens_ += c;
      continue;
    }
    rows_.push_back(*row);
    weights_.push_back(static_cast<double>(c));
    total_ += static_cast<double>(c);
    const auto v = m.row(*row);
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    for (float x : v) unit_.push_back(norm > 0.0 ? x / norm : 0.0);
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    self_norm_ += weights_[i] * weights_[i];
    for (std::size_t j = i + 1; j < rows_.size(); ++j) {
      self_norm_ += 2.0 * term_similarity(unit(i), unit(j), rows_[i] == rows_[j]) * weights_[i] * weights_[j];
    }
  }
}

std::optional<double> soft_cosine(const EmbeddedBag& a, const EmbeddedBag& b) {
  if (a.empty() || b.empty()) return std::nullopt;
  double cross = 0.0;
  for (std::size_t i = 0; i < a.support(); ++i) {
    for (std::size_t j = 0; j < b.support(); ++j) {
      cross += term_similarity(a.unit(i), b.unit(j), a.rows()[i] == b.rows()[j]) * a.weights()[i] * b.weights()[j];
    }
  }
  const double denom = std::sqrt(std::max(a.self_norm(), 1e-12) * std::max(b.self_norm(), 1e-12));
  return std::clamp(cross / denom, 0.0, 1.0);
}

std::optional<double> soft_cosine(const TokenCounts& a, const TokenCounts& b, const EmbeddingMatrix& m) {
  return soft_cosine(EmbeddedBag(a, m), EmbeddedBag(b, m));
}

double relaxed_wmd(const EmbeddedBag& a, const EmbeddedBag& b, const EmbeddingMatrix& m) {
  if (a.empty() || b.empty()) throw ConfigError("relaxed WMD needs two non-empty bags");
  std::vector<double> best_a(a.support(), std::numeric_limits<double>::infinity());
  std::vector<double> best_b(b.support(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < a.support(); ++i) {
    for (std::size_t j = 0; j < b.support(); ++j) {
      const double c = euclidean_distance(m.row(a.rows()[i]), m.row(b.rows()[j]));
      best_a[i] = std::min(best_a[i], c);
      best_b[j] = std::min(best_b[j], c);
    }
  }
  double ra = 0.0, rb = 0.0;
  for (std::size_t i = 0; i < a.support(); ++i) ra += a.weights()[i] / a.total() * best_a[i];
  for (std::size_t j = 0; j < b.support(); ++j) rb += b.weights()[j] / b.total() * best_b[j];
  return std::max(ra, rb);
}

std::optional<WmdResult> wmd(const EmbeddedBag& a, const EmbeddedBag& b, const EmbeddingMatrix& m,
                             std::size_t exact_cell_limit) {
  if (a.empty() || b.empty()) return std::nullopt;
  if (a.support() * b.support() > exact_cell_limit) return WmdResult{relaxed_wmd(a, b, m), true};

  std::vector<double> supply(a.support()), demand(b.support());
  for (std::size_t i = 0; i < a.support(); ++i) supply[i] = a.weights()[i] / a.total();
  for (std::size_t j = 0; j < b.support(); ++j) demand[j] = b.weights()[j] / b.total();
  std::vector<double> cost(a.support() * b.support());
  for (std::size_t i = 0; i < a.support(); ++i)
    for (std::size_t j = 0; j < b.support(); ++j)
      cost[i * b.support() + j] = euclidean_distance(m.row(a.rows()[i]), m.row(b.rows()[j]));
  const auto r = solve_transport(supply, demand, CostMatrix{cost, a.support(), b.support()});
  return WmdResult{std::max(r.cost, 0.0), false};
}

std::optional<WmdResult> wmd(const TokenCounts& a, const TokenCounts& b, const EmbeddingMatrix& m) {
  return wmd(EmbeddedBag(a, m), EmbeddedBag(b, m), m);
}

DistanceRecord distance_record(const PairRepresentation& rep) {
  DistanceRecord r;
  if (rep.words && rep.source_bag && rep.target_bag) {
    if (auto w = wmd(*rep.source_bag, *rep.target_bag, *rep.words)) {
      r.wmd = w->distance;
      r.wmd_relaxed = w->relaxed;
      r.wmd_sim = similarity_from_distance(w->distance);
    }
    r.scm = soft_cosine(*rep.source_bag, *rep.target_bag);
  }
  if (rep.source_vec && rep.target_vec) {
    const auto& u = *rep.source_vec;
    const auto& v = *rep.target_vec;
    r.euc = euclidean_distance(u, v);
    const bool zero_u = std::all_of(u.begin(), u.end(), [](double x) { return x == 0.0; });
    const bool zero_v = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (!zero_u && !zero_v) {
      r.cos = cosine_distance(u, v);
      r.cos_sim = similarity_from_distance(*r.cos);
    }
  }
  return r;
}

}  // namespace tracex
