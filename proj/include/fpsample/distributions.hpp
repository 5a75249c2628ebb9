#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fpsample/error.hpp"
#include "fpsample/population.hpp"
#include "fpsample/random.hpp"

namespace fpsample {

enum class Replacement { without, with };

/// Class counts a_1..a_K (or b_1..b_K) from n draws.
struct CountVector {
  std::vector<std::uint64_t> counts;

  std::uint64_t draws() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
  std::size_t classes() const { return counts.size(); }
  bool operator==(const CountVector&) const = default;
  auto operator<=>(const CountVector&) const = default;
};

/// Dense K x K covariance matrix, row-major.
class CovMatrix {
 public:
  explicit CovMatrix(std::size_t k) : k_(k), data_(k * k, 0.0) {}

  std::size_t size() const { return k_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * k_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * k_ + c]; }

  double row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t c = 0; c < k_; ++c) s += (*this)(r, c);
    return s;
  }

  CovMatrix scaled(double f) const {
    CovMatrix m = *this;
    for (double& x : m.data_) x *= f;
    return m;
  }

 private:
  std::size_t k_;
  std::vector<double> data_;
};

/// Finite population correction 1 - (n-1)/(N-1); 1 when N = 1.
inline double fpc(std::uint64_t n, std::uint64_t N) {
  detail::require(n >= 1, "fpc needs at least one draw");
  detail::require(n <= N, "fpc needs n <= N");
  if (N == 1) return 1.0;
  return 1.0 - static_cast<double>(n - 1) / static_cast<double>(N - 1);
}

/// log(n!).
inline double log_factorial(std::uint64_t n) {
  static const auto table = [] {
    std::array<double, 1024> t{};
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  if (n < table.size()) return table[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

/// log C(n, k); requires k <= n.
inline double log_choose(std::uint64_t n, std::uint64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

namespace detail {

inline void check_probabilities(std::span<const double> probs) {
  require(!probs.empty(), "probability vector must not be empty");
  double s = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "probabilities must lie in [0, 1]");
    s += p;
  }
  require(std::abs(s - 1.0) <= 1e-12, "probabilities must sum to 1");
}

}  // namespace detail

/// P(a = c) for n = sum(c) draws without replacement:
/// prod_k C(N_k, a_k) / C(N, n). Infeasible points have probability 0.
inline double mvhyper_pmf(const CountVector& c, const ClassifiedPopulation& cp) {
  detail::require(c.classes() == cp.classes(), "count vector and population differ in class count");
  const std::uint64_t n = c.draws();
  if (n > cp.total()) return 0.0;
  double lp = -log_choose(cp.total(), n);
  for (std::size_t k = 0; k < c.classes(); ++k) {
    if (c.counts[k] > cp.size(k)) return 0.0;
    lp += log_choose(cp.size(k), c.counts[k]);
  }
  return std::exp(lp);
}

/// P(b = c) for n = sum(c) independent draws: n!/prod b_k! prod p_k^b_k.
inline double multinomial_pmf(const CountVector& c, std::span<const double> probs) {
  detail::check_probabilities(probs);
  detail::require(c.classes() == probs.size(), "count vector and probabilities differ in length");
  double lp = log_factorial(c.draws());
  for (std::size_t k = 0; k < c.classes(); ++k) {
    if (c.counts[k] == 0) continue;
    if (probs[k] == 0.0) return 0.0;
    lp += static_cast<double>(c.counts[k]) * std::log(probs[k]) - log_factorial(c.counts[k]);
  }
  return std::exp(lp);
}

/// Multinomial covariance: n p_k (1 - p_k) on the diagonal, -n p_k p_l off it.
inline CovMatrix multinomial_cov(std::span<const double> probs, std::uint64_t n) {
  detail::check_probabilities(probs);
  detail::require(n >= 1, "need at least one draw");
  const std::size_t K = probs.size();
  const double dn = static_cast<double>(n);
  CovMatrix m(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l)
      m(k, l) = k == l ? dn * probs[k] * (1.0 - probs[k]) : -dn * (probs[k] * probs[l]);
  return m;
}

/// Multivariate hypergeometric covariance: the multinomial covariance with
/// p_k = N_k / N, shrunk by fpc(n, N).
inline CovMatrix mvhyper_cov(const ClassifiedPopulation& cp, std::uint64_t n) {
  detail::require(n >= 1 && n <= cp.total(), "need 1 <= n <= N");
  const auto p = cp.proportions();
  const double f = fpc(n, cp.total());
  const double dn = static_cast<double>(n);
  const std::size_t K = cp.classes();
  CovMatrix m(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l)
      m(k, l) = (k == l ? dn * p[k] * (1.0 - p[k]) : -dn * (p[k] * p[l])) * f;
  return m;
}

/// Class counts from n sequential single-unit draws. Without replacement
/// each draw removes one unit from the class it lands in.
template <UniformSource G>
CountVector sample_counts(const ClassifiedPopulation& cp, std::uint64_t n, Replacement r, G& gen) {
  if (r == Replacement::without)
    detail::require(n <= cp.total(), "cannot draw more than N units without replacement");
  std::vector<std::uint64_t> remaining(cp.sizes().begin(), cp.sizes().end());
  std::uint64_t left = cp.total();
  CountVector out{std::vector<std::uint64_t>(cp.classes(), 0)};
  for (std::uint64_t j = 0; j < n; ++j) {
    std::uint64_t u = static_cast<std::uint64_t>(gen.below(left));
    std::size_t k = 0;
    while (u >= remaining[k]) u -= remaining[k++];
    ++out.counts[k];
    if (r == Replacement::without) {
      --remaining[k];
      --left;
    }
  }
  return out;
}

}  // namespace fpsample
