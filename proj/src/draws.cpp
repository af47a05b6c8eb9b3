#include "rpmixl/draws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace rpmixl {

double halton_value(std::uint64_t base, std::uint64_t index) {
  // Exact reversed-digit numerator over base^k while it fits in 53 bits, so the
  // single final division is correctly rounded.
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  std::uint64_t n = index;
  while (n > 0 && denominator <= kExact / base) {
    numerator = numerator * base + n % base;
    denominator *= base;
    n /= base;
  }
  double value = static_cast<double>(numerator) / static_cast<double>(denominator);
  double scale = 1.0 / static_cast<double>(denominator);
  const double inv_base = 1.0 / static_cast<double>(base);
  while (n > 0) {
    scale *= inv_base;
    value += static_cast<double>(n % base) * scale;
    n /= base;
  }
  return value;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation, lower half only.
double acklam_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inv_normal_cdf: p must lie in (0, 1)");
  if (p > 0.5) return -inv_normal_cdf(1.0 - p);
  if (p == 0.5) return 0.0;
  double z = acklam_lower(p);
  // Two Halley steps against erfc take the 1e-9 approximation to full precision.
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(z) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * z * z);
    z -= u / (1.0 + 0.5 * z * u);
  }
  return z;
}

std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t candidate = 2; primes.size() < count; ++candidate) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(candidate);
  }
  return primes;
}

void DrawConfig::validate() const {
  if (n_draws < 1) throw std::invalid_argument("draw count must be at least 1");
  std::set<std::uint32_t> seen;
  for (auto p : primes) {
    if (p < 2) throw std::invalid_argument("Halton base must be a prime >= 2");
    for (std::uint32_t f = 2; f * f <= p; ++f) {
      if (p % f == 0) throw std::invalid_argument("Halton base " + std::to_string(p) + " is not prime");
    }
    if (!seen.insert(p).second) throw std::invalid_argument("Halton bases must be distinct");
  }
}

std::vector<std::uint32_t> DrawConfig::bases_for(std::size_t n_random) const {
  const std::size_t available = primes.empty() ? kDefaultPrimeCount : primes.size();
  if (n_random > available)
    throw std::invalid_argument("not enough Halton bases: " + std::to_string(n_random) + " random dimensions, " +
                                std::to_string(available) + " primes configured");
  if (primes.empty()) return first_primes(n_random);
  return {primes.begin(), primes.begin() + static_cast<std::ptrdiff_t>(n_random)};
}

DrawBlock::DrawBlock(std::size_t n_obs, std::size_t n_draws, std::size_t n_dims, std::vector<double> values,
                     DrawConfig config)
    : n_obs_(n_obs), n_draws_(n_draws), n_dims_(n_dims), values_(std::move(values)), config_(std::move(config)) {
  if (values_.size() != n_obs_ * n_draws_ * n_dims_) throw std::invalid_argument("draw block shape mismatch");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unbiased bounded integer in [0, bound) from a 64-bit engine (portable, unlike
// std::uniform_int_distribution).
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

DrawBlock generate_draw_block(std::size_t n_obs, std::size_t n_random, const DrawConfig& config) {
  config.validate();
  const auto bases = config.bases_for(n_random);
  const std::size_t R = config.n_draws;
  std::vector<double> values(n_obs * R * n_random);
  std::vector<double> column(R);
  for (std::size_t d = 0; d < n_random; ++d) {
    for (std::size_t n = 0; n < n_obs; ++n) {
      const std::uint64_t first = config.burn_in + n * R + 1;
      for (std::size_t r = 0; r < R; ++r) column[r] = inv_normal_cdf(halton_value(bases[d], first + r));
      if (config.shuffle_seed) {
        std::mt19937_64 engine(splitmix64(splitmix64(*config.shuffle_seed ^ splitmix64(n)) + d));
        for (std::size_t i = R; i > 1; --i) std::swap(column[i - 1], column[bounded(engine, i)]);
      }
      for (std::size_t r = 0; r < R; ++r) values[(n * R + r) * n_random + d] = column[r];
    }
  }
  return DrawBlock(n_obs, R, n_random, std::move(values), config);
}

}  // namespace rpmixl
