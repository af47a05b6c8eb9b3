#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rpmixl {

/// Radical inverse of `index` in `base`. Requires base >= 2 and index >= 1.
double halton_value(std::uint64_t base, std::uint64_t index);

/// Standard normal quantile. Throws std::domain_error unless 0 < p < 1.
double inv_normal_cdf(double p);
double normal_cdf(double z);

/// First `count` primes, ascending.
std::vector<std::uint32_t> first_primes(std::size_t count);

/// Number of default prime bases available when DrawConfig::primes is empty.
inline constexpr std::size_t kDefaultPrimeCount = 100;

struct DrawConfig {
  std::size_t n_draws = 1000;
  std::size_t burn_in = 10;
  /// Bases per random dimension; empty selects 2, 3, 5, 7, ... in layout order.
  std::vector<std::uint32_t> primes;
  std::optional<std::uint64_t> shuffle_seed;

  /// Checks invariants; throws std::invalid_argument.
  void validate() const;
  /// Bases used for the first `n_random` dimensions; throws std::invalid_argument on exhaustion.
  std::vector<std::uint32_t> bases_for(std::size_t n_random) const;

  bool operator==(const DrawConfig&) const = default;
};

/// Standard-normal draws laid out [observation][draw][dimension].
class DrawBlock {
 public:
  DrawBlock() = default;
  DrawBlock(std::size_t n_obs, std::size_t n_draws, std::size_t n_dims, std::vector<double> values,
            DrawConfig config);

  std::size_t n_obs() const noexcept { return n_obs_; }
  std::size_t n_draws() const noexcept { return n_draws_; }
  std::size_t n_dims() const noexcept { return n_dims_; }
  const DrawConfig& config() const noexcept { return config_; }

  double at(std::size_t obs, std::size_t draw, std::size_t dim) const {
    return values_[(obs * n_draws_ + draw) * n_dims_ + dim];
  }
  /// All draws of one observation, draw-major.
  std::span<const double> observation(std::size_t obs) const {
    return {values_.data() + obs * n_draws_ * n_dims_, n_draws_ * n_dims_};
  }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const DrawBlock&) const = default;

 private:
  std::size_t n_obs_ = 0;
  std::size_t n_draws_ = 0;
  std::size_t n_dims_ = 0;
  std::vector<double> values_;
  DrawConfig config_;
};

/// Observation n uses Halton indices burn_in + n*R + 1 ... burn_in + (n+1)*R in every dimension.
DrawBlock generate_draw_block(std::size_t n_obs, std::size_t n_random, const DrawConfig& config);

}  // namespace rpmixl
