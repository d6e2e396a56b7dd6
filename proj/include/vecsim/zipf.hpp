#pragma once

#include <cstdint>
#include <vector>

#include "vecsim/rng.hpp"

namespace vecsim {

// rank distribution p(k) = k^-alpha / H(n, alpha), ranks 1..n
class ZipfTable {
public:
  ZipfTable() = default;
  ZipfTable(std::int64_t n, double alpha);

  std::int64_t size() const { return n_; }
  double alpha() const { return alpha_; }
  double harmonic() const { return static_cast<double>(h_); }

  double pmf(std::int64_t rank) const;  // rank in [1, n]
  std::int64_t sample(Rng& rng) const;  // inverse-CDF draw, returns a rank

private:
  std::int64_t n_ = 0;
  double alpha_ = 1.0;
  long double h_ = 1.0L;
  std::vector<double> cdf_;
};

// geometric interpolation: rank 1 maps to hi (most popular = heaviest),
// rank n maps to lo
double rank_to_value(std::int64_t rank, std::int64_t n, double lo, double hi);

}  // namespace vecsim
