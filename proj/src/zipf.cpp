#include "vecsim/zipf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vecsim {

ZipfTable::ZipfTable(std::int64_t n, double alpha) : n_(n), alpha_(alpha) {
  if (n < 1) throw std::invalid_argument("zipf: n must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("zipf: alpha must be >= 0");
  cdf_.resize(static_cast<std::size_t>(n));
  // extended precision keeps the tail sum honest for large n
  long double acc = 0.0L;
  for (std::int64_t k = 1; k <= n; ++k) {
    acc += std::pow(static_cast<long double>(k), -static_cast<long double>(alpha));
    cdf_[static_cast<std::size_t>(k - 1)] = static_cast<double>(acc);
  }
  h_ = acc;
  const double inv = static_cast<double>(1.0L / acc);
  for (auto& c : cdf_) c *= inv;
  cdf_.back() = 1.0;
}

double ZipfTable::pmf(std::int64_t rank) const {
  if (rank < 1 || rank > n_) throw std::out_of_range("zipf: rank out of range");
  const long double w = std::pow(static_cast<long double>(rank), -static_cast<long double>(alpha_));
  return static_cast<double>(w / h_);
}

std::int64_t ZipfTable::sample(Rng& rng) const {
  const double u = rng.uniform01();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::int64_t>(it - cdf_.begin()) + 1;
}

double rank_to_value(std::int64_t rank, std::int64_t n, double lo, double hi) {
  if (n <= 1) return hi;
  const double t = static_cast<double>(rank - 1) / static_cast<double>(n - 1);
  return hi * std::pow(lo / hi, t);
}

}  // namespace vecsim
