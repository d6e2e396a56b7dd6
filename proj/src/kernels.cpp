#include "vecsim/kernels.hpp"

#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vecsim::kernels {

namespace {

bool run_parallel(Exec mode, std::size_t n) {
#ifdef _OPENMP
  if (mode == Exec::Serial) return false;
  if (mode == Exec::Parallel) return true;
  return n >= 4096 && omp_get_max_threads() > 1;
#else
  (void)mode;
  (void)n;
  return false;
#endif
}

}  // namespace

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const float> a, std::span<const float> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

void weighted_cosine_scores(std::span<const float> pref,
                            const std::vector<std::span<const float>>& rows,
                            std::span<const double> weights,
                            std::span<double> out,
                            Exec mode) {
  const auto n = static_cast<std::int64_t>(rows.size());
  const double pref_norm = norm(pref);
  if (run_parallel(mode, rows.size())) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double rn = norm(rows[ui]);
      out[ui] = (pref_norm == 0.0 || rn == 0.0)
                    ? 0.0
                    : weights[ui] * (dot(pref, rows[ui]) / (pref_norm * rn));
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double rn = norm(rows[ui]);
      out[ui] = (pref_norm == 0.0 || rn == 0.0)
                    ? 0.0
                    : weights[ui] * (dot(pref, rows[ui]) / (pref_norm * rn));
    }
  }
}

SimilarityStats cluster_similarity(const std::vector<std::vector<float>>& vecs,
                                   const std::vector<int>& labels,
                                   Exec mode) {
  const auto n = static_cast<std::int64_t>(vecs.size());
  SimilarityStats st;
  if (n < 2) return st;

  // one row of partial sums per i keeps the reduction order independent of
  // the thread count: row totals are added serially afterwards
  std::vector<double> within_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<double> cross_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<std::int64_t> within_cnt(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> cross_cnt(static_cast<std::size_t>(n), 0);

  const bool par = run_parallel(mode, static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 16) if (par)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double ws = 0.0, cs = 0.0;
    std::int64_t wc = 0, cc = 0;
    for (std::int64_t j = i + 1; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const double c = cosine(vecs[ui], vecs[uj]);
      if (labels[ui] == labels[uj]) {
        ws += c;
        ++wc;
      } else {
        cs += c;
        ++cc;
      }
    }
    within_sum[ui] = ws;
    cross_sum[ui] = cs;
    within_cnt[ui] = wc;
    cross_cnt[ui] = cc;
  }

  double ws = 0.0, cs = 0.0;
  std::int64_t wc = 0, cc = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    ws += within_sum[ui];
    cs += cross_sum[ui];
    wc += within_cnt[ui];
    cc += cross_cnt[ui];
  }
  st.within_pairs = wc;
  st.cross_pairs = cc;
  st.within_mean = wc > 0 ? ws / static_cast<double>(wc) : 0.0;
  st.cross_mean = cc > 0 ? cs / static_cast<double>(cc) : 0.0;
  return st;
}

}  // namespace vecsim::kernels
