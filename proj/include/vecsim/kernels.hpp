#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vecsim::kernels {

// Hot loops shared by demand scoring and generator checks.  Each kernel has a
// serial reference and an OpenMP variant that must produce bit-identical
// results (independent output slots / fixed-shape reductions), so the parallel
// path can be swapped in freely.  See bench/kernels_bench.cpp.
enum class Exec { Serial, Parallel, Auto };

double dot(std::span<const float> a, std::span<const float> b);
double norm(std::span<const float> a);
double cosine(std::span<const float> a, std::span<const float> b);  // 0 when either norm is 0

// out[i] = weights[i] * cos(pref, rows[i]); rows are equal-length vectors
void weighted_cosine_scores(std::span<const float> pref,
                            const std::vector<std::span<const float>>& rows,
                            std::span<const double> weights,
                            std::span<double> out,
                            Exec mode = Exec::Auto);

struct SimilarityStats {
  double within_mean = 0.0;
  double cross_mean = 0.0;
  std::int64_t within_pairs = 0;
  std::int64_t cross_pairs = 0;
};

// mean pairwise cosine within equal labels vs across labels
SimilarityStats cluster_similarity(const std::vector<std::vector<float>>& vecs,
                                   const std::vector<int>& labels,
                                   Exec mode = Exec::Auto);

}  // namespace vecsim::kernels
