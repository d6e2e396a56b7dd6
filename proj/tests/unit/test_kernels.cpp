#include <doctest.h>

#include <vector>

#include "vecsim/kernels.hpp"
#include "vecsim/rng.hpp"

using namespace vecsim;

TEST_CASE("dot, norm and cosine basics") {
  std::vector<float> a{1, 0, 2};
  std::vector<float> b{3, 4, 0};
  CHECK(kernels::dot(a, b) == doctest::Approx(3.0));
  CHECK(kernels::norm(b) == doctest::Approx(5.0));
  CHECK(kernels::cosine(a, a) == doctest::Approx(1.0));
  std::vector<float> x{1, 0};
  std::vector<float> y{0, 1};
  CHECK(kernels::cosine(x, y) == doctest::Approx(0.0));
  std::vector<float> z{0, 0};
  CHECK(kernels::cosine(x, z) == 0.0);  // degenerate norm
}

TEST_CASE("serial and parallel scoring agree bit for bit") {
  Rng r(3);
  const int n = 257, dim = 64;
  std::vector<std::vector<float>> rows(n, std::vector<float>(dim));
  std::vector<float> pref(dim);
  std::vector<double> weights(n);
  for (auto& x : pref) x = static_cast<float>(r.uniform(0, 10));
  for (int i = 0; i < n; ++i) {
    for (auto& x : rows[i]) x = static_cast<float>(r.uniform(0, 10));
    weights[i] = r.uniform(1, 100);
  }
  std::vector<std::span<const float>> views(rows.begin(), rows.end());
  std::vector<double> serial(n), parallel(n);
  kernels::weighted_cosine_scores(pref, views, weights, serial, kernels::Exec::Serial);
  kernels::weighted_cosine_scores(pref, views, weights, parallel, kernels::Exec::Parallel);
  for (int i = 0; i < n; ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("weighted scores multiply charm into the cosine") {
  std::vector<float> pref{1, 0};
  std::vector<std::vector<float>> rows{{1, 0}, {0, 1}, {1, 1}};
  std::vector<std::span<const float>> views(rows.begin(), rows.end());
  std::vector<double> w{2.0, 5.0, 4.0};
  std::vector<double> out(3);
  kernels::weighted_cosine_scores(pref, views, w, out, kernels::Exec::Serial);
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(0.0));
  CHECK(out[2] == doctest::Approx(4.0 / std::sqrt(2.0)));
}

TEST_CASE("cluster similarity separates within from cross on synthetic labels") {
  // two orthogonal bundles with slight jitter
  Rng r(17);
  std::vector<std::vector<float>> vecs;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    std::vector<float> v{10, 0, 0, 0};
    for (auto& x : v) x += static_cast<float>(r.uniform(0, 0.5));
    vecs.push_back(v);
    labels.push_back(0);
  }
  for (int i = 0; i < 40; ++i) {
    std::vector<float> v{0, 10, 0, 0};
    for (auto& x : v) x += static_cast<float>(r.uniform(0, 0.5));
    vecs.push_back(v);
    labels.push_back(1);
  }
  const auto s = kernels::cluster_similarity(vecs, labels, kernels::Exec::Serial);
  CHECK(s.within_pairs == 2 * (40 * 39 / 2));
  CHECK(s.cross_pairs == 40 * 40);
  CHECK(s.within_mean > 0.99);
  CHECK(s.cross_mean < 0.1);
  const auto p = kernels::cluster_similarity(vecs, labels, kernels::Exec::Parallel);
  CHECK(p.within_mean == s.within_mean);
  CHECK(p.cross_mean == s.cross_mean);
}
