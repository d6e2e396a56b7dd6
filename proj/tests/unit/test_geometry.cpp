#include <doctest.h>

#include "vecsim/geometry.hpp"
#include "vecsim/world.hpp"

using namespace vecsim;

TEST_CASE("euclidean distance") {
  CHECK(distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
  CHECK(distance({1, 1}, {1, 1}) == 0.0);
  CHECK(distance({-2, -3}, {1, 1}) == doctest::Approx(5.0));
  // symmetric and shift-invariant
  CHECK(distance({10, 20}, {13, 24}) == doctest::Approx(distance({13, 24}, {10, 20})));
}

TEST_CASE("coverage is exclusive at the boundary") {
  RsuState r;
  r.position = {0, 0};
  r.coverage_m = 5.0;
  SdvState v;
  v.position = {3, 4};
  CHECK_FALSE(in_range(v, r));  // exactly on the circle
  v.position = {3, 3.9999};
  CHECK(in_range(v, r));
}

TEST_CASE("mesh links need mutual coverage") {
  RsuState a, b;
  a.position = {0, 0};
  b.position = {100, 0};
  a.coverage_m = 150;
  b.coverage_m = 99;  // b cannot reach a
  CHECK_FALSE(rsus_linked(a, b));
  b.coverage_m = 101;
  CHECK(rsus_linked(a, b));
}
