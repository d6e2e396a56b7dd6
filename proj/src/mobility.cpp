#include "vecsim/mobility.hpp"

#include <algorithm>
#include <cmath>

namespace vecsim {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a;
}
}  // namespace

void mobility_step(SdvState& v, const MobilityParams& params, double dt, Vec2 canvas, Rng& rng) {
  double a = params.accel_gain * (params.target_speed_mps - v.speed_mps);
  if (params.speed_noise_std > 0.0) a += rng.normal(0.0, params.speed_noise_std);
  a = std::clamp(a, -params.accel_max, params.accel_max);
  v.accel_mps2 = a;
  v.speed_mps = std::max(0.0, v.speed_mps + a * dt);

  if (params.maneuver_per_min > 0.0) {
    const double p = std::min(1.0, params.maneuver_per_min / 60.0 * dt);
    if (rng.uniform01() < p) {
      const double turn = params.turn_rate_max * dt;
      v.heading_rad = wrap_angle(v.heading_rad + rng.uniform(-turn, turn));
    }
  }

  double x = v.position.x + v.speed_mps * std::cos(v.heading_rad) * dt;
  double y = v.position.y + v.speed_mps * std::sin(v.heading_rad) * dt;

  if (params.boundary == MobilityParams::Boundary::Wrap) {
    x = std::fmod(x, canvas.x);
    if (x < 0) x += canvas.x;
    y = std::fmod(y, canvas.y);
    if (y < 0) y += canvas.y;
  } else {
    // mirror position and heading at each wall; loop handles corner bounces
    for (int guard = 0; guard < 8; ++guard) {
      bool moved = false;
      if (x < 0) {
        x = -x;
        v.heading_rad = wrap_angle(kPi - v.heading_rad);
        moved = true;
      } else if (x > canvas.x) {
        x = 2.0 * canvas.x - x;
        v.heading_rad = wrap_angle(kPi - v.heading_rad);
        moved = true;
      }
      if (y < 0) {
        y = -y;
        v.heading_rad = wrap_angle(-v.heading_rad);
        moved = true;
      } else if (y > canvas.y) {
        y = 2.0 * canvas.y - y;
        v.heading_rad = wrap_angle(-v.heading_rad);
        moved = true;
      }
      if (!moved) break;
    }
    x = std::clamp(x, 0.0, canvas.x);
    y = std::clamp(y, 0.0, canvas.y);
  }
  v.position = {x, y};
}

}  // namespace vecsim
