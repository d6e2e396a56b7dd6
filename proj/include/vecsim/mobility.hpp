#pragma once

#include "vecsim/rng.hpp"
#include "vecsim/world.hpp"

namespace vecsim {

struct MobilityParams {
  double target_speed_mps = 11.11;  // 40 km/h
  double speed_noise_std = 0.4;     // accel jitter, m/s^2
  double accel_gain = 0.5;          // pull toward target speed, 1/s
  double accel_max = 3.0;           // |accel| cap, m/s^2
  double turn_rate_max = 3.14159265358979323846;  // rad/s during a maneuver
  double maneuver_per_min = 6.0;    // direction changes per minute (Poisson)
  enum class Boundary { Reflect, Wrap } boundary = Boundary::Reflect;
};

// kinematic update: mean-reverting speed with jitter, Poisson heading
// maneuvers, boundary handling; fills theta_a / theta_v for the sleep model
void mobility_step(SdvState& v, const MobilityParams& params, double dt, Vec2 canvas, Rng& rng);

}  // namespace vecsim
