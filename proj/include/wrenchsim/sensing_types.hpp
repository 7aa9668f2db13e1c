#pragma once

#include "wrenchsim/numerics.hpp"

namespace wrenchsim {

/// Force/moment pair at the wrist sensor, base-frame axes.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

}  // namespace wrenchsim
