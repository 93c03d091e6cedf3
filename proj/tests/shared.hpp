#pragma once
// Shared test fixtures.  The profile expansion build is the expensive setup
// step common to the profile, modulation, and decomposition tests; the
// inline-function static gives one instance per test binary.

#include "ring/groundstate.hpp"
#include "ring/profile.hpp"

inline const ring::ProfileExpansion& expansion33() {
  static const ring::ProfileExpansion ex = ring::build_expansion(
      ring::make_params(3, 3.0), ring::default_profile_grid());
  return ex;
}
