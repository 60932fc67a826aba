#ifndef ARMSYNTH_CONFIG_HPP
#define ARMSYNTH_CONFIG_HPP

#include <cstddef>
#include <cstdint>

namespace armsynth {

struct IkConfig {
  int max_iterations_per_frame = 200;
  double damping = 1e-3;
  int restarts = 5;
  // Stop a damped least squares run once a step improves the error by less
  // than this (m^2).
  double convergence_tolerance = 1e-8;
  // Per-frame error reported for a frame whose best pose collides (m^2).
  double collision_penalty = 10.0;
  std::uint64_t seed = 0;

  bool operator==(const IkConfig&) const = default;
};

struct SynthesisConfig {
  // Maximum total E_IK (m^2) for a goal design.
  double goal_error_tolerance = 1e-4;
  // Part-cost units per m^2 of E_IK.
  double heuristic_scale = 1.0;
  // Includes the base.
  std::size_t max_parts = 12;
  std::size_t max_expansions = 50000;
  // Worker threads for child heuristic evaluation; results do not depend on it.
  std::size_t threads = 1;
  std::uint64_t seed = 0;

  bool operator==(const SynthesisConfig&) const = default;
};

}  // namespace armsynth

#endif  // ARMSYNTH_CONFIG_HPP
