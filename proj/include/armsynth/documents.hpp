#ifndef ARMSYNTH_DOCUMENTS_HPP
#define ARMSYNTH_DOCUMENTS_HPP

// Structured documents shared by the CLI (--format structured) and the HTTP
// service, so both emit byte-identical JSON for the same inputs.

#include <string>

#include <json.hpp>

#include "armsynth/ik_solver.hpp"
#include "armsynth/kinematics.hpp"
#include "armsynth/part_library.hpp"
#include "armsynth/synthesis.hpp"
#include "armsynth/task.hpp"

namespace armsynth::documents {

using json = nlohmann::json;

json design_json(const Design& d);
json ik_result_json(const IkResult& ik);

/// World transforms of every part at every frame, for kinematic playback.
json playback_json(const PartLibrary& lib, const Design& d, const Task& task, const PoseSequence& poses);

/// Contacts at each colliding frame.
json collision_json(const PartLibrary& lib, const Design& d, const Task& task, const IkResult& ik);

/*
 * Validation report: total E_IK, per-frame errors, DOF, design cost,
 * collision report, warnings, playback frames.
 */
json validation_report(const PartLibrary& lib, const Design& d, const Task& task);

/// Result of a synthesis run ("armresult/1").
json synthesis_result(const PartLibrary& lib, const Task& task, const SynthesisResult& r);

/// Rule list document for the design tip.
json compatible_rules_json(const PartLibrary& lib, const Design& d);

std::string dump(const json& j);

}  // namespace armsynth::documents

#endif  // ARMSYNTH_DOCUMENTS_HPP
