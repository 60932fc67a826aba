#ifndef ARMSYNTH_SYNTHESIS_HPP
#define ARMSYNTH_SYNTHESIS_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "armsynth/ik_solver.hpp"
#include "armsynth/kinematics.hpp"
#include "armsynth/part_library.hpp"
#include "armsynth/task.hpp"

namespace armsynth {

struct SearchNode {
  Design design;
  double g = 0.0;
  double h = 0.0;
  double f = 0.0;
  std::shared_ptr<const SearchNode> parent{};
  // Empty poses when the heuristic was skipped (heuristic_scale == 0 on an
  // unterminated design).
  IkResult cached_ik{};
  bool ik_evaluated = false;
};

struct SearchEvent {
  enum class Type { NodeGenerated, NodeExpanded, GoalFound, Exhausted };
  Type type;
  std::string signature;
  double g = 0.0;
  double h = 0.0;
  double f = 0.0;
  std::string reason;  // Exhausted only

  bool terminal() const { return type == Type::GoalFound || type == Type::Exhausted; }
};

inline constexpr std::string_view kExhaustedMaxExpansions = "max_expansions";
inline constexpr std::string_view kExhaustedFrontierEmpty = "frontier_empty";

/// One JSON object per line, no trailing newline.
std::string to_json_line(const SearchEvent& e);

struct SearchTrace {
  std::vector<SearchEvent> events;
  /// Newline-delimited JSON, one event per line.
  std::string to_ndjson() const;
};

struct SynthesisResult {
  bool success = false;
  Design design{""};
  IkResult ik;
  SearchTrace trace;
  std::string exhausted_reason;
  // Best node seen when the search fails: lowest E_IK among terminated
  // designs, or lowest f overall if none were terminated.
  std::optional<SearchNode> incumbent;
  std::size_t expansions = 0;
  bool cancelled = false;
};

struct SynthesisOptions {
  // Called for every trace event as it is appended.
  std::function<void(const SearchEvent&)> on_event;
  std::stop_token stop;
};

/// IK settings used for every E_IK evaluation during search: the task's IK
/// config with its seed mixed with the synthesis seed.
IkConfig search_ik_config(const Task& task);

/*
 * h for a design: lambda_h * E_IK, evaluating unterminated designs with the
 * virtual end-effector attached at their tip.
 */
std::pair<double, IkResult> evaluate_heuristic(const PartLibrary& lib, const Design& d, const Task& task);

/*
 * Children of `node`, one per compatible rule at its tip, in library order.
 * Rules that attach an end-effector other than the task's are skipped, since
 * such children can never be goals. Returns an empty list at max_parts.
 * Throws KinematicsError when the node is already terminated.
 */
std::vector<SearchNode> expand(const PartLibrary& lib, const SearchNode& node, const Task& task);

SearchNode make_root(const PartLibrary& lib, const Task& task);

/// Goal test: terminated by the task's end-effector, within tolerance, and
/// collision-free at every frame.
bool is_goal(const PartLibrary& lib, const SearchNode& node, const Task& task);

/// A* over the tree of designs. Deterministic for fixed inputs and seeds,
/// independent of `task.synthesis.threads`.
SynthesisResult synthesize(const PartLibrary& lib, const Task& task, const SynthesisOptions& options = {});

}  // namespace armsynth

#endif  // ARMSYNTH_SYNTHESIS_HPP
