#include "armsynth/documents.hpp"

#include "json_io.hpp"

namespace armsynth::documents {

json design_json(const Design& d) {
  return {{"format", "armdesign/1"}, {"base", d.base()}, {"rules", d.rule_ids()}};
}

json ik_result_json(const IkResult& ik) {
  json poses = json::array();
  for (const Pose& q : ik.poses) poses.push_back(std::vector<double>(q.data(), q.data() + q.size()));
  return {{"total_error", ik.total_error},
          {"per_frame_error", ik.per_frame_error},
          {"poses", poses},
          {"collision_free", ik.collision_free},
          {"frames_in_collision", ik.frames_in_collision}};
}

json playback_json(const PartLibrary& lib, const Design& d, const Task& task, const PoseSequence& poses) {
  const KinematicChain chain(lib, d);
  json frames = json::array();
  for (const Pose& q : poses) {
    json parts = json::array();
    const auto bodies = chain.body_frames(task.base_pose, q);
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      json t = io::to_json(bodies[i]);
      t["part"] = chain.element(i).part->id;
      parts.push_back(std::move(t));
    }
    frames.push_back(std::move(parts));
  }
  return frames;
}

json collision_json(const PartLibrary& lib, const Design& d, const Task& task, const IkResult& ik) {
  const KinematicChain chain(lib, d);
  json out = json::array();
  for (std::size_t i : ik.frames_in_collision) {
    const CollisionReport rep =
        check_pose_collisions(chain, task.base_pose, ik.poses[i], task.obstacles, task.clearance);
    json contacts = json::array();
    for (const auto& c : rep.obstacle_contacts)
      contacts.push_back({{"type", "obstacle"}, {"chain_index", c.chain_index}, {"part", c.part_id},
                          {"obstacle", c.obstacle_id}, {"distance", c.distance}});
    for (const auto& c : rep.self_contacts)
      contacts.push_back({{"type", "self"}, {"chain_index", {c.first_index, c.second_index}},
                          {"parts", {c.first_part, c.second_part}}, {"distance", c.distance}});
    out.push_back({{"frame", i}, {"contacts", contacts}});
  }
  return out;
}

json validation_report(const PartLibrary& lib, const Design& d, const Task& task) {
  const std::vector<Transform> targets = discretize(task.trajectory);
  const KinematicChain chain(lib, d);
  const IkResult ik = solve_ik(chain, task.base_pose, targets, task.obstacles, task.metric,
                              search_ik_config(task), task.clearance);
  json warnings = json::array();
  if (!is_terminated(lib, d)) warnings.push_back("no end-effector");
  else if (d.tip() != task.end_effector) warnings.push_back("end-effector differs from task end_effector");
  return {{"format", "armvalidation/1"},
          {"design", design_json(d)},
          {"signature", d.signature()},
          {"dof", design_dof(lib, d)},
          {"design_cost", design_cost(lib, d)},
          {"ik", ik_result_json(ik)},
          {"collisions", collision_json(lib, d, task, ik)},
          {"warnings", warnings},
          {"playback", playback_json(lib, d, task, ik.poses)}};
}

json synthesis_result(const PartLibrary& lib, const Task& task, const SynthesisResult& r) {
  json doc{{"format", "armresult/1"}};
  if (r.success) {
    doc["status"] = "succeeded";
    doc["design"] = design_json(r.design);
    doc["signature"] = r.design.signature();
    doc["dof"] = design_dof(lib, r.design);
    doc["design_cost"] = design_cost(lib, r.design);
    doc["ik"] = ik_result_json(r.ik);
    doc["collisions"] = collision_json(lib, r.design, task, r.ik);
    doc["playback"] = playback_json(lib, r.design, task, r.ik.poses);
  } else {
    doc["status"] = r.cancelled ? "cancelled" : "exhausted";
  }
  json diag{{"expansions", r.expansions}, {"trace_length", r.trace.events.size()}};
  if (!r.success && !r.cancelled) {
    diag["reason"] = r.exhausted_reason;
    if (r.incumbent) {
      const SearchNode& n = *r.incumbent;
      json inc{{"design", design_json(n.design)}, {"signature", n.design.signature()},
               {"g", n.g}, {"h", n.h}, {"f", n.f}};
      if (n.ik_evaluated) inc["total_error"] = n.cached_ik.total_error;
      diag["incumbent"] = std::move(inc);
    }
  }
  doc["diagnostics"] = std::move(diag);
  return doc;
}

json compatible_rules_json(const PartLibrary& lib, const Design& d) {
  json rules = json::array();
  if (!is_terminated(lib, d)) {
    for (const auto& r : lib.compatible_rules(d.tip()))
      rules.push_back({{"id", r.id}, {"parent_part", r.parent_part}, {"child_part", r.child_part},
                       {"parent_output_index", r.parent_output_index}});
  }
  return {{"tip", d.tip()}, {"rules", rules}};
}

std::string dump(const json& j) { return io::dump(j); }

}  // namespace armsynth::documents
