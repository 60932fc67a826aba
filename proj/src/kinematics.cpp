#include "armsynth/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "armsynth/error.hpp"
#include "json_io.hpp"

namespace armsynth {

namespace {

constexpr std::string_view kDesignFormat = "armdesign/1";

}  // namespace

std::vector<std::string> Design::rule_ids() const {
  std::vector<std::string> ids;
  ids.reserve(links_.size());
  for (const auto& l : links_) ids.push_back(l.rule);
  return ids;
}

Design Design::replay(const PartLibrary& lib, std::string base,
                      const std::vector<std::string>& rule_ids) {
  const Part& b = lib.part(base);
  if (b.kind != PartKind::Base) throw KinematicsError("design base '" + base + "' is not a base part");
  Design d(std::move(base));
  for (const auto& r : rule_ids) d = append_part(lib, d, r);
  return d;
}

Design append_part(const PartLibrary& lib, const Design& d, std::string_view rule_id) {
  const ConnectionRule* rule = lib.find_rule(rule_id);
  if (!rule) throw KinematicsError("unknown rule id '" + std::string(rule_id) + "'");
  if (lib.part(d.tip()).kind == PartKind::EndEffector)
    throw KinematicsError("cannot append past end-effector '" + d.tip() + "'");
  if (rule->parent_part != d.tip())
    throw KinematicsError("rule '" + rule->id + "' attaches to '" + rule->parent_part +
                          "' but the design tip is '" + d.tip() + "'");
  Design out = d;
  out.links_.push_back({rule->child_part, rule->id});
  out.signature_ += "/";
  out.signature_ += rule->id;
  return out;
}

double design_cost(const PartLibrary& lib, const Design& d) {
  double cost = 0.0;
  for (const auto& l : d.links()) cost += lib.part(l.part).cost_weight;
  return cost;
}

std::size_t design_dof(const PartLibrary& lib, const Design& d) {
  return std::count_if(d.links().begin(), d.links().end(), [&](const Attachment& l) {
    return lib.part(l.part).kind == PartKind::Actuator;
  });
}

bool is_terminated(const PartLibrary& lib, const Design& d) {
  return lib.part(d.tip()).kind == PartKind::EndEffector;
}

Design parse_design(const PartLibrary& lib, std::string_view text) {
  const io::json doc = io::parse_text(text);
  const io::Field root(doc, "");
  if (root["format"].as_string() != kDesignFormat)
    root["format"].fail("expected format \"" + std::string(kDesignFormat) + "\"");
  std::vector<std::string> rules;
  const io::Field rs = root["rules"];
  for (std::size_t i = 0; i < rs.size(); ++i) rules.push_back(rs.at(i).as_string());
  try {
    return Design::replay(lib, root["base"].as_string(), rules);
  } catch (const KinematicsError& e) {
    throw ValidationError(std::string("design does not replay: ") + e.what());
  }
}

std::string save_design(const Design& d) {
  return io::dump({{"format", kDesignFormat}, {"base", d.base()}, {"rules", d.rule_ids()}});
}

KinematicChain::KinematicChain(const PartLibrary& lib, const Design& d)
    : virtual_part_(virtual_end_effector(lib)) {
  const Part* base = &lib.part(d.base());
  elements_.push_back({base, Transform::Identity(), 0, -1});
  const Part* parent = base;
  auto push = [&](const Part* child, const ConnectionRule& rule) {
    Transform parent_out = Transform::Identity();
    if (rule.parent_output_index < parent->output_frames.size())
      parent_out = parent->output_frames[rule.parent_output_index];
    Element e{child, parent_out * rule.transform * child->input_frame.inverse(),
              rule.parent_output_index, -1};
    if (child->kind == PartKind::Actuator) {
      e.joint_index = static_cast<int>(dof_++);
      lower_.push_back(child->joint->lower);
      upper_.push_back(child->joint->upper);
    }
    elements_.push_back(e);
    parent = child;
  };
  for (const auto& l : d.links()) push(&lib.part(l.part), lib.rule(l.rule));
  if (parent->kind != PartKind::EndEffector) {
    virtual_tip_ = true;
    push(&virtual_part_, virtual_rule(*parent, 0));
  }
}

void KinematicChain::check_dimension(const Pose& q) const {
  if (static_cast<std::size_t>(q.size()) != dof_)
    throw KinematicsError("pose has " + std::to_string(q.size()) + " angles, design has " +
                          std::to_string(dof_) + " DOF");
}

Transform KinematicChain::distal(std::size_t i, const Transform& body, const Pose& q) const {
  const Element& e = elements_[i];
  if (e.joint_index < 0) return body;
  return body * Transform::FromAxisAngle(e.part->joint->axis, q[e.joint_index]);
}

std::vector<Transform> KinematicChain::body_frames(const Transform& base_pose, const Pose& q) const {
  check_dimension(q);
  std::vector<Transform> frames;
  frames.reserve(elements_.size());
  frames.push_back(base_pose);
  for (std::size_t i = 1; i < elements_.size(); ++i) {
    frames.push_back(distal(i - 1, frames.back(), q) * elements_[i].mount);
  }
  return frames;
}

Transform KinematicChain::tool_frame(const Transform& base_pose, const Pose& q) const {
  check_dimension(q);
  Transform frame = base_pose;
  for (std::size_t i = 1; i < elements_.size(); ++i) frame = distal(i - 1, frame, q) * elements_[i].mount;
  return frame;
}

Pose KinematicChain::clamp(const Pose& q) const {
  check_dimension(q);
  Pose out(q.size());
  constexpr double kTurn = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j < dof_; ++j) {
    // A joint whose range spans a full turn is continuous: wrap instead of
    // pinning it against an artificial wall at the range ends.
    if (upper_[j] - lower_[j] >= kTurn && std::isfinite(q[j])) {
      out[j] = q[j] < lower_[j] || q[j] > upper_[j] ? lower_[j] + std::fmod(std::fmod(q[j] - lower_[j], kTurn) + kTurn, kTurn)
                                                    : q[j];
    } else {
      out[j] = std::clamp(q[j], lower_[j], upper_[j]);
    }
  }
  return out;
}

bool KinematicChain::within_limits(const Pose& q) const {
  check_dimension(q);
  for (std::size_t j = 0; j < dof_; ++j)
    if (q[j] < lower_[j] || q[j] > upper_[j]) return false;
  return true;
}

std::vector<Transform> forward_kinematics(const PartLibrary& lib, const Design& d,
                                          const Transform& base_pose, const Pose& q) {
  return KinematicChain(lib, d).body_frames(base_pose, q);
}

std::string_view to_string(ErrorMetric::Kind kind) {
  switch (kind) {
    case ErrorMetric::Kind::PositionOnly: return "position_only";
    case ErrorMetric::Kind::PositionAndAxis: return "position_and_axis";
    case ErrorMetric::Kind::FullPose: return "full_pose";
  }
  return "unknown";
}

double pose_error(const Transform& target, const Transform& actual, const ErrorMetric& metric) {
  const double position = (actual.translation() - target.translation()).squaredNorm();
  switch (metric.kind) {
    case ErrorMetric::Kind::PositionOnly:
      return position;
    case ErrorMetric::Kind::PositionAndAxis: {
      const Vector3 za = actual.rotation() * Vector3::UnitZ();
      const Vector3 zt = target.rotation() * Vector3::UnitZ();
      const double angle = vector_angle(za, zt);
      return position + metric.w_rot * angle * angle;
    }
    case ErrorMetric::Kind::FullPose: {
      const double angle = rotation_angle(actual.rotation(), target.rotation());
      return position + metric.w_rot * angle * angle;
    }
  }
  return position;
}

Eigen::VectorXd pose_residual(const Transform& target, const Transform& actual,
                              const ErrorMetric& metric) {
  Eigen::VectorXd r(metric.residual_size());
  r.head<3>() = actual.translation() - target.translation();
  if (metric.kind == ErrorMetric::Kind::PositionOnly) return r;
  const double scale = std::sqrt(metric.w_rot);
  if (metric.kind == ErrorMetric::Kind::FullPose) {
    r.tail<3>() = scale * rotation_log(Eigen::Quaterniond(actual.rotation() * target.rotation().conjugate()));
    return r;
  }
  // Rotation vector of the shortest arc taking the target axis to the actual one.
  const Vector3 za = actual.rotation() * Vector3::UnitZ();
  const Vector3 zt = target.rotation() * Vector3::UnitZ();
  const Vector3 c = zt.cross(za);
  const double s = c.norm();
  const double angle = std::atan2(s, zt.dot(za));
  Vector3 phi;
  if (s > 1e-12) {
    phi = c * (angle / s);
  } else if (angle < 1.0) {
    phi = c;
  } else {
    // Antiparallel: any axis perpendicular to zt.
    Vector3 perp = zt.unitOrthogonal();
    phi = perp * angle;
  }
  r.tail<3>() = scale * phi;
  return r;
}

}  // namespace armsynth
