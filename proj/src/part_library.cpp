#include "armsynth/part_library.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "armsynth/error.hpp"
#include "json_io.hpp"

namespace armsynth {

namespace {

constexpr std::string_view kLibraryFormat = "armlib/1";

}  // namespace

std::string_view to_string(PartKind kind) {
  switch (kind) {
    case PartKind::Base: return "base";
    case PartKind::Actuator: return "actuator";
    case PartKind::Link: return "link";
    case PartKind::EndEffector: return "end_effector";
  }
  return "unknown";
}

std::optional<PartKind> part_kind_from_string(std::string_view s) {
  if (s == "base") return PartKind::Base;
  if (s == "actuator") return PartKind::Actuator;
  if (s == "link") return PartKind::Link;
  if (s == "end_effector") return PartKind::EndEffector;
  return std::nullopt;
}

void validate_primitive(const CollisionPrimitive& p) {
  std::visit(
      [](const auto& x) {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, Box<double>>) {
          if ((x.half_extents.array() <= 0).any())
            throw std::invalid_argument("box half extents must be positive");
        } else {
          if (!(x.radius > 0)) throw std::invalid_argument("radius must be positive");
        }
      },
      p);
}

PartLibrary::PartLibrary(std::vector<Part> parts, std::vector<ConnectionRule> rules)
    : parts_(std::move(parts)), rules_(std::move(rules)) {
  bool has_base = false;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    const Part& p = parts_[i];
    if (p.id.empty()) throw ValidationError("part id must be nonempty");
    if (p.id == kVirtualEndEffectorId)
      throw ValidationError("part id '" + p.id + "' is reserved");
    if (!part_index_.emplace(p.id, i).second)
      throw ValidationError("duplicate part id '" + p.id + "'");
    if (!(p.cost_weight >= 0) || !std::isfinite(p.cost_weight))
      throw ValidationError("negative cost_weight on part '" + p.id + "'");
    if (p.kind == PartKind::Base) {
      has_base = true;
      if (p.output_frames.empty())
        throw ValidationError("base part '" + p.id + "' needs at least one output frame");
    }
    if (p.kind == PartKind::EndEffector && !p.output_frames.empty())
      throw ValidationError("end-effector part '" + p.id + "' must have no output frames");
    if (p.kind == PartKind::Actuator) {
      if (!p.joint) throw ValidationError("actuator part '" + p.id + "' has no joint");
      if (std::abs(p.joint->axis.norm() - 1.0) > 1e-9)
        throw ValidationError("non-unit joint axis on part '" + p.id + "'");
      if (!(p.joint->lower < p.joint->upper))
        throw ValidationError("joint limits lo >= hi on part '" + p.id + "'");
    } else if (p.joint) {
      throw ValidationError("non-actuator part '" + p.id + "' has a joint");
    }
    for (const auto& g : p.collision_geometry) {
      try {
        validate_primitive(g);
      } catch (const std::invalid_argument& e) {
        throw ValidationError("part '" + p.id + "': " + e.what());
      }
    }
  }
  if (!has_base) throw ValidationError("library has no base part");

  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const ConnectionRule& r = rules_[i];
    if (r.id.empty()) throw ValidationError("rule id must be nonempty");
    if (r.id.starts_with(kVirtualRulePrefix))
      throw ValidationError("rule id '" + r.id + "' uses a reserved prefix");
    if (!rule_index_.emplace(r.id, i).second)
      throw ValidationError("duplicate rule id '" + r.id + "'");
    const Part* parent = find_part(r.parent_part);
    if (!parent)
      throw ValidationError("rule '" + r.id + "' references missing part '" + r.parent_part + "'");
    const Part* child = find_part(r.child_part);
    if (!child)
      throw ValidationError("rule '" + r.id + "' references missing part '" + r.child_part + "'");
    if (child->kind == PartKind::Base)
      throw ValidationError("rule '" + r.id + "' attaches base part '" + child->id + "' as a child");
    if (parent->kind == PartKind::EndEffector)
      throw ValidationError("rule '" + r.id + "' attaches to end-effector '" + parent->id + "'");
    if (r.parent_output_index >= parent->output_frames.size())
      throw ValidationError("rule '" + r.id + "' output index out of range for part '" +
                            parent->id + "'");
    rules_by_parent_[r.parent_part].push_back(i);
  }
}

const Part* PartLibrary::find_part(std::string_view id) const {
  auto it = part_index_.find(std::string(id));
  return it == part_index_.end() ? nullptr : &parts_[it->second];
}

const ConnectionRule* PartLibrary::find_rule(std::string_view id) const {
  auto it = rule_index_.find(std::string(id));
  return it == rule_index_.end() ? nullptr : &rules_[it->second];
}

const Part& PartLibrary::part(std::string_view id) const {
  if (const Part* p = find_part(id)) return *p;
  throw ValidationError("unknown part id '" + std::string(id) + "'");
}

const ConnectionRule& PartLibrary::rule(std::string_view id) const {
  if (const ConnectionRule* r = find_rule(id)) return *r;
  throw ValidationError("unknown rule id '" + std::string(id) + "'");
}

std::vector<ConnectionRule> PartLibrary::compatible_rules(std::string_view tip) const {
  part(tip);
  std::vector<ConnectionRule> out;
  auto it = rules_by_parent_.find(std::string(tip));
  if (it == rules_by_parent_.end()) return out;
  out.reserve(it->second.size());
  for (std::size_t i : it->second) out.push_back(rules_[i]);
  return out;
}

namespace {

Part parse_part(const io::Field& f) {
  Part p;
  p.id = f["id"].as_string();
  const auto kind = part_kind_from_string(f["kind"].as_string());
  if (!kind) f["kind"].fail("unknown part kind");
  p.kind = *kind;
  if (f.has("cost_weight")) p.cost_weight = f["cost_weight"].as_number();
  if (f.has("input_frame")) p.input_frame = f["input_frame"].as_transform();
  if (f.has("output_frames")) {
    const io::Field outs = f["output_frames"];
    for (std::size_t i = 0; i < outs.size(); ++i) p.output_frames.push_back(outs.at(i).as_transform());
  }
  if (f.has("joint") && !f["joint"].value().is_null()) {
    const io::Field j = f["joint"];
    Joint joint;
    joint.axis = j["axis"].as_vector3();
    if (j.has("limits")) {
      const io::Field lim = j["limits"];
      if (lim.size() != 2) lim.fail("expected [lo, hi]");
      joint.lower = lim.at(0).as_number();
      joint.upper = lim.at(1).as_number();
    }
    p.joint = joint;
  }
  if (f.has("collision_geometry")) {
    const io::Field geo = f["collision_geometry"];
    for (std::size_t i = 0; i < geo.size(); ++i) p.collision_geometry.push_back(geo.at(i).as_primitive());
  }
  return p;
}

ConnectionRule parse_rule(const io::Field& f) {
  ConnectionRule r;
  r.id = f["id"].as_string();
  r.parent_part = f["parent_part"].as_string();
  r.child_part = f["child_part"].as_string();
  if (f.has("parent_output_index")) r.parent_output_index = f["parent_output_index"].as_index();
  if (f.has("transform")) r.transform = f["transform"].as_transform();
  return r;
}

}  // namespace

PartLibrary parse_library(std::string_view text) {
  const io::json doc = io::parse_text(text);
  const io::Field root(doc, "");
  if (root["format"].as_string() != kLibraryFormat)
    root["format"].fail("expected format \"" + std::string(kLibraryFormat) + "\"");
  std::vector<Part> parts;
  const io::Field ps = root["parts"];
  for (std::size_t i = 0; i < ps.size(); ++i) parts.push_back(parse_part(ps.at(i)));
  std::vector<ConnectionRule> rules;
  const io::Field rs = root["rules"];
  for (std::size_t i = 0; i < rs.size(); ++i) rules.push_back(parse_rule(rs.at(i)));
  return PartLibrary(std::move(parts), std::move(rules));
}

PartLibrary load_library(std::istream& source) {
  std::ostringstream ss;
  ss << source.rdbuf();
  return parse_library(ss.str());
}

std::string save_library(const PartLibrary& lib) {
  io::json parts = io::json::array();
  for (const Part& p : lib.parts()) {
    io::json jp{{"id", p.id},
                {"kind", std::string(to_string(p.kind))},
                {"cost_weight", p.cost_weight},
                {"input_frame", io::to_json(p.input_frame)}};
    io::json outs = io::json::array();
    for (const auto& o : p.output_frames) outs.push_back(io::to_json(o));
    jp["output_frames"] = std::move(outs);
    if (p.joint) {
      jp["joint"] = {{"axis", io::to_json(p.joint->axis)},
                     {"limits", io::json::array({p.joint->lower, p.joint->upper})}};
    }
    io::json geo = io::json::array();
    for (const auto& g : p.collision_geometry) geo.push_back(io::to_json(g));
    jp["collision_geometry"] = std::move(geo);
    parts.push_back(std::move(jp));
  }
  io::json rules = io::json::array();
  for (const ConnectionRule& r : lib.rules()) {
    rules.push_back({{"id", r.id},
                     {"parent_part", r.parent_part},
                     {"child_part", r.child_part},
                     {"parent_output_index", r.parent_output_index},
                     {"transform", io::to_json(r.transform)}});
  }
  return io::dump({{"format", kLibraryFormat}, {"parts", parts}, {"rules", rules}});
}

Part virtual_end_effector(const PartLibrary&) {
  Part p;
  p.id = std::string(kVirtualEndEffectorId);
  p.kind = PartKind::EndEffector;
  p.cost_weight = 0.0;
  return p;
}

ConnectionRule virtual_rule(const Part& parent, std::size_t output_index) {
  ConnectionRule r;
  r.id = std::string(kVirtualRulePrefix) + parent.id + "/" + std::to_string(output_index);
  r.parent_part = parent.id;
  r.child_part = std::string(kVirtualEndEffectorId);
  r.parent_output_index = output_index;
  return r;
}

}  // namespace armsynth
