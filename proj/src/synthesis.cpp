#include "armsynth/synthesis.hpp"

#include <atomic>
#include <queue>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "armsynth/error.hpp"

namespace armsynth {

namespace {

std::string_view event_name(SearchEvent::Type t) {
  switch (t) {
    case SearchEvent::Type::NodeGenerated: return "node_generated";
    case SearchEvent::Type::NodeExpanded: return "node_expanded";
    case SearchEvent::Type::GoalFound: return "goal_found";
    case SearchEvent::Type::Exhausted: return "exhausted";
  }
  return "unknown";
}

bool terminated_by(const PartLibrary& lib, const Design& d, const Task& task) {
  return d.tip() == task.end_effector && lib.part(d.tip()).kind == PartKind::EndEffector;
}

// Heap order: lower f, then lower h, then fewer parts, then smaller signature.
struct Worse {
  bool operator()(const std::shared_ptr<const SearchNode>& a,
                  const std::shared_ptr<const SearchNode>& b) const {
    if (a->f != b->f) return a->f > b->f;
    if (a->h != b->h) return a->h > b->h;
    if (a->design.part_count() != b->design.part_count())
      return a->design.part_count() > b->design.part_count();
    return a->design.signature() > b->design.signature();
  }
};

struct HeuristicValue {
  double h = 0.0;
  IkResult ik;
  bool evaluated = false;
};

HeuristicValue heuristic_for(const PartLibrary& lib, const Design& d, const Task& task,
                             const std::vector<Transform>& targets) {
  HeuristicValue out;
  const bool terminal = terminated_by(lib, d, task);
  // With the heuristic switched off only goal candidates need IK.
  if (!terminal && task.synthesis.heuristic_scale == 0.0) return out;
  const KinematicChain chain(lib, d);
  out.ik = solve_ik(chain, task.base_pose, targets, task.obstacles, task.metric,
                    search_ik_config(task), task.clearance);
  out.h = task.synthesis.heuristic_scale * out.ik.total_error;
  out.evaluated = true;
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ConnectionRule> child_rules(const PartLibrary& lib, const SearchNode& node, const Task& task) {
  if (lib.part(node.design.tip()).kind == PartKind::EndEffector)
    throw KinematicsError("cannot expand design terminated by end-effector '" + node.design.tip() + "'");
  std::vector<ConnectionRule> rules;
  if (node.design.part_count() >= task.synthesis.max_parts) return rules;
  for (auto& r : lib.compatible_rules(node.design.tip())) {
    const Part& child = lib.part(r.child_part);
    if (child.kind == PartKind::EndEffector && child.id != task.end_effector) continue;
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<SearchNode> build_children(const PartLibrary& lib, const std::shared_ptr<const SearchNode>& parent,
                                       const std::vector<ConnectionRule>& rules, const Task& task,
                                       const std::vector<Transform>& targets) {
  std::vector<SearchNode> children;
  children.reserve(rules.size());
  for (const auto& r : rules) {
    SearchNode child{.design = append_part(lib, parent->design, r.id)};
    child.g = design_cost(lib, child.design);
    child.parent = parent;
    children.push_back(std::move(child));
  }
  parallel_for(children.size(), task.synthesis.threads, [&](std::size_t i) {
    HeuristicValue hv = heuristic_for(lib, children[i].design, task, targets);
    children[i].h = hv.h;
    children[i].cached_ik = std::move(hv.ik);
    children[i].ik_evaluated = hv.evaluated;
    children[i].f = children[i].g + children[i].h;
  });
  return children;
}

}  // namespace

IkConfig search_ik_config(const Task& task) {
  IkConfig cfg = task.ik;
  cfg.seed = task.ik.seed ^ (task.synthesis.seed * 0x9E3779B97F4A7C15ull);
  return cfg;
}

std::string to_json_line(const SearchEvent& e) {
  nlohmann::json j{{"event", std::string(event_name(e.type))}, {"signature", e.signature}};
  if (e.type == SearchEvent::Type::Exhausted) {
    j = nlohmann::json{{"event", std::string(event_name(e.type))}, {"reason", e.reason}};
  } else {
    j["g"] = e.g;
    j["h"] = e.h;
    j["f"] = e.f;
  }
  return j.dump();
}

std::string SearchTrace::to_ndjson() const {
  std::string out;
  for (const auto& e : events) {
    out += to_json_line(e);
    out += '\n';
  }
  return out;
}

std::pair<double, IkResult> evaluate_heuristic(const PartLibrary& lib, const Design& d, const Task& task) {
  const std::vector<Transform> targets = discretize(task.trajectory);
  const KinematicChain chain(lib, d);
  IkResult ik = solve_ik(chain, task.base_pose, targets, task.obstacles, task.metric,
                         search_ik_config(task), task.clearance);
  const double h = task.synthesis.heuristic_scale * ik.total_error;
  return {h, std::move(ik)};
}

SearchNode make_root(const PartLibrary& lib, const Task& task) {
  SearchNode root{.design = Design(root_base(task, lib))};
  root.g = 0.0;
  if (task.synthesis.heuristic_scale != 0.0) {
    auto [h, ik] = evaluate_heuristic(lib, root.design, task);
    root.h = h;
    root.cached_ik = std::move(ik);
    root.ik_evaluated = true;
  }
  root.f = root.g + root.h;
  return root;
}

std::vector<SearchNode> expand(const PartLibrary& lib, const SearchNode& node, const Task& task) {
  const std::vector<Transform> targets = discretize(task.trajectory);
  const auto parent = std::make_shared<const SearchNode>(node);
  return build_children(lib, parent, child_rules(lib, node, task), task, targets);
}

bool is_goal(const PartLibrary& lib, const SearchNode& node, const Task& task) {
  return terminated_by(lib, node.design, task) && node.ik_evaluated &&
         node.cached_ik.total_error <= task.synthesis.goal_error_tolerance &&
         node.cached_ik.collision_free;
}

SynthesisResult synthesize(const PartLibrary& lib, const Task& task, const SynthesisOptions& options) {
  validate_task(task, lib);
  const std::vector<Transform> targets = discretize(task.trajectory);

  SynthesisResult result;
  auto emit = [&](SearchEvent e) {
    if (options.on_event) options.on_event(e);
    result.trace.events.push_back(std::move(e));
  };
  auto node_event = [](SearchEvent::Type t, const SearchNode& n) {
    return SearchEvent{t, n.design.signature(), n.g, n.h, n.f, {}};
  };

  std::shared_ptr<const SearchNode> incumbent;
  auto better_incumbent = [&](const SearchNode& n) {
    if (!incumbent) return true;
    const bool a = terminated_by(lib, n.design, task) && n.ik_evaluated;
    const bool b = terminated_by(lib, incumbent->design, task) && incumbent->ik_evaluated;
    if (a != b) return a;
    if (a) {
      if (n.cached_ik.total_error != incumbent->cached_ik.total_error)
        return n.cached_ik.total_error < incumbent->cached_ik.total_error;
      return n.g < incumbent->g;
    }
    return Worse{}(incumbent, std::make_shared<const SearchNode>(n));
  };

  std::priority_queue<std::shared_ptr<const SearchNode>, std::vector<std::shared_ptr<const SearchNode>>, Worse> open;
  std::unordered_set<std::string> seen;

  auto root = std::make_shared<const SearchNode>(make_root(lib, task));
  seen.insert(root->design.signature());
  emit(node_event(SearchEvent::Type::NodeGenerated, *root));
  incumbent = root;
  open.push(root);

  while (!open.empty()) {
    if (options.stop.stop_requested()) {
      result.cancelled = true;
      break;
    }
    auto node = open.top();
    open.pop();

    if (is_goal(lib, *node, task)) {
      emit(node_event(SearchEvent::Type::GoalFound, *node));
      result.success = true;
      result.design = node->design;
      result.ik = node->cached_ik;
      return result;
    }
    if (result.expansions >= task.synthesis.max_expansions) {
      result.exhausted_reason = std::string(kExhaustedMaxExpansions);
      break;
    }
    ++result.expansions;
    emit(node_event(SearchEvent::Type::NodeExpanded, *node));
    // Terminated designs that failed the goal test are dead leaves.
    if (lib.part(node->design.tip()).kind == PartKind::EndEffector) continue;

    std::vector<ConnectionRule> rules = child_rules(lib, *node, task);
    std::erase_if(rules, [&](const ConnectionRule& r) {
      return seen.contains(node->design.signature() + "/" + r.id);
    });
    for (SearchNode& child : build_children(lib, node, rules, task, targets)) {
      seen.insert(child.design.signature());
      emit(node_event(SearchEvent::Type::NodeGenerated, child));
      auto shared = std::make_shared<const SearchNode>(std::move(child));
      if (better_incumbent(*shared)) incumbent = shared;
      open.push(std::move(shared));
    }
  }

  if (!result.cancelled) {
    if (result.exhausted_reason.empty()) result.exhausted_reason = std::string(kExhaustedFrontierEmpty);
    emit(SearchEvent{SearchEvent::Type::Exhausted, {}, 0, 0, 0, result.exhausted_reason});
  }
  if (incumbent) result.incumbent = *incumbent;
  return result;
}

}  // namespace armsynth
