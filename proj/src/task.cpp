#include "armsynth/task.hpp"

#include <cmath>

#include "armsynth/error.hpp"
#include "json_io.hpp"

namespace armsynth {

namespace {

constexpr std::string_view kTaskFormat = "armtask/1";

// Unit vector perpendicular to `tangent`, as close to `up` as possible.
Vector3 perpendicular_up(const Vector3& tangent, const Vector3& up) {
  for (const Vector3& candidate : {up, Vector3(Vector3::UnitX()), Vector3(Vector3::UnitY())}) {
    const Vector3 u = candidate - candidate.dot(tangent) * tangent;
    if (u.norm() > 1e-9) return u.normalized();
  }
  return tangent.unitOrthogonal();
}

Transform frame_from(const Vector3& position, const Vector3& tangent, const Vector3& up) {
  Eigen::Matrix3d r;
  r.col(0) = tangent;
  r.col(1) = up.cross(tangent);
  r.col(2) = up;
  return Transform::FromMatrix(r, position);
}

// Parameter s in [0, 1] for sample i of n, with both endpoints exact.
double sample_parameter(std::size_t i, std::size_t n) {
  if (n == 1) return 0.0;
  if (i + 1 == n) return 1.0;
  return static_cast<double>(i) / static_cast<double>(n - 1);
}

std::vector<Transform> sample_line(const LineCurve& line, const Vector3& up0, std::size_t n) {
  const Vector3 delta = line.to - line.from;
  const double length = delta.norm();
  if (length == 0.0 && n > 1) throw ValidationError("degenerate line trajectory (zero length)");
  const Vector3 tangent = length > 0.0 ? Vector3(delta / length) : Vector3(Vector3::UnitX());
  const Vector3 up = perpendicular_up(tangent, up0);
  std::vector<Transform> frames;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sample_parameter(i, n);
    const Vector3 p = i + 1 == n && n > 1 ? line.to : Vector3(line.from + s * delta);
    frames.push_back(frame_from(p, tangent, up));
  }
  return frames;
}

/*
 * Helix (an arc when rise == 0) with its rotation-minimizing frame in closed
 * form. With radial-inward normal N and binormal B = T x N, the transported
 * up vector is cos(phi) N + sin(phi) B with
 * phi(s) = phi0 - (rise / sweep) * s * |sweep| / sqrt(r^2 + (rise / sweep)^2).
 */
std::vector<Transform> sample_helix(const Vector3& center, const Vector3& axis_in,
                                    const Vector3& start_in, double radius, double sweep,
                                    double rise, const Vector3& up0, std::size_t n) {
  if (!(radius > 0.0)) throw ValidationError("curve radius must be positive");
  if (sweep == 0.0 && n > 1) throw ValidationError("degenerate curve trajectory (zero sweep)");
  const Vector3 axis = axis_in.normalized();
  Vector3 u = start_in - start_in.dot(axis) * axis;
  if (u.norm() < 1e-12) throw ValidationError("curve start_direction is parallel to its axis");
  u.normalize();
  const Vector3 v = axis.cross(u);
  const double sigma = sweep < 0.0 ? -1.0 : 1.0;
  const double b = sweep == 0.0 ? 0.0 : rise / sweep;
  const double speed = std::sqrt(radius * radius + b * b);

  auto basis = [&](double a, Vector3& p, Vector3& t, Vector3& nrm, Vector3& bin) {
    const Vector3 er = std::cos(a) * u + std::sin(a) * v;
    const Vector3 et = -std::sin(a) * u + std::cos(a) * v;
    p = center + radius * er + (b * a) * axis;
    t = sigma * (radius * et + b * axis) / speed;
    nrm = -er;
    bin = sigma * (radius * axis - b * et) / speed;
  };

  Vector3 p0, t0, n0, b0;
  basis(0.0, p0, t0, n0, b0);
  const Vector3 up_start = perpendicular_up(t0, up0);
  const double phi0 = std::atan2(up_start.dot(b0), up_start.dot(n0));

  std::vector<Transform> frames;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sample_parameter(i, n);
    const double a = s * sweep;
    Vector3 p, t, nrm, bin;
    basis(a, p, t, nrm, bin);
    const double phi = phi0 - b * s * std::abs(sweep) / speed;
    const Vector3 up = std::cos(phi) * nrm + std::sin(phi) * bin;
    frames.push_back(frame_from(p, t, up));
  }
  return frames;
}

}  // namespace

std::size_t Trajectory::frame_count() const {
  if (const auto* frames = std::get_if<std::vector<TimedFrame>>(&spec)) return frames->size();
  return samples;
}

std::vector<Transform> discretize(const Trajectory& t) {
  if (const auto* frames = std::get_if<std::vector<TimedFrame>>(&t.spec)) {
    if (frames->empty()) throw ValidationError("trajectory has no frames");
    std::vector<Transform> out;
    for (std::size_t i = 0; i < frames->size(); ++i) {
      if (i > 0 && !((*frames)[i].time > (*frames)[i - 1].time))
        throw ValidationError("trajectory timestamps must be strictly increasing");
      out.push_back((*frames)[i].frame);
    }
    return out;
  }
  const auto& curve = std::get<ParametricCurve>(t.spec);
  if (t.samples < 1) throw ValidationError("trajectory sample count must be at least 1");
  if (!(curve.duration > 0.0)) throw ValidationError("trajectory duration must be positive");
  const Vector3 up = curve.up.value_or(Vector3::UnitZ());
  return std::visit(
      [&](const auto& shape) -> std::vector<Transform> {
        using S = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<S, LineCurve>) {
          return sample_line(shape, up, t.samples);
        } else if constexpr (std::is_same_v<S, ArcCurve>) {
          return sample_helix(shape.center, shape.normal, shape.start_direction, shape.radius,
                              shape.sweep, 0.0, up, t.samples);
        } else {
          return sample_helix(shape.center, shape.axis, shape.start_direction, shape.radius,
                              shape.sweep, shape.rise, up, t.samples);
        }
      },
      curve.shape);
}

std::string root_base(const Task& task, const PartLibrary& lib) {
  if (task.base) return *task.base;
  for (const Part& p : lib.parts())
    if (p.kind == PartKind::Base) return p.id;
  throw ValidationError("library has no base part");
}

void validate_task(const Task& task, const PartLibrary& lib) {
  const Part* ee = lib.find_part(task.end_effector);
  if (!ee) throw ValidationError("task end_effector '" + task.end_effector + "' is not in the library");
  if (ee->kind != PartKind::EndEffector)
    throw ValidationError("task end_effector '" + task.end_effector + "' is not an end-effector");
  if (task.base) {
    const Part* b = lib.find_part(*task.base);
    if (!b || b->kind != PartKind::Base)
      throw ValidationError("task base '" + *task.base + "' is not a base part in the library");
  }
  if (task.synthesis.max_parts < 2) throw ValidationError("max_parts must be at least 2");
  if (!(task.synthesis.goal_error_tolerance > 0)) throw ValidationError("goal_error_tolerance must be positive");
  if (!(task.synthesis.heuristic_scale >= 0)) throw ValidationError("heuristic_scale must be nonnegative");
  if (task.ik.max_iterations_per_frame <= 0 || task.ik.restarts < 0 || !(task.ik.damping > 0) ||
      !(task.ik.convergence_tolerance > 0))
    throw ValidationError("invalid IK configuration");
  if (!(task.clearance >= 0)) throw ValidationError("clearance must be nonnegative");
  discretize(task.trajectory);
}

namespace {

ErrorMetric parse_metric(const io::Field& f) {
  const std::string kind = f["kind"].as_string();
  ErrorMetric m;
  if (kind == "position_only") m = ErrorMetric::position_only();
  else if (kind == "position_and_axis") m.kind = ErrorMetric::Kind::PositionAndAxis;
  else if (kind == "full_pose") m.kind = ErrorMetric::Kind::FullPose;
  else f["kind"].fail("unknown metric kind '" + kind + "'");
  if (f.has("w_rot")) {
    m.w_rot = f["w_rot"].as_number();
    if (m.w_rot < 0) f["w_rot"].fail("must be nonnegative");
  }
  return m;
}

Trajectory parse_trajectory(const io::Field& f) {
  Trajectory t;
  const std::string type = f["type"].as_string();
  if (type == "frames") {
    std::vector<TimedFrame> frames;
    const io::Field fs = f["frames"];
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const io::Field item = fs.at(i);
      frames.push_back({item["time"].as_number(), item["frame"].as_transform()});
    }
    t.spec = std::move(frames);
    t.samples = std::get<std::vector<TimedFrame>>(t.spec).size();
    return t;
  }
  ParametricCurve c;
  if (f.has("duration")) c.duration = f["duration"].as_number();
  if (f.has("up")) c.up = f["up"].as_vector3();
  if (type == "line") {
    c.shape = LineCurve{f["from"].as_vector3(), f["to"].as_vector3()};
  } else if (type == "arc") {
    ArcCurve a;
    a.center = f["center"].as_vector3();
    if (f.has("normal")) a.normal = f["normal"].as_vector3();
    if (f.has("start_direction")) a.start_direction = f["start_direction"].as_vector3();
    a.radius = f["radius"].as_number();
    a.sweep = f["sweep"].as_number();
    c.shape = a;
  } else if (type == "helix") {
    HelixCurve h;
    h.center = f["center"].as_vector3();
    if (f.has("axis")) h.axis = f["axis"].as_vector3();
    if (f.has("start_direction")) h.start_direction = f["start_direction"].as_vector3();
    h.radius = f["radius"].as_number();
    h.sweep = f["sweep"].as_number();
    h.rise = f["rise"].as_number();
    c.shape = h;
  } else {
    f["type"].fail("unknown trajectory type '" + type + "'");
  }
  t.spec = c;
  if (f.has("samples")) {
    const long long n = f["samples"].as_integer();
    if (n < 1) f["samples"].fail("must be at least 1");
    t.samples = static_cast<std::size_t>(n);
  }
  return t;
}

void parse_config(const io::Field& f, Task& task) {
  if (f.has("synthesis")) {
    const io::Field s = f["synthesis"];
    SynthesisConfig& c = task.synthesis;
    if (s.has("goal_error_tolerance")) c.goal_error_tolerance = s["goal_error_tolerance"].as_number();
    if (s.has("heuristic_scale")) c.heuristic_scale = s["heuristic_scale"].as_number();
    if (s.has("max_parts")) c.max_parts = s["max_parts"].as_index();
    if (s.has("max_expansions")) c.max_expansions = s["max_expansions"].as_index();
    if (s.has("threads")) c.threads = s["threads"].as_index();
    if (s.has("seed")) c.seed = s["seed"].as_index();
  }
  if (f.has("ik")) {
    const io::Field s = f["ik"];
    IkConfig& c = task.ik;
    if (s.has("max_iterations_per_frame")) c.max_iterations_per_frame = static_cast<int>(s["max_iterations_per_frame"].as_integer());
    if (s.has("damping")) c.damping = s["damping"].as_number();
    if (s.has("restarts")) c.restarts = static_cast<int>(s["restarts"].as_integer());
    if (s.has("convergence_tolerance")) c.convergence_tolerance = s["convergence_tolerance"].as_number();
    if (s.has("collision_penalty")) c.collision_penalty = s["collision_penalty"].as_number();
    if (s.has("seed")) c.seed = s["seed"].as_index();
  }
}

io::json trajectory_json(const Trajectory& t) {
  if (const auto* frames = std::get_if<std::vector<TimedFrame>>(&t.spec)) {
    io::json fs = io::json::array();
    for (const auto& f : *frames) fs.push_back({{"time", f.time}, {"frame", io::to_json(f.frame)}});
    return {{"type", "frames"}, {"frames", fs}};
  }
  const auto& c = std::get<ParametricCurve>(t.spec);
  io::json j = std::visit(
      [](const auto& s) -> io::json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LineCurve>) {
          return {{"type", "line"}, {"from", io::to_json(s.from)}, {"to", io::to_json(s.to)}};
        } else if constexpr (std::is_same_v<S, ArcCurve>) {
          return {{"type", "arc"}, {"center", io::to_json(s.center)}, {"normal", io::to_json(s.normal)},
                  {"start_direction", io::to_json(s.start_direction)}, {"radius", s.radius},
                  {"sweep", s.sweep}};
        } else {
          return {{"type", "helix"}, {"center", io::to_json(s.center)}, {"axis", io::to_json(s.axis)},
                  {"start_direction", io::to_json(s.start_direction)}, {"radius", s.radius},
                  {"sweep", s.sweep}, {"rise", s.rise}};
        }
      },
      c.shape);
  j["duration"] = c.duration;
  j["samples"] = t.samples;
  if (c.up) j["up"] = io::to_json(*c.up);
  return j;
}

}  // namespace

Task parse_task(std::string_view text) {
  const io::json doc = io::parse_text(text);
  const io::Field root(doc, "");
  if (root["format"].as_string() != kTaskFormat)
    root["format"].fail("expected format \"" + std::string(kTaskFormat) + "\"");
  Task task;
  task.library_ref = root.has("library_ref") ? root["library_ref"].as_string() : "";
  if (root.has("base")) task.base = root["base"].as_string();
  if (root.has("base_pose")) task.base_pose = root["base_pose"].as_transform();
  task.trajectory = parse_trajectory(root["trajectory"]);
  task.end_effector = root["end_effector"].as_string();
  if (root.has("obstacles")) {
    const io::Field obs = root["obstacles"];
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const io::Field o = obs.at(i);
      task.obstacles.push_back({o["id"].as_string(), o["primitive"].as_primitive()});
    }
  }
  if (root.has("metric")) task.metric = parse_metric(root["metric"]);
  if (root.has("clearance")) task.clearance = root["clearance"].as_number();
  if (root.has("config")) parse_config(root["config"], task);
  return task;
}

std::string save_task(const Task& task) {
  io::json obstacles = io::json::array();
  for (const auto& o : task.obstacles) obstacles.push_back({{"id", o.id}, {"primitive", io::to_json(o.primitive)}});
  const SynthesisConfig& s = task.synthesis;
  const IkConfig& k = task.ik;
  io::json doc{
      {"format", kTaskFormat},
      {"library_ref", task.library_ref},
      {"base_pose", io::to_json(task.base_pose)},
      {"trajectory", trajectory_json(task.trajectory)},
      {"end_effector", task.end_effector},
      {"obstacles", obstacles},
      {"metric", {{"kind", std::string(to_string(task.metric.kind))}, {"w_rot", task.metric.w_rot}}},
      {"clearance", task.clearance},
      {"config",
       {{"synthesis",
         {{"goal_error_tolerance", s.goal_error_tolerance},
          {"heuristic_scale", s.heuristic_scale},
          {"max_parts", s.max_parts},
          {"max_expansions", s.max_expansions},
          {"threads", s.threads},
          {"seed", s.seed}}},
        {"ik",
         {{"max_iterations_per_frame", k.max_iterations_per_frame},
          {"damping", k.damping},
          {"restarts", k.restarts},
          {"convergence_tolerance", k.convergence_tolerance},
          {"collision_penalty", k.collision_penalty},
          {"seed", k.seed}}}}}};
  if (task.base) doc["base"] = *task.base;
  return io::dump(doc);
}

std::vector<TimedFrame> record_frames(const KinematicChain& chain, const Transform& base_pose,
                                      const std::vector<Pose>& waypoints, std::size_t samples) {
  if (waypoints.empty() || samples == 0) throw ValidationError("need at least one waypoint and one sample");
  for (const Pose& w : waypoints)
    if (static_cast<std::size_t>(w.size()) != chain.dof())
      throw ValidationError("waypoint dimension does not match design DOF");
  std::vector<TimedFrame> frames;
  frames.reserve(samples);
  const std::size_t last = waypoints.size() - 1;
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = samples == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(samples - 1);
    const double x = s * static_cast<double>(last);
    const std::size_t k = std::min(static_cast<std::size_t>(x), last);
    const Pose q = k < last ? Pose(waypoints[k] + (x - static_cast<double>(k)) * (waypoints[k + 1] - waypoints[k]))
                            : waypoints[k];
    frames.push_back({static_cast<double>(i), chain.tool_frame(base_pose, chain.clamp(q))});
  }
  return frames;
}

}  // namespace armsynth
