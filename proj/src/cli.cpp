#include "armsynth/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "armsynth/documents.hpp"
#include "armsynth/error.hpp"
#include "armsynth/ik_solver.hpp"
#include "armsynth/kinematics.hpp"
#include "armsynth/part_library.hpp"
#include "armsynth/service.hpp"
#include "armsynth/synthesis.hpp"
#include "armsynth/task.hpp"

namespace armsynth {

namespace fs = std::filesystem;

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << body;
}

template <typename Fn>
auto load(const std::string& what, const std::string& path, Fn fn) {
  try {
    return fn(read_file(path));
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(what + " '" + path + "': " + e.what());
  }
}

PartLibrary load_library_file(const std::string& path) {
  return load("library", path, [](const std::string& s) { return parse_library(s); });
}

Task load_task_file(const std::string& path, const PartLibrary& lib) {
  return load("task", path, [&](const std::string& s) {
    Task t = parse_task(s);
    validate_task(t, lib);
    return t;
  });
}

Design load_design_file(const std::string& path, const PartLibrary& lib) {
  return load("design", path, [&](const std::string& s) { return parse_design(lib, s); });
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << std::defaultfloat << v;
  return ss.str();
}

int cmd_synth(const std::string& library_path, const std::string& task_path, const std::string& out_path,
              const std::string& trace_path, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> threads, const std::string& result_path, std::ostream& out) {
  const PartLibrary lib = load_library_file(library_path);
  Task task = load_task_file(task_path, lib);
  if (seed) task.synthesis.seed = *seed;
  if (threads) task.synthesis.threads = *threads;

  const SynthesisResult r = synthesize(lib, task);
  if (!trace_path.empty()) write_file(trace_path, r.trace.to_ndjson());
  if (!result_path.empty())
    write_file(result_path, documents::dump(documents::synthesis_result(lib, task, r)));

  if (!r.success) {
    out << "exhausted: " << r.exhausted_reason << " after " << r.expansions << " expansions\n";
    if (r.incumbent) {
      out << "incumbent: " << r.incumbent->design.signature() << " g=" << format_number(r.incumbent->g);
      if (r.incumbent->ik_evaluated) out << " e_ik=" << format_number(r.incumbent->cached_ik.total_error);
      out << "\n";
    }
    return kExitExhausted;
  }
  write_file(out_path, save_design(r.design));
  out << "design: " << r.design.signature() << "\n"
      << "dof: " << design_dof(lib, r.design) << "\n"
      << "design_cost: " << format_number(design_cost(lib, r.design)) << "\n"
      << "e_ik: " << format_number(r.ik.total_error) << "\n"
      << "expansions: " << r.expansions << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& library_path, const std::string& task_path, const std::string& design_path,
                 const std::string& format, std::ostream& out) {
  const PartLibrary lib = load_library_file(library_path);
  const Task task = load_task_file(task_path, lib);
  const Design design = load_design_file(design_path, lib);
  const auto report = documents::validation_report(lib, design, task);
  if (format == "structured") {
    out << documents::dump(report);
    return kExitOk;
  }
  out << "design: " << design.signature() << "\n"
      << "dof: " << report["dof"].get<std::size_t>() << "\n"
      << "design_cost: " << format_number(report["design_cost"].get<double>()) << "\n"
      << "total_error: " << format_number(report["ik"]["total_error"].get<double>()) << "\n"
      << "per_frame_error:";
  for (double e : report["ik"]["per_frame_error"]) out << " " << format_number(e);
  out << "\n";
  out << "collision_free: " << (report["ik"]["collision_free"].get<bool>() ? "yes" : "no") << "\n";
  for (const auto& c : report["collisions"]) out << "collision: frame " << c["frame"].get<std::size_t>() << " " << c["contacts"].dump() << "\n";
  for (const auto& w : report["warnings"]) out << "warning: " << w.get<std::string>() << "\n";
  return kExitOk;
}

int cmd_experiment(const std::string& library_path, const std::string& fixtures_dir,
                   std::optional<std::size_t> threads, std::ostream& out, std::ostream& err) {
  const PartLibrary lib = load_library_file(library_path);
  if (!fs::is_directory(fixtures_dir)) throw InputError("fixtures directory '" + fixtures_dir + "' not found");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(fixtures_dir)) {
    const std::string file = entry.path().filename().string();
    constexpr std::string_view suffix = ".design.json";
    if (file.size() > suffix.size() && file.ends_with(suffix)) names.push_back(file.substr(0, file.size() - suffix.size()));
  }
  std::sort(names.begin(), names.end());

  out << std::left << std::setw(28) << "fixture" << std::setw(10) << "dof_orig" << std::setw(11) << "dof_synth"
      << std::setw(12) << "cost_synth" << std::setw(14) << "e_ik" << std::setw(10) << "wall_s" << "status\n";
  std::size_t cases = 0, succeeded = 0, not_more = 0, fewer = 0;
  for (const auto& name : names) {
    ++cases;
    const fs::path base = fs::path(fixtures_dir) / name;
    try {
      const Design original = load_design_file(base.string() + ".design.json", lib);
      Task task = load_task_file(base.string() + ".task.json", lib);
      if (threads) task.synthesis.threads = *threads;
      const auto t0 = std::chrono::steady_clock::now();
      const SynthesisResult r = synthesize(lib, task);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const std::size_t dof_orig = design_dof(lib, original);
      out << std::setw(28) << name << std::setw(10) << dof_orig;
      if (r.success) {
        const std::size_t dof_synth = design_dof(lib, r.design);
        ++succeeded;
        if (dof_synth <= dof_orig) ++not_more;
        if (dof_synth < dof_orig) ++fewer;
        out << std::setw(11) << dof_synth << std::setw(12) << format_number(design_cost(lib, r.design))
            << std::setw(14) << format_number(r.ik.total_error) << std::setw(10) << format_number(wall)
            << (dof_synth < dof_orig ? "simpler" : "ok") << "\n";
      } else {
        out << std::setw(11) << "-" << std::setw(12) << "-" << std::setw(14) << "-" << std::setw(10)
            << format_number(wall) << "exhausted:" << r.exhausted_reason << "\n";
      }
    } catch (const std::exception& e) {
      out << std::setw(28) << name << "error\n";
      err << name << ": " << e.what() << "\n";
    }
  }
  out << "summary cases=" << cases << " succeeded=" << succeeded << " dof_synth<=dof_orig=" << not_more
      << " dof_synth<dof_orig=" << fewer << "\n";
  return kExitOk;
}

std::vector<double> parse_angles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InputError("bad joint angle '" + item + "'");
    }
  }
  return out;
}

int cmd_fk(const std::string& library_path, const std::string& design_path, const std::string& angles,
           std::ostream& out) {
  const PartLibrary lib = load_library_file(library_path);
  const Design d = load_design_file(design_path, lib);
  const std::vector<double> a = parse_angles(angles);
  const Pose q = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  std::vector<Transform> frames;
  try {
    frames = forward_kinematics(lib, d, Transform::Identity(), q);
  } catch (const KinematicsError& e) {
    throw InputError(e.what());
  }
  const KinematicChain chain(lib, d);
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& t = frames[i];
    doc.push_back({{"part", chain.element(i).part->id},
                   {"rotation", {t.rotation().w(), t.rotation().x(), t.rotation().y(), t.rotation().z()}},
                   {"translation", {t.translation().x(), t.translation().y(), t.translation().z()}}});
  }
  out << documents::dump(doc);
  return kExitOk;
}

/*
 * Records the tool frames of `design` while its joints move piecewise
 * linearly through the given waypoints, producing a task with an explicit
 * trajectory.
 */
int cmd_record(const std::string& library_path, const std::string& design_path, const std::string& joints_path,
               const std::string& out_path, std::size_t samples, const std::string& metric_kind,
               std::ostream& out) {
  const PartLibrary lib = load_library_file(library_path);
  const Design d = load_design_file(design_path, lib);
  if (!is_terminated(lib, d)) throw InputError("design has no end-effector to record");
  const nlohmann::json waypoints = load("joints", joints_path, [](const std::string& s) {
    return nlohmann::json::parse(s).at("waypoints");
  });
  const KinematicChain chain(lib, d);
  std::vector<Pose> wp;
  for (const auto& w : waypoints) {
    std::vector<double> v = w.get<std::vector<double>>();
    if (v.size() != chain.dof()) throw InputError("waypoint dimension does not match design DOF");
    wp.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  if (wp.empty() || samples == 0) throw InputError("need at least one waypoint and one sample");

  Task task;
  task.library_ref = library_id(save_library(lib));
  task.base = d.base();
  task.end_effector = d.tip();
  if (metric_kind == "position_only") task.metric = ErrorMetric::position_only();
  else if (metric_kind == "full_pose") task.metric = ErrorMetric::full_pose();
  else if (metric_kind != "position_and_axis") throw InputError("unknown metric '" + metric_kind + "'");
  std::vector<TimedFrame> frames = record_frames(chain, task.base_pose, wp, samples);
  task.trajectory.spec = std::move(frames);
  task.trajectory.samples = samples;
  write_file(out_path, save_task(task));
  out << "recorded " << samples << " frames to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Modular robot arm synthesis"};
  app.require_subcommand(1);

  std::string library, task, design, out_file, trace, result, format = "text", fixtures, angles, joints;
  std::string metric = "position_only";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::size_t samples = kDefaultSamples;

  auto* synth = app.add_subcommand("synth", "Synthesize the simplest design tracking the task trajectory");
  synth->add_option("--library", library, "Library file")->required();
  synth->add_option("--task", task, "Task file")->required();
  synth->add_option("--out", out_file, "Design file to write")->required();
  synth->add_option("--trace", trace, "Write the search trace (one JSON event per line)");
  synth->add_option("--result", result, "Write the structured result document");
  synth->add_option("--seed", seed, "Override the search seed");
  synth->add_option("--threads", threads, "Heuristic evaluation threads");

  auto* validate = app.add_subcommand("validate", "Report tracking error of a design against a task");
  validate->add_option("--library", library)->required();
  validate->add_option("--task", task)->required();
  validate->add_option("--design", design)->required();
  validate->add_option("--format", format)->check(CLI::IsMember({"text", "structured"}));

  auto* experiment = app.add_subcommand("experiment-v", "Re-synthesize recorded fixture trajectories");
  experiment->add_option("--library", library)->required();
  experiment->add_option("--fixtures", fixtures, "Directory of <name>.design.json / <name>.task.json pairs")->required();
  experiment->add_option("--threads", threads);

  auto* fk = app.add_subcommand("fk", "Forward kinematics of a design");
  fk->add_option("--library", library)->required();
  fk->add_option("--design", design)->required();
  fk->add_option("--angles", angles, "Comma separated joint angles (radians)");

  auto* record = app.add_subcommand("record", "Record a task trajectory from a design's joint waypoints");
  record->add_option("--library", library)->required();
  record->add_option("--design", design)->required();
  record->add_option("--joints", joints, "JSON file {\"waypoints\": [[...], ...]}")->required();
  record->add_option("--out", out_file)->required();
  record->add_option("--samples", samples);
  record->add_option("--metric", metric)->check(CLI::IsMember({"position_only", "position_and_axis", "full_pose"}));

  ServiceConfig service;
  std::string storage;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", service.host)->envname("ARMSYNTH_HOST");
  serve->add_option("--port", service.port)->envname("ARMSYNTH_PORT");
  serve->add_option("--jobs", service.job_concurrency, "Concurrent synthesis jobs")->envname("ARMSYNTH_JOBS");
  serve->add_option("--storage", storage, "Directory for library and task blobs")->envname("ARMSYNTH_STORAGE");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (*synth) return cmd_synth(library, task, out_file, trace, seed, threads, result, out);
    if (*validate) return cmd_validate(library, task, design, format, out);
    if (*experiment) return cmd_experiment(library, fixtures, threads, out, err);
    if (*fk) return cmd_fk(library, design, angles, out);
    if (*record) return cmd_record(library, design, joints, out_file, samples, metric, out);
    if (*serve) {
      if (!storage.empty()) service.storage_dir = storage;
      Service svc(service);
      err << "listening on " << service.host << ":" << service.port << "\n";
      svc.run();
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace armsynth
