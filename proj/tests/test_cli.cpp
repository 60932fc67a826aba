#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "armsynth/cli.hpp"
#include "armsynth/service.hpp"
#include "support/fixtures.hpp"
#include "support/replication.hpp"
#include "support/temp_dir.hpp"

using namespace armsynth;
using fixtures::read_text;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Library and a circle-tracking task for the planar fixtures.
struct Workspace {
  fixtures::TempDir dir;
  std::string library;
  std::string task;

  Workspace() {
    const PartLibrary lib = fixtures::planar_library();
    library = dir.write("lib.json", save_library(lib));
    const KinematicChain chain(lib, fixtures::planar_arm(lib, {"link_b"}));
    std::vector<Transform> targets;
    for (int i = 0; i < 6; ++i) targets.push_back(chain.tool_frame(Transform::Identity(), Pose::Constant(1, 0.3 * i)));
    Task t = fixtures::frames_task(targets, "tool");
    t.library_ref = library_id(save_library(lib));
    t.synthesis.max_parts = 6;
    task = dir.write("task.json", save_task(t));
  }
};

}  // namespace

TEST_CASE("synth writes design, trace and result") {
  Workspace ws;
  const CliRun r = cli({"synth", "--library", ws.library, "--task", ws.task, "--out", ws.dir.file("d.json"),
                        "--trace", ws.dir.file("t.ndjson"), "--result", ws.dir.file("r.json")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("design: base/base->joint/joint->link_b/link_b->tool") != std::string::npos);
  const PartLibrary lib = fixtures::planar_library();
  CHECK(parse_design(lib, read_text(ws.dir.file("d.json"))) == fixtures::planar_arm(lib, {"link_b"}));
  const std::string trace = read_text(ws.dir.file("t.ndjson"));
  CHECK(trace.find("\"event\":\"goal_found\"") != std::string::npos);
  CHECK(trace.back() == '\n');
  const auto result = nlohmann::json::parse(read_text(ws.dir.file("r.json")));
  CHECK(result["status"] == "succeeded");
}

TEST_CASE("synth is reproducible, including with threads") {
  Workspace ws;
  for (const char* threads : {"1", "3"}) {
    const std::string tag = threads;
    REQUIRE(cli({"synth", "--library", ws.library, "--task", ws.task, "--out", ws.dir.file("d" + tag + ".json"),
                 "--trace", ws.dir.file("t" + tag), "--seed", "11", "--threads", threads})
                .code == kExitOk);
  }
  CHECK(read_text(ws.dir.file("d1.json")) == read_text(ws.dir.file("d3.json")));
  CHECK(read_text(ws.dir.file("t1")) == read_text(ws.dir.file("t3")));
}

TEST_CASE("exhausted search exits with code 2") {
  fixtures::TempDir dir;
  const PartLibrary lib = fixtures::planar_library();
  Task t = fixtures::frames_task({Transform::FromTranslation(Vector3(3, 0, 0))}, "tool");
  t.synthesis.max_parts = 4;
  const CliRun r = cli({"synth", "--library", dir.write("lib.json", save_library(lib)), "--task",
                        dir.write("task.json", save_task(t)), "--out", dir.file("d.json")});
  CHECK(r.code == kExitExhausted);
  CHECK(r.out.find("exhausted: frontier_empty") != std::string::npos);
  CHECK(r.out.find("incumbent: ") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir.file("d.json")));
}

TEST_CASE("input errors exit with code 1 and name the problem") {
  Workspace ws;
  CliRun r = cli({"synth", "--library", ws.dir.file("missing.json"), "--task", ws.task, "--out", ws.dir.file("d")});
  CHECK(r.code == kExitInputError);
  CHECK(r.err.find("missing.json") != std::string::npos);

  const std::string broken = ws.dir.write("broken.json", "{\"format\": \"armlib/1\",\n \"parts\": [}");
  r = cli({"synth", "--library", broken, "--task", ws.task, "--out", ws.dir.file("d")});
  CHECK(r.code == kExitInputError);
  CHECK(r.err.find("line 2") != std::string::npos);

  CHECK(cli({"synth", "--library", ws.library}).code == kExitInputError);
  CHECK(cli({"validate", "--library", ws.library, "--task", ws.task, "--design", ws.task, "--format", "xml"}).code ==
        kExitInputError);
}

TEST_CASE("validate reports text and structured forms") {
  Workspace ws;
  const PartLibrary lib = fixtures::planar_library();
  const std::string design = ws.dir.write("d.json", save_design(fixtures::planar_arm(lib, {"link_a"})));
  CliRun r = cli({"validate", "--library", ws.library, "--task", ws.task, "--design", design});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("dof: 1") != std::string::npos);
  CHECK(r.out.find("collision_free: yes") != std::string::npos);
  r = cli({"validate", "--library", ws.library, "--task", ws.task, "--design", design, "--format", "structured"});
  REQUIRE(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["format"] == "armvalidation/1");
  // link_a is 0.1 m too long for the circle of radius 0.3.
  CHECK(doc["ik"]["total_error"].get<double>() == doctest::Approx(6 * 0.01).epsilon(1e-6));
}

TEST_CASE("fk prints every frame") {
  Workspace ws;
  const PartLibrary lib = fixtures::planar_library();
  const std::string design = ws.dir.write("d.json", save_design(fixtures::planar_arm(lib, {"link_a", "link_b"})));
  CliRun r = cli({"fk", "--library", ws.library, "--design", design, "--angles", "0,1.5707963267948966"});
  REQUIRE(r.code == kExitOk);
  const auto frames = nlohmann::json::parse(r.out);
  REQUIRE(frames.size() == 6);
  CHECK(frames.back()["part"] == "tool");
  CHECK(frames.back()["translation"][0].get<double>() == doctest::Approx(0.4));
  CHECK(frames.back()["translation"][1].get<double>() == doctest::Approx(0.3));
  CHECK(cli({"fk", "--library", ws.library, "--design", design, "--angles", "0"}).code == kExitInputError);
}

TEST_CASE("record produces a task the recorded design tracks exactly") {
  Workspace ws;
  const PartLibrary lib = fixtures::planar_library();
  const std::string design = ws.dir.write("d.json", save_design(fixtures::planar_arm(lib, {"link_a", "link_c"})));
  const std::string joints = ws.dir.write("j.json", R"({"waypoints": [[0, 0.5], [1, -0.5], [0.5, 0.2]]})");
  CliRun r = cli({"record", "--library", ws.library, "--design", design, "--joints", joints, "--out",
                  ws.dir.file("rec.json"), "--samples", "9"});
  REQUIRE(r.code == kExitOk);
  const Task task = parse_task(read_text(ws.dir.file("rec.json")));
  CHECK(task.trajectory.frame_count() == 9);
  CHECK(task.library_ref == library_id(save_library(lib)));
  CHECK(task.metric == ErrorMetric::position_only());
  r = cli({"validate", "--library", ws.library, "--task", ws.dir.file("rec.json"), "--design", design, "--format",
           "structured"});
  REQUIRE(r.code == kExitOk);
  CHECK(nlohmann::json::parse(r.out)["ik"]["total_error"].get<double>() < 9e-8);
}

TEST_CASE("experiment-v summarizes fixture pairs") {
  fixtures::TempDir dir;
  const PartLibrary lib = fixtures::planar_library();
  const std::string library = dir.write("lib.json", save_library(lib));
  std::filesystem::create_directories(dir.path() / "fx");
  const Design original = fixtures::planar_arm(lib, {"link_a", "link_b"});
  const KinematicChain chain(lib, original);
  const auto frames = record_frames(chain, Transform::Identity(), {Eigen::Vector2d(0, 0.4), Eigen::Vector2d(0.8, 0.4)}, 5);
  Task t;
  t.trajectory.spec = frames;
  t.end_effector = "tool";
  t.metric = ErrorMetric::position_only();
  t.synthesis.max_parts = 6;
  dir.write("fx/elbow.design.json", save_design(original));
  dir.write("fx/elbow.task.json", save_task(t));
  const CliRun r = cli({"experiment-v", "--library", library, "--fixtures", dir.file("fx")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("elbow") != std::string::npos);
  CHECK(r.out.find("summary cases=1 succeeded=1 dof_synth<=dof_orig=1") != std::string::npos);
}

TEST_CASE("checked-in data matches the replication fixtures") {
  const std::filesystem::path data = ARMSYNTH_DATA_DIR;
  const PartLibrary lib = fixtures::arm_library();
  CHECK(read_text(data / "library.json") == save_library(lib));
  const std::string id = library_id(save_library(lib));
  for (auto c : fixtures::replication_cases(lib)) {
    CAPTURE(c.name);
    c.task.library_ref = id;
    CHECK(read_text(data / "fixtures" / (c.name + ".design.json")) == save_design(c.original));
    CHECK(read_text(data / "fixtures" / (c.name + ".task.json")) == save_task(c.task));
  }
}
