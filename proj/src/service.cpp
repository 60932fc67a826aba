#include "armsynth/service.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stop_token>
#include <thread>

#include "armsynth/documents.hpp"
#include "armsynth/error.hpp"
#include "armsynth/part_library.hpp"
#include "armsynth/synthesis.hpp"
#include "armsynth/task.hpp"

// After the Eigen headers: <resolv.h> defines a `_res` macro.
#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

namespace armsynth {

using json = nlohmann::json;

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Succeeded: return "succeeded";
    case JobState::Failed: return "failed";
    case JobState::Cancelled: return "cancelled";
  }
  return "unknown";
}

std::string library_id(std::string_view canonical_library) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(canonical_library.data(), canonical_library.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return ss.str();
}

namespace {

struct Job {
  std::string id;
  Task task;
  std::shared_ptr<const PartLibrary> library;

  mutable std::mutex mu;
  mutable std::condition_variable cv;
  JobState state = JobState::Queued;
  std::vector<std::string> events;
  std::optional<std::string> result;
  std::stop_source stop;

  bool finished() const {
    return state == JobState::Succeeded || state == JobState::Failed || state == JobState::Cancelled;
  }
};

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
  int status;
};

void write_file(const std::filesystem::path& p, std::string_view body) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << body;
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  std::thread listener;

  mutable std::mutex mu;
  std::map<std::string, std::shared_ptr<const PartLibrary>> libraries;
  std::map<std::string, std::string> library_text;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::size_t next_job = 1;

  std::mutex queue_mu;
  std::condition_variable_any queue_cv;
  std::deque<std::shared_ptr<Job>> queue;
  std::vector<std::jthread> workers;

  explicit Impl(ServiceConfig c) : config(std::move(c)) {
    for (std::size_t i = 0; i < std::max<std::size_t>(1, config.job_concurrency); ++i)
      workers.emplace_back([this](std::stop_token st) { worker_loop(st); });
    routes();
  }

  ~Impl() {
    server.stop();
    if (listener.joinable()) listener.join();
    {
      std::lock_guard lk(mu);
      for (auto& [id, job] : jobs) job->stop.request_stop();
    }
    for (auto& w : workers) w.request_stop();
    queue_cv.notify_all();
  }

  std::shared_ptr<const PartLibrary> find_library(const std::string& id) const {
    std::lock_guard lk(mu);
    auto it = libraries.find(id);
    return it == libraries.end() ? nullptr : it->second;
  }

  std::shared_ptr<Job> find_job(const std::string& id) const {
    std::lock_guard lk(mu);
    auto it = jobs.find(id);
    if (it == jobs.end()) throw HttpError(404, "unknown job '" + id + "'");
    return it->second;
  }

  std::string add_library(std::string_view body) {
    PartLibrary lib = [&] {
      try {
        return parse_library(body);
      } catch (const std::exception& e) {
        throw HttpError(422, e.what());
      }
    }();
    std::string canonical = save_library(lib);
    std::string id = library_id(canonical);
    std::lock_guard lk(mu);
    if (!libraries.contains(id)) {
      libraries.emplace(id, std::make_shared<const PartLibrary>(std::move(lib)));
      if (config.storage_dir) write_file(*config.storage_dir / "libraries" / (id + ".json"), canonical);
      library_text.emplace(id, std::move(canonical));
    }
    return id;
  }

  std::string submit(std::string_view body) {
    Task task = [&] {
      try {
        return parse_task(body);
      } catch (const std::exception& e) {
        throw HttpError(422, e.what());
      }
    }();
    auto lib = find_library(task.library_ref);
    if (!lib) throw HttpError(404, "unknown library '" + task.library_ref + "'");
    try {
      validate_task(task, *lib);
    } catch (const std::exception& e) {
      throw HttpError(422, e.what());
    }
    auto job = std::make_shared<Job>();
    job->task = std::move(task);
    job->library = std::move(lib);
    {
      std::lock_guard lk(mu);
      job->id = "job-" + std::to_string(next_job++);
      jobs.emplace(job->id, job);
    }
    if (config.storage_dir) write_file(*config.storage_dir / "tasks" / (job->id + ".json"), body);
    {
      std::lock_guard lk(queue_mu);
      queue.push_back(job);
    }
    queue_cv.notify_one();
    return job->id;
  }

  void worker_loop(std::stop_token st) {
    while (true) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lk(queue_mu);
        if (!queue_cv.wait(lk, st, [&] { return !queue.empty(); })) return;
        job = queue.front();
        queue.pop_front();
      }
      run_job(*job);
    }
  }

  static void set_state(Job& job, JobState s) {
    std::lock_guard lk(job.mu);
    job.state = s;
    job.cv.notify_all();
  }

  void run_job(Job& job) {
    set_state(job, JobState::Running);
    SynthesisOptions options;
    options.stop = job.stop.get_token();
    options.on_event = [&job](const SearchEvent& e) {
      std::string line = to_json_line(e);
      std::lock_guard lk(job.mu);
      job.events.push_back(std::move(line));
      job.cv.notify_all();
    };
    try {
      SynthesisResult r = synthesize(*job.library, job.task, options);
      std::lock_guard lk(job.mu);
      if (r.cancelled) {
        job.state = JobState::Cancelled;
      } else {
        job.result = documents::dump(documents::synthesis_result(*job.library, job.task, r));
        job.state = r.success ? JobState::Succeeded : JobState::Failed;
      }
      job.cv.notify_all();
    } catch (const std::exception& e) {
      std::lock_guard lk(job.mu);
      job.result = documents::dump(json{{"format", "armresult/1"}, {"status", "error"}, {"error", e.what()}});
      job.state = JobState::Failed;
      job.cv.notify_all();
    }
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(documents::dump(body), "application/json");
  }

  template <typename Fn>
  static auto guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        reply(res, e.status, {{"error", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
      }
    };
  }

  json job_status(const Job& job) const {
    std::lock_guard lk(job.mu);
    return {{"id", job.id}, {"state", std::string(to_string(job.state))}, {"events", job.events.size()}};
  }

  void routes() {
    server.Get("/api/v1/health", guarded([](const auto&, auto& res) { reply(res, 200, {{"status", "ok"}}); }));

    server.Post("/api/v1/libraries", guarded([this](const auto& req, auto& res) {
      reply(res, 201, {{"id", add_library(req.body)}});
    }));

    server.Get(R"(/api/v1/libraries/([0-9a-f]+))", guarded([this](const auto& req, auto& res) {
      std::lock_guard lk(mu);
      auto it = library_text.find(req.matches[1]);
      if (it == library_text.end()) throw HttpError(404, "unknown library");
      res.status = 200;
      res.set_content(it->second, "application/json");
    }));

    server.Post(R"(/api/v1/libraries/([0-9a-f]+)/compatible-parts)", guarded([this](const auto& req, auto& res) {
      auto lib = find_library(req.matches[1]);
      if (!lib) throw HttpError(404, "unknown library");
      Design d = [&] {
        try {
          return parse_design(*lib, req.body);
        } catch (const std::exception& e) {
          throw HttpError(422, e.what());
        }
      }();
      reply(res, 200, documents::compatible_rules_json(*lib, d));
    }));

    server.Post("/api/v1/validate", guarded([this](const auto& req, auto& res) {
      Task task{};
      std::shared_ptr<const PartLibrary> lib;
      std::optional<Design> design;
      try {
        const json body = json::parse(req.body);
        task = parse_task(body.at("task").dump());
        lib = find_library(task.library_ref);
        if (!lib) throw HttpError(404, "unknown library '" + task.library_ref + "'");
        design = parse_design(*lib, body.at("design").dump());
        discretize(task.trajectory);
      } catch (const HttpError&) {
        throw;
      } catch (const std::exception& e) {
        throw HttpError(422, e.what());
      }
      reply(res, 200, documents::validation_report(*lib, *design, task));
    }));

    server.Post("/api/v1/jobs", guarded([this](const auto& req, auto& res) {
      reply(res, 201, {{"id", submit(req.body)}});
    }));

    server.Get(R"(/api/v1/jobs/([\w-]+))", guarded([this](const auto& req, auto& res) {
      reply(res, 200, job_status(*find_job(req.matches[1])));
    }));

    server.Post(R"(/api/v1/jobs/([\w-]+)/cancel)", guarded([this](const auto& req, auto& res) {
      auto job = find_job(req.matches[1]);
      job->stop.request_stop();
      reply(res, 202, job_status(*job));
    }));

    server.Get(R"(/api/v1/jobs/([\w-]+)/result)", guarded([this](const auto& req, auto& res) {
      auto job = find_job(req.matches[1]);
      std::lock_guard lk(job->mu);
      if (job->state == JobState::Cancelled) throw HttpError(410, "job was cancelled; no result");
      if (!job->finished()) throw HttpError(409, "job is " + std::string(to_string(job->state)));
      res.status = 200;
      res.set_content(*job->result, "application/json");
    }));

    server.Get(R"(/api/v1/jobs/([\w-]+)/events)", guarded([this](const auto& req, auto& res) {
      auto job = find_job(req.matches[1]);
      std::size_t cursor = 0;
      if (req.has_param("cursor")) {
        cursor = std::stoul(req.get_param_value("cursor"));
      } else if (req.has_header("Last-Event-ID")) {
        cursor = std::stoul(req.get_header_value("Last-Event-ID")) + 1;
      }
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [job, cursor](std::size_t, httplib::DataSink& sink) mutable {
            std::vector<std::string> batch;
            bool done = false;
            JobState state;
            {
              std::unique_lock lk(job->mu);
              job->cv.wait_for(lk, std::chrono::milliseconds(200),
                               [&] { return cursor < job->events.size() || job->finished(); });
              for (std::size_t i = cursor; i < job->events.size(); ++i) batch.push_back(job->events[i]);
              done = job->finished() && cursor + batch.size() == job->events.size();
              state = job->state;
            }
            for (const auto& line : batch) {
              std::string msg = "id: " + std::to_string(cursor) + "\ndata: " + line + "\n\n";
              if (!sink.write(msg.data(), msg.size())) return false;
              ++cursor;
            }
            if (done) {
              std::string msg = "event: end\ndata: {\"state\":\"" + std::string(to_string(state)) + "\"}\n\n";
              sink.write(msg.data(), msg.size());
              sink.done();
            }
            return true;
          });
    }));
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Service::~Service() = default;

int Service::start() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->config.host);
  } else if (!impl_->server.bind_to_port(impl_->config.host, port)) {
    port = -1;
  }
  if (port < 0) throw std::runtime_error("cannot bind " + impl_->config.host);
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::run() {
  if (!impl_->server.listen(impl_->config.host, impl_->config.port))
    throw std::runtime_error("cannot listen on " + impl_->config.host + ":" + std::to_string(impl_->config.port));
}

void Service::stop() { impl_->server.stop(); }

std::string Service::add_library(std::string_view body) { return impl_->add_library(body); }
std::string Service::submit(std::string_view body) { return impl_->submit(body); }

std::optional<JobState> Service::job_state(const std::string& job_id) const {
  try {
    auto job = impl_->find_job(job_id);
    std::lock_guard lk(job->mu);
    return job->state;
  } catch (const HttpError&) {
    return std::nullopt;
  }
}

std::optional<JobState> Service::wait(const std::string& job_id) const {
  std::shared_ptr<Job> job;
  try {
    job = impl_->find_job(job_id);
  } catch (const HttpError&) {
    return std::nullopt;
  }
  std::unique_lock lk(job->mu);
  job->cv.wait(lk, [&] { return job->finished(); });
  return job->state;
}

}  // namespace armsynth
