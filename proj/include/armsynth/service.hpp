#ifndef ARMSYNTH_SERVICE_HPP
#define ARMSYNTH_SERVICE_HPP

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace armsynth {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t job_concurrency = 2;
  // Library and task blobs are written here when set.
  std::optional<std::filesystem::path> storage_dir;
};

enum class JobState { Queued, Running, Succeeded, Failed, Cancelled };
std::string_view to_string(JobState s);

/// Content address of a library: SHA-256 of its canonical encoding.
std::string library_id(std::string_view canonical_library);

/*
 * HTTP front end under /api/v1/:
 *
 *   POST /libraries                       library file -> {"id"}
 *   GET  /libraries/{id}                  canonical library file
 *   POST /libraries/{id}/compatible-parts design file -> rule list at the tip
 *   POST /validate                        {"task", "design"} -> validation report
 *   POST /jobs                            task file -> {"id"}
 *   GET  /jobs/{id}                       job status
 *   GET  /jobs/{id}/events                server-sent events; message id = trace index
 *   GET  /jobs/{id}/result                result document (409 while running)
 *   POST /jobs/{id}/cancel
 *
 * Jobs run on an in-memory worker pool of `job_concurrency` threads.
 */
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on a background thread; returns the bound port
  /// (config.port == 0 picks a free one). Throws std::runtime_error on failure.
  int start();
  /// Serves on the calling thread until stop().
  void run();
  void stop();

  // In-process entry points used by the HTTP handlers.
  std::string add_library(std::string_view body);
  std::string submit(std::string_view task_body);
  std::optional<JobState> job_state(const std::string& job_id) const;
  /// Blocks until the job leaves Queued/Running.
  std::optional<JobState> wait(const std::string& job_id) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace armsynth

#endif  // ARMSYNTH_SERVICE_HPP
