#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>

#include "reqlens/knowledge_base.hpp"
#include "reqlens/pipeline.hpp"

namespace httplib {
class Server;
}

namespace reqlens {

struct ServiceOptions {
  // Each project persists to <projects_dir>/<id>.kb.json after every
  // mutation; empty keeps projects in memory only.
  std::filesystem::path projects_dir;
  std::size_t max_sentences = 500;
  std::optional<std::filesystem::path> ui_dir;  // served under /ui
};

// HTTP front end over the pipeline and per-project knowledge bases. Requests
// for distinct projects run in parallel; mutations of one project hold its
// exclusive lock, reads share it.
class Service {
 public:
  Service(const Pipeline& pipeline, ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds `host`; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Serves on the bound socket until stop(). Blocks.
  void listen();
  // bind + listen on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Project {
    std::shared_mutex mutex;
    ProjectKB kb;
  };

  void routes();
  std::shared_ptr<Project> project(const std::string& id);
  std::shared_ptr<Project> create_project(const std::string& id);
  void persist(const ProjectKB& kb) const;
  void load_existing();

  const Pipeline& pipeline_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;

  std::mutex projects_mutex_;
  std::map<std::string, std::shared_ptr<Project>> projects_;
  std::size_t generated_ids_ = 0;
};

}  // namespace reqlens
