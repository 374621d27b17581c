#pragma once

// Stateless reward service with newline-delimited JSON framing.
//
// Request: one line per batch, either {"records": [RolloutRecord...]} or a
// bare JSON array of records.
// Reply:   one line per request, {"results": [RewardSignal...]} in request
// order, or {"error": {"line": n, "kind": "...", "message": "..."}} when the
// line cannot be scored as a batch. `line` counts request lines on the
// connection starting at 1.

#include <atomic>
#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rewardkit/pipeline.hpp"

namespace rewardkit::server {

/// Scores one request line and returns the reply line (without newline).
std::string handle_request_line(const pipeline::Scorer& scorer, std::string_view line, std::size_t line_no);

/// Serves requests read from `in` until EOF, writing one reply per line.
void serve_stream(const pipeline::Scorer& scorer, std::istream& in, std::ostream& out);

struct ServeOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
};

/// TCP listener; one thread per connection.
class RewardServer {
 public:
  RewardServer(std::shared_ptr<const pipeline::Scorer> scorer, ServeOptions options);
  ~RewardServer();
  RewardServer(const RewardServer&) = delete;
  RewardServer& operator=(const RewardServer&) = delete;

  /// Binds and starts accepting; returns the bound port.
  std::uint16_t start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  void accept_loop();
  void handle_connection(int fd);

  std::shared_ptr<const pipeline::Scorer> scorer_;
  ServeOptions options_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

}  // namespace rewardkit::server
