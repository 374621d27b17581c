#include "rewardkit/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <unordered_set>
#include <variant>

#include <nlohmann/json.hpp>

#include "rewardkit/text.hpp"

namespace rewardkit::server {
namespace {

using nlohmann::json;

std::string error_reply(std::size_t line_no, std::string_view kind, const std::string& message) {
  return json{{"error", {{"line", line_no}, {"kind", kind}, {"message", message}}}}.dump();
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

std::string handle_request_line(const pipeline::Scorer& scorer, std::string_view line, std::size_t line_no) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception& e) {
    return error_reply(line_no, "malformed", e.what());
  }
  const json* items = nullptr;
  if (request.is_array()) {
    items = &request;
  } else if (request.is_object() && request.contains("records") && request.at("records").is_array()) {
    items = &request.at("records");
  } else {
    return error_reply(line_no, "malformed", "request must be a JSON array or an object with a 'records' array");
  }

  // Records that fail to parse are answered in-band at their position.
  std::vector<pipeline::RolloutRecord> valid;
  std::vector<std::variant<std::size_t, json>> slots;  // index into valid, or a ready error entry
  std::unordered_set<std::string> ids;
  for (const auto& item : *items) {
    json id = nullptr;
    if (item.is_object() && item.contains("id")) {
      id = item.at("id").is_number_integer() ? json(item.at("id").dump()) : item.at("id");
    }
    if (id.is_string() && !ids.insert(id.get<std::string>()).second) {
      return error_reply(line_no, "validation", "duplicate record id '" + id.get<std::string>() + "' in batch");
    }
    try {
      valid.push_back(pipeline::record_from_json(item));
      slots.emplace_back(valid.size() - 1);
    } catch (const std::exception& e) {
      slots.emplace_back(json{{"id", id}, {"error", e.what()}});
    }
  }

  std::vector<pipeline::RewardSignal> scored;
  try {
    scored = scorer.score_batch(valid);
  } catch (const pipeline::BatchValidationError& e) {
    return error_reply(line_no, "validation", e.what());
  } catch (const std::exception& e) {
    return error_reply(line_no, "internal", e.what());
  }

  json results = json::array();
  for (const auto& slot : slots) {
    if (const auto* index = std::get_if<std::size_t>(&slot)) {
      results.push_back(pipeline::signal_to_json(scored[*index]));
    } else {
      results.push_back(std::get<json>(slot));
    }
  }
  return json{{"results", std::move(results)}}.dump();
}

void serve_stream(const pipeline::Scorer& scorer, std::istream& in, std::ostream& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    out << handle_request_line(scorer, line, line_no) << '\n';
    out.flush();
  }
}

RewardServer::RewardServer(std::shared_ptr<const pipeline::Scorer> scorer, ServeOptions options)
    : scorer_(std::move(scorer)), options_(std::move(options)) {}

RewardServer::~RewardServer() { stop(); }

std::uint16_t RewardServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.port);
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    throw std::runtime_error("bad listen address " + options_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    throw std::runtime_error(std::string("bind: ") + std::strerror(errno));
  }
  if (::listen(listen_fd_, 64) < 0) throw std::runtime_error(std::string("listen: ") + std::strerror(errno));
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  return ntohs(addr.sin_port);
}

void RewardServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(mutex_);
    if (!running_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void RewardServer::handle_connection(int fd) {
  std::string buffer;
  std::size_t line_no = 0;
  char chunk[65536];
  bool alive = true;
  while (alive) {
    const auto n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (auto nl = buffer.find('\n', start); nl != std::string::npos; nl = buffer.find('\n', start)) {
      const std::string_view line(buffer.data() + start, nl - start);
      start = nl + 1;
      ++line_no;
      if (text::trim(line).empty()) continue;
      if (!write_all(fd, handle_request_line(*scorer_, line, line_no) + "\n")) {
        alive = false;
        break;
      }
    }
    buffer.erase(0, start);
  }
  std::lock_guard lock(mutex_);
  std::erase(client_fds_, fd);
  ::close(fd);
}

void RewardServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    for (const int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
}

void RewardServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

}  // namespace rewardkit::server
