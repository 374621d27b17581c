#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sstream>

#include "rewardkit/server.hpp"

using namespace rewardkit;
using nlohmann::json;

namespace {

std::shared_ptr<const pipeline::Scorer> verify_scorer() {
  pipeline::PipelineConfig c;
  c.mode = RewardMode::verify;
  return std::make_shared<const pipeline::Scorer>(c);
}

json rec(const std::string& id, const std::string& text, const std::string& truth = "1") {
  return {{"id", id}, {"question_id", "q" + id}, {"response_text", text}, {"ground_truth", truth}};
}

}  // namespace

TEST_CASE("request lines") {
  const auto scorer = verify_scorer();
  CHECK(json::parse(server::handle_request_line(*scorer, "[]", 1)) == json{{"results", json::array()}});

  const auto reply = json::parse(server::handle_request_line(
      *scorer, json{{"records", {rec("a", "\\boxed{1}"), rec("b", "\\boxed{2}")}}}.dump(), 1));
  REQUIRE(reply.at("results").size() == 2);
  CHECK(reply["results"][0]["id"] == "a");
  CHECK(reply["results"][0]["final"] == 1.0);
  CHECK(reply["results"][1]["final"] == 0.0);

  const auto bad = json::parse(server::handle_request_line(*scorer, "{oops", 4));
  CHECK(bad["error"]["line"] == 4);
  CHECK(bad["error"]["kind"] == "malformed");

  const auto dup = json::parse(server::handle_request_line(*scorer, json::array({rec("a", "x"), rec("a", "y")}).dump(), 2));
  CHECK(dup["error"]["kind"] == "validation");

  const auto partial =
      json::parse(server::handle_request_line(*scorer, json::array({rec("a", "\\boxed{1}"), json{{"id", "b"}}}).dump(), 3));
  CHECK(partial["results"][0]["final"] == 1.0);
  CHECK(partial["results"][1]["id"] == "b");
  CHECK(partial["results"][1].contains("error"));
}

TEST_CASE("stream serving survives bad lines and is deterministic") {
  const auto scorer = verify_scorer();
  const std::string batch = json::array({rec("a", "\\boxed{1}"), rec("b", "\\boxed{3}", "3")}).dump();
  std::istringstream in(batch + "\nnot json\n\n" + batch + "\n");
  std::ostringstream out;
  server::serve_stream(*scorer, in, out);
  std::istringstream lines(out.str());
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  CHECK(json::parse(l2)["error"]["line"] == 2);
  CHECK(l1 == l3);
}

TEST_CASE("tcp round trip") {
  server::RewardServer srv(verify_scorer(), server::ServeOptions{});
  const auto port = srv.start();
  REQUIRE(port != 0);

  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  const std::string request = json::array({rec("a", "\\boxed{1}")}).dump() + "\n{bad\n";
  REQUIRE(::send(fd, request.data(), request.size(), 0) == static_cast<ssize_t>(request.size()));
  std::string received;
  char buf[4096];
  while (std::count(received.begin(), received.end(), '\n') < 2) {
    const auto n = ::recv(fd, buf, sizeof(buf), 0);
    REQUIRE(n > 0);
    received.append(buf, static_cast<std::size_t>(n));
  }
  ::close(fd);
  std::istringstream lines(received);
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  CHECK(json::parse(first)["results"][0]["final"] == 1.0);
  CHECK(json::parse(second)["error"]["line"] == 2);
  srv.stop();
}
