#include <doctest.h>

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "cskit/lm_bridge.hpp"
#include "support/paths.hpp"

using namespace cskit;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

ScorerEndpoint fake(const std::string& args, std::chrono::milliseconds timeout = 5000ms, int retries = 0) {
  ScorerEndpoint ep;
  ep.transport = Transport::stdio;
  ep.address = std::string(CSKIT_FAKE_SCORER) + " " + args;
  ep.timeout = timeout;
  ep.retries = retries;
  return ep;
}

std::size_t count_lines(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) return 0;
  const auto s = testing_support::slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const std::vector<std::string> kTexts = {"one", "two words", "now three words", "a b c d", "e f g h i"};

// Local HTTP scorer; `fail_first` requests get a 503.
class HttpFake {
 public:
  explicit HttpFake(int fail_first = 0) : fail_left_(fail_first) {
    server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      bodies_.push_back(req.body);
      if (fail_left_ > 0) {
        --fail_left_;
        res.status = 503;
        res.set_content("busy", "text/plain");
        return;
      }
      auto reply_to = [](const json& r) {
        const auto text = r.at("text").get<std::string>();
        const auto n = static_cast<std::int64_t>(std::count(text.begin(), text.end(), ' ') + 1);
        return json{{"id", r.at("id")}, {"logprob_sum", -2.0 * static_cast<double>(n)}, {"num_tokens", n}};
      };
      const json body = json::parse(req.body);
      json out;
      if (body.is_array()) {
        out = json::array();
        for (auto it = body.rbegin(); it != body.rend(); ++it) out.push_back(reply_to(*it));
      } else {
        out = reply_to(body);
      }
      res.set_content(out.dump(), "application/json");
    });
    server_.Post("/teapot", [](const httplib::Request&, httplib::Response& res) { res.status = 418; });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~HttpFake() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path = "/score") const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int requests() const { return requests_; }
  const std::vector<std::string>& bodies() const { return bodies_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> fail_left_;
  std::atomic<int> requests_{0};
  std::vector<std::string> bodies_;
};

ScorerEndpoint http_ep(const std::string& url, int retries = 0) {
  auto ep = parse_endpoint(url);
  ep.timeout = 3000ms;
  ep.retries = retries;
  return ep;
}

}  // namespace

TEST_CASE("endpoint parsing") {
  CHECK(parse_endpoint("null").transport == Transport::null);
  CHECK(parse_endpoint("echo").transport == Transport::echo);
  auto ep = parse_endpoint("stdio:python3 -m sidecar --model x");
  CHECK(ep.transport == Transport::stdio);
  CHECK(ep.address == "python3 -m sidecar --model x");
  ep = parse_endpoint("http://localhost:8080/score");
  CHECK(ep.transport == Transport::http);
  CHECK(ep.address == "http://localhost:8080/score");
  CHECK_THROWS_AS(parse_endpoint("stdio:"), std::invalid_argument);
  CHECK_THROWS_AS(parse_endpoint("ftp://x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_endpoint(""), std::invalid_argument);

  ::setenv("CSKIT_SCORER", "echo", 1);
  CHECK(default_endpoint().transport == Transport::echo);
  ::unsetenv("CSKIT_SCORER");
  CHECK(default_endpoint().transport == Transport::null);
}

TEST_CASE("null and echo scorers") {
  NullScorer null;
  CHECK(null.is_null());
  CHECK(null.score("a b c").logprob_sum == 0.0);
  EchoScorer echo;
  CHECK_FALSE(echo.is_null());
  const auto s = echo.score("I have been putting in long hours today .");
  CHECK(s.logprob_sum == -9.0);
  CHECK(s.num_tokens == 9);
  CHECK(echo.score("one two three four five six seven eight") == LmScore{-8.0, 8, false});
  CHECK(echo.score("x").mean() == -1.0);
  CHECK_THROWS_AS(echo.score_batch(std::vector<std::string>{"ok", "  "}), std::invalid_argument);
  CHECK(echo.score_batch(std::vector<std::string>{}).empty());
}

TEST_CASE("score_pair sends response and history-plus-response") {
  EchoScorer echo;
  const std::vector<Turn> history = {{"a", "hello there"}, {"b", "how are you"}};
  const Turn response{"a", "fine thanks"};
  CHECK(concat_history(history, response, "\n") == "hello there\nhow are you\nfine thanks");
  CHECK(concat_history({}, response, "\n") == "fine thanks");
  auto [r, c] = score_pair(echo, history, response);
  CHECK(r.num_tokens == 2);
  CHECK(c.num_tokens == 7);
}

TEST_CASE("stdio scorer: echo, batch equals singles, one process for many batches") {
  testing_support::TempDir tmp("bridge");
  const auto log = tmp / "starts";
  StdioScorer s(fake("count " + log.string()));
  const auto batch = s.score_batch(kTexts);
  REQUIRE(batch.size() == kTexts.size());
  for (std::size_t i = 0; i < kTexts.size(); ++i) {
    CHECK(batch[i] == s.score(kTexts[i]));
    CHECK(batch[i] == EchoScorer().score(kTexts[i]));
  }
  CHECK(count_lines(log) == 1);
}

TEST_CASE("stdio scorer: out-of-order replies are matched by id") {
  StdioScorer s(fake("reverse"));
  for (int round = 0; round < 3; ++round) {
    const auto batch = s.score_batch(kTexts);
    for (std::size_t i = 0; i < kTexts.size(); ++i) CHECK(batch[i] == EchoScorer().score(kTexts[i]));
  }
}

TEST_CASE("stdio scorer: protocol violations are errors quoting the payload") {
  struct Case {
    const char* mode;
    const char* needle;
  };
  for (const auto& c : {Case{"malformed", "this is not json"}, Case{"unknown-id", "bogus-"},
                        Case{"positive", "logprob_sum <= 0"}, Case{"error", "tokenizer failed"}}) {
    CAPTURE(c.mode);
    StdioScorer s(fake(c.mode, 5000ms, 2));
    CHECK_THROWS_WITH_AS(s.score("a b"), doctest::Contains(c.needle), ProtocolError);
  }
}

TEST_CASE("stdio scorer: protocol errors are not retried") {
  testing_support::TempDir tmp("bridge");
  const auto log = tmp / "starts";
  ScorerEndpoint ep = fake("malformed", 5000ms, 3);
  ep.address = "echo x >> " + log.string() + "; exec " + ep.address;
  StdioScorer s(ep);
  CHECK_THROWS_AS(s.score("a"), ProtocolError);
  CHECK(count_lines(log) == 1);
  // The process is reset after any failure.
  CHECK_THROWS_AS(s.score("a"), ProtocolError);
  CHECK(count_lines(log) == 2);
}

TEST_CASE("stdio scorer: crash reports exit status and stderr") {
  StdioScorer s(fake("crash", 5000ms, 0));
  try {
    s.score("a b");
    FAIL("expected ScorerError");
  } catch (const ProtocolError&) {
    FAIL("crash must not be a protocol error");
  } catch (const ScorerError& e) {
    const std::string what = e.what();
    CHECK(what.find("status 3") != std::string::npos);
    CHECK(what.find("fatal: model exploded") != std::string::npos);
  }
}

TEST_CASE("stdio scorer: transport failures are retried with a fresh process") {
  testing_support::TempDir tmp("bridge");
  StdioScorer s(fake("crash-once " + (tmp / "flag").string(), 5000ms, 1));
  CHECK(s.score("a b c") == LmScore{-3.0, 3, false});

  testing_support::TempDir tmp2("bridge");
  StdioScorer none(fake("crash-once " + (tmp2 / "flag").string(), 5000ms, 0));
  CHECK_THROWS_WITH_AS(none.score("a"), doctest::Contains("1 attempt"), ScorerError);
  CHECK(none.score("a") == LmScore{-1.0, 1, false});
}

TEST_CASE("stdio scorer: a silent process times out") {
  StdioScorer s(fake("hang", 300ms, 1));
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_WITH_AS(s.score("a"), doctest::Contains("timed out"), ScorerError);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed >= 600ms);
  CHECK(elapsed < 5s);
}

TEST_CASE("stdio scorer: unspawnable command fails cleanly") {
  ScorerEndpoint ep = fake("echo", 2000ms, 0);
  ep.address = "/nonexistent/scorer-binary";
  StdioScorer s(ep);
  CHECK_THROWS_AS(s.score("a"), ScorerError);
}

TEST_CASE("stdio scorer: concurrent callers share one process") {
  StdioScorer s(fake("echo"));
  std::vector<std::thread> ts;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&] {
      for (int i = 0; i < 20; ++i) ok += s.score_batch(kTexts) == EchoScorer().score_batch(kTexts);
    });
  }
  for (auto& t : ts) t.join();
  CHECK(ok == 80);
}

TEST_CASE("http scorer: single request as object, batch as array") {
  HttpFake server;
  HttpScorer s(http_ep(server.url()));
  CHECK(s.score("a b c") == LmScore{-6.0, 3, false});
  REQUIRE(server.bodies().size() == 1);
  CHECK(json::parse(server.bodies()[0]).is_object());
  const auto batch = s.score_batch(kTexts);
  CHECK(json::parse(server.bodies()[1]).is_array());
  for (std::size_t i = 0; i < kTexts.size(); ++i) {
    const auto e = EchoScorer().score(kTexts[i]);
    CHECK(batch[i].num_tokens == e.num_tokens);
    CHECK(batch[i].logprob_sum == 2 * e.logprob_sum);
  }
}

TEST_CASE("http scorer: 5xx is retried, 4xx is not") {
  HttpFake server(2);
  HttpScorer retried(http_ep(server.url(), 2));
  CHECK(retried.score("a").num_tokens == 1);
  CHECK(server.requests() == 3);

  HttpFake busy(5);
  HttpScorer gives_up(http_ep(busy.url(), 1));
  CHECK_THROWS_WITH_AS(gives_up.score("a"), doctest::Contains("503"), ScorerError);
  CHECK(busy.requests() == 2);

  HttpScorer teapot(http_ep(server.url("/teapot"), 3));
  CHECK_THROWS_AS(teapot.score("a"), ProtocolError);
}

TEST_CASE("http scorer: unreachable server is a transport error") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto ep = http_ep("http://127.0.0.1:" + std::to_string(port) + "/score", 1);
  ep.timeout = 200ms;
  HttpScorer s(ep);
  try {
    s.score("a");
    FAIL("expected ScorerError");
  } catch (const ProtocolError&) {
    FAIL("not a protocol error");
  } catch (const ScorerError&) {
  }
}

TEST_CASE("make_scorer dispatches on transport") {
  CHECK(make_scorer(parse_endpoint("null"))->is_null());
  CHECK_FALSE(make_scorer(parse_endpoint("echo"))->is_null());
  CHECK(make_scorer(fake("echo"))->score("x y") == LmScore{-2.0, 2, false});
}
