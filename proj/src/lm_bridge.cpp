#include "cskit/lm_bridge.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "cskit/text_util.hpp"

extern char** environ;

namespace cskit {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kStderrTail = 2048;

std::string quote_payload(std::string_view payload) {
  constexpr std::size_t kMax = 300;
  if (payload.size() <= kMax) return std::string(payload);
  return std::string(payload.substr(0, kMax)) + "...";
}

void check_texts(std::span<const std::string> texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (trim(texts[i]).empty()) throw std::invalid_argument("scorer input " + std::to_string(i) + " is empty");
  }
}

// Tracks outstanding ids of one batch and validates replies against them.
class ReplyCollector {
 public:
  ReplyCollector(std::span<const std::string> texts, std::uint64_t& next_id) : results_(texts.size()) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      std::string id = std::to_string(next_id++);
      index_.emplace(id, i);
      requests_.push_back(json{{"id", id}, {"text", texts[i]}});
    }
  }

  const std::vector<json>& requests() const { return requests_; }
  bool complete() const { return answered_ == results_.size(); }
  std::size_t outstanding() const { return results_.size() - answered_; }

  void accept(const json& reply, std::string_view raw) {
    if (!reply.is_object() || !reply.contains("id") || !reply["id"].is_string()) {
      throw ProtocolError("malformed scorer reply (no string id): " + quote_payload(raw));
    }
    const std::string id = reply["id"].get<std::string>();
    auto it = index_.find(id);
    if (it == index_.end()) throw ProtocolError("scorer reply with unknown id \"" + id + "\": " + quote_payload(raw));
    std::optional<LmScore>& slot = results_[it->second];
    if (slot) throw ProtocolError("duplicate scorer reply for id \"" + id + "\": " + quote_payload(raw));
    if (reply.contains("error")) {
      std::string msg = reply["error"].is_string() ? reply["error"].get<std::string>() : reply["error"].dump();
      throw ProtocolError("scorer reported an error for id \"" + id + "\": " + msg);
    }
    const auto lp = reply.find("logprob_sum");
    const auto nt = reply.find("num_tokens");
    if (lp == reply.end() || !lp->is_number() || nt == reply.end() || !nt->is_number_integer()) {
      throw ProtocolError("malformed scorer reply: " + quote_payload(raw));
    }
    LmScore s;
    s.logprob_sum = lp->get<double>();
    s.num_tokens = nt->get<std::int64_t>();
    if (auto tr = reply.find("truncated"); tr != reply.end() && tr->is_boolean()) s.truncated = tr->get<bool>();
    if (!std::isfinite(s.logprob_sum) || s.logprob_sum > 0.0) {
      throw ProtocolError("scorer reply violates logprob_sum <= 0: " + quote_payload(raw));
    }
    if (s.num_tokens < 1) throw ProtocolError("scorer reply violates num_tokens >= 1: " + quote_payload(raw));
    slot = s;
    ++answered_;
  }

  void accept_line(std::string_view line) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw ProtocolError("malformed scorer reply (invalid JSON): " + quote_payload(line));
    }
    accept(j, line);
  }

  std::vector<LmScore> take() {
    std::vector<LmScore> out;
    out.reserve(results_.size());
    for (auto& r : results_) out.push_back(*r);
    return out;
  }

 private:
  std::vector<json> requests_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::optional<LmScore>> results_;
  std::size_t answered_ = 0;
};

template <typename Fn>
std::vector<LmScore> with_retries(const ScorerEndpoint& ep, Fn&& attempt) {
  std::string last;
  for (int i = 0; i <= ep.retries; ++i) {
    try {
      return attempt();
    } catch (const ProtocolError&) {
      throw;
    } catch (const ScorerError& e) {
      last = e.what();
    }
  }
  throw ScorerError("scorer '" + ep.address + "' failed after " + std::to_string(ep.retries + 1) +
                    " attempt(s): " + last);
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exited with status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
  return "stopped";
}

}  // namespace

LmScore LmScorer::score(const std::string& text) { return score_batch(std::span<const std::string>(&text, 1)).at(0); }

std::vector<LmScore> NullScorer::score_batch(std::span<const std::string> texts) {
  check_texts(texts);
  std::vector<LmScore> out;
  for (const auto& t : texts) out.push_back({0.0, static_cast<std::int64_t>(split_whitespace(t).size()), false});
  return out;
}

std::vector<LmScore> EchoScorer::score_batch(std::span<const std::string> texts) {
  check_texts(texts);
  std::vector<LmScore> out;
  for (const auto& t : texts) {
    auto n = static_cast<std::int64_t>(split_whitespace(t).size());
    out.push_back({-static_cast<double>(n), n, false});
  }
  return out;
}

ScorerEndpoint parse_endpoint(std::string_view spec) {
  ScorerEndpoint ep;
  spec = trim(spec);
  if (spec == "null") {
    ep.transport = Transport::null;
    ep.address = "null";
  } else if (spec == "echo") {
    ep.transport = Transport::echo;
    ep.address = "echo";
  } else if (spec.starts_with("stdio:")) {
    ep.transport = Transport::stdio;
    ep.address = std::string(trim(spec.substr(6)));
    if (ep.address.empty()) throw std::invalid_argument("stdio scorer endpoint needs a command line");
  } else if (spec.starts_with("http://")) {
    ep.transport = Transport::http;
    ep.address = std::string(spec);
  } else {
    throw std::invalid_argument("unknown scorer endpoint '" + std::string(spec) +
                                "' (expected null, echo, stdio:<command> or http://host:port[/path])");
  }
  return ep;
}

ScorerEndpoint default_endpoint() {
  const char* env = std::getenv("CSKIT_SCORER");
  if (env == nullptr || trim(env).empty()) return parse_endpoint("null");
  return parse_endpoint(env);
}

// ---- subprocess transport ----

struct StdioScorer::Process {
  pid_t pid = -1;
  int in_fd = -1;   // our end of the child's stdin
  int out_fd = -1;  // child's stdout
  int err_fd = -1;  // child's stderr
  std::string out_buf;
  std::string err_tail;
  std::optional<int> status;

  explicit Process(const std::string& command) {
    int in_pair[2], out_pair[2], err_pair[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0 ||
        ::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, out_pair) != 0 ||
        ::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, err_pair) != 0) {
      throw ScorerError(std::string("socketpair failed: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, in_pair[1], 0);
    posix_spawn_file_actions_adddup2(&fa, out_pair[1], 1);
    posix_spawn_file_actions_adddup2(&fa, err_pair[1], 2);
    const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
    int rc = ::posix_spawn(&pid, "/bin/sh", &fa, nullptr, const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&fa);
    ::close(in_pair[1]);
    ::close(out_pair[1]);
    ::close(err_pair[1]);
    in_fd = in_pair[0];
    out_fd = out_pair[0];
    err_fd = err_pair[0];
    if (rc != 0) {
      close_fds();
      throw ScorerError("cannot spawn scorer '" + command + "': " + std::strerror(rc));
    }
    set_nonblocking(in_fd);
    set_nonblocking(out_fd);
    set_nonblocking(err_fd);
  }

  ~Process() {
    if (in_fd >= 0) {
      ::close(in_fd);
      in_fd = -1;
    }
    if (pid > 0 && !status) {
      // Give a well-behaved scorer a moment to exit on EOF.
      for (int i = 0; i < 20 && !reap(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
      if (!status) {
        ::kill(pid, SIGKILL);
        int st = 0;
        ::waitpid(pid, &st, 0);
      }
    }
    close_fds();
  }

  void close_fds() {
    for (int* fd : {&in_fd, &out_fd, &err_fd}) {
      if (*fd >= 0) ::close(*fd);
      *fd = -1;
    }
  }

  bool reap() {
    if (status) return true;
    int st = 0;
    if (::waitpid(pid, &st, WNOHANG) == pid) status = st;
    return status.has_value();
  }

  void drain_stderr() {
    char buf[4096];
    for (;;) {
      ssize_t n = ::read(err_fd, buf, sizeof buf);
      if (n <= 0) break;
      err_tail.append(buf, static_cast<std::size_t>(n));
      if (err_tail.size() > kStderrTail) err_tail.erase(0, err_tail.size() - kStderrTail);
    }
  }

  std::string diagnostics() {
    drain_stderr();
    for (int i = 0; i < 40 && !reap(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    std::string d = status ? describe_status(*status) : "still running";
    std::string_view tail = trim(err_tail);
    if (!tail.empty()) d += "; stderr: " + std::string(tail);
    return d;
  }
};

StdioScorer::StdioScorer(ScorerEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.timeout.count() <= 0) throw std::invalid_argument("scorer timeout must be > 0");
  if (endpoint_.retries < 0) throw std::invalid_argument("scorer retries must be >= 0");
}

StdioScorer::~StdioScorer() = default;

std::vector<LmScore> StdioScorer::score_batch(std::span<const std::string> texts) {
  check_texts(texts);
  if (texts.empty()) return {};
  std::lock_guard lock(mu_);
  return with_retries(endpoint_, [&] {
    try {
      return attempt(texts);
    } catch (...) {
      // The child's state is unknown after any failure; start fresh next time.
      proc_.reset();
      throw;
    }
  });
}

std::vector<LmScore> StdioScorer::attempt(std::span<const std::string> texts) {
  if (!proc_) proc_ = std::make_unique<Process>(endpoint_.address);
  Process& p = *proc_;
  ReplyCollector collector(texts, next_id_);
  std::string pending;
  for (const json& r : collector.requests()) pending += r.dump() + "\n";
  std::size_t written = 0;
  auto deadline = Clock::now() + endpoint_.timeout;

  while (!collector.complete()) {
    pollfd fds[3] = {{p.out_fd, POLLIN, 0}, {p.err_fd, POLLIN, 0}, {p.in_fd, 0, 0}};
    nfds_t nfds = 2;
    if (written < pending.size()) {
      fds[2].events = POLLOUT;
      nfds = 3;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) {
      throw ScorerError("timed out after " + std::to_string(endpoint_.timeout.count()) + " ms waiting for " +
                        std::to_string(collector.outstanding()) + " repl(ies) (" + p.diagnostics() + ")");
    }
    int rc = ::poll(fds, nfds, static_cast<int>(left));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (fds[1].revents != 0) p.drain_stderr();
    if (nfds == 3 && fds[2].revents != 0) {
      ssize_t n = ::send(p.in_fd, pending.data() + written, pending.size() - written, MSG_NOSIGNAL);
      if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        throw ScorerError("scorer stdin closed (" + p.diagnostics() + ")");
      }
      if (n > 0) written += static_cast<std::size_t>(n);
    }
    if (fds[0].revents != 0) {
      char buf[65536];
      ssize_t n = ::read(p.out_fd, buf, sizeof buf);
      if (n == 0) throw ScorerError("scorer closed its output with " + std::to_string(collector.outstanding()) +
                                    " repl(ies) outstanding (" + p.diagnostics() + ")");
      if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        throw ScorerError(std::string("reading scorer output failed: ") + std::strerror(errno));
      }
      if (n > 0) {
        p.out_buf.append(buf, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (std::size_t nl; (nl = p.out_buf.find('\n', start)) != std::string::npos; start = nl + 1) {
          std::string_view line = trim(std::string_view(p.out_buf).substr(start, nl - start));
          if (line.empty()) continue;
          collector.accept_line(line);
          deadline = Clock::now() + endpoint_.timeout;
        }
        p.out_buf.erase(0, start);
      }
    }
  }
  return collector.take();
}

// ---- HTTP transport ----

HttpScorer::HttpScorer(ScorerEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.timeout.count() <= 0) throw std::invalid_argument("scorer timeout must be > 0");
  if (endpoint_.retries < 0) throw std::invalid_argument("scorer retries must be >= 0");
  std::string_view url = endpoint_.address;
  if (!url.starts_with("http://")) throw std::invalid_argument("http scorer needs an http:// URL: " + endpoint_.address);
  auto slash = url.find('/', 7);
  scheme_host_port_ = std::string(url.substr(0, slash));
  path_ = slash == std::string_view::npos ? "/score" : std::string(url.substr(slash));
  if (scheme_host_port_.size() <= 7) throw std::invalid_argument("http scorer URL has no host: " + endpoint_.address);
}

std::vector<LmScore> HttpScorer::score_batch(std::span<const std::string> texts) {
  check_texts(texts);
  if (texts.empty()) return {};
  std::lock_guard lock(mu_);
  return with_retries(endpoint_, [&] { return attempt(texts); });
}

std::vector<LmScore> HttpScorer::attempt(std::span<const std::string> texts) {
  ReplyCollector collector(texts, next_id_);
  json body = collector.requests().size() == 1 ? collector.requests()[0] : json(collector.requests());

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(endpoint_.timeout);
  client.set_read_timeout(endpoint_.timeout);
  client.set_write_timeout(endpoint_.timeout);
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw ScorerError("HTTP request to " + endpoint_.address + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status >= 500) {
    throw ScorerError("HTTP " + std::to_string(res->status) + " from " + endpoint_.address + ": " +
                      quote_payload(res->body));
  }
  if (res->status != 200) {
    throw ProtocolError("HTTP " + std::to_string(res->status) + " from " + endpoint_.address + ": " +
                        quote_payload(res->body));
  }
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ProtocolError("malformed scorer reply (invalid JSON): " + quote_payload(res->body));
  }
  if (reply.is_array()) {
    for (const json& r : reply) collector.accept(r, r.dump());
  } else {
    collector.accept(reply, res->body);
  }
  if (!collector.complete()) {
    throw ProtocolError("scorer reply is missing " + std::to_string(collector.outstanding()) +
                        " id(s): " + quote_payload(res->body));
  }
  return collector.take();
}

std::unique_ptr<LmScorer> make_scorer(const ScorerEndpoint& endpoint) {
  switch (endpoint.transport) {
    case Transport::null: return std::make_unique<NullScorer>();
    case Transport::echo: return std::make_unique<EchoScorer>();
    case Transport::stdio: return std::make_unique<StdioScorer>(endpoint);
    case Transport::http: return std::make_unique<HttpScorer>(endpoint);
  }
  throw std::invalid_argument("bad transport");
}

std::string concat_history(const std::vector<Turn>& history, const Turn& response, std::string_view separator) {
  std::string out;
  for (const Turn& t : history) {
    out += t.text;
    out += separator;
  }
  out += response.text;
  return out;
}

std::pair<LmScore, LmScore> score_pair(LmScorer& scorer, const std::vector<Turn>& history, const Turn& response,
                                       std::string_view separator) {
  const std::string texts[2] = {response.text, concat_history(history, response, separator)};
  auto scores = scorer.score_batch(texts);
  return {scores.at(0), scores.at(1)};
}

}  // namespace cskit
