#pragma once
// Language-model plausibility scores from an external scorer, spoken to over
// a JSON-lines protocol:
//   request  {"id": string, "text": string}
//   reply    {"id": string, "logprob_sum": float, "num_tokens": int}
//   error    {"id": string, "error": string}
// either over a child process's stdin/stdout or as POST bodies to an HTTP
// endpoint (batches as JSON arrays).

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cskit/dialogue.hpp"

namespace cskit {

struct LmScore {
  double logprob_sum = 0.0;
  std::int64_t num_tokens = 1;
  bool truncated = false;

  double mean() const { return logprob_sum / static_cast<double>(num_tokens); }
  friend bool operator==(const LmScore&, const LmScore&) = default;
};

// Transport failure (spawn, timeout, crash, connection). Retried.
class ScorerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The scorer answered, but not in protocol. Never retried; what() quotes the
// offending payload.
class ProtocolError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

enum class Transport { null, echo, stdio, http };

struct ScorerEndpoint {
  Transport transport = Transport::null;
  std::string address;  // command line for stdio, URL for http
  std::chrono::milliseconds timeout{30'000};
  int retries = 2;
};

// "null", "echo", "stdio:<command line>", or an http:// URL. Throws
// std::invalid_argument on anything else.
ScorerEndpoint parse_endpoint(std::string_view spec);

// Endpoint named by $CSKIT_SCORER, or the null scorer when unset.
ScorerEndpoint default_endpoint();

class LmScorer {
 public:
  virtual ~LmScorer() = default;

  // Results are positionally aligned with texts. Every text must be
  // non-blank. All-or-nothing: any failure throws.
  virtual std::vector<LmScore> score_batch(std::span<const std::string> texts) = 0;
  // Null scorers produce placeholder scores; features treat them as 0.
  virtual bool is_null() const { return false; }

  LmScore score(const std::string& text);
};

// logprob_sum 0 for every text.
class NullScorer final : public LmScorer {
 public:
  std::vector<LmScore> score_batch(std::span<const std::string> texts) override;
  bool is_null() const override { return true; }
};

// Deterministic stand-in: logprob_sum = -num_tokens, tokens = whitespace
// pieces.
class EchoScorer final : public LmScorer {
 public:
  std::vector<LmScore> score_batch(std::span<const std::string> texts) override;
};

// Long-lived child process. The process is started lazily, restarted after a
// transport failure, and closed (stdin EOF, then SIGKILL) on destruction.
class StdioScorer final : public LmScorer {
 public:
  explicit StdioScorer(ScorerEndpoint endpoint);
  ~StdioScorer() override;
  StdioScorer(const StdioScorer&) = delete;
  StdioScorer& operator=(const StdioScorer&) = delete;

  std::vector<LmScore> score_batch(std::span<const std::string> texts) override;

 private:
  struct Process;
  std::vector<LmScore> attempt(std::span<const std::string> texts);

  ScorerEndpoint endpoint_;
  std::mutex mu_;
  std::unique_ptr<Process> proc_;
  std::uint64_t next_id_ = 0;
};

class HttpScorer final : public LmScorer {
 public:
  explicit HttpScorer(ScorerEndpoint endpoint);
  std::vector<LmScore> score_batch(std::span<const std::string> texts) override;

 private:
  std::vector<LmScore> attempt(std::span<const std::string> texts);

  ScorerEndpoint endpoint_;
  std::string scheme_host_port_;
  std::string path_;
  std::mutex mu_;
  std::uint64_t next_id_ = 0;
};

std::unique_ptr<LmScorer> make_scorer(const ScorerEndpoint& endpoint);

// Scores for the response alone and for history turns joined with
// `separator` followed by the response, in one batch.
std::pair<LmScore, LmScore> score_pair(LmScorer& scorer, const std::vector<Turn>& history, const Turn& response,
                                       std::string_view separator = "\n");

std::string concat_history(const std::vector<Turn>& history, const Turn& response, std::string_view separator);

}  // namespace cskit
