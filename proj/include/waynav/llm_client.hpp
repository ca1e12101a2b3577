#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
// httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers included
// after this one.
#ifdef _res
#undef _res
#endif
#include <nlohmann/json.hpp>

#include "waynav/planner.hpp"
#include "waynav/prompting.hpp"

namespace waynav {

// Any chat-completions-compatible endpoint works; the base_url carries an
// optional path prefix (e.g. "http://host:8000/v1").
struct LlmClientConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "gpt-5-mini";
  std::string api_key_env = "LLM_API_KEY";  // name of the env var, not the key
  double timeout_s = 60.0;
  int max_retries = 3;
  double temperature = 0.0;
  double backoff_base_s = 0.5;

  void validate() const {
    if (max_retries < 0) {
      throw std::invalid_argument("LlmClientConfig: retries must be >= 0");
    }
  }
};

struct HttpReply {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;
};

// (path, request body, api key) -> reply. Swappable for tests and for the
// response cache; the default talks HTTP via httplib.
using ChatTransport = std::function<HttpReply(
    const std::string& path, const std::string& body, const std::string& api_key)>;

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hash_key(const std::string& s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

inline ChatTransport make_httplib_transport(const LlmClientConfig& cfg) {
  // Split "scheme://authority/prefix" into client target and path prefix.
  std::string authority = cfg.base_url;
  std::string prefix;
  const size_t scheme = authority.find("://");
  const size_t path_at =
      authority.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_at != std::string::npos) {
    prefix = authority.substr(path_at);
    authority = authority.substr(0, path_at);
  }
  if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  const int timeout = std::max(1, static_cast<int>(cfg.timeout_s));
  return [authority, prefix, timeout](const std::string& path,
                                      const std::string& body,
                                      const std::string& api_key) {
    httplib::Client client(authority);
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.insert({"Authorization", "Bearer " + api_key});
    const auto res =
        client.Post(prefix + path, headers, body, "application/json");
    HttpReply reply;
    if (!res) {
      reply.error = httplib::to_string(res.error());
      return reply;
    }
    reply.transport_ok = true;
    reply.status = res->status;
    reply.body = res->body;
    return reply;
  };
}

// One request/response pair as mirrored to the episode log. The API key
// travels only in the transport header and never appears here.
struct LlmExchange {
  std::string request_body;
  std::string response_content;
  int status = 0;
  int attempts = 0;
  bool from_cache = false;
  bool parse_ok = false;
};

// Chat-LLM planner: serializes the context, queries the endpoint with
// exponential backoff on transport errors and retryable statuses, parses the
// (Thought, Action) reply, re-queries once with a format reminder on parse
// failure, and falls back to Stop (flagging the step) on a second failure.
class LlmPlanner : public PlannerPolicy {
 public:
  using CacheGet = std::function<std::optional<std::string>(const std::string&)>;
  using CachePut = std::function<void(const std::string&, const std::string&)>;

  explicit LlmPlanner(LlmClientConfig cfg, PromptOptions prompt_opts = {})
      : cfg_(std::move(cfg)),
        prompt_opts_(prompt_opts),
        transport_(make_httplib_transport(cfg_)) {
    cfg_.validate();
  }

  void set_transport(ChatTransport t) { transport_ = std::move(t); }
  void set_cache(CacheGet get, CachePut put) {
    cache_get_ = std::move(get);
    cache_put_ = std::move(put);
  }

  static std::string system_prompt() {
    return
        "You are a navigation agent moving between numbered places in an "
        "indoor environment.\n"
        "Each turn you receive:\n"
        "Instruction: the route you must follow.\n"
        "History: places already visited, in order, with scene labels.\n"
        "Trajectory: the sequence of visited place ids.\n"
        "Graph: which places connect to which.\n"
        "VisitInfo: whether each current option was already visited.\n"
        "Supplementary: other unvisited places on the map.\n"
        "Action Options: places you can head to now, with direction and "
        "distance.\n"
        "Follow the instruction step by step. Prefer unvisited options that "
        "match it; if you are off track, backtrack through the graph to a "
        "visited place and explore a better branch. When the instruction is "
        "complete, stop.\n"
        "Reply with exactly two lines:\n"
        "Thought: <one short sentence>\n"
        "Action: <a place id, or stop>";
  }

  PlannerResponse decide(const PromptContext& ctx) override {
    exchanges_.clear();
    last_fallback_ = false;
    std::set<int> valid;
    for (const Node& n : ctx.graph.nodes()) valid.insert(n.id);

    std::string user = serialize_context(ctx, prompt_opts_);
    for (int round = 0; round < 2; ++round) {
      const auto content = complete(user);
      if (!content) break;  // transport exhausted
      const ParseOutcome outcome = parse_response(*content, &valid);
      if (std::holds_alternative<PlannerResponse>(outcome)) {
        exchanges_.back().parse_ok = true;
        return std::get<PlannerResponse>(outcome);
      }
      user += "\n\nYour previous reply could not be parsed ("
              + std::string(to_string(std::get<ParseError>(outcome)))
              + "). Reply with exactly two lines:\nThought: <one short "
                "sentence>\nAction: <a place id from the options, or stop>";
    }
    last_fallback_ = true;
    return {"fallback: unusable planner reply", Stop{}};
  }

  std::string name() const override { return "llm:" + cfg_.model; }

  bool last_fallback() const { return last_fallback_; }
  const std::vector<LlmExchange>& exchanges() const { return exchanges_; }

 private:
  // Returns the assistant message content, or nullopt after exhausting
  // transport retries.
  std::optional<std::string> complete(const std::string& user) {
    nlohmann::json req = {
        {"model", cfg_.model},
        {"messages",
         {{{"role", "system"}, {"content", system_prompt()}},
          {{"role", "user"}, {"content", user}}}},
        {"temperature", cfg_.temperature},
    };
    const std::string body = req.dump();
    LlmExchange ex;
    ex.request_body = body;

    const std::string key = hash_key(body);
    if (cache_get_) {
      if (const auto hit = cache_get_(key)) {
        ex.from_cache = true;
        ex.response_content = *hit;
        exchanges_.push_back(ex);
        return *hit;
      }
    }

    const char* env = std::getenv(cfg_.api_key_env.c_str());
    const std::string api_key = env ? env : "";

    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      ex.attempts = attempt + 1;
      const HttpReply reply = transport_("/chat/completions", body, api_key);
      const bool retryable =
          !reply.transport_ok || reply.status == 429 || reply.status >= 500;
      if (reply.transport_ok && reply.status == 200) {
        const auto content = extract_content(reply.body);
        if (content) {
          ex.status = reply.status;
          ex.response_content = *content;
          exchanges_.push_back(ex);
          if (cache_put_) cache_put_(key, *content);
          return content;
        }
        // Malformed envelope: treat like a server error.
      } else if (!retryable) {
        ex.status = reply.status;
        ex.response_content = reply.body;
        exchanges_.push_back(ex);
        return std::nullopt;
      }
      if (attempt < cfg_.max_retries && cfg_.backoff_base_s > 0.0) {
        const double delay = cfg_.backoff_base_s * std::pow(2.0, attempt);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      }
      ex.status = reply.status;
      ex.response_content = reply.transport_ok ? reply.body : reply.error;
    }
    exchanges_.push_back(ex);
    return std::nullopt;
  }

  static std::optional<std::string> extract_content(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    if (!j.contains("choices") || !j["choices"].is_array() ||
        j["choices"].empty()) {
      return std::nullopt;
    }
    const auto& choice = j["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content")) {
      return std::nullopt;
    }
    return choice["message"]["content"].get<std::string>();
  }

  LlmClientConfig cfg_;
  PromptOptions prompt_opts_;
  ChatTransport transport_;
  CacheGet cache_get_;
  CachePut cache_put_;
  std::vector<LlmExchange> exchanges_;
  bool last_fallback_ = false;
};

}  // namespace waynav
