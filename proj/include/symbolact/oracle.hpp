#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "symbolact/errors.hpp"
#include "symbolact/prompts.hpp"

namespace symbolact {

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha-256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

struct OracleRequest {
  PromptKind kind = PromptKind::kSymbolInit;
  std::string prompt;      // fully rendered user message
  int sample_index = 0;    // distinguishes repeated draws of one prompt
  double temperature = 1.0;
  std::string model;       // http backend only
  std::string role_preamble = kRolePreamble;
};

// Every complete() call is counted on the backend itself so tests can
// reconcile ledgers against ground truth.
class OracleBackend {
 public:
  OracleBackend() = default;
  OracleBackend(OracleBackend&& other) noexcept
      : calls_(other.calls_.load(std::memory_order_relaxed)) {}
  OracleBackend& operator=(OracleBackend&& other) noexcept {
    calls_.store(other.calls_.load(std::memory_order_relaxed), std::memory_order_relaxed);
    return *this;
  }
  virtual ~OracleBackend() = default;

  std::string complete(const OracleRequest& req) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_complete(req);
  }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  virtual std::string do_complete(const OracleRequest& req) = 0;
  std::atomic<std::uint64_t> calls_{0};
};

// Key for scripted tables and replay caches: prompt digests keep the files
// small and make lookups independent of prompt length.
struct CacheKey {
  std::string kind;
  std::string digest;
  int sample = 0;

  bool operator==(const CacheKey& o) const {
    return kind == o.kind && digest == o.digest && sample == o.sample;
  }
};

struct CacheKeyHash {
  size_t operator()(const CacheKey& k) const {
    return std::hash<std::string>()(k.kind) ^ (std::hash<std::string>()(k.digest) << 1) ^
           std::hash<int>()(k.sample);
  }
};

inline CacheKey key_for(const OracleRequest& req) {
  return CacheKey{kind_name(req.kind), sha256_hex(req.prompt), req.sample_index};
}

// Append-only JSONL store of oracle responses keyed by (kind, prompt digest,
// sample index). A key, once written, is never overwritten.
class ReplayCache {
 public:
  ReplayCache() = default;
  ReplayCache(ReplayCache&& other) noexcept { *this = std::move(other); }
  ReplayCache& operator=(ReplayCache&& other) noexcept {
    if (this != &other) {
      std::scoped_lock lock(mutex_, other.mutex_);
      entries_ = std::move(other.entries_);
      path_ = std::move(other.path_);
    }
    return *this;
  }

  static ReplayCache load(const std::string& path, bool must_exist = true) {
    ReplayCache cache;
    cache.path_ = path;
    std::ifstream in(path);
    if (!in) {
      if (must_exist) throw FormatError("cannot open replay cache: " + path);
      return cache;
    }
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw FormatError(path + ":" + std::to_string(line_no) + ": invalid JSON line");
      CacheKey key{j.at("kind").get<std::string>(), j.at("digest").get<std::string>(),
                   j.at("sample").get<int>()};
      std::string response = j.at("response").get<std::string>();
      auto it = cache.entries_.find(key);
      if (it != cache.entries_.end()) {
        if (it->second != response)
          throw FormatError(path + ":" + std::to_string(line_no) +
                            ": conflicting responses for one key");
        continue;
      }
      cache.entries_.emplace(std::move(key), std::move(response));
    }
    return cache;
  }

  void attach_file(const std::string& path) { path_ = path; }

  std::optional<std::string> lookup(const CacheKey& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  // Writes are serialized; an existing key with a different response is an
  // error rather than an overwrite.
  void append(const CacheKey& key, const std::string& response) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      if (it->second != response)
        throw Error("replay cache key already holds a different response");
      return;
    }
    entries_.emplace(key, response);
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::app);
      if (!out) throw FormatError("cannot append to replay cache: " + path_);
      out << record_line(key, response);
    }
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

  static std::string record_line(const CacheKey& key, const std::string& response) {
    nlohmann::ordered_json j;
    j["kind"] = key.kind;
    j["digest"] = key.digest;
    j["sample"] = key.sample;
    j["response"] = response;
    return j.dump() + "\n";
  }

 private:
  mutable std::mutex mutex_;
  std::unordered_map<CacheKey, std::string, CacheKeyHash> entries_;
  std::string path_;
};

// Deterministic table backend: responses are looked up by (kind, prompt
// digest, sample); a miss is a hard error naming the request.
class ScriptedBackend : public OracleBackend {
 public:
  ScriptedBackend() = default;

  static ScriptedBackend from_file(const std::string& path) {
    ScriptedBackend backend;
    backend.cache_ = ReplayCache::load(path);
    backend.cache_.attach_file("");  // table is read-only
    return backend;
  }

  void add(PromptKind kind, const std::string& prompt, int sample,
           const std::string& response) {
    cache_.append(CacheKey{kind_name(kind), sha256_hex(prompt), sample}, response);
  }

  const ReplayCache& table() const { return cache_; }

 private:
  std::string do_complete(const OracleRequest& req) override {
    auto hit = cache_.lookup(key_for(req));
    if (!hit)
      throw OracleMissError("scripted table has no entry for " +
                            std::string(kind_name(req.kind)) + " sample " +
                            std::to_string(req.sample_index) + " prompt \"" +
                            req.prompt.substr(0, 96) + "...\"");
    return *hit;
  }

  ReplayCache cache_;
};

// Replay-only mode: serves a recorded cache and refuses to go further.
class ReplayBackend : public OracleBackend {
 public:
  explicit ReplayBackend(ReplayCache cache) : cache_(std::move(cache)) {}

  static ReplayBackend from_file(const std::string& path) {
    return ReplayBackend(ReplayCache::load(path));
  }

 private:
  std::string do_complete(const OracleRequest& req) override {
    auto hit = cache_.lookup(key_for(req));
    if (!hit)
      throw OracleMissError("replay miss: no recorded response for " +
                            std::string(kind_name(req.kind)) + " sample " +
                            std::to_string(req.sample_index) + " digest " +
                            sha256_hex(req.prompt));
    return *hit;
  }

  ReplayCache cache_;
};

// Read-through recorder: cache hits never reach the inner backend, misses are
// forwarded once and appended.
class RecordingBackend : public OracleBackend {
 public:
  RecordingBackend(OracleBackend& inner, ReplayCache& cache) : inner_(inner), cache_(cache) {}

 private:
  std::string do_complete(const OracleRequest& req) override {
    CacheKey key = key_for(req);
    if (auto hit = cache_.lookup(key)) return *hit;
    std::string response = inner_.complete(req);
    cache_.append(key, response);
    return response;
  }

  OracleBackend& inner_;
  ReplayCache& cache_;
};

namespace detail {
// Counting semaphore with a runtime bound (std::counting_semaphore fixes the
// ceiling at compile time).
class Gate {
 public:
  explicit Gate(int slots) : slots_(slots) {}
  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int slots_;
};
}  // namespace detail

struct HttpBackendConfig {
  std::string url;      // falls back to SYMBOLACT_ORACLE_URL
  std::string api_key;  // falls back to SYMBOLACT_ORACLE_KEY
  int max_retries = 3;  // transport errors, 429 and 5xx
  int max_in_flight = 4;
  int timeout_seconds = 60;
  int retry_pause_ms = 250;
};

// Chat-completion client. The request body carries the role preamble as a
// system message and asks for a single choice.
class HttpBackend : public OracleBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

 private:
  std::string do_complete(const OracleRequest& req) override;

  HttpBackendConfig config_;
  std::string scheme_host_;
  std::string path_;
  detail::Gate gate_;
};

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace symbolact

// The HTTP pieces live out-of-line so only translation units that want the
// client pull in the socket headers.
#ifdef SYMBOLACT_ENABLE_HTTP
#include <httplib.h>

namespace symbolact {

inline HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), gate_(std::max(1, config_.max_in_flight)) {
  if (config_.url.empty()) config_.url = env_or("SYMBOLACT_ORACLE_URL", "");
  if (config_.api_key.empty()) config_.api_key = env_or("SYMBOLACT_ORACLE_KEY", "");
  if (config_.url.empty())
    throw InputError("http backend needs a url (flag, config, or SYMBOLACT_ORACLE_URL)");
  size_t scheme = config_.url.find("://");
  size_t path_start = scheme == std::string::npos
                          ? config_.url.find('/')
                          : config_.url.find('/', scheme + 3);
  if (path_start == std::string::npos) {
    scheme_host_ = config_.url;
    path_ = "/v1/chat/completions";
  } else {
    scheme_host_ = config_.url.substr(0, path_start);
    path_ = config_.url.substr(path_start);
  }
}

inline std::string HttpBackend::do_complete(const OracleRequest& req) {
  gate_.acquire();
  struct Release {
    detail::Gate& g;
    ~Release() { g.release(); }
  } release{gate_};

  nlohmann::ordered_json body;
  body["model"] = req.model;
  body["messages"] = nlohmann::ordered_json::array();
  body["messages"].push_back({{"role", "system"}, {"content", req.role_preamble}});
  body["messages"].push_back({{"role", "user"}, {"content", req.prompt}});
  body["temperature"] = req.temperature;
  body["n"] = 1;
  std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_pause_ms * attempt));
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw TransportError("oracle endpoint returned status " + std::to_string(res->status) +
                           ": " + res->body.substr(0, 200));
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
      throw TransportError("oracle response is not a chat completion: " +
                           res->body.substr(0, 200));
    return j["choices"][0].at("message").at("content").get<std::string>();
  }
  throw TransportError("oracle endpoint unreachable after " +
                       std::to_string(config_.max_retries + 1) + " attempts (" + last_error +
                       ")");
}

}  // namespace symbolact
#endif  // SYMBOLACT_ENABLE_HTTP
