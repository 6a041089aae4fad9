#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"

#include "gazesum/common.hpp"
#include "gazesum/promptgen.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

// ---- configuration & records ------------------------------------------------

struct LlmBackendConfig {
  // "http" or "mock:<mode>" (modes: echo-selected, fixed-text).
  std::string backend = "mock:echo-selected";
  std::string endpoint;
  std::string embed_endpoint;
  std::string model = "gemini-2.5-pro";
  std::string api_key_env = "GAZESUM_LLM_API_KEY";
  int timeout_ms = 60000;
  int max_retries = 3;
  int backoff_ms = 500;
  double temperature = 0.0;
  std::size_t parallelism = 4;
  // Reply used by the fixed-text mock.
  std::string fixed_text = "This is a fixed summary.";
  // Optional JSONL file receiving every request/response pair.
  std::string transcript_path;

  void validate() const {
    if (timeout_ms <= 0) throw std::invalid_argument("timeout_ms must be positive");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
    if (parallelism == 0) throw std::invalid_argument("parallelism must be positive");
  }
};

inline void from_json(const json& j, LlmBackendConfig& c) {
  c.backend = j.value("backend", c.backend);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.embed_endpoint = j.value("embed_endpoint", c.embed_endpoint);
  c.model = j.value("model", c.model);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  c.temperature = j.value("temperature", c.temperature);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.fixed_text = j.value("fixed_text", c.fixed_text);
  c.transcript_path = j.value("transcript_path", c.transcript_path);
}

struct SummaryRecord {
  std::string session_id;
  MethodKind method = MethodKind::TextOnly;
  std::string prompt_hash;
  std::string summary_text;
  std::string model;
  std::string created_at;
  int retries = 0;
  std::vector<std::string> image_refs;
};

inline json to_json(const SummaryRecord& r) {
  return json{{"session_id", r.session_id},   {"method", to_string(r.method)}, {"prompt_hash", r.prompt_hash},
              {"summary_text", r.summary_text}, {"model", r.model},           {"created_at", r.created_at},
              {"retries", r.retries},           {"image_refs", r.image_refs}};
}

inline SummaryRecord summary_from_json(const json& j) {
  SummaryRecord r;
  r.session_id = j.value("session_id", std::string());
  r.method = parse_method(j.at("method").get<std::string>());
  r.prompt_hash = j.value("prompt_hash", std::string());
  r.summary_text = j.at("summary_text").get<std::string>();
  r.model = j.value("model", std::string());
  r.created_at = j.value("created_at", std::string());
  r.retries = j.value("retries", 0);
  r.image_refs = j.value("image_refs", std::vector<std::string>{});
  return r;
}

// Stable digest of everything the model sees: method, text and image bytes.
inline std::string prompt_hash(const PromptBundle& b) {
  Sha256 h;
  h.update(to_string(b.method)).update(std::string_view("\0", 1)).update(b.text);
  for (const auto& img : b.images) h.update(std::string_view("\0", 1)).update(img.png_bytes);
  return h.hex();
}

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- errors -----------------------------------------------------------------

enum class LlmErrorKind { timeout, auth, malformed, transient, parse, request };

inline std::string to_string(LlmErrorKind k) {
  switch (k) {
    case LlmErrorKind::timeout: return "timeout";
    case LlmErrorKind::auth: return "auth";
    case LlmErrorKind::malformed: return "malformed_response";
    case LlmErrorKind::transient: return "transient";
    case LlmErrorKind::parse: return "parse";
    case LlmErrorKind::request: return "request";
  }
  return "unknown";
}

class LlmError : public std::runtime_error {
 public:
  LlmError(LlmErrorKind kind, const std::string& msg, int status = 0)
      : std::runtime_error(msg), kind_(kind), status_(status) {}
  LlmErrorKind kind() const { return kind_; }
  int status() const { return status_; }
  int attempts = 1;
  bool retryable() const { return kind_ == LlmErrorKind::transient || kind_ == LlmErrorKind::timeout; }

 private:
  LlmErrorKind kind_;
  int status_;
};

class LlmTimeoutError : public LlmError {
 public:
  explicit LlmTimeoutError(const std::string& m) : LlmError(LlmErrorKind::timeout, m) {}
};
class LlmAuthError : public LlmError {
 public:
  LlmAuthError(const std::string& m, int status) : LlmError(LlmErrorKind::auth, m, status) {}
};
class LlmMalformedResponseError : public LlmError {
 public:
  explicit LlmMalformedResponseError(const std::string& m) : LlmError(LlmErrorKind::malformed, m) {}
};
class LlmTransientError : public LlmError {
 public:
  LlmTransientError(const std::string& m, int status = 0) : LlmError(LlmErrorKind::transient, m, status) {}
};
class JudgeParseError : public LlmError {
 public:
  JudgeParseError(const std::string& m, std::string raw) : LlmError(LlmErrorKind::parse, m), raw(std::move(raw)) {}
  std::string raw;
};

// ---- backends -----------------------------------------------------------------

struct ImagePart {
  std::string mime_type = "image/png";
  const std::vector<std::uint8_t>* bytes = nullptr;
};

struct LlmRequest {
  // "summary" or "judge"
  std::string purpose = "summary";
  std::string text;
  std::vector<ImagePart> images;
  double temperature = 0.0;
  std::string model;
  // Sentences the prompt emphasizes. Only offline mocks read this.
  const std::vector<std::string>* focus_hint = nullptr;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string name() const = 0;
  // Returns the model's text or throws an LlmError subclass.
  virtual std::string complete(const LlmRequest& req) = 0;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

// Lowercased alphanumeric runs.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline constexpr std::size_t kMockEmbeddingDim = 1024;

// Token counts hashed into kMockEmbeddingDim buckets.
inline std::vector<double> hashed_bag_of_words(std::string_view text, std::size_t dim = kMockEmbeddingDim) {
  std::vector<double> v(dim, 0.0);
  for (const auto& tok : tokenize(text)) v[fnv1a64(tok) % dim] += 1.0;
  return v;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::string truncate_words(std::string_view text, std::size_t max_words) {
  std::string out;
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) {
      if (words == max_words) break;
      ++words;
    }
    in_word = !space;
    out += c;
  }
  while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
  return out;
}

// Deterministic offline backend.
//   echo-selected: the summary is the request's focus sentences joined by
//     spaces, truncated to 150 words. Without focus sentences (text-only
//     prompts) it picks ceil(n/5) evenly spaced sentences of the article, a
//     uniform-coverage summary. Judge requests get "5,5,5,5".
//   fixed-text: every completion returns the configured string.
class MockBackend : public LlmBackend {
 public:
  enum class Mode { echo_selected, fixed_text };

  explicit MockBackend(Mode mode, std::string fixed = {}) : mode_(mode), fixed_(std::move(fixed)) {}

  std::string name() const override { return mode_ == Mode::echo_selected ? "mock:echo-selected" : "mock:fixed-text"; }

  std::string complete(const LlmRequest& req) override {
    ++calls_;
    if (mode_ == Mode::fixed_text) return fixed_;
    if (req.purpose == "judge") return "5,5,5,5";
    std::vector<std::string> picked;
    if (req.focus_hint && !req.focus_hint->empty()) {
      picked = *req.focus_hint;
    } else {
      auto pos = req.text.rfind("Article Text: ");
      std::string article = pos == std::string::npos ? req.text : req.text.substr(pos + 14);
      auto sentences = segment_sentences(article);
      if (!sentences.empty()) {
        std::size_t n = sentences.size();
        std::size_t k = (n + 4) / 5;
        for (std::size_t i = 0; i < k; ++i) picked.push_back(sentences[(2 * i + 1) * n / (2 * k)]);
      }
    }
    std::string joined;
    for (const auto& s : picked) {
      if (!joined.empty()) joined += ' ';
      joined += s;
    }
    return truncate_words(joined, 150);
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) out.push_back(hashed_bag_of_words(t));
    return out;
  }

  std::size_t calls() const { return calls_.load(); }

 private:
  Mode mode_;
  std::string fixed_;
  std::atomic<std::size_t> calls_{0};
};

// Generic JSON-over-HTTP backend.
//
// Completion request body:
//   {"model", "temperature", "purpose",
//    "messages": [{"role": "user", "content": [
//        {"type": "image", "mime_type": "image/png", "data": <base64>}, ...,
//        {"type": "text", "text": <prompt>}]}]}
// Accepted replies: {"text": ...}, OpenAI-style {"choices": [{"message": {"content": ...}}]}
// or Gemini-style {"candidates": [{"content": {"parts": [{"text": ...}]}}]}.
//
// Embedding request: {"model", "input": [texts]} to embed_endpoint, reply
// {"embeddings": [[...]]} or {"data": [{"embedding": [...]}]}.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(LlmBackendConfig cfg) : cfg_(std::move(cfg)) {}

  std::string name() const override { return "http:" + cfg_.model; }

  std::string complete(const LlmRequest& req) override {
    json content = json::array();
    for (const auto& img : req.images)
      content.push_back({{"type", "image"}, {"mime_type", img.mime_type}, {"data", base64_encode(*img.bytes)}});
    content.push_back({{"type", "text"}, {"text", req.text}});
    json body{{"model", req.model.empty() ? cfg_.model : req.model},
              {"temperature", req.temperature},
              {"purpose", req.purpose},
              {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
    json reply = post(cfg_.endpoint, body);
    if (reply.contains("text") && reply["text"].is_string()) return reply["text"].get<std::string>();
    try {
      if (reply.contains("choices")) return reply["choices"].at(0).at("message").at("content").get<std::string>();
      if (reply.contains("candidates")) {
        std::string out;
        for (const auto& p : reply["candidates"].at(0).at("content").at("parts"))
          if (p.contains("text")) out += p["text"].get<std::string>();
        return out;
      }
    } catch (const json::exception& e) {
      throw LlmMalformedResponseError(std::string("unexpected completion shape: ") + e.what());
    }
    throw LlmMalformedResponseError("completion reply has no text field");
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    const std::string& url = cfg_.embed_endpoint.empty() ? cfg_.endpoint : cfg_.embed_endpoint;
    json reply = post(url, json{{"model", cfg_.model}, {"input", texts}});
    try {
      if (reply.contains("embeddings")) return reply["embeddings"].get<std::vector<std::vector<double>>>();
      if (reply.contains("data")) {
        std::vector<std::vector<double>> out;
        for (const auto& d : reply["data"]) out.push_back(d.at("embedding").get<std::vector<double>>());
        return out;
      }
    } catch (const json::exception& e) {
      throw LlmMalformedResponseError(std::string("unexpected embedding shape: ") + e.what());
    }
    throw LlmMalformedResponseError("embedding reply has no vectors");
  }

 private:
  static std::pair<std::string, std::string> split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw std::invalid_argument("bad endpoint URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
  }

  json post(const std::string& url, const json& body) const {
    auto [base, path] = split_url(url);
    httplib::Client cli(base);
    auto secs = cfg_.timeout_ms / 1000;
    auto usecs = (cfg_.timeout_ms % 1000) * 1000;
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      auto err = res.error();
      std::string what = "request to " + url + " failed: " + httplib::to_string(err);
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) throw LlmTimeoutError(what);
      throw LlmTransientError(what);
    }
    int status = res->status;
    if (status == 401 || status == 403) throw LlmAuthError("backend rejected credentials (HTTP " + std::to_string(status) + ")", status);
    if (status == 408) throw LlmTimeoutError("backend timed out (HTTP 408)");
    if (status == 429 || status >= 500) throw LlmTransientError("backend unavailable (HTTP " + std::to_string(status) + ")", status);
    if (status >= 400) throw LlmError(LlmErrorKind::request, "backend refused request (HTTP " + std::to_string(status) + "): " + res->body, status);
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw LlmMalformedResponseError(std::string("backend reply is not JSON: ") + e.what());
    }
  }

  LlmBackendConfig cfg_;
};

inline std::shared_ptr<LlmBackend> make_backend(const LlmBackendConfig& cfg) {
  const std::string& b = cfg.backend;
  if (b == "http") {
    if (cfg.endpoint.empty()) throw std::invalid_argument("http backend needs an endpoint");
    return std::make_shared<HttpBackend>(cfg);
  }
  if (b.rfind("mock:", 0) == 0) {
    std::string mode = b.substr(5);
    if (mode == "echo-selected") return std::make_shared<MockBackend>(MockBackend::Mode::echo_selected);
    if (mode == "fixed-text") return std::make_shared<MockBackend>(MockBackend::Mode::fixed_text, cfg.fixed_text);
    if (mode.rfind("fixed-text:", 0) == 0)
      return std::make_shared<MockBackend>(MockBackend::Mode::fixed_text, mode.substr(11));
  }
  throw std::invalid_argument("unknown backend '" + b + "'");
}

// ---- judge --------------------------------------------------------------------

struct JudgeScores {
  int consistency = 0;
  int coherence = 0;
  int relevance = 0;
  int fluency = 0;
  bool operator==(const JudgeScores&) const = default;
};

inline json to_json(const JudgeScores& s) {
  return json{{"consistency", s.consistency}, {"coherence", s.coherence}, {"relevance", s.relevance},
              {"fluency", s.fluency}};
}

// Accepts "a,b,c,d" or prose naming each aspect ("Consistency: 4 ...").
// All four scores in [1, 5] are required.
inline std::optional<JudgeScores> parse_judge_response(const std::string& raw) {
  static const std::regex csv(R"((?:^|[^0-9])([1-5])\s*,\s*([1-5])\s*,\s*([1-5])\s*,\s*([1-5])(?:[^0-9]|$))");
  const char* names[] = {"consistency", "coherence", "relevance", "fluency"};
  std::array<int, 4> found{};
  bool all = true;
  for (int a = 0; a < 4; ++a) {
    std::regex re(std::string(names[a]) + R"([^0-9a-z]{0,20}?([1-5])(?:\s*/\s*5)?(?![0-9]))", std::regex::icase);
    std::smatch m;
    if (std::regex_search(raw, m, re)) {
      found[static_cast<std::size_t>(a)] = std::stoi(m[1].str());
    } else {
      all = false;
    }
  }
  if (all) return JudgeScores{found[0], found[1], found[2], found[3]};
  std::smatch m;
  if (std::regex_search(raw, m, csv))
    return JudgeScores{std::stoi(m[1].str()), std::stoi(m[2].str()), std::stoi(m[3].str()), std::stoi(m[4].str())};
  return std::nullopt;
}

inline std::string judge_prompt(const std::string& source_text, const std::string& summary) {
  return "You are rating a machine-written summary of an article. Score the summary from 1 (very poor) to 5 "
         "(excellent) on each of four aspects: Consistency (facts agree with the article), Coherence (the "
         "sentences form a well-organized whole), Relevance (it keeps the important content), and Fluency (each "
         "sentence reads well). Reply with exactly four comma-separated integers in the order Consistency, "
         "Coherence, Relevance, Fluency, for example: 4,5,3,4\nArticle Text: " +
         source_text + "\nSummary: " + summary;
}

inline const std::string& judge_reformat_instruction() {
  static const std::string s =
      "Your previous reply could not be read. Reply with only four comma-separated integers from 1 to 5 "
      "(Consistency, Coherence, Relevance, Fluency) and nothing else.\n";
  return s;
}

// ---- gateway --------------------------------------------------------------------

// Bounded-parallel client with retries, optional transcript and a
// prompt-hash keyed cache.
class LlmGateway {
 public:
  explicit LlmGateway(LlmBackendConfig cfg, std::shared_ptr<LlmBackend> backend = nullptr)
      : cfg_(std::move(cfg)),
        backend_(backend ? std::move(backend) : make_backend(cfg_)),
        slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(cfg_.parallelism, 1))) {
    cfg_.validate();
  }

  const LlmBackendConfig& config() const { return cfg_; }
  LlmBackend& backend() { return *backend_; }
  void enable_cache(bool on) { cache_enabled_ = on; }

  SummaryRecord generate(const PromptBundle& bundle) {
    std::string hash = prompt_hash(bundle);
    if (cache_enabled_) {
      std::lock_guard lock(cache_mu_);
      if (auto it = cache_.find(hash); it != cache_.end()) return it->second;
    }
    LlmRequest req;
    req.purpose = "summary";
    req.text = bundle.text;
    req.temperature = cfg_.temperature;
    req.model = cfg_.model;
    req.focus_hint = &bundle.focus_sentences;
    for (const auto& img : bundle.images) req.images.push_back({"image/png", &img.png_bytes});
    int retries = 0;
    std::string text = call_with_retries(req, retries);
    if (text.empty()) throw LlmMalformedResponseError("backend returned an empty summary");
    SummaryRecord rec;
    rec.session_id = bundle.session_id;
    rec.method = bundle.method;
    rec.prompt_hash = hash;
    rec.summary_text = text;
    rec.model = backend_->name().rfind("mock:", 0) == 0 ? backend_->name() : cfg_.model;
    rec.created_at = utc_timestamp();
    rec.retries = retries;
    if (cache_enabled_) {
      std::lock_guard lock(cache_mu_);
      cache_.emplace(hash, rec);
    }
    return rec;
  }

  JudgeScores judge(const std::string& source_text, const std::string& summary) {
    if (source_text.empty() || summary.empty()) throw std::invalid_argument("judge needs both texts");
    LlmRequest req;
    req.purpose = "judge";
    req.text = judge_prompt(source_text, summary);
    req.temperature = cfg_.temperature;
    req.model = cfg_.model;
    int retries = 0;
    std::string raw = call_with_retries(req, retries);
    if (auto s = parse_judge_response(raw)) return *s;
    req.text = judge_reformat_instruction() + req.text;
    raw = call_with_retries(req, retries);
    if (auto s = parse_judge_response(raw)) return *s;
    throw JudgeParseError("judge reply could not be parsed after one reformat retry", raw);
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw std::invalid_argument("embed needs at least one text");
    std::vector<std::vector<double>> out;
    {
      Slot slot(slots_);
      out = backend_->embed(texts);
    }
    if (out.size() != texts.size()) throw LlmMalformedResponseError("embedding count does not match input count");
    for (const auto& v : out)
      if (v.size() != out.front().size()) throw LlmMalformedResponseError("embedding dimension mismatch in batch");
    return out;
  }

 private:
  struct Slot {
    explicit Slot(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
    ~Slot() { s_.release(); }
    std::counting_semaphore<>& s_;
  };

  std::string call_with_retries(const LlmRequest& req, int& retries) {
    for (int attempt = 0;; ++attempt) {
      try {
        std::string text;
        {
          Slot slot(slots_);
          text = backend_->complete(req);
        }
        log(req, text, attempt, nullptr);
        return text;
      } catch (LlmError& e) {
        log(req, {}, attempt, &e);
        if (!e.retryable() || attempt >= cfg_.max_retries) {
          e.attempts = attempt + 1;
          throw;
        }
        ++retries;
        std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long long>(cfg_.backoff_ms) << attempt));
      }
    }
  }

  void log(const LlmRequest& req, const std::string& reply, int attempt, const LlmError* err) {
    if (cfg_.transcript_path.empty()) return;
    json j{{"time", utc_timestamp()}, {"purpose", req.purpose}, {"attempt", attempt},
           {"model", req.model},      {"prompt", req.text},     {"images", req.images.size()}};
    if (err) {
      j["error"] = {{"kind", to_string(err->kind())}, {"message", err->what()}};
    } else {
      j["reply"] = reply;
    }
    std::lock_guard lock(log_mu_);
    std::ofstream out(cfg_.transcript_path, std::ios::app);
    out << j.dump() << '\n';
  }

  LlmBackendConfig cfg_;
  std::shared_ptr<LlmBackend> backend_;
  std::counting_semaphore<> slots_;
  bool cache_enabled_ = false;
  std::mutex cache_mu_;
  std::map<std::string, SummaryRecord> cache_;
  std::mutex log_mu_;
};

}  // namespace gazesum
