#pragma once

#include <openssl/rand.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "gazesum/common.hpp"
#include "gazesum/eval_harness.hpp"
#include "gazesum/llm_gateway.hpp"
#include "gazesum/pipeline.hpp"
#include "httplib.h"

namespace gazesum {

enum class SessionState { created, recording, ended, summarized };

inline std::string to_string(SessionState s) {
  switch (s) {
    case SessionState::created: return "created";
    case SessionState::recording: return "recording";
    case SessionState::ended: return "ended";
    case SessionState::summarized: return "summarized";
  }
  return "unknown";
}

inline SessionState parse_state(const std::string& s) {
  if (s == "created") return SessionState::created;
  if (s == "recording") return SessionState::recording;
  if (s == "ended") return SessionState::ended;
  if (s == "summarized") return SessionState::summarized;
  throw FormatError("unknown session state '" + s + "'");
}

// Error with the HTTP status the service maps it to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& msg, json details = nullptr)
      : std::runtime_error(msg), status_(status), details_(std::move(details)) {}
  int status() const { return status_; }
  const json& details() const { return details_; }

 private:
  int status_;
  json details_;
};

inline ServiceError not_found(const std::string& m) { return {404, m}; }
inline ServiceError bad_request(const std::string& m) { return {400, m}; }
inline ServiceError conflict(const std::string& m, json d = nullptr) { return {409, m, std::move(d)}; }

struct SessionInfo {
  std::string session_id;
  std::string doc_id;
  SessionState state = SessionState::created;
  std::string created_at;
  bool has_layout = false;
  std::size_t sample_count = 0;
  std::optional<double> last_t;
  // method -> prompt hash of the stored summary
  std::map<std::string, std::string> summaries;
};

inline json to_json(const SessionInfo& s) {
  json j{{"session_id", s.session_id}, {"doc_id", s.doc_id},       {"state", to_string(s.state)},
         {"created_at", s.created_at}, {"has_layout", s.has_layout}, {"sample_count", s.sample_count},
         {"last_t", nullptr},          {"summaries", s.summaries}};
  if (s.last_t) j["last_t"] = *s.last_t;
  return j;
}

inline SessionInfo session_info_from_json(const json& j) {
  SessionInfo s;
  s.session_id = j.at("session_id").get<std::string>();
  s.doc_id = j.value("doc_id", std::string());
  s.state = parse_state(j.at("state").get<std::string>());
  s.created_at = j.value("created_at", std::string());
  s.has_layout = j.value("has_layout", false);
  s.summaries = j.value("summaries", std::map<std::string, std::string>{});
  return s;
}

struct ServiceConfig {
  std::filesystem::path data_dir = "gazesum-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  PipelineConfig pipeline;
  LlmBackendConfig llm;
  // Model file for the svm method; without one a classifier is trained on
  // synthetic sessions the first time it is needed.
  std::filesystem::path classifier_path;
  bool judge_enabled = false;
};

inline void from_json(const json& j, ServiceConfig& c) {
  if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  if (j.contains("pipeline")) from_json(j["pipeline"], c.pipeline);
  if (j.contains("llm")) from_json(j["llm"], c.llm);
  if (j.contains("classifier_path")) c.classifier_path = j["classifier_path"].get<std::string>();
  c.judge_enabled = j.value("judge_enabled", c.judge_enabled);
}

inline std::string random_session_id() {
  unsigned char buf[12];
  if (RAND_bytes(buf, sizeof buf) != 1) throw std::runtime_error("RAND_bytes failed");
  return hex_encode(buf, sizeof buf);
}

// One directory per session:
//   session.json   state and summary index (atomic rename)
//   document.json  doc id, text, targets
//   layout.json    word boxes
//   gaze.jsonl     append-only samples
//   gaze.idx       one "<byte offset> <sample count> <last t>" line per committed batch
//   summary_<method>.json, heatmap_page<N>.png
// Bytes of gaze.jsonl past the last committed offset are an interrupted batch
// and are truncated when the session is opened.
class SessionStore {
 public:
  SessionStore(ServiceConfig cfg, std::shared_ptr<LlmGateway> gateway)
      : cfg_(std::move(cfg)), gateway_(std::move(gateway)) {
    std::filesystem::create_directories(cfg_.data_dir);
  }

  const ServiceConfig& config() const { return cfg_; }
  LlmGateway& gateway() { return *gateway_; }

  void set_classifier(TrainedClassifier clf) {
    std::lock_guard lock(clf_mu_);
    classifier_ = std::make_shared<TrainedClassifier>(std::move(clf));
  }

  // Creates a session. The layout may come later through set_layout.
  SessionInfo create_session(const json& body) {
    std::string doc_id = body.value("doc_id", std::string("doc"));
    std::optional<Document> doc;
    if (body.contains("layout") && !body["layout"].is_null()) doc = parse_document(body, doc_id);
    std::string id;
    std::filesystem::path dir;
    for (;;) {
      id = random_session_id();
      dir = cfg_.data_dir / id;
      std::error_code ec;
      if (std::filesystem::create_directory(dir, ec)) break;
      if (ec) throw std::runtime_error("cannot create session directory: " + ec.message());
    }
    auto entry = std::make_shared<Entry>();
    entry->dir = dir;
    entry->info.session_id = id;
    entry->info.doc_id = doc_id;
    entry->info.created_at = utc_timestamp();
    if (doc) store_document(*entry, *doc);
    write_file(dir / "gaze.jsonl", "");
    write_file(dir / "gaze.idx", "");
    persist(*entry);
    fsync_path(cfg_.data_dir, O_RDONLY | O_DIRECTORY);
    std::lock_guard lock(mu_);
    entries_[id] = entry;
    return entry->info;
  }

  SessionInfo set_layout(const std::string& id, const json& body) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    if (e->info.state != SessionState::created)
      throw conflict("layout can only be set before recording starts", state_json(*e));
    Document doc = parse_document(body, body.value("doc_id", e->info.doc_id));
    e->info.doc_id = doc.doc_id;
    store_document(*e, doc);
    persist(*e);
    return e->info;
  }

  SessionInfo start(const std::string& id) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    require_state(*e, SessionState::created, "start");
    if (!e->info.has_layout) throw conflict("session has no layout yet", state_json(*e));
    e->info.state = SessionState::recording;
    persist(*e);
    return e->info;
  }

  // Appends a batch. The whole batch is rejected when it is out of order
  // internally or starts before the last persisted sample.
  std::size_t ingest_gaze(const std::string& id, const std::vector<GazeSample>& batch) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    require_state(*e, SessionState::recording, "ingest gaze");
    if (batch.empty()) return 0;
    for (std::size_t i = 1; i < batch.size(); ++i)
      if (batch[i].t < batch[i - 1].t)
        throw bad_request("batch timestamps decrease at index " + std::to_string(i));
    if (e->info.last_t && batch.front().t < *e->info.last_t)
      throw ServiceError(409, "batch starts at t=" + json(batch.front().t).dump() +
                                  " before the last persisted sample t=" + json(*e->info.last_t).dump());
    std::string payload = gaze_to_jsonl(batch);
    append_durable(e->dir / "gaze.jsonl", payload);
    e->committed_bytes += payload.size();
    e->info.sample_count += batch.size();
    e->info.last_t = batch.back().t;
    std::ostringstream idx;
    idx.precision(17);
    idx << e->committed_bytes << ' ' << e->info.sample_count << ' ' << *e->info.last_t << '\n';
    append_durable(e->dir / "gaze.idx", idx.str());
    return batch.size();
  }

  SessionInfo end(const std::string& id) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    require_state(*e, SessionState::recording, "end");
    e->info.state = SessionState::ended;
    persist(*e);
    return e->info;
  }

  SessionInfo info(const std::string& id) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    return e->info;
  }

  std::vector<GazeSample> gaze(const std::string& id) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    return load_gaze(*e);
  }

  // Runs the method's pipeline and the LLM call. A stored summary with the
  // same prompt hash is returned without calling the backend.
  SummaryRecord summarize(const std::string& id, MethodKind method,
                          std::optional<std::vector<std::size_t>> targets = std::nullopt) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    if (e->info.state != SessionState::ended && e->info.state != SessionState::summarized)
      throw conflict("summarize requires an ended session", state_json(*e));
    Document doc = load_document(*e);
    if (method == MethodKind::TargetParagraphs && !targets) {
      if (!doc.target_paragraphs) throw bad_request("target_paragraphs needs explicit targets");
      targets = doc.target_paragraphs;
    }
    auto samples = load_gaze(*e);
    std::optional<EventTrace> trace;
    if (needs_gaze(method)) {
      if (samples.empty()) throw bad_request(to_string(method) + " needs gaze but the session recorded none");
      trace = process_gaze(samples, cfg_.pipeline);
      if (trace->fixations.empty()) throw bad_request(to_string(method) + ": no fixation was detected in the gaze");
    }
    MethodInputs in;
    in.trace = trace ? &*trace : nullptr;
    in.targets = targets;
    std::shared_ptr<TrainedClassifier> clf;
    if (method == MethodKind::SVM) {
      clf = classifier();
      in.classifier = clf.get();
    }
    MethodArtifacts art;
    try {
      art = build_method_prompt(method, doc, in, cfg_.pipeline);
    } catch (const std::invalid_argument& ex) {
      throw bad_request(ex.what());
    }
    art.bundle.session_id = id;
    for (const auto& img : art.heatmaps)
      write_file_atomic(e->dir / ("heatmap_page" + std::to_string(img.page_idx) + ".png"),
                        std::string_view(reinterpret_cast<const char*>(img.png_bytes.data()), img.png_bytes.size()));
    std::string hash = prompt_hash(art.bundle);
    std::string key = to_string(method);
    if (auto it = e->info.summaries.find(key); it != e->info.summaries.end() && it->second == hash) {
      auto path = e->dir / ("summary_" + key + ".json");
      if (std::filesystem::exists(path)) return summary_from_json(read_json(path));
    }
    SummaryRecord rec = gateway_->generate(art.bundle);
    for (const auto& img : art.bundle.images) rec.image_refs.push_back("heatmap/" + std::to_string(img.page_idx) + ".png");
    write_file_atomic(e->dir / ("summary_" + key + ".json"), to_json(rec).dump(2));
    if (art.attention)
      write_file_atomic(e->dir / ("attention_" + key + ".json"), to_json(*art.attention).dump(2));
    e->info.summaries[key] = hash;
    e->info.state = SessionState::summarized;
    persist(*e);
    return rec;
  }

  SummaryRecord summary(const std::string& id, MethodKind method) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    auto path = e->dir / ("summary_" + to_string(method) + ".json");
    if (!e->info.summaries.count(to_string(method)) || !std::filesystem::exists(path))
      throw not_found("no " + to_string(method) + " summary for session " + id);
    return summary_from_json(read_json(path));
  }

  // PNG of one page. Rendered from the gaze recorded so far unless a
  // summarize run already stored it.
  std::vector<std::uint8_t> heatmap_png(const std::string& id, std::size_t page) {
    auto e = open(id);
    std::lock_guard lock(e->mu);
    if (!e->info.has_layout) throw not_found("session has no layout");
    Document doc = load_document(*e);
    if (page >= doc.layout.page_count()) throw not_found("page " + std::to_string(page) + " out of range");
    auto path = e->dir / ("heatmap_page" + std::to_string(page) + ".png");
    if (std::filesystem::exists(path) && e->info.state != SessionState::recording) return read_binary(path);
    auto samples = load_gaze(*e);
    EventTrace trace = samples.empty() ? EventTrace{} : process_gaze(samples, cfg_.pipeline);
    HeatGrid raw = accumulate(trace, doc.layout, cfg_.pipeline.heatmap_weight);
    auto img = smooth_and_colorize(raw, cfg_.pipeline.heatmap_sigma_px, doc.layout, std::nullopt, page);
    return img.png_bytes;
  }

  // Focus ratio for every stored summary when the document names targets,
  // ROUGE against the reference when one is given, judge scores when enabled.
  json report(const std::string& id, const std::optional<std::string>& reference) {
    auto e = open(id);
    SessionMetrics sm;
    sm.session_id = id;
    Document doc;
    std::vector<SummaryRecord> records;
    {
      std::lock_guard lock(e->mu);
      if (e->info.summaries.empty()) throw not_found("session " + id + " has no summaries");
      doc = load_document(*e);
      for (const auto& [key, _] : e->info.summaries)
        records.push_back(summary_from_json(read_json(e->dir / ("summary_" + key + ".json"))));
    }
    LexicalScorer lexical;
    for (const auto& rec : records) {
      MethodMetrics mm;
      if (doc.target_paragraphs) {
        auto sentences = segment_sentences(rec.summary_text);
        if (!sentences.empty()) mm.focus = content_focus(sentences, doc, lexical);
      }
      if (reference) mm.rouge = rouge_all(rec.summary_text, *reference);
      if (cfg_.judge_enabled) mm.judge = gateway_->judge(doc.full_text, rec.summary_text);
      sm.methods[rec.method] = mm;
    }
    return to_json(aggregate_report({sm}));
  }

 private:
  struct Entry {
    std::mutex mu;
    std::filesystem::path dir;
    SessionInfo info;
    std::uint64_t committed_bytes = 0;
  };

  static json state_json(const Entry& e) { return json{{"state", to_string(e.info.state)}}; }

  static void require_state(const Entry& e, SessionState want, const std::string& action) {
    if (e.info.state != want)
      throw conflict("cannot " + action + " in state " + to_string(e.info.state) + " (needs " + to_string(want) + ")",
                     state_json(e));
  }

  static Document parse_document(const json& body, const std::string& doc_id) {
    if (!body.contains("layout")) throw bad_request("request has no layout");
    TextLayout layout;
    try {
      layout = body["layout"].get<TextLayout>();
    } catch (const json::exception& ex) {
      throw ServiceError(422, std::string("layout is malformed: ") + ex.what());
    }
    auto violations = validate_layout(layout);
    if (!violations.empty()) {
      json list = json::array();
      for (const auto& v : violations) list.push_back(to_json(v));
      throw ServiceError(422, "layout failed validation", json{{"violations", list}});
    }
    json meta = body;
    meta["doc_id"] = doc_id;
    Document doc = document_from_json(meta, std::move(layout));
    auto problems = validate_document(doc);
    if (!problems.empty()) throw ServiceError(422, "document failed validation", json{{"problems", problems}});
    return doc;
  }

  void store_document(Entry& e, const Document& doc) {
    write_file_atomic(e.dir / "layout.json", json(doc.layout).dump());
    write_file_atomic(e.dir / "document.json", document_meta_json(doc).dump(2));
    e.info.has_layout = true;
  }

  static Document load_document(const Entry& e) {
    return document_from_json(read_json(e.dir / "document.json"), read_layout(e.dir / "layout.json"));
  }

  void persist(const Entry& e) {
    json j = to_json(e.info);
    j.erase("sample_count");
    j.erase("last_t");
    write_file_atomic(e.dir / "session.json", j.dump(2));
  }

  static void append_durable(const std::filesystem::path& path, std::string_view data) {
    int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) throw std::runtime_error("cannot open " + path.string() + " for append");
    std::size_t done = 0;
    while (done < data.size()) {
      ssize_t n = ::write(fd, data.data() + done, data.size() - done);
      if (n < 0) {
        ::close(fd);
        throw std::runtime_error("write to " + path.string() + " failed");
      }
      done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }

  static std::vector<GazeSample> load_gaze(const Entry& e) {
    std::ifstream in(e.dir / "gaze.jsonl", std::ios::binary);
    std::string data(e.committed_bytes, '\0');
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    std::istringstream ss(data);
    return read_gaze_jsonl(ss);
  }

  // Restores a session from disk, dropping any uncommitted gaze tail.
  std::shared_ptr<Entry> recover(const std::string& id) {
    auto dir = cfg_.data_dir / id;
    if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos ||
        !std::filesystem::exists(dir / "session.json"))
      throw not_found("no session " + id);
    auto e = std::make_shared<Entry>();
    e->dir = dir;
    e->info = session_info_from_json(read_json(dir / "session.json"));
    std::ifstream idx(dir / "gaze.idx");
    std::string last_complete;
    std::string all((std::istreambuf_iterator<char>(idx)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < all.size()) {
      std::size_t nl = all.find('\n', pos);
      if (nl == std::string::npos) break;
      last_complete = all.substr(pos, nl - pos);
      pos = nl + 1;
    }
    if (pos < all.size()) {
      // Torn index line: keep only whole entries.
      std::filesystem::resize_file(dir / "gaze.idx", pos);
    }
    if (!last_complete.empty()) {
      std::istringstream ls(last_complete);
      double t = 0.0;
      ls >> e->committed_bytes >> e->info.sample_count >> t;
      if (!ls) throw FormatError("corrupt gaze index in " + dir.string());
      e->info.last_t = t;
    }
    auto gaze_path = dir / "gaze.jsonl";
    if (!std::filesystem::exists(gaze_path)) write_file(gaze_path, "");
    if (std::filesystem::file_size(gaze_path) > e->committed_bytes)
      std::filesystem::resize_file(gaze_path, e->committed_bytes);
    return e;
  }

  std::shared_ptr<Entry> open(const std::string& id) {
    std::lock_guard lock(mu_);
    if (auto it = entries_.find(id); it != entries_.end()) return it->second;
    auto e = recover(id);
    entries_[id] = e;
    return e;
  }

  std::shared_ptr<TrainedClassifier> classifier() {
    std::lock_guard lock(clf_mu_);
    if (!classifier_) {
      if (!cfg_.classifier_path.empty())
        classifier_ = std::make_shared<TrainedClassifier>(TrainedClassifier::from_json(read_json(cfg_.classifier_path)));
      else
        classifier_ = std::make_shared<TrainedClassifier>(train_synthetic_classifier({}, cfg_.pipeline));
    }
    return classifier_;
  }

  ServiceConfig cfg_;
  std::shared_ptr<LlmGateway> gateway_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
  std::mutex clf_mu_;
  std::shared_ptr<TrainedClassifier> classifier_;
};

// ---- HTTP ---------------------------------------------------------------------------

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    json body{{"error", e.what()}};
    if (!e.details().is_null()) body["details"] = e.details();
    send_json(res, e.status(), body);
  } catch (const LlmError& e) {
    send_json(res, 502,
              {{"error", e.what()}, {"kind", to_string(e.kind())}, {"attempts", e.attempts}, {"retryable", e.retryable()}});
  } catch (const json::exception& e) {
    send_json(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
  } catch (const FormatError& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const std::invalid_argument& e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

inline std::vector<GazeSample> parse_gaze_body(const std::string& body) {
  auto first = body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  if (body[first] == '[') return json::parse(body).get<std::vector<GazeSample>>();
  if (body[first] == '{') {
    // {"samples": [...]}; anything else starting with '{' is JSON Lines.
    json j = json::parse(body, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("samples"))
      return j["samples"].get<std::vector<GazeSample>>();
  }
  std::istringstream in(body);
  return read_gaze_jsonl(in);
}

// Registers the session API on `server`. Bodies and replies are JSON; gaze
// batches may also be posted as JSON Lines.
inline void mount_routes(httplib::Server& server, SessionStore& store) {
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = req.body.empty() ? json::object() : json::parse(req.body);
      send_json(res, 201, to_json(store.create_session(body)));
    });
  });
  server.Get(R"(/sessions/([0-9a-f]+))", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(store.info(req.matches[1]))); });
  });
  server.Post(R"(/sessions/([0-9a-f]+))", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(store.set_layout(req.matches[1], json::parse(req.body)))); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/start)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(store.start(req.matches[1]))); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/gaze)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto batch = parse_gaze_body(req.body);
      send_json(res, 200, {{"accepted", store.ingest_gaze(req.matches[1], batch)}});
    });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/end)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(store.end(req.matches[1]))); });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/summarize)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = json::parse(req.body);
      MethodKind m = parse_method(body.at("method").get<std::string>());
      std::optional<std::vector<std::size_t>> targets;
      if (body.contains("targets") && !body["targets"].is_null())
        targets = body["targets"].get<std::vector<std::size_t>>();
      send_json(res, 200, to_json(store.summarize(req.matches[1], m, targets)));
    });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/summary/([a-z_\-]+))", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(store.summary(req.matches[1], parse_method(req.matches[2].str())))); });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/heatmap/(\d+)\.png)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto png = store.heatmap_png(req.matches[1], std::stoul(req.matches[2].str()));
      res.status = 200;
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    });
  });
  server.Get(R"(/sessions/([0-9a-f]+)/report)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> reference;
      if (req.has_param("reference")) reference = req.get_param_value("reference");
      send_json(res, 200, store.report(req.matches[1], reference));
    });
  });
  server.Post(R"(/sessions/([0-9a-f]+)/report)", [&](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = req.body.empty() ? json::object() : json::parse(req.body);
      std::optional<std::string> reference;
      if (body.contains("reference") && body["reference"].is_string()) reference = body["reference"].get<std::string>();
      send_json(res, 200, store.report(req.matches[1], reference));
    });
  });
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"ok", true}}); });
}

}  // namespace gazesum
