#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "gazesum/session_service.hpp"
#include "gazesum/synth_gaze.hpp"
#include "test_support.hpp"

using namespace gazesum;

namespace {

struct Fixture {
  oracle::TempDir dir{"service"};
  std::shared_ptr<MockBackend> mock = std::make_shared<MockBackend>(MockBackend::Mode::echo_selected);
  std::unique_ptr<SessionStore> store;
  Document doc = fixture_document(6, 5, 8, std::vector<std::size_t>{1, 4});

  Fixture() { reopen(); }

  void reopen() {
    ServiceConfig cfg;
    cfg.data_dir = dir.path;
    store = std::make_unique<SessionStore>(cfg, std::make_shared<LlmGateway>(cfg.llm, mock));
  }

  json create_body() const {
    return json{{"doc_id", doc.doc_id}, {"layout", doc.layout}, {"target_paragraphs", *doc.target_paragraphs}};
  }

  std::vector<GazeSample> samples() const {
    return generate(profile_for_paragraphs(doc.layout, *doc.target_paragraphs, 3.0), doc.layout);
  }

  std::string recorded_session(bool with_gaze = true) {
    auto id = store->create_session(create_body()).session_id;
    store->start(id);
    if (with_gaze) {
      auto s = samples();
      for (std::size_t i = 0; i < s.size(); i += 120)
        store->ingest_gaze(id, std::vector<GazeSample>(s.begin() + static_cast<std::ptrdiff_t>(i),
                                                       s.begin() + static_cast<std::ptrdiff_t>(std::min(i + 120, s.size()))));
    }
    store->end(id);
    return id;
  }
};

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 0;
}

std::vector<GazeSample> ramp(double t0, std::size_t n) {
  std::vector<GazeSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].t = t0 + 10.0 * static_cast<double>(i);
    out[i].x = 100;
    out[i].y = 100;
  }
  return out;
}

}  // namespace

TEST(Sessions, CreateWithLayout) {
  Fixture fx;
  auto info = fx.store->create_session(fx.create_body());
  EXPECT_EQ(info.state, SessionState::created);
  EXPECT_TRUE(info.has_layout);
  EXPECT_EQ(info.session_id.size(), 24u);
  EXPECT_TRUE(std::filesystem::exists(fx.dir.path / info.session_id / "layout.json"));
  EXPECT_EQ(fx.store->info(info.session_id).doc_id, fx.doc.doc_id);
}

TEST(Sessions, ConcurrentCreatesGetDistinctIds) {
  Fixture fx;
  std::mutex mu;
  std::set<std::string> ids;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 10; ++i) {
        auto id = fx.store->create_session(json::object()).session_id;
        std::lock_guard lock(mu);
        ids.insert(id);
      }
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(ids.size(), 80u);
}

TEST(Sessions, InvalidLayoutIsUnprocessable) {
  Fixture fx;
  auto body = fx.create_body();
  std::swap(body["layout"]["words"][3]["x0"], body["layout"]["words"][3]["x1"]);
  try {
    fx.store->create_session(body);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 422);
    ASSERT_TRUE(e.details().contains("violations"));
    EXPECT_EQ(e.details()["violations"][0]["word"], 3);
  }
}

TEST(Sessions, StateMachineRejectsOutOfOrderCalls) {
  Fixture fx;
  auto id = fx.store->create_session(json::object()).session_id;
  EXPECT_EQ(status_of([&] { fx.store->start(id); }), 409);  // no layout yet
  fx.store->set_layout(id, fx.create_body());
  EXPECT_EQ(status_of([&] { fx.store->ingest_gaze(id, ramp(0, 3)); }), 409);
  EXPECT_EQ(status_of([&] { fx.store->end(id); }), 409);
  EXPECT_EQ(status_of([&] { fx.store->summarize(id, MethodKind::TextOnly); }), 409);
  EXPECT_EQ(fx.store->info(id).state, SessionState::created);
  fx.store->start(id);
  EXPECT_EQ(status_of([&] { fx.store->start(id); }), 409);
  EXPECT_EQ(status_of([&] { fx.store->set_layout(id, fx.create_body()); }), 409);
  EXPECT_EQ(fx.store->info(id).state, SessionState::recording);
  fx.store->end(id);
  EXPECT_EQ(status_of([&] { fx.store->ingest_gaze(id, ramp(0, 3)); }), 409);
  EXPECT_EQ(status_of([&] { fx.store->info("ffff"); }), 404);
}

TEST(Sessions, BatchIngestAndOverlap) {
  Fixture fx;
  auto id = fx.store->create_session(fx.create_body()).session_id;
  fx.store->start(id);
  EXPECT_EQ(fx.store->ingest_gaze(id, ramp(0, 120)), 120u);
  EXPECT_EQ(fx.store->info(id).sample_count, 120u);
  EXPECT_EQ(status_of([&] { fx.store->ingest_gaze(id, ramp(500, 10)); }), 409);
  auto bad = ramp(2000, 5);
  std::swap(bad[1], bad[3]);
  EXPECT_EQ(status_of([&] { fx.store->ingest_gaze(id, bad); }), 400);
  EXPECT_EQ(fx.store->info(id).sample_count, 120u);
  EXPECT_EQ(fx.store->ingest_gaze(id, ramp(1190, 10)), 10u);  // equal timestamp at the seam is allowed
  EXPECT_EQ(fx.store->gaze(id).size(), 130u);
}

TEST(Sessions, ConcurrentBatchesStayMonotonic) {
  Fixture fx;
  auto id = fx.store->create_session(fx.create_body()).session_id;
  fx.store->start(id);
  std::atomic<std::size_t> accepted{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      for (int b = 0; b < 10; ++b) {
        double t0 = 1000.0 * (b * 8 + t);
        try {
          accepted += fx.store->ingest_gaze(id, ramp(t0, 20));
        } catch (const ServiceError& e) {
          EXPECT_EQ(e.status(), 409);
        }
      }
    });
  for (auto& t : threads) t.join();
  auto g = fx.store->gaze(id);
  EXPECT_EQ(g.size(), accepted.load());
  EXPECT_GT(g.size(), 0u);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GE(g[i].t, g[i - 1].t);
}

TEST(Summaries, TextOnlyNeedsNoGaze) {
  Fixture fx;
  auto id = fx.recorded_session(false);
  auto rec = fx.store->summarize(id, MethodKind::TextOnly);
  EXPECT_FALSE(rec.summary_text.empty());
  EXPECT_EQ(fx.store->info(id).state, SessionState::summarized);
  EXPECT_EQ(status_of([&] { fx.store->summarize(id, MethodKind::Density); }), 400);
}

TEST(Summaries, DensitySummaryComesFromSelectedSentences) {
  Fixture fx;
  auto id = fx.recorded_session();
  auto rec = fx.store->summarize(id, MethodKind::Density);
  auto att = attention_from_json(read_json(fx.dir.path / id / "attention_density.json"));
  EXPECT_EQ(att.selected_indices.size(), 6u);
  std::set<std::string> selected(att.selected_sentences.begin(), att.selected_sentences.end());
  for (const auto& s : segment_sentences(rec.summary_text)) EXPECT_TRUE(selected.count(s)) << s;
  EXPECT_EQ(fx.store->summary(id, MethodKind::Density).summary_text, rec.summary_text);
  EXPECT_EQ(status_of([&] { fx.store->summary(id, MethodKind::SVM); }), 404);
}

TEST(Summaries, HeatmapStoresOnePage) {
  Fixture fx;
  auto id = fx.recorded_session();
  auto rec = fx.store->summarize(id, MethodKind::Heatmap);
  ASSERT_EQ(rec.image_refs.size(), 1u);
  EXPECT_EQ(rec.image_refs[0], "heatmap/0.png");
  auto png = fx.store->heatmap_png(id, 0);
  EXPECT_EQ(png, read_binary(fx.dir.path / id / "heatmap_page0.png"));
  EXPECT_EQ(status_of([&] { fx.store->heatmap_png(id, 3); }), 404);
}

TEST(Summaries, SvmAndTargetParagraphs) {
  Fixture fx;
  auto id = fx.recorded_session();
  EXPECT_FALSE(fx.store->summarize(id, MethodKind::SVM).summary_text.empty());
  auto tp = fx.store->summarize(id, MethodKind::TargetParagraphs);
  EXPECT_EQ(tp.summary_text.substr(0, fx.doc.layout.sentences[5].text.size()), fx.doc.layout.sentences[5].text);
  EXPECT_EQ(status_of([&] { fx.store->summarize(id, MethodKind::TargetParagraphs, std::vector<std::size_t>{1}); }),
            400);
}

TEST(Summaries, RepeatedRequestIsServedFromDisk) {
  Fixture fx;
  auto id = fx.recorded_session();
  auto a = fx.store->summarize(id, MethodKind::Density);
  auto b = fx.store->summarize(id, MethodKind::Density);
  EXPECT_EQ(fx.mock->calls(), 1u);
  EXPECT_EQ(a.prompt_hash, b.prompt_hash);
  EXPECT_EQ(a.created_at, b.created_at);
  fx.reopen();
  fx.store->summarize(id, MethodKind::Density);
  EXPECT_EQ(fx.mock->calls(), 1u);
}

TEST(Reports, RougeOnlyWithReference) {
  Fixture fx;
  auto id = fx.recorded_session();
  auto rec = fx.store->summarize(id, MethodKind::Density);
  auto plain = fx.store->report(id, std::nullopt);
  const auto& m = plain["session"]["methods"]["density"];
  EXPECT_FALSE(m.contains("rouge"));
  EXPECT_TRUE(m.contains("focus"));
  EXPECT_GE(m["focus"]["target_ratio"].get<double>(), m["focus"]["baseline_ratio"].get<double>());
  auto with_ref = fx.store->report(id, rec.summary_text);
  EXPECT_DOUBLE_EQ(with_ref["session"]["methods"]["density"]["rouge"]["rouge1"]["f1"].get<double>(), 1.0);
  auto empty = fx.recorded_session(false);
  EXPECT_EQ(status_of([&] { fx.store->report(empty, std::nullopt); }), 404);
}

TEST(Recovery, TornTailIsDiscarded) {
  Fixture fx;
  auto id = fx.store->create_session(fx.create_body()).session_id;
  fx.store->start(id);
  fx.store->ingest_gaze(id, ramp(0, 50));
  fx.store->ingest_gaze(id, ramp(1000, 50));
  auto session_dir = fx.dir.path / id;
  auto committed = std::filesystem::file_size(session_dir / "gaze.jsonl");
  {
    std::ofstream g(session_dir / "gaze.jsonl", std::ios::app);
    g << "{\"t\":5000,\"x\":1,\"y\":1,\"pupil\":null,\"valid\":true}\n{\"t\":50";
    std::ofstream i(session_dir / "gaze.idx", std::ios::app);
    i << "99999 10";
  }
  fx.reopen();
  auto info = fx.store->info(id);
  EXPECT_EQ(info.state, SessionState::recording);
  EXPECT_EQ(info.sample_count, 100u);
  EXPECT_DOUBLE_EQ(*info.last_t, 1490.0);
  EXPECT_EQ(fx.store->gaze(id).size(), 100u);
  EXPECT_EQ(std::filesystem::file_size(session_dir / "gaze.jsonl"), committed);
  EXPECT_EQ(fx.store->ingest_gaze(id, ramp(2000, 5)), 5u);
  EXPECT_EQ(fx.store->gaze(id).size(), 105u);
}

TEST(Http, RoutesEndToEnd) {
  Fixture fx;
  httplib::Server server;
  mount_routes(server, *fx.store);
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  EXPECT_EQ(cli.Get("/health")->status, 200);
  auto created = cli.Post("/sessions", "{}", "application/json");
  ASSERT_EQ(created->status, 201);
  std::string id = json::parse(created->body)["session_id"];
  std::string base = "/sessions/" + id;
  EXPECT_EQ(cli.Post(base + "/start", "", "application/json")->status, 409);
  EXPECT_EQ(cli.Post(base, fx.create_body().dump(), "application/json")->status, 200);
  EXPECT_EQ(cli.Post(base + "/start", "", "application/json")->status, 200);

  auto s = fx.samples();
  std::vector<GazeSample> first(s.begin(), s.begin() + 100), second(s.begin() + 100, s.end());
  auto r1 = cli.Post(base + "/gaze", json(first).dump(), "application/json");
  ASSERT_EQ(r1->status, 200);
  EXPECT_EQ(json::parse(r1->body)["accepted"], 100);
  EXPECT_EQ(cli.Post(base + "/gaze", gaze_to_jsonl(second), "application/x-ndjson")->status, 200);
  EXPECT_EQ(cli.Post(base + "/gaze", json{{"samples", first}}.dump(), "application/json")->status, 409);
  EXPECT_EQ(cli.Post(base + "/gaze", "{not json", "application/json")->status, 400);
  EXPECT_EQ(cli.Post(base + "/end", "", "application/json")->status, 200);

  auto sum = cli.Post(base + "/summarize", R"({"method":"heatmap"})", "application/json");
  ASSERT_EQ(sum->status, 200);
  EXPECT_EQ(json::parse(sum->body)["image_refs"].size(), 1u);
  auto png = cli.Get(base + "/heatmap/0.png");
  ASSERT_EQ(png->status, 200);
  EXPECT_EQ(png->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(png->body.substr(1, 3), "PNG");
  EXPECT_EQ(cli.Get(base + "/summary/heatmap")->status, 200);
  EXPECT_EQ(cli.Get(base + "/summary/density")->status, 404);
  EXPECT_EQ(cli.Post(base + "/summarize", R"({"method":"bogus"})", "application/json")->status, 400);
  auto rep = cli.Get(base + "/report?reference=hello%20world");
  ASSERT_EQ(rep->status, 200);
  EXPECT_TRUE(json::parse(rep->body)["session"]["methods"]["heatmap"].contains("rouge"));
  EXPECT_EQ(cli.Post(base + "/report", R"({"reference":"x"})", "application/json")->status, 200);
  EXPECT_EQ(cli.Get("/sessions/abcdef")->status, 404);

  server.stop();
  th.join();
}

TEST(Config, FromJson) {
  auto cfg = json::parse(R"({"data_dir":"/tmp/x","port":9000,"judge_enabled":true,
                             "llm":{"backend":"mock:fixed-text","max_retries":1},
                             "pipeline":{"top_fraction":0.3}})")
                 .get<ServiceConfig>();
  EXPECT_EQ(cfg.data_dir, "/tmp/x");
  EXPECT_EQ(cfg.port, 9000);
  EXPECT_TRUE(cfg.judge_enabled);
  EXPECT_EQ(cfg.llm.max_retries, 1);
  EXPECT_DOUBLE_EQ(cfg.pipeline.top_fraction, 0.3);
}
