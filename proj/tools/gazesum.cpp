#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gazesum/gazesum.hpp"

namespace fs = std::filesystem;
using namespace gazesum;

namespace {

struct Common {
  std::string config_path;
  std::string templates_dir;
};

ServiceConfig load_config(const Common& c) {
  ServiceConfig cfg;
  if (!c.config_path.empty()) from_json(read_json(c.config_path), cfg);
  return cfg;
}

void emit(const std::string& out, const std::string& data) {
  if (out.empty() || out == "-") {
    std::cout << data;
    if (!data.empty() && data.back() != '\n') std::cout << '\n';
  } else {
    write_file_atomic(out, data);
  }
}

void emit_bytes(const std::string& out, const std::vector<std::uint8_t>& bytes) {
  if (out.empty()) throw std::invalid_argument("binary output needs --out");
  write_file_atomic(out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Document load_document(const std::string& doc_path, const std::string& layout_path) {
  TextLayout layout = read_layout(layout_path);
  json meta = doc_path.empty() ? json::object() : read_json(doc_path);
  Document doc = document_from_json(meta, std::move(layout));
  auto problems = validate_document(doc);
  if (!problems.empty()) {
    std::string msg = "invalid document:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
  return doc;
}

std::vector<std::size_t> parse_index_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stoul(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-driven personalized summarization toolkit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "JSON config file (pipeline, llm, service keys)");
  app.add_option("--templates", common.templates_dir, "Directory of prompt template files");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a fixture document and a synthetic gaze trace");
  std::size_t n_par = 6, n_sent = 5, n_words = 8;
  std::string targets_s = "1,4", synth_dir;
  double target_weight = 3.0, ms_per_char = 30.0, rate = 60.0, jitter = 3.0;
  std::uint64_t seed = 1, layout_seed = 7;
  synth->add_option("--paragraphs", n_par)->check(CLI::PositiveNumber);
  synth->add_option("--sentences", n_sent, "Sentences per paragraph")->check(CLI::PositiveNumber);
  synth->add_option("--words", n_words, "Words per sentence")->check(CLI::PositiveNumber);
  synth->add_option("--targets", targets_s, "Comma-separated 0-based target paragraphs");
  synth->add_option("--target-weight", target_weight, "Dwell multiplier on target paragraphs");
  synth->add_option("--ms-per-char", ms_per_char);
  synth->add_option("--rate", rate, "Sample rate in Hz");
  synth->add_option("--jitter", jitter, "Gaussian jitter sigma in px");
  synth->add_option("--seed", seed, "Gaze RNG seed");
  synth->add_option("--layout-seed", layout_seed, "Fixture text seed");
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();

  // detect
  auto* detect = app.add_subcommand("detect", "Detect fixations and saccades in a gaze trace");
  std::string gaze_path, out_path;
  bool diagnostics = false;
  detect->add_option("--gaze", gaze_path, "Gaze JSONL")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", out_path, "Output JSON (default stdout)");
  detect->add_flag("--diagnostics", diagnostics, "Include cleaned samples");

  // density
  auto* density = app.add_subcommand("density", "Rank sentences by gaze density");
  std::string layout_path, doc_path;
  double fraction = -1.0;
  density->add_option("--gaze", gaze_path)->required()->check(CLI::ExistingFile);
  density->add_option("--layout", layout_path)->required()->check(CLI::ExistingFile);
  density->add_option("--fraction", fraction, "Top fraction of sentences");
  density->add_option("--out", out_path);

  // heatmap
  auto* heatmap = app.add_subcommand("heatmap", "Render the gaze heatmap of page 0 as PNG");
  double sigma = -1.0;
  std::string weight_mode, attention_out;
  heatmap->add_option("--gaze", gaze_path)->required()->check(CLI::ExistingFile);
  heatmap->add_option("--layout", layout_path)->required()->check(CLI::ExistingFile);
  heatmap->add_option("--sigma", sigma, "Gaussian sigma in px");
  heatmap->add_option("--weight", weight_mode, "fixation or sample")->check(CLI::IsMember({"fixation", "sample"}));
  heatmap->add_option("--out", out_path, "PNG path")->required();
  heatmap->add_option("--attention-out", attention_out, "Sentence heat ranking JSON");

  // svm-train
  auto* svm_train = app.add_subcommand("svm-train", "Train the high-attention window classifier");
  std::string windows_path, model_path;
  double svm_c = 1.0, svm_gamma = 0.01;
  std::size_t synth_sessions = 4;
  bool unbalanced = false;
  svm_train->add_option("--windows", windows_path, "Labeled FeatureWindow JSON array; synthetic sessions when omitted");
  svm_train->add_option("--synthetic-sessions", synth_sessions);
  svm_train->add_option("--C", svm_c);
  svm_train->add_option("--gamma", svm_gamma);
  svm_train->add_flag("--unbalanced", unbalanced, "Disable balanced class weights");
  svm_train->add_option("--out", model_path, "Model JSON")->required();

  // svm-classify
  auto* svm_classify = app.add_subcommand("svm-classify", "Select sentences covered by high-attention windows");
  svm_classify->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  svm_classify->add_option("--gaze", gaze_path)->required()->check(CLI::ExistingFile);
  svm_classify->add_option("--layout", layout_path)->required()->check(CLI::ExistingFile);
  svm_classify->add_option("--fraction", fraction);
  svm_classify->add_option("--out", out_path);

  // prompt / summarize share their inputs
  std::string method_s, prompt_targets_s;
  bool embed_images = false, one_fifth = false, numeric_ids = false;
  auto add_prompt_inputs = [&](CLI::App* sub) {
    sub->add_option("--method", method_s, "density, heatmap, svm, target_paragraphs or text_only")->required();
    sub->add_option("--layout", layout_path)->required()->check(CLI::ExistingFile);
    sub->add_option("--document", doc_path, "Document JSON (doc_id, full_text, target_paragraphs)");
    sub->add_option("--gaze", gaze_path)->check(CLI::ExistingFile);
    sub->add_option("--model", model_path, "Classifier for svm")->check(CLI::ExistingFile);
    sub->add_option("--targets", prompt_targets_s, "Two comma-separated 0-based paragraph indices");
    sub->add_flag("--one-fifth-length", one_fifth, "Target length ceil(words / 5) instead of 150");
    sub->add_flag("--numeric-paragraph-ids", numeric_ids, "Render paragraph ids as numbers, not ordinals");
    sub->add_option("--out", out_path);
  };
  auto* prompt = app.add_subcommand("prompt", "Render the prompt for one method");
  add_prompt_inputs(prompt);
  prompt->add_flag("--embed-images", embed_images, "Inline heatmap PNGs as base64");

  auto* summarize = app.add_subcommand("summarize", "Render the prompt and call the configured LLM backend");
  add_prompt_inputs(summarize);
  std::string backend_s;
  summarize->add_option("--backend", backend_s, "http, mock:echo-selected or mock:fixed-text[:text]");

  // eval
  auto* eval = app.add_subcommand("eval", "Score summaries and compare methods across sessions");
  std::vector<std::string> session_dirs;
  std::string reference_path, md_out, scorer_s = "lexical", baseline_s = "length";
  bool judge = false;
  eval->add_option("--sessions", session_dirs,
                   "Directories holding document.json, layout.json, summary_<method>.json and optional reference.txt")
      ->required();
  eval->add_option("--reference", reference_path, "Reference summary used for every session without reference.txt");
  eval->add_option("--scorer", scorer_s, "lexical or embedding")->check(CLI::IsMember({"lexical", "embedding"}));
  eval->add_option("--baseline", baseline_s, "length or sentences")->check(CLI::IsMember({"length", "sentences"}));
  eval->add_flag("--judge", judge, "Ask the LLM judge for quality scores");
  eval->add_option("--out", out_path, "report.json path (default stdout)");
  eval->add_option("--markdown", md_out, "report.md path");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the session HTTP service");
  std::string data_dir, host;
  int port = -1;
  serve->add_option("--data-dir", data_dir);
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--backend", backend_s);
  serve->add_option("--model", model_path, "Classifier for svm")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    ServiceConfig cfg = load_config(common);
    PipelineConfig& pc = cfg.pipeline;
    std::optional<PromptTemplates> templates;
    if (!common.templates_dir.empty()) {
      templates = PromptTemplates::load(common.templates_dir);
      pc.prompt.templates = &*templates;
    }
    if (fraction > 0.0) pc.top_fraction = fraction;
    if (sigma > 0.0) pc.heatmap_sigma_px = sigma;
    if (!weight_mode.empty()) pc.heatmap_weight = weight_mode == "sample" ? WeightMode::sample : WeightMode::fixation;
    if (one_fifth) pc.prompt.one_fifth_length = true;
    if (numeric_ids) pc.prompt.ordinal_paragraph_ids = false;
    if (!backend_s.empty()) cfg.llm.backend = backend_s;

    if (*synth) {
      auto targets = parse_index_list(targets_s);
      FixtureOptions fo;
      fo.seed = layout_seed;
      Document doc = fixture_document(n_par, n_sent, n_words, targets, fo);
      AttentionProfile profile = profile_for_paragraphs(doc.layout, targets, target_weight, 1.0, seed);
      profile.ms_per_char = ms_per_char;
      profile.sample_rate_hz = rate;
      profile.jitter_sigma_px = jitter;
      auto samples = generate(profile, doc.layout);
      fs::create_directories(synth_dir);
      write_file_atomic(fs::path(synth_dir) / "layout.json", json(doc.layout).dump(2));
      write_file_atomic(fs::path(synth_dir) / "document.json", document_meta_json(doc).dump(2));
      write_file_atomic(fs::path(synth_dir) / "gaze.jsonl", gaze_to_jsonl(samples));
      write_file_atomic(fs::path(synth_dir) / "profile.json",
                        json{{"sentence_weights", profile.sentence_weights},
                             {"ms_per_char", profile.ms_per_char},
                             {"sample_rate_hz", profile.sample_rate_hz},
                             {"jitter_sigma_px", profile.jitter_sigma_px},
                             {"seed", profile.seed}}
                            .dump(2));
      std::cerr << "wrote " << samples.size() << " samples for " << doc.layout.words.size() << " words to "
                << synth_dir << '\n';
    } else if (*detect) {
      auto trace = process_gaze(read_gaze_jsonl(fs::path(gaze_path)), pc);
      emit(out_path, to_json(trace, diagnostics).dump(2));
    } else if (*density) {
      auto trace = process_gaze(read_gaze_jsonl(fs::path(gaze_path)), pc);
      emit(out_path, to_json(density_attention(trace, read_layout(layout_path), pc)).dump(2));
    } else if (*heatmap) {
      TextLayout layout = read_layout(layout_path);
      auto trace = process_gaze(read_gaze_jsonl(fs::path(gaze_path)), pc);
      auto h = heatmap_attention(trace, layout, pc);
      emit_bytes(out_path, h.images.front().png_bytes);
      if (!attention_out.empty()) emit(attention_out, to_json(h.attention).dump(2));
    } else if (*svm_train) {
      SvmParams params;
      params.C = svm_c;
      params.gamma = svm_gamma;
      params.balanced = !unbalanced;
      std::vector<FeatureWindow> windows;
      if (!windows_path.empty()) {
        for (const auto& w : read_json(windows_path)) windows.push_back(feature_window_from_json(w));
      } else {
        SyntheticTrainingOptions so;
        so.sessions = synth_sessions;
        windows = synthetic_training_windows(so, pc);
      }
      auto clf = train(windows, params);
      write_file_atomic(model_path, clf.to_json().dump(2));
      std::cerr << "trained on " << windows.size() << " windows, " << clf.support_vectors.size()
                << " support vectors, training accuracy " << accuracy(clf, windows) << '\n';
    } else if (*svm_classify) {
      auto clf = TrainedClassifier::from_json(read_json(model_path));
      auto trace = process_gaze(read_gaze_jsonl(fs::path(gaze_path)), pc);
      emit(out_path, to_json(svm_attention(clf, trace, read_layout(layout_path), pc)).dump(2));
    } else if (*prompt || *summarize) {
      MethodKind method = parse_method(method_s);
      Document doc = load_document(doc_path, layout_path);
      std::optional<EventTrace> trace;
      if (!gaze_path.empty()) trace = process_gaze(read_gaze_jsonl(fs::path(gaze_path)), pc);
      std::optional<TrainedClassifier> clf;
      if (method == MethodKind::SVM) {
        if (model_path.empty()) throw std::invalid_argument("svm needs --model");
        clf = TrainedClassifier::from_json(read_json(model_path));
      }
      MethodInputs in;
      in.trace = trace ? &*trace : nullptr;
      in.classifier = clf ? &*clf : nullptr;
      if (!prompt_targets_s.empty()) in.targets = parse_index_list(prompt_targets_s);
      auto art = build_method_prompt(method, doc, in, pc);
      if (*prompt) {
        emit(out_path, to_json(art.bundle, embed_images).dump(2));
      } else {
        LlmGateway gw(cfg.llm);
        emit(out_path, to_json(gw.generate(art.bundle)).dump(2));
      }
    } else if (*eval) {
      std::optional<std::string> shared_ref;
      if (!reference_path.empty()) shared_ref = read_file(reference_path);
      std::unique_ptr<LlmGateway> gw;
      if (judge || scorer_s == "embedding") gw = std::make_unique<LlmGateway>(cfg.llm);
      LexicalScorer lexical;
      std::unique_ptr<EmbeddingScorer> embedding;
      if (scorer_s == "embedding") embedding = std::make_unique<EmbeddingScorer>(*gw);
      SimilarityScorer& scorer = embedding ? static_cast<SimilarityScorer&>(*embedding) : lexical;
      BaselineMode bm = baseline_s == "sentences" ? BaselineMode::sentence_count : BaselineMode::length_weighted;
      std::vector<SessionMetrics> all;
      for (const auto& d : session_dirs) {
        fs::path dir(d);
        Document doc = load_document((dir / "document.json").string(), (dir / "layout.json").string());
        std::optional<std::string> ref = shared_ref;
        if (fs::exists(dir / "reference.txt")) ref = read_file(dir / "reference.txt");
        SessionMetrics sm;
        sm.session_id = dir.filename().string();
        for (const auto& entry : fs::directory_iterator(dir)) {
          auto name = entry.path().filename().string();
          if (name.rfind("summary_", 0) != 0 || entry.path().extension() != ".json") continue;
          SummaryRecord rec = summary_from_json(read_json(entry.path()));
          MethodMetrics mm;
          if (doc.target_paragraphs) mm.focus = content_focus(segment_sentences(rec.summary_text), doc, scorer, bm);
          if (ref) mm.rouge = rouge_all(rec.summary_text, *ref);
          if (judge) mm.judge = gw->judge(doc.full_text, rec.summary_text);
          sm.methods[rec.method] = mm;
        }
        if (sm.methods.empty()) throw std::invalid_argument("no summary_<method>.json in " + dir.string());
        all.push_back(std::move(sm));
      }
      auto report = aggregate_report(all);
      emit(out_path, to_json(report).dump(2));
      if (!md_out.empty()) write_file_atomic(md_out, to_markdown(report));
    } else if (*serve) {
      if (!data_dir.empty()) cfg.data_dir = data_dir;
      if (!host.empty()) cfg.host = host;
      if (port >= 0) cfg.port = port;
      if (!model_path.empty()) cfg.classifier_path = model_path;
      auto gw = std::make_shared<LlmGateway>(cfg.llm);
      SessionStore store(cfg, gw);
      httplib::Server server;
      mount_routes(server, store);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      int bound = cfg.port;
      if (cfg.port == 0) {
        bound = server.bind_to_any_port(cfg.host);
      } else if (!server.bind_to_port(cfg.host, cfg.port)) {
        throw std::runtime_error("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
      }
      std::cout << "listening on " << cfg.host << ':' << bound << std::endl;
      server.listen_after_bind();
    }
  } catch (const LlmError& e) {
    std::cerr << "error: " << e.what() << " (" << to_string(e.kind()) << ", attempts " << e.attempts << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
