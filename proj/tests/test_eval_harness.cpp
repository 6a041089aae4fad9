#include <gtest/gtest.h>

#include <random>

#include "gazesum/eval_harness.hpp"
#include "gazesum/synth_gaze.hpp"
#include "test_support.hpp"

using namespace gazesum;

namespace {

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const char* vocab[] = {"the", "cat", "sat", "on", "mat", "a", "dog", "ran", "The", "MAT"};
  std::uniform_int_distribution<std::size_t> len(1, max_len), word(0, 9);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) {
    if (i) out += (rng() % 4 == 0) ? ", " : " ";
    out += vocab[word(rng)];
  }
  return out;
}

SessionMetrics session_with(const std::string& id, std::map<MethodKind, double> ratios) {
  SessionMetrics s;
  s.session_id = id;
  for (auto [m, r] : ratios) {
    FocusReport f;
    f.target_ratio = r;
    f.baseline_ratio = 0.3;
    f.scorer = "lexical-token-f1";
    s.methods[m].focus = f;
  }
  return s;
}

}  // namespace

TEST(Rouge, CatExample) {
  auto r = rouge_all("the cat sat", "the cat ate");
  EXPECT_NEAR(r.rouge1.f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.rouge2.f1, 0.5, 1e-12);
  EXPECT_NEAR(r.rougeL.f1, 2.0 / 3.0, 1e-12);
}

TEST(Rouge, IdentityDisjointAndEmptyReference) {
  auto same = rouge_all("A quick test.", "a QUICK test");
  EXPECT_DOUBLE_EQ(same.rouge1.f1, 1.0);
  EXPECT_DOUBLE_EQ(same.rouge2.f1, 1.0);
  EXPECT_DOUBLE_EQ(same.rougeL.f1, 1.0);
  auto none = rouge_all("alpha beta", "gamma delta");
  EXPECT_DOUBLE_EQ(none.rouge1.f1, 0.0);
  EXPECT_DOUBLE_EQ(none.rougeL.f1, 0.0);
  EXPECT_THROW(rouge("x", "", RougeVariant::R1), std::invalid_argument);
  EXPECT_THROW(rouge("x", " ,. ", RougeVariant::RL), std::invalid_argument);
}

TEST(Rouge, RandomPairsMatchReferenceImplementation) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    auto c = random_text(rng, 12), r = random_text(rng, 12);
    auto s = rouge_all(c, r);
    EXPECT_NEAR(s.rouge1.f1, oracle::rouge_n_f1(c, r, 1), 1e-12) << c << " | " << r;
    EXPECT_NEAR(s.rouge2.f1, oracle::rouge_n_f1(c, r, 2), 1e-12) << c << " | " << r;
    EXPECT_NEAR(s.rougeL.f1, oracle::rouge_l_f1(c, r), 1e-12) << c << " | " << r;
    auto swapped = rouge_all(r, c);
    EXPECT_DOUBLE_EQ(swapped.rouge1.precision, s.rouge1.recall);
    EXPECT_DOUBLE_EQ(swapped.rougeL.recall, s.rougeL.precision);
    auto ct = tokenize(c), rt = tokenize(r);
    EXPECT_LE(lcs_length(ct, rt), std::min(ct.size(), rt.size()));
  }
}

TEST(Wilcoxon, SmallSamplesMatchEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> v(0, 6);
  int tested = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(trial % 10);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = v(rng);
      b[i] = v(rng);
    }
    if (a == b) {
      EXPECT_THROW(wilcoxon_signed_rank(a, b), DegenerateTestError);
      continue;
    }
    EXPECT_NEAR(wilcoxon_signed_rank(a, b).p_value, oracle::wilcoxon_enumerate(a, b), 1e-12);
    ++tested;
  }
  EXPECT_GT(tested, 250);
}

TEST(Wilcoxon, AllPositiveSixPairs) {
  auto r = wilcoxon_signed_rank({2, 3, 4, 5, 6, 7}, {1, 1, 1, 1, 1, 1});
  EXPECT_NEAR(r.p_value, 0.03125, 1e-15);
  EXPECT_EQ(r.n, 6u);
  EXPECT_TRUE(r.exact);
  EXPECT_DOUBLE_EQ(r.w_plus, 21.0);
}

TEST(Wilcoxon, ZeroDifferencesAreDegenerate) {
  EXPECT_THROW(wilcoxon_signed_rank({1, 2, 3}, {1, 2, 3}), DegenerateTestError);
  EXPECT_THROW(wilcoxon_signed_rank({1, 2}, {1}), std::invalid_argument);
}

TEST(Wilcoxon, ExactAndNormalAgreeAtTwentyFive) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(25), b(25);
    double shift = 0.1 * trial;
    for (std::size_t i = 0; i < 25; ++i) {
      a[i] = n(rng) + shift;
      b[i] = n(rng);
    }
    auto sr = signed_ranks(a, b);
    EXPECT_NEAR(wilcoxon_exact_p(sr), wilcoxon_normal_p(sr), 0.01) << "trial " << trial;
  }
}

TEST(ContentFocus, VerbatimSentenceLandsInItsParagraph) {
  auto doc = fixture_document(4, 3, 6, std::vector<std::size_t>{1, 3});
  LexicalScorer lex;
  std::vector<std::string> summary{doc.layout.sentences[4].text, doc.layout.sentences[0].text,
                                   doc.layout.sentences[10].text};
  auto f = content_focus(summary, doc, lex);
  EXPECT_EQ(f.assigned_paragraph, (std::vector<std::size_t>{1, 0, 3}));
  EXPECT_NEAR(f.target_ratio, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(f.scorer, "lexical-token-f1");
  EXPECT_NEAR(f.baseline_ratio, 0.5, 0.05);
  EXPECT_DOUBLE_EQ(baseline_ratio(doc, BaselineMode::sentence_count), 0.5);
}

TEST(ContentFocus, AllTargetsGiveOneAndErrors) {
  auto doc = fixture_document(2, 2, 4, std::vector<std::size_t>{0, 1});
  LexicalScorer lex;
  EXPECT_DOUBLE_EQ(content_focus({"anything at all"}, doc, lex).target_ratio, 1.0);
  EXPECT_DOUBLE_EQ(baseline_ratio(doc, BaselineMode::length_weighted), 1.0);
  EXPECT_THROW(content_focus({}, doc, lex), std::invalid_argument);
  doc.target_paragraphs.reset();
  EXPECT_THROW(content_focus({"x"}, doc, lex), std::invalid_argument);
}

TEST(ContentFocus, EmbeddingScorerUsesGateway) {
  auto doc = fixture_document(3, 2, 5, std::vector<std::size_t>{2});
  LlmBackendConfig cfg;
  LlmGateway gw(cfg, std::make_shared<MockBackend>(MockBackend::Mode::echo_selected));
  EmbeddingScorer emb(gw);
  auto f = content_focus({doc.layout.sentences[5].text}, doc, emb);
  EXPECT_EQ(f.assigned_paragraph, (std::vector<std::size_t>{2}));
  EXPECT_EQ(f.scorer, "embedding-cosine:mock:echo-selected");
}

TEST(Aggregate, SingleSessionKeepsDetail) {
  auto rep = aggregate_report({session_with("s1", {{MethodKind::Density, 1.0}, {MethodKind::TextOnly, 0.4}})});
  ASSERT_TRUE(rep.single);
  EXPECT_EQ(rep.session_count, 1u);
  auto j = to_json(rep);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["session"]["methods"]["density"]["focus"]["target_ratio"], 1.0);
  ASSERT_EQ(rep.comparisons.size(), 1u);
  EXPECT_FALSE(rep.comparisons[0].p_value);
  EXPECT_NE(to_markdown(rep).find("n/a (n<5)"), std::string::npos);
}

TEST(Aggregate, DominanceIsSignificant) {
  std::vector<SessionMetrics> ss;
  for (int i = 0; i < 10; ++i)
    ss.push_back(session_with("s" + std::to_string(i),
                              {{MethodKind::Density, 0.8 + 0.01 * i}, {MethodKind::TextOnly, 0.3 - 0.01 * i}}));
  auto rep = aggregate_report(ss);
  EXPECT_NEAR(rep.means["target_ratio"][MethodKind::Density], 0.845, 1e-12);
  ASSERT_EQ(rep.comparisons.size(), 1u);
  EXPECT_EQ(rep.comparisons[0].metric, "target_ratio");
  ASSERT_TRUE(rep.comparisons[0].p_value);
  EXPECT_LT(*rep.comparisons[0].p_value, 0.05);
  auto md = to_markdown(rep);
  EXPECT_NE(md.find("| target_ratio | density | text_only | 10 |"), std::string::npos);
}

TEST(Aggregate, IdenticalMethodsAreDegenerate) {
  std::vector<SessionMetrics> ss;
  for (int i = 0; i < 6; ++i)
    ss.push_back(session_with("s" + std::to_string(i), {{MethodKind::Density, 0.5}, {MethodKind::Heatmap, 0.5}}));
  auto rep = aggregate_report(ss);
  ASSERT_EQ(rep.comparisons.size(), 1u);
  EXPECT_TRUE(rep.comparisons[0].degenerate);
  EXPECT_NE(to_markdown(rep).find("degenerate"), std::string::npos);
}

TEST(Aggregate, MismatchedMethodSetsAreRejected) {
  EXPECT_THROW(aggregate_report({session_with("a", {{MethodKind::Density, 1}}),
                                 session_with("b", {{MethodKind::TextOnly, 1}})}),
               std::invalid_argument);
  EXPECT_THROW(aggregate_report({}), std::invalid_argument);
}
