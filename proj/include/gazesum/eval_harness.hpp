#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazesum/common.hpp"
#include "gazesum/llm_gateway.hpp"
#include "gazesum/promptgen.hpp"
#include "gazesum/text_layout.hpp"

namespace gazesum {

// ---- ROUGE ------------------------------------------------------------------

struct PrF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RougeScore {
  PrF rouge1;
  PrF rouge2;
  PrF rougeL;
};

enum class RougeVariant { R1, R2, RL };

inline PrF make_prf(double overlap, double cand_total, double ref_total) {
  PrF s;
  s.precision = cand_total > 0.0 ? overlap / cand_total : 0.0;
  s.recall = ref_total > 0.0 ? overlap / ref_total : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& toks,
                                                                    std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> out;
  if (toks.size() < n) return out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++out[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return out;
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Lowercased alphanumeric tokens, no stemming, no stop words. ROUGE-1/2 use
// clipped n-gram overlap; ROUGE-L uses the longest common subsequence; F is
// the balanced harmonic mean.
inline PrF rouge(const std::string& candidate, const std::string& reference, RougeVariant variant) {
  auto ref = tokenize(reference);
  if (ref.empty()) throw std::invalid_argument("rouge: reference is empty after tokenization");
  auto cand = tokenize(candidate);
  if (variant == RougeVariant::RL) {
    double lcs = static_cast<double>(lcs_length(cand, ref));
    return make_prf(lcs, static_cast<double>(cand.size()), static_cast<double>(ref.size()));
  }
  std::size_t n = variant == RougeVariant::R1 ? 1 : 2;
  auto cc = ngram_counts(cand, n);
  auto rc = ngram_counts(ref, n);
  std::size_t overlap = 0, ct = 0, rt = 0;
  for (const auto& [g, c] : cc) {
    ct += c;
    if (auto it = rc.find(g); it != rc.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [g, c] : rc) rt += c;
  return make_prf(static_cast<double>(overlap), static_cast<double>(ct), static_cast<double>(rt));
}

inline RougeScore rouge_all(const std::string& candidate, const std::string& reference) {
  return {rouge(candidate, reference, RougeVariant::R1), rouge(candidate, reference, RougeVariant::R2),
          rouge(candidate, reference, RougeVariant::RL)};
}

inline json to_json(const PrF& s) { return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}}; }
inline json to_json(const RougeScore& r) {
  return json{{"rouge1", to_json(r.rouge1)}, {"rouge2", to_json(r.rouge2)}, {"rougeL", to_json(r.rougeL)}};
}

// ---- similarity scorers -----------------------------------------------------------

class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual std::string name() const = 0;
  // scores[i][p]: similarity of sentence i to paragraph p.
  virtual std::vector<std::vector<double>> score(const std::vector<std::string>& sentences,
                                                 const std::vector<std::string>& paragraphs) = 0;
};

// Clipped unigram F1 between the two token multisets.
inline double token_f1(const std::string& a, const std::string& b) {
  auto ta = tokenize(a), tb = tokenize(b);
  if (ta.empty() || tb.empty()) return 0.0;
  std::map<std::string, std::size_t> ca, cb;
  for (auto& t : ta) ++ca[t];
  for (auto& t : tb) ++cb[t];
  std::size_t overlap = 0;
  for (const auto& [t, c] : ca)
    if (auto it = cb.find(t); it != cb.end()) overlap += std::min(c, it->second);
  return make_prf(static_cast<double>(overlap), static_cast<double>(ta.size()), static_cast<double>(tb.size())).f1;
}

class LexicalScorer : public SimilarityScorer {
 public:
  std::string name() const override { return "lexical-token-f1"; }
  std::vector<std::vector<double>> score(const std::vector<std::string>& sentences,
                                         const std::vector<std::string>& paragraphs) override {
    std::vector<std::vector<double>> out;
    for (const auto& s : sentences) {
      std::vector<double> row;
      for (const auto& p : paragraphs) row.push_back(token_f1(s, p));
      out.push_back(std::move(row));
    }
    return out;
  }
};

// Cosine similarity of embeddings from the gateway's embedding endpoint.
class EmbeddingScorer : public SimilarityScorer {
 public:
  explicit EmbeddingScorer(LlmGateway& gw) : gw_(gw) {}
  std::string name() const override { return "embedding-cosine:" + gw_.backend().name(); }
  std::vector<std::vector<double>> score(const std::vector<std::string>& sentences,
                                         const std::vector<std::string>& paragraphs) override {
    std::vector<std::string> all(sentences);
    all.insert(all.end(), paragraphs.begin(), paragraphs.end());
    auto vecs = gw_.embed(all);
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      std::vector<double> row;
      for (std::size_t p = 0; p < paragraphs.size(); ++p) row.push_back(cosine(vecs[i], vecs[sentences.size() + p]));
      out.push_back(std::move(row));
    }
    return out;
  }

 private:
  LlmGateway& gw_;
};

// ---- content focus ------------------------------------------------------------

enum class BaselineMode { length_weighted, sentence_count };

struct FocusReport {
  std::vector<std::size_t> assigned_paragraph;
  double target_ratio = 0.0;
  double baseline_ratio = 0.0;
  std::string scorer;
  BaselineMode baseline_mode = BaselineMode::length_weighted;
};

// Share of the document a uniformly spread summary would devote to the targets.
inline double baseline_ratio(const Document& doc, BaselineMode mode) {
  if (!doc.target_paragraphs) throw std::invalid_argument("document has no target paragraphs");
  std::set<std::size_t> targets(doc.target_paragraphs->begin(), doc.target_paragraphs->end());
  double in = 0.0, total = 0.0;
  for (std::size_t p = 0; p < doc.layout.paragraphs.size(); ++p) {
    double amount = 0.0;
    if (mode == BaselineMode::length_weighted) {
      amount = static_cast<double>(doc.paragraph_text(p).size());
    } else {
      amount = static_cast<double>(doc.layout.paragraphs[p].end_sentence - doc.layout.paragraphs[p].start_sentence);
    }
    total += amount;
    if (targets.count(p)) in += amount;
  }
  return total > 0.0 ? in / total : 0.0;
}

// Attributes every summary sentence to its most similar paragraph (earlier
// paragraph on ties) and reports the share attributed to target paragraphs.
inline FocusReport content_focus(const std::vector<std::string>& summary_sentences, const Document& doc,
                                 SimilarityScorer& scorer, BaselineMode mode = BaselineMode::length_weighted) {
  if (summary_sentences.empty()) throw std::invalid_argument("content_focus: empty summary");
  if (doc.layout.paragraphs.empty()) throw std::invalid_argument("content_focus: document has no paragraphs");
  if (!doc.target_paragraphs) throw std::invalid_argument("content_focus: document has no target paragraphs");
  std::vector<std::string> paragraphs;
  for (std::size_t p = 0; p < doc.layout.paragraphs.size(); ++p) paragraphs.push_back(doc.paragraph_text(p));
  auto sim = scorer.score(summary_sentences, paragraphs);
  std::set<std::size_t> targets(doc.target_paragraphs->begin(), doc.target_paragraphs->end());
  FocusReport r;
  r.scorer = scorer.name();
  r.baseline_mode = mode;
  std::size_t hits = 0;
  for (const auto& row : sim) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < row.size(); ++p)
      if (row[p] > row[best]) best = p;
    r.assigned_paragraph.push_back(best);
    if (targets.count(best)) ++hits;
  }
  r.target_ratio = static_cast<double>(hits) / static_cast<double>(summary_sentences.size());
  r.baseline_ratio = baseline_ratio(doc, mode);
  return r;
}

inline json to_json(const FocusReport& f) {
  return json{{"assigned_paragraph", f.assigned_paragraph},
              {"target_ratio", f.target_ratio},
              {"baseline_ratio", f.baseline_ratio},
              {"baseline_mode", f.baseline_mode == BaselineMode::length_weighted ? "length_weighted" : "sentence_count"},
              {"scorer", f.scorer}};
}

// ---- Wilcoxon signed-rank -----------------------------------------------------------

class DegenerateTestError : public std::invalid_argument {
 public:
  DegenerateTestError() : std::invalid_argument("degenerate: no nonzero pairs") {}
};

struct SignedRanks {
  std::vector<double> ranks;  // average ranks of |d|
  std::vector<bool> positive;
  double w_plus = 0.0;
  double tie_term = 0.0;  // sum over tie groups of t^3 - t
};

inline SignedRanks signed_ranks(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  if (d.empty()) throw DegenerateTestError();
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
  SignedRanks sr;
  sr.ranks.assign(d.size(), 0.0);
  sr.positive.assign(d.size(), false);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
    double t = static_cast<double>(j - i + 1);
    sr.tie_term += t * t * t - t;
    for (std::size_t k = i; k <= j; ++k) sr.ranks[order[k]] = avg;
    i = j + 1;
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    sr.positive[i] = d[i] > 0.0;
    if (sr.positive[i]) sr.w_plus += sr.ranks[i];
  }
  return sr;
}

// Exact two-sided p from the null distribution of W+ (every sign pattern
// equally likely), computed by dynamic programming over doubled ranks so
// average ranks from ties stay integral.
inline double wilcoxon_exact_p(const SignedRanks& sr) {
  std::vector<long> r2;
  long total = 0;
  for (double r : sr.ranks) {
    r2.push_back(std::lround(2.0 * r));
    total += r2.back();
  }
  std::vector<double> dist(static_cast<std::size_t>(total) + 1, 0.0);
  dist[0] = 1.0;
  for (long r : r2)
    for (long s = total; s >= r; --s) dist[static_cast<std::size_t>(s)] += dist[static_cast<std::size_t>(s - r)];
  double count = std::pow(2.0, static_cast<double>(r2.size()));
  long w = std::lround(2.0 * sr.w_plus);
  double lower = 0.0, upper = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (s <= w) lower += dist[static_cast<std::size_t>(s)];
    if (s >= w) upper += dist[static_cast<std::size_t>(s)];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / count);
}

// Normal approximation with tie-corrected variance and continuity correction.
inline double wilcoxon_normal_p(const SignedRanks& sr) {
  double n = static_cast<double>(sr.ranks.size());
  double mu = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - sr.tie_term / 48.0;
  if (var <= 0.0) return 1.0;
  double diff = std::max(std::abs(sr.w_plus - mu) - 0.5, 0.0);
  double z = diff / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

inline constexpr std::size_t kWilcoxonExactMaxN = 25;

struct WilcoxonResult {
  double p_value = 1.0;
  std::size_t n = 0;  // nonzero pairs
  double w_plus = 0.0;
  bool exact = true;
};

// Two-sided paired test; zero differences are dropped, ties get average ranks.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  auto sr = signed_ranks(a, b);
  WilcoxonResult r;
  r.n = sr.ranks.size();
  r.w_plus = sr.w_plus;
  r.exact = r.n <= kWilcoxonExactMaxN;
  r.p_value = r.exact ? wilcoxon_exact_p(sr) : wilcoxon_normal_p(sr);
  return r;
}

// ---- aggregation ------------------------------------------------------------------

struct MethodMetrics {
  std::optional<RougeScore> rouge;
  std::optional<FocusReport> focus;
  std::optional<JudgeScores> judge;
};

struct SessionMetrics {
  std::string session_id;
  std::map<MethodKind, MethodMetrics> methods;
};

struct PairComparison {
  MethodKind a;
  MethodKind b;
  std::string metric;
  std::size_t n = 0;  // paired observations
  std::optional<double> p_value;
  bool degenerate = false;
};

struct EvalReport {
  static constexpr int kSchemaVersion = 1;
  std::size_t session_count = 0;
  // metric name -> method -> mean
  std::map<std::string, std::map<MethodKind, double>> means;
  std::vector<PairComparison> comparisons;
  std::string scorer;
  // Present when the report covers exactly one session.
  std::optional<SessionMetrics> single;
};

inline std::map<std::string, double> flatten(const MethodMetrics& m) {
  std::map<std::string, double> out;
  if (m.rouge) {
    out["rouge1_f1"] = m.rouge->rouge1.f1;
    out["rouge2_f1"] = m.rouge->rouge2.f1;
    out["rougeL_f1"] = m.rouge->rougeL.f1;
  }
  if (m.focus) {
    out["target_ratio"] = m.focus->target_ratio;
    out["baseline_ratio"] = m.focus->baseline_ratio;
  }
  if (m.judge) {
    out["judge_consistency"] = m.judge->consistency;
    out["judge_coherence"] = m.judge->coherence;
    out["judge_relevance"] = m.judge->relevance;
    out["judge_fluency"] = m.judge->fluency;
  }
  return out;
}

inline constexpr std::size_t kMinPairsForTest = 5;

// Means per metric and method, plus a Wilcoxon test for every method pair and
// metric with at least five nonzero paired differences.
inline EvalReport aggregate_report(const std::vector<SessionMetrics>& sessions) {
  if (sessions.empty()) throw std::invalid_argument("aggregate_report: no sessions");
  std::set<MethodKind> methods;
  for (const auto& [m, _] : sessions.front().methods) methods.insert(m);
  for (const auto& s : sessions) {
    std::set<MethodKind> here;
    for (const auto& [m, _] : s.methods) here.insert(m);
    if (here != methods) throw std::invalid_argument("aggregate_report: session " + s.session_id + " has a different method set");
  }
  EvalReport rep;
  rep.session_count = sessions.size();
  if (sessions.size() == 1) rep.single = sessions.front();
  // metric -> method -> per-session values
  std::map<std::string, std::map<MethodKind, std::vector<double>>> values;
  for (const auto& s : sessions) {
    for (const auto& [m, mm] : s.methods) {
      if (mm.focus && rep.scorer.empty()) rep.scorer = mm.focus->scorer;
      for (const auto& [metric, v] : flatten(mm)) values[metric][m].push_back(v);
    }
  }
  for (const auto& [metric, by_method] : values) {
    for (const auto& [m, v] : by_method)
      rep.means[metric][m] = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (metric == "baseline_ratio") continue;
    for (auto ia = by_method.begin(); ia != by_method.end(); ++ia) {
      for (auto ib = std::next(ia); ib != by_method.end(); ++ib) {
        if (ia->second.size() != ib->second.size()) continue;
        PairComparison c{ia->first, ib->first, metric, ia->second.size(), std::nullopt, false};
        try {
          auto sr = signed_ranks(ia->second, ib->second);
          c.n = sr.ranks.size();
          if (c.n >= kMinPairsForTest) c.p_value = wilcoxon_signed_rank(ia->second, ib->second).p_value;
        } catch (const DegenerateTestError&) {
          c.degenerate = true;
          c.n = 0;
        }
        rep.comparisons.push_back(c);
      }
    }
  }
  return rep;
}

inline json to_json(const EvalReport& r) {
  json j{{"schema_version", EvalReport::kSchemaVersion},
         {"session_count", r.session_count},
         {"scorer", r.scorer},
         {"means", json::object()},
         {"comparisons", json::array()}};
  for (const auto& [metric, by_method] : r.means)
    for (const auto& [m, v] : by_method) j["means"][metric][to_string(m)] = v;
  for (const auto& c : r.comparisons) {
    json cj{{"a", to_string(c.a)}, {"b", to_string(c.b)}, {"metric", c.metric}, {"n", c.n},
            {"p_value", nullptr},   {"degenerate", c.degenerate}};
    if (c.p_value) cj["p_value"] = *c.p_value;
    j["comparisons"].push_back(cj);
  }
  if (r.single) {
    json sj{{"session_id", r.single->session_id}, {"methods", json::object()}};
    for (const auto& [m, mm] : r.single->methods) {
      json mj = json::object();
      if (mm.rouge) mj["rouge"] = to_json(*mm.rouge);
      if (mm.focus) mj["focus"] = to_json(*mm.focus);
      if (mm.judge) mj["judge"] = to_json(*mm.judge);
      sj["methods"][to_string(m)] = mj;
    }
    j["session"] = sj;
  }
  return j;
}

inline std::string to_markdown(const EvalReport& r) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  std::set<MethodKind> methods;
  for (const auto& [metric, by_method] : r.means)
    for (const auto& [m, _] : by_method) methods.insert(m);
  out << "# Evaluation report\n\nSessions: " << r.session_count;
  if (!r.scorer.empty()) out << "  \nFocus scorer: " << r.scorer;
  out << "\n\n## Means\n\n| metric |";
  for (auto m : methods) out << ' ' << to_string(m) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& [metric, by_method] : r.means) {
    out << "| " << metric << " |";
    for (auto m : methods) {
      auto it = by_method.find(m);
      if (it == by_method.end()) out << " - |";
      else out << ' ' << it->second << " |";
    }
    out << '\n';
  }
  out << "\n## Wilcoxon signed-rank (two-sided)\n\n| metric | a | b | n | p |\n|---|---|---|---|---|\n";
  for (const auto& c : r.comparisons) {
    out << "| " << c.metric << " | " << to_string(c.a) << " | " << to_string(c.b) << " | " << c.n << " | ";
    if (c.degenerate) out << "degenerate";
    else if (c.p_value) out << std::scientific << *c.p_value << std::fixed;
    else out << "n/a (n<5)";
    out << " |\n";
  }
  return out.str();
}

}  // namespace gazesum
