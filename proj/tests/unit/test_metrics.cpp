#include <gtest/gtest.h>

#include <random>

#include "autoform/core/error.hpp"
#include "autoform/llm/scripted.hpp"
#include "autoform/metrics/report.hpp"
#include "metrics_oracle.hpp"

namespace autoform::metrics {
namespace {

namespace oracle = testing_oracle;

Tokens words(const std::string& s) {
  Tokens out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

Tokens random_tokens(std::mt19937& rng, std::size_t min_len = 1) {
  static const Tokens vocab{"lemma", "x", "y", "::", "nat", "=", "+", "(", ")", "real", "\\<Rightarrow>", "f"};
  std::size_t len = min_len + rng() % (31 - min_len);
  Tokens out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(vocab[rng() % (3 + rng() % (vocab.size() - 2))]);
  return out;
}

std::vector<char32_t> random_chars(std::mt19937& rng) {
  static const std::vector<char32_t> alphabet{U'a', U'b', U'c', U'(', U'λ', U'⇒', U' ', U'x', U':', U'\n'};
  std::size_t len = 1 + rng() % 30;
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng() % (2 + rng() % (alphabet.size() - 1))]);
  return out;
}

TEST(Tokenizer, SeparatesOperators) {
  EXPECT_EQ(tokenize_code("definition softmax :: \"real list \\<Rightarrow> real list\" where"),
            (Tokens{"definition", "softmax", "::", "\"", "real", "list", "\\<Rightarrow>", "real", "list", "\"",
                    "where"}));
  EXPECT_EQ(tokenize_code("λx. f x|y ⇒ z==>w"),
            (Tokens{"λ", "x.", "f", "x", "|", "y", "⇒", "z", "==>", "w"}));
  EXPECT_EQ(tokenize_code("HOL.Complex (0::real)"), (Tokens{"HOL.Complex", "(", "0", "::", "real", ")"}));
  EXPECT_TRUE(tokenize_code(" \n\t").empty());
}

TEST(Bleu, HandExample) {
  // Precisions 4/5, 3/4, 2/3, 1/2, equal lengths: 100 * 0.2^(1/4).
  double s = bleu4(words("a b c d e"), {words("a b c d f")});
  EXPECT_NEAR(s, 100.0 * std::pow(0.2, 0.25), 1e-9);
  EXPECT_NEAR(s, oracle::oracle_bleu4(words("a b c d e"), {words("a b c d f")}), 1e-9);
}

TEST(Bleu, IdentityEmptyAndSmoothing) {
  EXPECT_EQ(bleu4(words("a b c d"), {words("a b c d")}), 100.0);
  EXPECT_EQ(bleu4(words("a"), {words("a")}), 100.0);
  EXPECT_EQ(bleu4({}, {words("a b")}), 0.0);
  // No 3- or 4-gram matches: add-one on those orders only.
  double s = bleu4(words("a b x c d"), {words("a b y c d")});
  double expected = 100.0 * std::pow((4.0 / 5) * (2.0 / 4) * (1.0 / 4) * (1.0 / 3), 0.25);
  EXPECT_NEAR(s, expected, 1e-9);
  EXPECT_THROW(bleu4(words("a"), {}), InvariantViolation);
}

TEST(Bleu, BrevityPenaltyUsesClosestReference) {
  // Candidate of 3 tokens, references of 2 and 6 tokens: closest is 2, no penalty.
  auto c = words("a b c");
  EXPECT_NEAR(bleu4(c, {words("a b"), words("a b c d e f")}), oracle::oracle_bleu4(c, {words("a b"), words("a b c d e f")}),
              1e-12);
  double short_only = bleu4(c, {words("a b c d e f")});
  EXPECT_NEAR(short_only, oracle::oracle_bleu4(c, {words("a b c d e f")}), 1e-12);
  EXPECT_LT(short_only, 100.0);
}

TEST(Bleu, OracleEquivalenceOnRandomPairs) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 200; ++i) {
    auto c = random_tokens(rng);
    std::vector<Tokens> refs{random_tokens(rng)};
    if (i % 3 == 0) refs.push_back(random_tokens(rng));
    EXPECT_NEAR(bleu4(c, refs), oracle::oracle_bleu4(c, refs), 1e-9) << i;
  }
}

TEST(Bleu, CorpusPoolsCounts) {
  auto a = bleu_stats(words("a b c d e"), {words("a b c d f")});
  auto b = bleu_stats(words("x y"), {words("x y z")});
  auto pooled = a;
  pooled += b;
  EXPECT_EQ(pooled.matches[0], 4 + 2);
  EXPECT_EQ(pooled.totals[0], 5 + 2);
  EXPECT_EQ(pooled.candidate_length, 7);
  EXPECT_EQ(pooled.reference_length, 8);
  double expected = 100.0 * std::exp(1.0 - 8.0 / 7.0) *
                    std::pow((6.0 / 7) * (4.0 / 5) * (2.0 / 3) * (1.0 / 2), 0.25);
  EXPECT_NEAR(bleu_from_stats(pooled), expected, 1e-9);
}

TEST(Chrf, HandExamples) {
  // Orders 1..4 present on both sides: P = R = (3/4 + 2/3 + 1/2 + 0)/4 = 23/48.
  EXPECT_NEAR(chrf("abcd", "abce"), 100.0 * 23.0 / 48.0, 1e-9);
  EXPECT_EQ(chrf("abc", "xyz"), 0.0);
  EXPECT_EQ(chrf("same text", "same text"), 100.0);
  EXPECT_EQ(chrf("ab c", "a bc"), 100.0);
  EXPECT_EQ(chrf("", ""), 100.0);
  EXPECT_EQ(chrf("  ", ""), 100.0);
  EXPECT_EQ(chrf("a", ""), 0.0);
  EXPECT_EQ(chrf("", "a"), 0.0);
}

TEST(Chrf, CountsCodePoints) {
  auto s = chrf_stats("λx", "λy");
  EXPECT_EQ(s.candidate_ngrams[0], 2);
  EXPECT_EQ(s.matches[0], 1);
  EXPECT_EQ(s.candidate_ngrams[1], 1);
}

TEST(Chrf, OracleEquivalenceOnRandomPairs) {
  std::mt19937 rng(77);
  for (int i = 0; i < 200; ++i) {
    auto c = random_chars(rng);
    auto r = random_chars(rng);
    EXPECT_NEAR(chrf(oracle::utf8(c), oracle::utf8(r)), oracle::oracle_chrf(c, r), 1e-9) << i;
  }
}

TEST(Ruby, TokenEditSimilarity) {
  EXPECT_NEAR(ruby("a b c", "a x c"), 100.0 * 2.0 / 3.0, 1e-9);
  EXPECT_EQ(round2(ruby("a b c", "a x c")), 66.67);
  EXPECT_EQ(ruby("lemma x: True", "lemma x: True"), 100.0);
  EXPECT_EQ(ruby("", ""), 100.0);
  EXPECT_EQ(ruby("a", ""), 0.0);
  EXPECT_EQ(RubyChain::standard().score("a", "b").level, "string");
}

TEST(Ruby, HigherLevelShortCircuits) {
  int lower_calls = 0;
  RubyChain chain({{"graph", [](std::string_view, std::string_view) -> std::optional<double> { return 0.5; }},
                   {"string", [&](std::string_view, std::string_view) -> std::optional<double> {
                      ++lower_calls;
                      return 1.0;
                    }}});
  auto s = chain.score("a", "b");
  EXPECT_EQ(s.score, 50.0);
  EXPECT_EQ(s.level, "graph");
  EXPECT_EQ(lower_calls, 0);

  RubyChain fallthrough({{"graph", [](std::string_view, std::string_view) -> std::optional<double> { return {}; }},
                         {"string", [&](std::string_view, std::string_view) -> std::optional<double> {
                            ++lower_calls;
                            return 0.25;
                          }}});
  EXPECT_EQ(fallthrough.score("a", "b").level, "string");
  EXPECT_EQ(lower_calls, 1);
}

TEST(Metrics, IdentityAndRangeFuzz) {
  std::mt19937 rng(9);
  for (int i = 0; i < 300; ++i) {
    auto t = random_tokens(rng);
    EXPECT_EQ(bleu4(t, {t}), 100.0);
    std::string text = oracle::utf8(random_chars(rng)) + "x";
    EXPECT_EQ(chrf(text, text), 100.0);
    EXPECT_EQ(ruby(text, text), 100.0);

    auto u = random_tokens(rng);
    double b = bleu4(t, {u});
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 100.0);
    std::string other(rng() % 40, '\0');
    for (auto& ch : other) ch = static_cast<char>(rng() % 256);
    for (double v : {chrf(text, other), chrf(other, text), ruby(text, other), ruby(other, other)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 100.0);
    }
  }
}

TEST(PassRate, Examples) {
  std::vector<bool> table(244, false);
  std::fill(table.begin(), table.begin() + 160, true);
  EXPECT_EQ(pass_rate(table), 65.57);
  EXPECT_EQ(pass_rate({true, true}), 100.0);
  EXPECT_EQ(pass_rate({false, false, false}), 0.0);
  EXPECT_THROW(pass_rate({}), EmptyInput);
}

TEST(PassRate, ConcatenationLiesBetween) {
  std::mt19937 rng(4);
  for (int i = 0; i < 200; ++i) {
    std::vector<bool> a(1 + rng() % 20), b(1 + rng() % 20);
    for (auto&& x : a) x = rng() % 2;
    for (auto&& x : b) x = rng() % 3 == 0;
    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    double lo = std::min(pass_rate(a), pass_rate(b)), hi = std::max(pass_rate(a), pass_rate(b));
    EXPECT_GE(pass_rate(ab), lo - 0.005);
    EXPECT_LE(pass_rate(ab), hi + 0.005);
  }
}

std::vector<FormalizationRecord> records(int n) {
  std::vector<FormalizationRecord> out;
  for (int i = 0; i < n; ++i) {
    FormalizationRecord r;
    r.statement = {"item" + std::to_string(i), "statement " + std::to_string(i), {}};
    r.attempts.push_back({Formalization::root("lemma l" + std::to_string(i) + ": True", Language::IsabelleHOL,
                                              Origin::ZeroShot),
                          {}});
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<llm::ScriptEntry> ordered(const std::vector<std::string>& replies) {
  std::vector<llm::ScriptEntry> out;
  for (const auto& r : replies) out.push_back({std::nullopt, r});
  return out;
}

TEST(JudgeAggregate, AllTrueAndAlternating) {
  llm::ScriptedBackend yes(ordered({"Judgement: True", "Judgement: True", "Judgement: True", "Judgement: True"}));
  EXPECT_EQ(judge_aggregate(records(4), alignment_faithfulness(), yes, {}).percentage, 100.0);
  llm::ScriptedBackend alt(ordered({"Judgement: True", "Judgement: False", "Judgement: True", "Judgement: False"}));
  auto agg = judge_aggregate(records(4), alignment_faithfulness(), alt, {});
  EXPECT_EQ(agg.percentage, 50.0);
  EXPECT_FALSE(agg.items[1].verdict);
}

TEST(JudgeAggregate, UnparseableCountedFalseAndFlagged) {
  // 5 True, 3 False, 2 unparseable: 5/10.
  llm::ScriptedBackend mix(ordered({"Judgement: True", "Judgement: False", "I cannot decide.", "Verdict: yes",
                                    "Judgement: True", "Judgement: no", "Judgement: maybe", "Judgment: True",
                                    "Judgement: False", "Judgement: True"}));
  auto agg = judge_aggregate(records(10), formalization_correctness(), mix, {});
  EXPECT_EQ(agg.percentage, 50.0);
  EXPECT_EQ(agg.unparseable, 2u);
  EXPECT_TRUE(agg.items[2].unparseable);
  EXPECT_TRUE(agg.items[6].unparseable);
  EXPECT_FALSE(agg.items[6].verdict);
}

TEST(JudgeAggregate, SkipsFailedRecords) {
  auto rs = records(3);
  rs[1].error = "backend failed";
  llm::ScriptedBackend yes(ordered({"Judgement: True", "Judgement: False"}));
  auto agg = judge_aggregate(rs, alignment_faithfulness(), yes, {});
  ASSERT_EQ(agg.items.size(), 2u);
  EXPECT_EQ(agg.items[1].id, "item2");
  EXPECT_EQ(agg.percentage, 50.0);
  auto none = records(1);
  none[0].error = "x";
  EXPECT_THROW(judge_aggregate(none, alignment_faithfulness(), yes, {}), EmptyInput);
}

std::pair<std::vector<std::string>, std::vector<std::string>> random_corpus(std::size_t n) {
  std::mt19937 rng(static_cast<unsigned>(n));
  std::vector<std::string> c, r;
  for (std::size_t i = 0; i < n; ++i) {
    auto join = [](const Tokens& t) {
      std::string s;
      for (const auto& w : t) s += w + " ";
      return s;
    };
    c.push_back(join(random_tokens(rng)));
    r.push_back(join(random_tokens(rng)));
  }
  return {c, r};
}

TEST(Corpus, ParallelKernelMatchesSerialExactly) {
  for (std::size_t n : {1u, 7u, 300u}) {
    auto [c, r] = random_corpus(n);
    auto s = score_corpus_serial(c, r);
    auto p = score_corpus_parallel(c, r);
    EXPECT_EQ(s.bleu4, p.bleu4);
    EXPECT_EQ(s.chrf, p.chrf);
    EXPECT_EQ(s.ruby, p.ruby);
    ASSERT_EQ(s.items.size(), p.items.size());
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(s.items[i].bleu4, p.items[i].bleu4);
      EXPECT_EQ(s.items[i].chrf, p.items[i].chrf);
      EXPECT_EQ(s.items[i].ruby, p.items[i].ruby);
    }
  }
  EXPECT_THROW(score_corpus_serial({}, {}), EmptyInput);
  EXPECT_THROW(score_corpus_parallel({"a"}, {}), InvariantViolation);
}

TEST(Corpus, RubyIsItemMean) {
  auto s = score_corpus_serial({"a b c", "a b"}, {"a x c", "a b"});
  EXPECT_NEAR(s.ruby, (200.0 / 3.0 + 100.0) / 2.0, 1e-9);
}

TEST(Report, PerfectPredictions) {
  std::vector<ReportItem> items;
  for (int i = 0; i < 3; ++i) {
    std::string code = "lemma l" + std::to_string(i) + ": \"x = x\"";
    items.push_back({"i" + std::to_string(i), code, code, true, {}, {}, false, false});
  }
  auto report = compute_report(items);
  EXPECT_EQ(report.bleu4, 100.0);
  EXPECT_EQ(report.chrf, 100.0);
  EXPECT_EQ(report.ruby, 100.0);
  EXPECT_EQ(report.pass_rate, 100.0);
  EXPECT_FALSE(report.af_pct);
  EXPECT_EQ(report.n_items, 3u);
  EXPECT_EQ(report.ruby_level, "string");
  EXPECT_EQ(compute_report(items, false), report);
}

TEST(Report, JsonRoundTripAndOptionalColumns) {
  std::vector<ReportItem> items{{"a", "lemma a: True", std::nullopt, true, true, false, false, false},
                                {"b", "lemma b: True", std::nullopt, false, false, true, true, false}};
  auto report = compute_report(items);
  EXPECT_FALSE(report.bleu4);
  EXPECT_EQ(report.pass_rate, 50.0);
  EXPECT_EQ(report.af_pct, 50.0);
  EXPECT_EQ(report.fc_pct, 50.0);
  EXPECT_EQ(report.judge_unparseable, 1u);
  auto j = to_json(report);
  EXPECT_TRUE(j["corpus"]["bleu4"].is_null());
  EXPECT_EQ(j["items"][1]["fc"], true);
  EXPECT_EQ(report_from_json(j), report);
  EXPECT_EQ(serialize(report_from_json(nlohmann::json::parse(serialize(report)))), serialize(report));
  EXPECT_THROW(report_from_json(nlohmann::json{{"corpus", 1}}), ConfigError);
  auto table = summary_table(report, "toy");
  EXPECT_NE(table.find("BLEU-4"), std::string::npos);
  EXPECT_NE(table.find("50.00"), std::string::npos);
  EXPECT_NE(table.find("AF"), std::string::npos);
}

}  // namespace
}  // namespace autoform::metrics
