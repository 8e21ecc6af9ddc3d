#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "../fixtures/reference_fixtures.hpp"
#include "autoform/agents/agents.hpp"
#include "autoform/core/error.hpp"
#include "autoform/core/wrap.hpp"
#include "autoform/provers/mock.hpp"
#include "bm25_oracle.hpp"

namespace autoform::agents {
namespace {

using namespace std::chrono_literals;

// Replies from a fixed list (or echoes the formalization block) and keeps
// the last request.
class CapturingBackend : public llm::Backend {
 public:
  explicit CapturingBackend(std::vector<std::string> replies = {}) : replies_(std::move(replies)) {}
  std::string id() const override { return "capture"; }

  std::vector<llm::ChatMessage> last;
  int calls = 0;

 protected:
  std::string do_complete(const std::vector<llm::ChatMessage>& messages, const llm::GenerationParams&) override {
    last = messages;
    ++calls;
    if (!replies_.empty()) {
      auto r = replies_.front();
      if (replies_.size() > 1) replies_.erase(replies_.begin());
      return r;
    }
    // Echo the code block of the prompt.
    const auto& user = messages.back().content;
    auto b = user.find("```\n");
    auto e = user.find("\n```", b + 4);
    return "```\n" + user.substr(b + 4, e - b - 4) + "\n```";
  }

 private:
  std::vector<std::string> replies_;
};

InformalStatement softmax() { return {"Softmax", fixtures::kSoftmaxInformal, {}}; }

const llm::GenerationParams kParams{};

TEST(Autoformalize, ExtractsFencedCodeZeroShot) {
  CapturingBackend backend({"```\nlemma x : True\n```"});
  auto f = autoformalize(softmax(), {}, Language::IsabelleHOL, backend, kParams);
  EXPECT_EQ(f.code(), "lemma x : True");
  EXPECT_EQ(f.origin(), Origin::ZeroShot);
  EXPECT_EQ(f.parent(), nullptr);
  EXPECT_EQ(backend.calls, 1);
  EXPECT_NE(backend.last.front().content.find("Isabelle/HOL"), std::string::npos);
}

TEST(Autoformalize, ExemplarsRenderedInOrderBeforeQuery) {
  std::vector<ExemplarPair> ex{{"first informal", "lemma first: True", Language::IsabelleHOL},
                               {"second informal", "lemma second: True", Language::IsabelleHOL},
                               {"third informal", "lemma third: True", Language::IsabelleHOL}};
  CapturingBackend backend({"lemma q: True"});
  auto f = autoformalize(softmax(), ex, Language::IsabelleHOL, backend, kParams);
  EXPECT_EQ(f.origin(), Origin::FewShot);
  const auto& user = backend.last.back().content;
  std::size_t prev = 0;
  for (const auto& e : ex) {
    auto a = user.find(e.informal, prev);
    ASSERT_NE(a, std::string::npos) << e.informal;
    auto b = user.find(e.formal, a);
    ASSERT_NE(b, std::string::npos) << e.formal;
    prev = b;
  }
  EXPECT_GT(user.find(fixtures::kSoftmaxInformal), prev);
}

TEST(Autoformalize, RejectsMismatchedExemplarsAndEmptyReplies) {
  CapturingBackend backend({"   \n"});
  std::vector<ExemplarPair> lean{{"s", "theorem t : True := trivial", Language::Lean4}};
  EXPECT_THROW(autoformalize(softmax(), lean, Language::IsabelleHOL, backend, kParams), InvariantViolation);
  EXPECT_THROW(autoformalize(softmax(), {}, Language::IsabelleHOL, backend, kParams), EmptyGeneration);
}

std::vector<provers::MockRule> walkthrough_rules() {
  using provers::Diagnostic;
  using provers::Severity;
  return {{"\"HOL.Complex\"", provers::MockEffect::Diagnostics,
           {Diagnostic{Severity::Error, fixtures::kInnerSyntaxError, std::nullopt}}, {}},
          {"real list", provers::MockEffect::Diagnostics,
           {Diagnostic{Severity::Error, fixtures::kUndefinedRealError, std::nullopt}}, {}},
          {"LOOP", provers::MockEffect::Timeout, {}, {}}};
}

provers::ProverPool walkthrough_pool() {
  provers::MockProver mock({Language::IsabelleHOL, walkthrough_rules(), "mock"});
  return provers::ProverPool(Language::IsabelleHOL, mock.factory());
}

TEST(HardCritique, WalkthroughErrors) {
  auto pool = walkthrough_pool();
  auto zero = Formalization::root(fixtures::kSoftmaxZeroShot, Language::IsabelleHOL, Origin::ZeroShot);
  auto c1 = hard_critique(zero, pool, "Softmax");
  EXPECT_EQ(c1.kind, CritiqueKind::Hard);
  EXPECT_FALSE(c1.verdict);
  EXPECT_NE(c1.detail.find("Undefined type name: \"real\""), std::string::npos);

  auto imported = zero.derive(fixtures::kSoftmaxImportRetrieved, Origin::ImportRetrieval);
  auto c2 = hard_critique(imported, pool, "Softmax");
  EXPECT_FALSE(c2.verdict);
  EXPECT_NE(c2.detail.find("Inner syntax error"), std::string::npos);
}

TEST(HardCritique, PassIsStableAndTimeoutFlagged) {
  provers::MockProver mock({Language::IsabelleHOL, walkthrough_rules(), "mock"});
  provers::ProverPool pool(Language::IsabelleHOL, mock.factory());
  auto ok = Formalization::root("lemma t: \"(1::nat) = 1\"\nsorry", Language::IsabelleHOL, Origin::ZeroShot);
  auto c = hard_critique(ok, pool, "T");
  EXPECT_TRUE(c.verdict);
  EXPECT_TRUE(c.detail.empty());
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(hard_critique(ok, pool, "T").verdict);
  // The prover sees the wrapped theory.
  EXPECT_EQ(checkable_code(ok, "T"), "theory T imports Main begin\nlemma t: \"(1::nat) = 1\"\nsorry\nend");

  auto slow = Formalization::root("lemma LOOP: True", Language::IsabelleHOL, Origin::ZeroShot);
  auto t = hard_critique(slow, pool, "T");
  EXPECT_FALSE(t.verdict);
  EXPECT_TRUE(t.timed_out);
  EXPECT_EQ(t.detail, "timeout");
}

TEST(HardCritique, MalformedWrapperIsAFailedCheck) {
  auto pool = walkthrough_pool();
  auto bad = Formalization::root("theory X imports Main begin\nlemma a: True", Language::IsabelleHOL, Origin::ZeroShot);
  auto c = hard_critique(bad, pool, "X");
  EXPECT_FALSE(c.verdict);
  EXPECT_FALSE(c.timed_out);
}

TEST(Judgment, ReferenceReply) {
  auto j = parse_judgment(fixtures::kSoftmaxJudgeReply);
  EXPECT_TRUE(j.verdict);
  EXPECT_EQ(j.explanation.rfind("The natural language statement describes the softmax function", 0), 0u);
  EXPECT_EQ(j.explanation.find("Judgement"), std::string::npos);
  EXPECT_NE(j.explanation.find("`softmax`"), std::string::npos);
}

TEST(Judgment, ExplanationLabel) {
  auto j = parse_judgment("Explanation: bad.\nJudgement: False");
  EXPECT_FALSE(j.verdict);
  EXPECT_EQ(j.explanation, "bad.");
  auto k = parse_judgment("The code misses a bound.\n\nVerdict = no");
  EXPECT_FALSE(k.verdict);
  EXPECT_EQ(k.explanation, "The code misses a bound.");
}

TEST(Judgment, AcceptedVariantGrid) {
  auto cases = [](const std::string& s) {
    std::string lower, upper, title;
    for (char c : s) {
      lower += static_cast<char>(std::tolower(c));
      upper += static_cast<char>(std::toupper(c));
    }
    title = upper.substr(0, 1) + lower.substr(1);
    return std::vector<std::string>{lower, upper, title};
  };
  int checked = 0;
  for (const std::string label : {"Judgement", "Judgment", "Verdict"}) {
    for (const auto& [value, expected] :
         std::vector<std::pair<std::string, bool>>{{"True", true}, {"False", false}, {"Yes", true}, {"No", false}}) {
      for (const auto& l : cases(label)) {
        for (const auto& v : cases(value)) {
          for (const std::string sep : {": ", ":", " = ", "="}) {
            std::string reply = "Explanation: reasons.\n" + l + sep + v;
            Judgment j;
            ASSERT_NO_THROW(j = parse_judgment(reply)) << reply;
            EXPECT_EQ(j.verdict, expected) << reply;
            EXPECT_EQ(j.explanation, "reasons.");
            ++checked;
          }
        }
      }
    }
  }
  EXPECT_EQ(checked, 3 * 4 * 3 * 3 * 4);
  EXPECT_TRUE(parse_judgment("**Judgement:** True").verdict);
  EXPECT_TRUE(parse_judgment("### Final verdict: yes.").verdict);
}

TEST(Judgment, LastMatchingLineWins) {
  EXPECT_TRUE(parse_judgment("Judgement: False\nOn reflection...\nJudgement: True").verdict);
}

TEST(Judgment, UnparseableIsReportedNotGuessed) {
  EXPECT_THROW(parse_judgment("The code looks right to me."), JudgmentUnparseable);
  EXPECT_THROW(parse_judgment("Judgement: maybe"), JudgmentUnparseable);
  EXPECT_THROW(parse_judgment(""), JudgmentUnparseable);
  EXPECT_THROW(parse_judgment("True"), JudgmentUnparseable);
}

TEST(Judgment, ParsingIsTotalOverTheGrammar) {
  std::mt19937 rng(5);
  const std::vector<std::string> labels{"Judgement", "judgment", "VERDICT", "**Judgement**", "Final judgment"};
  const std::vector<std::string> values{"True", "false", "YES", "no", "True.", "**False**"};
  const std::vector<std::string> noise{"", "Some text.", "Explanation: x", "Judgement of the code follows", "* bullet"};
  for (int i = 0; i < 500; ++i) {
    std::string reply;
    for (int k = 0; k < 3; ++k) reply += noise[rng() % noise.size()] + "\n";
    reply += labels[rng() % labels.size()] + (rng() % 2 ? ": " : "=") + values[rng() % values.size()];
    if (rng() % 2) reply += "\n" + noise[rng() % 2];
    EXPECT_NO_THROW(parse_judgment(reply)) << reply;
  }
}

TEST(SoftCritique, ReferenceReplyAndPrompt) {
  CapturingBackend backend({fixtures::kSoftmaxJudgeReply});
  AspectDescription aspect{"concepts", fixtures::kSoftmaxAspect};
  auto f = Formalization::root(fixtures::kSoftmaxImportRetrieved, Language::IsabelleHOL, Origin::ZeroShot);
  auto c = soft_critique(softmax(), f, aspect, backend, kParams);
  EXPECT_EQ(c.kind, CritiqueKind::Soft);
  EXPECT_TRUE(c.verdict);
  EXPECT_EQ(c.aspect, aspect);
  EXPECT_EQ(c.detail.rfind("The natural language statement describes the softmax function", 0), 0u);
  const auto& user = backend.last.back().content;
  EXPECT_NE(user.find(fixtures::kSoftmaxAspect), std::string::npos);
  EXPECT_NE(user.find(fixtures::kSoftmaxImportRetrieved), std::string::npos);
}

TEST(SoftCritique, UnparseableReplyThrows) {
  CapturingBackend backend({"No idea."});
  auto f = Formalization::root("lemma a: True", Language::IsabelleHOL, Origin::ZeroShot);
  EXPECT_THROW(soft_critique(softmax(), f, alignment_faithfulness(), backend, kParams), JudgmentUnparseable);
}

TEST(FormalRefine, EchoKeepsCodeAndSetsLineage) {
  CapturingBackend echo;
  auto f = Formalization::root(fixtures::kSoftmaxImportRetrieved, Language::IsabelleHOL, Origin::ZeroShot);
  auto r = formal_refine(softmax(), f, false, fixtures::kInnerSyntaxError, echo, kParams);
  EXPECT_EQ(r.code(), f.code());
  EXPECT_EQ(r.origin(), Origin::FormalRefinement);
  ASSERT_NE(r.parent(), nullptr);
  EXPECT_EQ(r.parent()->code(), f.code());
  EXPECT_NE(echo.last.back().content.find(fixtures::kInnerSyntaxError), std::string::npos);
}

TEST(FormalRefine, ReferenceRefinementAndPreconditions) {
  CapturingBackend backend({std::string("```isabelle\n") + fixtures::kSoftmaxFormalRefined + "\n```"});
  auto f = Formalization::root(fixtures::kSoftmaxImportRetrieved, Language::IsabelleHOL, Origin::ZeroShot);
  auto r = formal_refine(softmax(), f, std::nullopt, fixtures::kInnerSyntaxError, backend, kParams);
  EXPECT_EQ(r.code(), fixtures::kSoftmaxFormalRefined);
  EXPECT_NE(r.code().find("theory Softmax imports \"HOL.Real\""), std::string::npos);
  EXPECT_THROW(formal_refine(softmax(), f, false, "  ", backend, kParams), InvariantViolation);
}

TEST(InformalRefine, PromptCarriesAspectAndEvaluation) {
  CapturingBackend backend({fixtures::kSoftmaxInformalRefined});
  AspectDescription aspect{"concepts", fixtures::kSoftmaxAspect};
  auto f = Formalization::root(fixtures::kSoftmaxImportRetrieved, Language::IsabelleHOL, Origin::ZeroShot);
  auto evaluation = parse_judgment(fixtures::kSoftmaxJudgeReply).explanation;
  auto r = informal_refine(softmax(), f, aspect, evaluation, backend, kParams);
  EXPECT_EQ(r.origin(), Origin::InformalRefinement);
  EXPECT_EQ(r.parent()->code(), f.code());
  EXPECT_NE(r.code().find("definition softmax :: \"real list"), std::string::npos);
  EXPECT_TRUE(ends_with_end_marker(r.code()));
  const auto& user = backend.last.back().content;
  EXPECT_NE(user.find(fixtures::kSoftmaxAspect), std::string::npos);
  EXPECT_NE(user.find(evaluation), std::string::npos);
  EXPECT_THROW(informal_refine(softmax(), f, aspect, "", backend, kParams), InvariantViolation);
}

TEST(InformalRefine, EchoIsIdentity) {
  CapturingBackend echo;
  auto f = Formalization::root("lemma a: True", Language::IsabelleHOL, Origin::ZeroShot);
  auto r = informal_refine(softmax(), f, formalization_correctness(), "fine", echo, kParams);
  EXPECT_EQ(r.code(), f.code());
  EXPECT_EQ(r.parent()->code(), f.code());
}

Formalization isa(const std::string& code) { return Formalization::root(code, Language::IsabelleHOL, Origin::ZeroShot); }

TEST(Denoise, WorkedExamples) {
  auto one = denoise(isa(fixtures::kDenoiseExample1In));
  EXPECT_EQ(one.code(), fixtures::kDenoiseExample1Out);
  EXPECT_EQ(one.origin(), Origin::Denoised);
  EXPECT_EQ(denoise(isa(fixtures::kDenoiseExample2In)).code(), fixtures::kDenoiseExample2Out);
}

TEST(Denoise, CleanTheoryUnchanged) {
  EXPECT_EQ(denoise(isa(fixtures::kDenoiseExample1Out)).code(), fixtures::kDenoiseExample1Out);
  std::string clean = "theory T imports Main begin\ndefinition f :: \"nat \\<Rightarrow> nat\" where \"f x = x\"\nend";
  EXPECT_EQ(denoise(isa(clean)).code(), clean);
}

TEST(Denoise, StripsProseAndFencesAndWrapsBareBodies) {
  auto out = denoise_code("Sure! Here is the code:\n```isabelle\nlemma a: \"x = x\"\n  by simp\n```\nHope it helps.",
                          Language::IsabelleHOL, {{}, "A"});
  EXPECT_EQ(out, "theory A imports Main begin\nlemma a: \"x = x\"\nsorry\nend");
}

TEST(Denoise, InlineProofAndMissingProofAndMissingEnd) {
  EXPECT_EQ(denoise_code("theory T imports Main begin\nlemma a: \"True\" by simp\nlemma b: \"True\"\n",
                         Language::IsabelleHOL),
            "theory T imports Main begin\nlemma a: \"True\"\nsorry\nlemma b: \"True\"\nsorry\nend");
}

TEST(Denoise, ProofKeywordsInsideStringsAndCommentsIgnored) {
  std::string code =
      "theory T imports Main begin\nlemma a:\n  fixes x :: nat (* proof by cases *)\n  shows \"x = x \\<or> by\"\nsorry\nend";
  EXPECT_EQ(denoise_code(code, Language::IsabelleHOL), code);
}

TEST(Denoise, ImportRepairNeedsUniqueMatch) {
  // "HOL.Rea" is within distance 2 of both HOL.Real and HOL.Rat, so it stays.
  auto out = denoise_code("theory T imports Main \"HOL.Rea\" \"HOL.Transcendentl\" begin\nend", Language::IsabelleHOL);
  EXPECT_EQ(out, "theory T imports Main \"HOL.Rea\" \"HOL.Transcendental\" begin\nend");
  auto kb = denoise_code("theory T imports \"My.Theori\" begin\nend", Language::IsabelleHOL, {{"My.Theory"}, "T"});
  EXPECT_EQ(kb, "theory T imports \"My.Theory\" begin\nend");
}

TEST(Denoise, LeanFencesAndImports) {
  auto out = denoise_code("```lean\nimport Mathlb\ntheorem t : 1 = 1 := by rfl\n```", Language::Lean4);
  EXPECT_EQ(out, "import Mathlib\ntheorem t : 1 = 1 := by rfl");
}

std::vector<std::string> noisy_corpus() {
  std::vector<std::string> corpus{fixtures::kDenoiseExample1In, fixtures::kDenoiseExample2In,
                                  fixtures::kDenoiseExample1Out, fixtures::kDenoiseExample2Out};
  const std::vector<std::string> prefixes{"", "Here is the formalization:\n```isabelle\n", "```\n", "Answer:\n"};
  const std::vector<std::string> headers{"theory X imports Complex_Mai\nbegin\n", "theory X imports Main begin\n",
                                         "", "theory X imports \"HOL.Complx\" Main\nbegin\n"};
  const std::vector<std::string> bodies{
      "lemma a:\n  fixes n :: nat\n  shows \"n = n\"\n  by simp\n",
      "theorem b: \"(2::nat) + 2 = 4\"\nproof -\n  show ?thesis by simp\nqed\n",
      "definition f :: \"nat \\<Rightarrow> nat\" where \"f n = n + 1\"\nlemma c: \"f 0 = 1\"\n  unfolding f_def\n  apply simp\n  done\n",
      "lemma d: \"True\"\n",
      "corollary e: \"x = x\" using refl by blast\nlemma f2: \"y = y\"\nproof (cases y)\n  case 0\n"};
  const std::vector<std::string> suffixes{"end", "end\n```", "", "\n```\nLet me know."};
  std::mt19937 rng(3);
  while (corpus.size() < 24) {
    corpus.push_back(prefixes[rng() % prefixes.size()] + headers[rng() % headers.size()] +
                     bodies[rng() % bodies.size()] + suffixes[rng() % suffixes.size()]);
  }
  return corpus;
}

TEST(Denoise, IdempotentOnNoisyCorpus) {
  for (const auto& input : noisy_corpus()) {
    auto once = denoise_code(input, Language::IsabelleHOL);
    auto twice = denoise_code(once, Language::IsabelleHOL);
    EXPECT_EQ(twice, once) << input;
  }
}

TEST(Denoise, TotalOnGarbage) {
  std::mt19937 rng(11);
  const std::string alphabet = "theory lemma begin end proof qed by sorry \"(*)*‹›\n imports X";
  for (int i = 0; i < 300; ++i) {
    std::string s;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 80); k < n; ++k) s += alphabet[rng() % alphabet.size()];
    EXPECT_NO_THROW(denoise_code(s, Language::IsabelleHOL)) << s;
    EXPECT_NO_THROW(denoise_code(s, Language::Lean4)) << s;
  }
}

struct DemoKb {
  std::vector<kb::KbRecord> records = kb::load_kb(std::string(AUTOFORM_DATA_DIR) + "/kb/hol_demo.jsonl");
  kb::Bm25Index index = kb::build_index(records);
};

TEST(RetrieveImports, SoftmaxGainsComplexImport) {
  DemoKb demo;
  auto zero = isa(fixtures::kSoftmaxZeroShot);
  auto r = retrieve_imports(zero, demo.index, demo.records, 1, fixtures::kUndefinedRealError, "Softmax");
  EXPECT_EQ(r.code(), fixtures::kSoftmaxImportRetrieved);
  EXPECT_EQ(r.origin(), Origin::ImportRetrieval);
  EXPECT_EQ(r.parent()->code(), zero.code());
  // Same result without the diagnostic.
  EXPECT_EQ(retrieve_imports(zero, demo.index, demo.records, 1, "", "Softmax").code(), fixtures::kSoftmaxImportRetrieved);
}

TEST(RetrieveImports, QueryComposition) {
  auto q = import_query("definition softmax :: \"real list\" where \"softmax z = z\"", Language::IsabelleHOL,
                        "Undefined type name: \"real\" Failed to parse type");
  EXPECT_EQ(q, "softmax real list softmax z z real");
  EXPECT_EQ(import_query("theorem t : x = y := by simp", Language::Lean4, "unknown identifier 'Real.foo'"),
            "t x y Real.foo");
}

TEST(RetrieveImports, NoMatchKeepsDefaults) {
  DemoKb demo;
  auto f = isa("lemma zzqx: \"qqq\"");
  auto r = retrieve_imports(f, demo.index, demo.records, 3, "", "Q");
  EXPECT_EQ(r.code(), "theory Q imports Main begin\nlemma zzqx: \"qqq\"\nend");
}

TEST(RetrieveImports, TopThreeUnionFollowsBruteForceRanking) {
  std::vector<kb::KbRecord> records(5);
  const std::vector<std::string> statements{"lemma alpha beta", "lemma gamma delta", "lemma alpha alpha gamma",
                                            "lemma epsilon", "lemma beta gamma gamma"};
  const std::vector<std::vector<std::string>> imports{
      {"A.One", "A.Two"}, {"B.One"}, {"A.Two", "C.One"}, {"D.One"}, {"E.One", "A.One"}};
  testing_oracle::Corpus corpus;
  for (std::size_t i = 0; i < 5; ++i) {
    records[i].id = static_cast<std::int64_t>(i + 10);
    records[i].statement = statements[i];
    records[i].abs_imports = imports[i];
    corpus.emplace_back(records[i].id, kb::tokenize(statements[i]));
  }
  auto index = kb::build_index(records);
  const std::string code = "lemma alpha: \"gamma beta\"";
  auto ranked = testing_oracle::brute_force_rank(corpus, kb::tokenize(import_query(code, Language::IsabelleHOL)), 1.5,
                                                 0.75, 0.25, 3);
  ASSERT_EQ(ranked.size(), 3u);
  std::vector<std::string> expected;
  for (const auto& [id, _] : ranked) {
    for (const auto& imp : imports[static_cast<std::size_t>(id - 10)]) {
      if (std::find(expected.begin(), expected.end(), imp) == expected.end()) expected.push_back(imp);
    }
  }
  EXPECT_EQ(retrieve_import_names(code, Language::IsabelleHOL, index, records, 3), expected);
}

TEST(RetrieveImports, NeverRemovesExistingImports) {
  DemoKb demo;
  std::mt19937 rng(8);
  const std::vector<std::string> pool{"Main", "HOL.Real", "\"HOL-Library.Multiset\"", "Complex_Main", "HOL.List"};
  for (int i = 0; i < 50; ++i) {
    std::string imports;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 3); ++k) imports += " " + pool[rng() % pool.size()];
    std::string code = "theory P imports" + imports + " begin\nlemma x: \"exp (sum_list z) > (0::real)\"\nsorry\nend";
    auto before = parse_theory_header(code)->imports;
    auto after_code = retrieve_imports(isa(code), demo.index, demo.records, 1 + rng() % 4).code();
    auto after = parse_theory_header(after_code)->imports;
    for (const auto& imp : before) EXPECT_NE(std::find(after.begin(), after.end(), imp), after.end()) << after_code;
  }
}

TEST(Prompts, BuiltinTemplatesRender) {
  const auto& lib = default_prompts();
  EXPECT_EQ(lib.names(), (std::vector<std::string>{"few_shot", "formal_refine", "informal_refine", "judge", "zero_shot"}));
  for (const auto& name : lib.names()) {
    const auto& t = lib.get(name);
    EXPECT_EQ(t.version, 1);
    std::map<std::string, std::string> all;
    for (const auto& h : t.holes()) all[h] = "<" + h + ">";
    auto r = t.render(all);
    EXPECT_FALSE(r.system.empty());
    EXPECT_FALSE(r.user.empty());
    if (!t.holes().empty()) {
      auto missing = all;
      missing.erase(t.holes().back());
      EXPECT_THROW(t.render(missing), TemplateError) << name;
    }
  }
  EXPECT_THROW(lib.get("nope"), ConfigError);
}

TEST(Prompts, DirectoryOverrides) {
  auto dir = std::filesystem::temp_directory_path() / "autoform_prompt_override";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "judge.txt") << "version: 2\n[system]\nBe brief.\n[user]\n{informal} / {aspect_description}\n";
  auto lib = PromptLibrary::builtin();
  lib.load_dir(dir);
  EXPECT_EQ(lib.get("judge").version, 2);
  EXPECT_EQ(lib.get("judge").system, "Be brief.");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(parse_prompt_template("x", "[user]\nonly"), ConfigError);
  EXPECT_THROW(lib.load_dir("/nonexistent/prompts"), ConfigError);
}

TEST(Prompts, ShippedAspectPresets) {
  auto aspects = load_aspects(std::string(AUTOFORM_DATA_DIR) + "/aspects/presets.json");
  ASSERT_GE(aspects.size(), 2u);
  EXPECT_EQ(aspects[0], alignment_faithfulness());
  EXPECT_EQ(aspects[1], formalization_correctness());
}

}  // namespace
}  // namespace autoform::agents
