#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autoform::metrics {

using Tokens = std::vector<std::string>;

// Whitespace split after separating punctuation and formal operators
// (::, ==>, \<Rightarrow>, ⇒, λ, |, quotes, ...). Identifiers keep `_`, `'`, `.`.
Tokens tokenize_code(std::string_view text);

// BLEU-4 sufficient statistics for one candidate.
struct BleuStats {
  std::array<std::int64_t, 4> matches{};
  std::array<std::int64_t, 4> totals{};
  std::int64_t candidate_length = 0;
  std::int64_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

// Clipped n-gram matches; reference length is the closest reference length
// (shorter on ties). references must be non-empty.
BleuStats bleu_stats(const Tokens& candidate, const std::vector<Tokens>& references);
// Uniform weights, brevity penalty, add-one smoothing on orders with no
// matches. 0 for an empty candidate.
double bleu_from_stats(const BleuStats& stats);
double bleu4(const Tokens& candidate, const std::vector<Tokens>& references);

inline constexpr int kChrfOrder = 6;
inline constexpr double kChrfBeta = 2.0;

struct ChrfStats {
  std::array<std::int64_t, kChrfOrder> matches{};
  std::array<std::int64_t, kChrfOrder> candidate_ngrams{};
  std::array<std::int64_t, kChrfOrder> reference_ngrams{};

  ChrfStats& operator+=(const ChrfStats& other);
};

// Character n-grams over code points with whitespace removed.
ChrfStats chrf_stats(std::string_view candidate, std::string_view reference);
// Precision and recall averaged over orders present on both sides, then
// F-beta. No such order: 100 when both sides are empty, else 0.
double chrf_from_stats(const ChrfStats& stats);
double chrf(std::string_view candidate, std::string_view reference);

// One similarity level of RUBY; nullopt means "not applicable to this pair".
struct RubyLevel {
  std::string name;
  std::function<std::optional<double>(std::string_view, std::string_view)> similarity;
};

struct RubyScore {
  double score = 0;
  std::string level;
};

// Levels tried in order; the first that answers decides.
class RubyChain {
 public:
  explicit RubyChain(std::vector<RubyLevel> levels);

  // graph and tree levels (unavailable for Isabelle/Lean) then string.
  static const RubyChain& standard();

  RubyScore score(std::string_view candidate, std::string_view reference) const;
  const std::vector<RubyLevel>& levels() const { return levels_; }

 private:
  std::vector<RubyLevel> levels_;
};

// 1 - editdist/max length over code tokens, in [0, 1]; both empty is 1.
double token_edit_similarity(std::string_view candidate, std::string_view reference);
double ruby(std::string_view candidate, std::string_view reference);

// Percentage to two decimals. Throws EmptyInput.
double pass_rate(const std::vector<bool>& outcomes);

double round2(double value);

}  // namespace autoform::metrics
