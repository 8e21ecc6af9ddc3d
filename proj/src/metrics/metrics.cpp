#include "autoform/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"

namespace autoform::metrics {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
}

// Longest first.
const std::vector<std::string_view> kOperators{"\\<longleftrightarrow>", "<-->", "==>", "-->", "<->", "::", "=>",
                                               ":=",  "<=",  ">=", "~=", "&&", "||", "->", "<-", "!="};

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

// Code points of text with whitespace dropped. Invalid bytes count as one code point each.
std::vector<char32_t> code_points(std::string_view text) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < text.size();) {
    auto lead = static_cast<unsigned char>(text[i]);
    std::size_t n = std::min(utf8_length(lead), text.size() - i);
    char32_t cp = n == 1 ? lead : lead & (0x7F >> n);
    for (std::size_t k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    if (!(n == 1 && is_space(text[i]))) out.push_back(cp);
    i += n;
  }
  return out;
}

template <class T>
std::map<std::vector<T>, std::int64_t> ngram_counts(const std::vector<T>& seq, std::size_t n) {
  std::map<std::vector<T>, std::int64_t> counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++counts[std::vector<T>(seq.begin() + i, seq.begin() + i + n)];
  return counts;
}

}  // namespace

Tokens tokenize_code(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '\\' && i + 1 < text.size() && text[i + 1] == '<') {
      auto close = text.find('>', i);
      if (close != std::string_view::npos) {
        out.emplace_back(text.substr(i, close - i + 1));
        i = close + 1;
        continue;
      }
    }
    bool matched = false;
    for (auto op : kOperators) {
      if (text.substr(i, op.size()) == op) {
        out.emplace_back(op);
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (static_cast<unsigned char>(c) >= 0x80) {
      std::size_t n = std::min(utf8_length(static_cast<unsigned char>(c)), text.size() - i);
      out.emplace_back(text.substr(i, n));
      i += n;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(text[j])) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    out.emplace_back(1, c);
    ++i;
  }
  return out;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(const Tokens& candidate, const std::vector<Tokens>& references) {
  if (references.empty()) throw InvariantViolation("bleu4 needs at least one reference");
  BleuStats stats;
  stats.candidate_length = static_cast<std::int64_t>(candidate.size());
  auto closest = references.front().size();
  for (const auto& ref : references) {
    auto d = [&](std::size_t len) {
      return std::llabs(static_cast<long long>(len) - static_cast<long long>(candidate.size()));
    };
    if (d(ref.size()) < d(closest) || (d(ref.size()) == d(closest) && ref.size() < closest)) closest = ref.size();
  }
  stats.reference_length = static_cast<std::int64_t>(closest);
  for (std::size_t n = 1; n <= 4; ++n) {
    auto cand = ngram_counts(candidate, n);
    std::map<std::vector<std::string>, std::int64_t> max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : ngram_counts(ref, n)) max_ref[gram] = std::max(max_ref[gram], count);
    }
    for (const auto& [gram, count] : cand) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) stats.matches[n - 1] += std::min(count, it->second);
      stats.totals[n - 1] += count;
    }
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats) {
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0;
  for (std::size_t n = 0; n < 4; ++n) {
    double num = static_cast<double>(stats.matches[n]);
    double den = static_cast<double>(stats.totals[n]);
    if (stats.matches[n] == 0) {
      num += 1;
      den += 1;
    }
    log_sum += std::log(num / den);
  }
  double c = static_cast<double>(stats.candidate_length);
  double r = static_cast<double>(stats.reference_length);
  double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::clamp(100.0 * bp * std::exp(log_sum / 4.0), 0.0, 100.0);
}

double bleu4(const Tokens& candidate, const std::vector<Tokens>& references) {
  return bleu_from_stats(bleu_stats(candidate, references));
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& other) {
  for (int n = 0; n < kChrfOrder; ++n) {
    matches[n] += other.matches[n];
    candidate_ngrams[n] += other.candidate_ngrams[n];
    reference_ngrams[n] += other.reference_ngrams[n];
  }
  return *this;
}

ChrfStats chrf_stats(std::string_view candidate, std::string_view reference) {
  auto c = code_points(candidate);
  auto r = code_points(reference);
  ChrfStats stats;
  for (int n = 1; n <= kChrfOrder; ++n) {
    auto cc = ngram_counts(c, static_cast<std::size_t>(n));
    auto rc = ngram_counts(r, static_cast<std::size_t>(n));
    for (const auto& [gram, count] : cc) {
      stats.candidate_ngrams[n - 1] += count;
      auto it = rc.find(gram);
      if (it != rc.end()) stats.matches[n - 1] += std::min(count, it->second);
    }
    for (const auto& [gram, count] : rc) stats.reference_ngrams[n - 1] += count;
  }
  return stats;
}

double chrf_from_stats(const ChrfStats& stats) {
  double precision = 0, recall = 0;
  int orders = 0;
  for (int n = 0; n < kChrfOrder; ++n) {
    if (stats.candidate_ngrams[n] == 0 || stats.reference_ngrams[n] == 0) continue;
    precision += static_cast<double>(stats.matches[n]) / static_cast<double>(stats.candidate_ngrams[n]);
    recall += static_cast<double>(stats.matches[n]) / static_cast<double>(stats.reference_ngrams[n]);
    ++orders;
  }
  if (orders == 0) return stats.candidate_ngrams[0] == 0 && stats.reference_ngrams[0] == 0 ? 100.0 : 0.0;
  precision /= orders;
  recall /= orders;
  if (precision == 0 && recall == 0) return 0.0;
  double b2 = kChrfBeta * kChrfBeta;
  return std::clamp(100.0 * (1 + b2) * precision * recall / (b2 * precision + recall), 0.0, 100.0);
}

double chrf(std::string_view candidate, std::string_view reference) {
  return chrf_from_stats(chrf_stats(candidate, reference));
}

RubyChain::RubyChain(std::vector<RubyLevel> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw InvariantViolation("RUBY chain needs at least one level");
}

const RubyChain& RubyChain::standard() {
  static const RubyChain chain({
      {"graph", [](std::string_view, std::string_view) -> std::optional<double> { return std::nullopt; }},
      {"tree", [](std::string_view, std::string_view) -> std::optional<double> { return std::nullopt; }},
      {"string", [](std::string_view c, std::string_view r) -> std::optional<double> {
         return token_edit_similarity(c, r);
       }},
  });
  return chain;
}

RubyScore RubyChain::score(std::string_view candidate, std::string_view reference) const {
  for (const auto& level : levels_) {
    if (auto s = level.similarity(candidate, reference)) return {std::clamp(100.0 * *s, 0.0, 100.0), level.name};
  }
  throw InvariantViolation("no RUBY level produced a score");
}

double token_edit_similarity(std::string_view candidate, std::string_view reference) {
  auto c = tokenize_code(candidate);
  auto r = tokenize_code(reference);
  auto longest = std::max(c.size(), r.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(text::edit_distance(c, r)) / static_cast<double>(longest);
}

double ruby(std::string_view candidate, std::string_view reference) {
  return RubyChain::standard().score(candidate, reference).score;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

double pass_rate(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) throw EmptyInput("pass rate of an empty list");
  auto passed = std::count(outcomes.begin(), outcomes.end(), true);
  return round2(100.0 * static_cast<double>(passed) / static_cast<double>(outcomes.size()));
}

}  // namespace autoform::metrics
