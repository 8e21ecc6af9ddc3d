#include "autoform/kb/bm25.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "autoform/core/error.hpp"

namespace autoform::kb {

namespace {

constexpr std::size_t kParallelThreshold = 4096;

bool is_token_byte(unsigned char c) { return c < 0x80 && std::isalnum(c); }

void tokenize_into(std::string_view text, double weight, std::unordered_map<std::string, double>& tf,
                   double& length) {
  for (auto& tok : tokenize(text)) {
    tf[tok] += weight;
    length += weight;
  }
}

void finish(Bm25Index& index) {
  double total = 0;
  for (std::uint32_t d = 0; d < index.documents.size(); ++d) {
    const auto& doc = index.documents[d];
    total += doc.length;
    for (const auto& [tok, tf] : doc.tf) {
      ++index.df[tok];
      index.postings[tok].push_back({d, tf});
    }
  }
  index.avgdl = index.documents.empty() ? 0.0 : total / static_cast<double>(index.documents.size());

  // Iterate terms in sorted order so the idf sum is reproducible.
  std::vector<std::string> terms;
  terms.reserve(index.df.size());
  for (const auto& [tok, _] : index.df) terms.push_back(tok);
  std::sort(terms.begin(), terms.end());
  const double n = static_cast<double>(index.documents.size());
  double idf_sum = 0;
  std::vector<std::string> negative;
  for (const auto& tok : terms) {
    double freq = static_cast<double>(index.df[tok]);
    double idf = std::log(n - freq + 0.5) - std::log(freq + 0.5);
    index.idf[tok] = idf;
    idf_sum += idf;
    if (idf < 0) negative.push_back(tok);
  }
  if (!terms.empty()) {
    double floor = index.params.epsilon * idf_sum / static_cast<double>(terms.size());
    for (const auto& tok : negative) index.idf[tok] = floor;
  }
}

inline double term_score(const Bm25Index& index, double idf, double tf, double doc_len) {
  const auto& p = index.params;
  return idf * (tf * (p.k1 + 1)) / (tf + p.k1 * (1 - p.b + p.b * doc_len / index.avgdl));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Bm25Index build_index_from_tokens(const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& docs,
                                  Bm25Params params) {
  Bm25Index index;
  index.params = params;
  for (const auto& [id, tokens] : docs) {
    Bm25Index::Document doc;
    doc.doc_id = id;
    for (const auto& t : tokens) doc.tf[t] += 1.0;
    doc.length = static_cast<double>(tokens.size());
    index.documents.push_back(std::move(doc));
  }
  finish(index);
  return index;
}

Bm25Index build_index(const std::vector<KbRecord>& records, const FieldWeights& field_weights, Bm25Params params) {
  auto weight = [&](const char* field) {
    auto it = field_weights.find(field);
    return it == field_weights.end() ? 1.0 : it->second;
  };
  Bm25Index index;
  index.params = params;
  for (const auto& r : records) {
    Bm25Index::Document doc;
    doc.doc_id = r.id;
    tokenize_into(r.statement, weight("statement"), doc.tf, doc.length);
    tokenize_into(r.text, weight("text"), doc.tf, doc.length);
    tokenize_into(r.source, weight("source"), doc.tf, doc.length);
    index.documents.push_back(std::move(doc));
  }
  finish(index);
  return index;
}

std::vector<double> score_all_serial(const Bm25Index& index, const std::vector<std::string>& query_tokens) {
  std::vector<double> scores(index.documents.size(), 0.0);
  for (const auto& q : query_tokens) {
    auto it = index.postings.find(q);
    if (it == index.postings.end()) continue;
    double idf = index.idf.at(q);
    for (const auto& p : it->second) {
      scores[p.doc] += term_score(index, idf, p.tf, index.documents[p.doc].length);
    }
  }
  return scores;
}

std::vector<double> score_all_parallel(const Bm25Index& index, const std::vector<std::string>& query_tokens) {
  std::vector<std::pair<const std::vector<Posting>*, double>> terms;
  for (const auto& q : query_tokens) {
    auto it = index.postings.find(q);
    if (it != index.postings.end()) terms.emplace_back(&it->second, index.idf.at(q));
  }
  std::vector<double> scores(index.documents.size(), 0.0);
#pragma omp parallel
  for (const auto& [postings, idf] : terms) {
    const std::int64_t n = static_cast<std::int64_t>(postings->size());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& p = (*postings)[static_cast<std::size_t>(i)];
      scores[p.doc] += term_score(index, idf, p.tf, index.documents[p.doc].length);
    }
  }
  return scores;
}

std::vector<ScoredDoc> query_tokens(const Bm25Index& index, const std::vector<std::string>& tokens, std::size_t top_n) {
  if (top_n < 1) throw InvariantViolation("query: top_n must be >= 1");
  if (index.documents.empty() || tokens.empty()) return {};
  std::vector<double> scores = index.size() >= kParallelThreshold ? score_all_parallel(index, tokens)
                                                                    : score_all_serial(index, tokens);
  std::vector<ScoredDoc> ranked;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    if (scores[d] > 0) ranked.push_back({index.documents[d].doc_id, scores[d]});
  }
  auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  };
  std::size_t keep = std::min(top_n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
  ranked.resize(keep);
  return ranked;
}

std::vector<ScoredDoc> query(const Bm25Index& index, std::string_view query_text, std::size_t top_n) {
  return query_tokens(index, tokenize(query_text), top_n);
}

}  // namespace autoform::kb
