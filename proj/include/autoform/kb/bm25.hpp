#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "autoform/kb/record.hpp"

namespace autoform::kb {

// Lowercases and splits on every non-alphanumeric byte, so identifiers also
// split on `_` and `.`. Shared by indexing and querying.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
  // Negative idf values are replaced by epsilon * mean idf.
  double epsilon = 0.25;
};

// Per-field multipliers for term frequency. Missing fields weigh 1.
using FieldWeights = std::map<std::string, double>;

struct Posting {
  std::uint32_t doc;  // index into Bm25Index::documents
  double tf;
};

// Immutable after build; safe for concurrent queries.
struct Bm25Index {
  struct Document {
    std::int64_t doc_id = 0;
    std::unordered_map<std::string, double> tf;
    double length = 0;
  };

  std::vector<Document> documents;
  std::unordered_map<std::string, std::size_t> df;
  std::unordered_map<std::string, double> idf;
  std::unordered_map<std::string, std::vector<Posting>> postings;
  double avgdl = 0;
  Bm25Params params;

  std::size_t size() const { return documents.size(); }
};

// Builds from (doc_id, token list) pairs.
Bm25Index build_index_from_tokens(const std::vector<std::pair<std::int64_t, std::vector<std::string>>>& docs,
                                  Bm25Params params = {});

// Indexes statement, text and source of each record.
Bm25Index build_index(const std::vector<KbRecord>& records, const FieldWeights& field_weights = {},
                      Bm25Params params = {});

struct ScoredDoc {
  std::int64_t doc_id;
  double score;
  bool operator==(const ScoredDoc&) const = default;
};

// Scores of every document, indexed like Bm25Index::documents.
// Term-at-a-time over postings.
std::vector<double> score_all_serial(const Bm25Index& index, const std::vector<std::string>& query_tokens);
// OpenMP-parallel over each term's postings, terms in query order. Produces
// bit-identical results to score_all_serial.
std::vector<double> score_all_parallel(const Bm25Index& index, const std::vector<std::string>& query_tokens);

// Top documents by descending score, ties by ascending doc_id; documents with
// non-positive score are dropped. top_n must be >= 1.
std::vector<ScoredDoc> query(const Bm25Index& index, std::string_view query_text, std::size_t top_n);
std::vector<ScoredDoc> query_tokens(const Bm25Index& index, const std::vector<std::string>& tokens, std::size_t top_n);

}  // namespace autoform::kb
