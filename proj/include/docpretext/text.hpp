#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "docpretext/common.hpp"

namespace docpretext {

inline constexpr const char* kNumberToken = "<num>";

struct TokenDoc {
  std::string doc_id;
  std::vector<std::string> tokens;
};

// OCR-text cleaning: lowercase, every maximal digit run becomes the
// "<num>" sentinel, every other non-alphanumeric byte becomes a space.
// The sentinel itself is recognized on input, which makes cleaning
// idempotent over join(tokens).
inline std::vector<std::string> clean_text(const std::string& raw) {
  std::string norm;
  norm.reserve(raw.size() + 8);
  std::size_t i = 0;
  const std::string sentinel = kNumberToken;
  while (i < raw.size()) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (raw.compare(i, sentinel.size(), sentinel) == 0) {
      norm += ' ';
      norm += sentinel;
      norm += ' ';
      i += sentinel.size();
      continue;
    }
    if (std::isdigit(c)) {
      while (i < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i]))) ++i;
      norm += ' ';
      norm += sentinel;
      norm += ' ';
      continue;
    }
    if (std::isalpha(c))
      norm += static_cast<char>(std::tolower(c));
    else
      norm += ' ';
    ++i;
  }
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < norm.size()) {
    while (pos < norm.size() && norm[pos] == ' ') ++pos;
    std::size_t start = pos;
    while (pos < norm.size() && norm[pos] != ' ') ++pos;
    if (pos > start) tokens.push_back(norm.substr(start, pos - start));
  }
  return tokens;
}

struct Vocabulary {
  std::vector<std::string> terms;  // lexicographically ordered
  std::unordered_map<std::string, int> index;
  int min_df = 1;
  int max_size = 0;

  int size() const { return static_cast<int>(terms.size()); }

  int id_of(const std::string& term) const {
    auto it = index.find(term);
    return it == index.end() ? -1 : it->second;
  }

  void rebuild_index() {
    index.clear();
    for (std::size_t i = 0; i < terms.size(); ++i)
      index[terms[i]] = static_cast<int>(i);
  }
};

// Keep tokens with document frequency >= min_df; if that leaves more
// than max_size terms, keep the highest-df ones, ties to the
// lexicographically smaller term. Final order is lexicographic.
inline Vocabulary build_vocab(const std::vector<TokenDoc>& docs, int min_df,
                              int max_size) {
  if (min_df < 1) throw DomainError("build_vocab: min_df must be >= 1");
  if (max_size < 1) throw DomainError("build_vocab: max_size must be >= 1");
  std::map<std::string, int> df;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq = doc.tokens;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& t : uniq) ++df[t];
  }
  std::vector<std::pair<std::string, int>> kept;
  for (const auto& [term, count] : df)
    if (count >= min_df) kept.emplace_back(term, count);
  if (kept.empty()) throw DomainError("build_vocab: no term survives min_df");
  if (static_cast<int>(kept.size()) > max_size) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    kept.resize(static_cast<std::size_t>(max_size));
  }
  Vocabulary vocab;
  vocab.min_df = min_df;
  vocab.max_size = max_size;
  for (auto& [term, count] : kept) vocab.terms.push_back(std::move(term));
  std::sort(vocab.terms.begin(), vocab.terms.end());
  vocab.rebuild_index();
  return vocab;
}

// Bag-of-words counts over a vocabulary; out-of-vocabulary tokens are
// dropped here.
struct BowDoc {
  std::string doc_id;
  std::vector<std::pair<int, int>> counts;  // (term id, count), id-ascending

  int total() const {
    int n = 0;
    for (const auto& [id, c] : counts) n += c;
    return n;
  }
};

inline BowDoc to_bow(const TokenDoc& doc, const Vocabulary& vocab) {
  std::map<int, int> counts;
  for (const auto& t : doc.tokens) {
    int id = vocab.id_of(t);
    if (id >= 0) ++counts[id];
  }
  BowDoc bow;
  bow.doc_id = doc.doc_id;
  bow.counts.assign(counts.begin(), counts.end());
  return bow;
}

}  // namespace docpretext
