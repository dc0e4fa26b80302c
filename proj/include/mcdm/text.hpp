#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mcdm/errors.hpp"

namespace mcdm::text {

struct TitleDocument {
  std::string product_id;
  std::vector<std::string> tokens;
};

struct Corpus {
  std::size_t document_count = 0;
  std::unordered_map<std::string, std::size_t> document_frequency;

  std::size_t df(const std::string& token) const {
    auto it = document_frequency.find(token);
    return it == document_frequency.end() ? 0 : it->second;
  }
};

/// Sparse TF-IDF weights keyed by token. Ordered so that dot products are
/// accumulated in the same order regardless of argument order.
using TfIdfVector = std::map<std::string, double>;

namespace utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8, mapping malformed sequences to U+FFFD.
inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(kReplacement);
      break;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace utf8

/// Letters and digits. Outside ASCII this treats everything as a word
/// character except the common punctuation, symbol and space blocks.
inline bool is_word_char(char32_t c) {
  if (c < 0x80) return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  if (c == utf8::kReplacement) return false;
  if (c >= 0x80 && c <= 0xBF) return c == 0xAA || c == 0xB5 || c == 0xBA;  // Latin-1 punctuation and symbols
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // general punctuation .. misc symbols and arrows
  if (c >= 0x3000 && c <= 0x303F) return false;  // CJK symbols and punctuation
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if (c >= 0xFF00 && c <= 0xFF0F) return false;  // fullwidth punctuation
  if (c >= 0xFF1A && c <= 0xFF20) return false;
  if (c >= 0xFF3B && c <= 0xFF40) return false;
  if (c >= 0xFF5B && c <= 0xFF65) return false;
  if (c >= 0x1F000 && c <= 0x1FAFF) return false;  // emoji and pictographs
  return true;
}

inline char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c < 0x80) return c;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x137) return c | 1u;  // Latin Extended-A, even = upper
  if (c >= 0x139 && c <= 0x148) return (c & 1u) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c | 1u;
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;  // Greek
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;                 // Cyrillic
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0xFF21 && c <= 0xFF3A) return c + 0x20;  // fullwidth Latin
  return c;
}

/// Lowercases and splits on every maximal run of non-alphanumeric characters.
/// Order and duplicates are preserved; there is no stemming or stop-word list.
inline TitleDocument tokenize(std::string_view title, std::string product_id = {}) {
  TitleDocument doc;
  doc.product_id = std::move(product_id);
  std::string current;
  for (char32_t c : utf8::decode(title)) {
    if (is_word_char(c)) {
      utf8::append(current, to_lower(c));
    } else if (!current.empty()) {
      doc.tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) doc.tokens.push_back(std::move(current));
  if (doc.tokens.empty())
    throw Error(ErrorCode::empty_document, "title has no alphanumeric characters: '" + std::string(title) + "'");
  return doc;
}

inline Corpus build_corpus(std::span<const TitleDocument> documents) {
  if (documents.empty()) throw Error(ErrorCode::empty_corpus, "cannot build a corpus from zero documents");
  Corpus corpus;
  corpus.document_count = documents.size();
  for (const auto& doc : documents) {
    std::unordered_set<std::string_view> distinct(doc.tokens.begin(), doc.tokens.end());
    for (auto token : distinct) ++corpus.document_frequency[std::string(token)];
  }
  return corpus;
}

/// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
inline double idf(std::size_t document_count, std::size_t df) {
  return std::log((1.0 + static_cast<double>(document_count)) / (1.0 + static_cast<double>(df))) + 1.0;
}

/// tf is count / document length.
inline TfIdfVector tfidf_vector(const TitleDocument& doc, const Corpus& corpus) {
  if (doc.tokens.empty()) throw Error(ErrorCode::empty_document, "document '" + doc.product_id + "' has no tokens");
  std::map<std::string, std::size_t> counts;
  for (const auto& t : doc.tokens) ++counts[t];

  const double length = static_cast<double>(doc.tokens.size());
  TfIdfVector out;
  for (const auto& [token, count] : counts) {
    const std::size_t df = corpus.df(token);
    if (df == 0)
      throw Error(ErrorCode::stale_corpus, "token '" + token + "' of document '" + doc.product_id + "' is not in the corpus",
                  {token});
    out.emplace(token, static_cast<double>(count) / length * idf(corpus.document_count, df));
  }
  return out;
}

inline double norm(const TfIdfVector& v) {
  double acc = 0.0;
  for (const auto& [_, w] : v) acc += w * w;
  return std::sqrt(acc);
}

inline double cosine(const TfIdfVector& a, const TfIdfVector& b) {
  if (a.empty() && b.empty()) throw Error(ErrorCode::undefined_similarity, "cosine of two empty vectors is undefined");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  if (a == b) return 1.0;

  // Merge walk over the shared keys, in key order.
  double dot = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  const double c = dot / (na * nb);
  return c > 1.0 ? 1.0 : c;
}

/// v_t: cosine between the two titles' TF-IDF vectors.
inline double title_similarity(const TitleDocument& reference, const TitleDocument& candidate, const Corpus& corpus) {
  const auto a = tfidf_vector(reference, corpus);
  const auto b = tfidf_vector(candidate, corpus);
  if (norm(a) == 0.0 || norm(b) == 0.0)
    throw Error(ErrorCode::undefined_similarity, "title vector has zero norm");
  return cosine(a, b);
}

}  // namespace mcdm::text
