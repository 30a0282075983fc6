#include "wiw/textnorm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "wiw/common.hpp"

namespace wiw {

namespace {

using namespace std::string_view_literals;

// ASCII base letters for U+00C0..U+017F; '\0' means no folding.
constexpr std::string_view kLatin1Fold =
    "AAAAAAACEEEEIIII"  // C0-CF (C6 handled separately)
    "DNOOOOO\0OUUUUY\0s"  // D0-DF (D7 multiplication, DE thorn, DF sharp s)
    "aaaaaaaceeeeiiii"  // E0-EF
    "dnooooo\0ouuuuy\0y"sv;  // F0-FF

constexpr std::string_view kLatinExtAFold =
    "AaAaAaCcCcCcCcDdDdEeEeEeEeEeGgGgGgGgHhHhIiIiIiIiIi\0\0JjKkkLlLlLlLlLlNnNnNnnNnOoOoOo\0\0RrRrRrSsSsSsSsTtTtTtUuUuUuUuUuUuWwYyYZzZzZzs"sv;

std::string_view fold_code_point(char32_t cp) {
  static const std::string_view kAe = "ae";
  static const std::string_view kOe = "oe";
  static const std::string_view kSs = "ss";
  static const std::string_view kTh = "th";
  static const std::string_view kIj = "ij";
  if (cp == 0xC6 || cp == 0xE6) return kAe;
  if (cp == 0xDF) return kSs;
  if (cp == 0xDE || cp == 0xFE) return kTh;
  if (cp == 0x152 || cp == 0x153) return kOe;
  if (cp == 0x132 || cp == 0x133) return kIj;
  if (cp >= 0xC0 && cp <= 0xFF) {
    const char* c = &kLatin1Fold[cp - 0xC0];
    if (*c) return {c, 1};
  } else if (cp >= 0x100 && cp <= 0x17F) {
    std::size_t idx = cp - 0x100;
    if (idx < kLatinExtAFold.size() && kLatinExtAFold[idx]) return {&kLatinExtAFold[idx], 1};
  }
  return {};
}

// Decodes one UTF-8 sequence starting at text[i]; invalid bytes decode as
// themselves with length 1.
char32_t decode_utf8(std::string_view text, std::size_t i, std::size_t& len) {
  auto b0 = static_cast<unsigned char>(text[i]);
  len = 1;
  if (b0 < 0x80) return b0;
  int extra = (b0 >= 0xF0) ? 3 : (b0 >= 0xE0) ? 2 : (b0 >= 0xC0) ? 1 : 0;
  if (extra == 0 || i + extra >= text.size()) return b0;
  char32_t cp = b0 & (0x3F >> extra);
  for (int k = 1; k <= extra; ++k) {
    auto b = static_cast<unsigned char>(text[i + k]);
    if ((b & 0xC0) != 0x80) return b0;
    cp = (cp << 6) | (b & 0x3F);
  }
  len = static_cast<std::size_t>(extra) + 1;
  return cp;
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || (c >= '0' && c <= '9'); }

std::vector<std::string> split_on(std::string_view s, auto&& keep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (keep(c)) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string fold_to_ascii_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    std::size_t len = 1;
    char32_t cp = decode_utf8(text, i, len);
    if (cp < 0x80) {
      char c = static_cast<char>(cp);
      out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    } else if (auto f = fold_code_point(cp); !f.empty()) {
      for (char c : f) out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    } else {
      out.append(text.substr(i, len));
    }
    i += len;
  }
  return out;
}

std::string NameKey::joined() const {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back('_');
    out += parts[i];
  }
  return out;
}

NameKey normalize_name(std::string_view raw) {
  std::string folded = fold_to_ascii_lower(raw);
  NameKey key{split_on(folded, is_ascii_alpha)};
  if (key.parts.empty()) throw DataError("name has no alphabetic content: \"" + std::string(raw) + "\"");
  return key;
}

NameKey name_key_from_joined(std::string_view joined) {
  NameKey key{split_on(joined, [](char c) { return c != '_'; })};
  if (key.parts.empty()) throw DataError("empty name key");
  return key;
}

std::set<NameKey> name_variants(const NameKey& key) {
  std::set<NameKey> out;
  if (key.parts.empty()) return out;
  NameKey rotated;
  rotated.parts.push_back(key.parts.back());
  rotated.parts.insert(rotated.parts.end(), key.parts.begin(), key.parts.end() - 1);
  for (const NameKey* order : std::array<const NameKey*, 2>{&key, &rotated}) {
    out.insert(*order);
    NameKey initials = *order;
    for (std::size_t i = 0; i + 1 < initials.parts.size(); ++i) initials.parts[i].resize(1);
    out.insert(std::move(initials));
  }
  return out;
}

bool same_name(const NameKey& a, const NameKey& b) {
  // Either key must be a variant of the other. A bare overlap of the variant
  // sets would let jing_zhang and jing_zhao meet at z_jing.
  return name_variants(a).contains(b) || name_variants(b).contains(a);
}

const Stoplist& default_stoplist() {
  static const Stoplist kWords = {
      "a",     "an",    "and",  "are",   "as",    "at",      "be",    "by",    "for",  "from",
      "has",   "have",  "in",   "into",  "is",    "it",      "its",   "of",    "on",   "or",
      "that",  "the",   "their", "these", "this", "to",      "was",   "were",  "which", "with",
      "we",    "our",   "can",  "been",  "based", "using",   "via",   "than",  "such", "not",
      "also",  "between", "both", "but",  "then",  "there",  "they",  "will",  "all",  "more"};
  return kWords;
}

Stoplist load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stoplist: " + path.string());
  Stoplist out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    out.insert(fold_to_ascii_lower(line.substr(b, e - b + 1)));
  }
  return out;
}

TokenList tokenize(std::string_view text, const Stoplist& stoplist) {
  std::string folded = fold_to_ascii_lower(text);
  // Non-ASCII bytes that survive folding (CJK etc.) stay inside tokens.
  auto keep = [](char c) { return is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80; };
  TokenList out;
  for (auto& tok : split_on(folded, keep)) {
    if (tok.size() < 2 || stoplist.contains(tok)) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

TokenSet to_set(const TokenList& tokens) { return TokenSet(tokens.begin(), tokens.end()); }

std::size_t intersection_size(const TokenSet& a, const TokenSet& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

TokenSet intersection(const TokenSet& a, const TokenSet& b) {
  TokenSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

double jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  auto common = static_cast<double>(intersection_size(a, b));
  return common / (static_cast<double>(a.size() + b.size()) - common);
}

double tanimoto(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  auto common = static_cast<double>(intersection_size(a, b));
  return common / (static_cast<double>(a.size()) + static_cast<double>(b.size()) - common);
}

double jaro(std::string_view s1, std::string_view s2) {
  if (s1.empty() && s2.empty()) return 1.0;
  if (s1.empty() || s2.empty()) return 0.0;
  const std::size_t longer = std::max(s1.size(), s2.size());
  const std::size_t window = longer / 2 > 0 ? longer / 2 - 1 : 0;

  std::vector<char> m1(s1.size(), 0), m2(s2.size(), 0);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    std::size_t lo = i > window ? i - window : 0;
    std::size_t hi = std::min(i + window + 1, s2.size());
    for (std::size_t j = lo; j < hi; ++j) {
      if (m2[j] || s1[i] != s2[j]) continue;
      m1[i] = m2[j] = 1;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;

  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < s1.size(); ++i) {
    if (!m1[i]) continue;
    while (!m2[j]) ++j;
    if (s1[i] != s2[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions / 2);
  return (m / static_cast<double>(s1.size()) + m / static_cast<double>(s2.size()) + (m - t) / m) / 3.0;
}

double jaro_winkler(std::string_view s1, std::string_view s2) {
  double j = jaro(s1, s2);
  std::size_t prefix = 0;
  const std::size_t cap = std::min({s1.size(), s2.size(), std::size_t{4}});
  while (prefix < cap && s1[prefix] == s2[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

std::size_t IdfTable::df(const Token& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double IdfTable::idf(const Token& token) const {
  return std::log((1.0 + static_cast<double>(doc_count_)) / (1.0 + static_cast<double>(df(token)))) + 1.0;
}

IdfTable build_idf(const std::vector<TokenList>& documents) {
  IdfTable t;
  t.doc_count_ = documents.size();
  for (const auto& doc : documents)
    for (const auto& tok : to_set(doc)) ++t.df_[tok];
  return t;
}

std::size_t term_count(const Token& token, const TokenList& doc) {
  return static_cast<std::size_t>(std::count(doc.begin(), doc.end(), token));
}

double tfidf(const Token& token, const TokenList& doc, const IdfTable& idf) {
  std::size_t tf = term_count(token, doc);
  return tf == 0 ? 0.0 : static_cast<double>(tf) * idf.idf(token);
}

}  // namespace wiw
