#pragma once

// Name blocking, tokenization, string-set similarities and TF-IDF.
// Everything above the corpus layer builds on these primitives.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace wiw {

using Token = std::string;
using TokenList = std::vector<Token>;
using TokenSet = std::set<Token>;
using Stoplist = std::unordered_set<std::string>;

/// A person name reduced to lowercase ASCII parts in source order,
/// e.g. "J.-P. Serre" -> {j, p, serre}.
struct NameKey {
  std::vector<std::string> parts;

  /// Canonical underscore-joined form ("jing_zhang").
  std::string joined() const;

  auto operator<=>(const NameKey&) const = default;
};

/// Throws DataError when `raw` has no alphabetic content.
NameKey normalize_name(std::string_view raw);

/// Parses an already-joined key ("bin_yu") without re-normalizing the parts.
NameKey name_key_from_joined(std::string_view joined);

/// The key, its rotation (last part first), and for both orders the variant
/// keeping the final part whole with every other part cut to its initial.
/// jing_zhang -> {jing_zhang, zhang_jing, j_zhang, z_jing}.
std::set<NameKey> name_variants(const NameKey& key);

/// True when either key is one of the other's variants.
bool same_name(const NameKey& a, const NameKey& b);

/// Folds Latin-1 / Latin Extended-A diacritics to ASCII and lowercases ASCII.
/// Code points without a folding are passed through as UTF-8.
std::string fold_to_ascii_lower(std::string_view text);

const Stoplist& default_stoplist();

/// One token per line; blank lines and lines starting with '#' are skipped.
Stoplist load_stoplist(const std::filesystem::path& path);

/// Lowercase alphanumeric tokens of length >= 2 that are not stopwords.
TokenList tokenize(std::string_view text, const Stoplist& stoplist = default_stoplist());

TokenSet to_set(const TokenList& tokens);

double jaccard(const TokenSet& a, const TokenSet& b);

/// Set-form Tanimoto coefficient |a n b| / (|a| + |b| - |a n b|).
double tanimoto(const TokenSet& a, const TokenSet& b);

std::size_t intersection_size(const TokenSet& a, const TokenSet& b);
TokenSet intersection(const TokenSet& a, const TokenSet& b);

double jaro(std::string_view s1, std::string_view s2);

/// Jaro-Winkler with prefix scale 0.1 over at most 4 leading characters.
double jaro_winkler(std::string_view s1, std::string_view s2);

class IdfTable {
 public:
  IdfTable() = default;

  std::size_t doc_count() const { return doc_count_; }

  /// Number of documents containing `token`; 0 for unseen tokens.
  std::size_t df(const Token& token) const;

  /// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
  double idf(const Token& token) const;

  friend IdfTable build_idf(const std::vector<TokenList>& documents);

 private:
  std::size_t doc_count_ = 0;
  std::unordered_map<Token, std::size_t> df_;
};

IdfTable build_idf(const std::vector<TokenList>& documents);

std::size_t term_count(const Token& token, const TokenList& doc);

/// Raw term count in `doc` times the smoothed idf.
double tfidf(const Token& token, const TokenList& doc, const IdfTable& idf);

}  // namespace wiw
