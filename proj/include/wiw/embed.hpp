#pragma once

// Skip-gram with negative sampling, and paper embeddings built on top of it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "wiw/corpus.hpp"
#include "wiw/textnorm.hpp"

namespace wiw {

using Vector = Eigen::VectorXd;
using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbedConfig {
  int dim = 100;
  int window = 5;
  int negative = 5;
  int min_count = 2;
  int epochs = 30;  // small corpora need many passes before vectors spread out
  double learning_rate = 0.025;
  std::uint64_t seed = 1;

  void validate() const;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, RowMatrixF vectors);

  int dim() const { return static_cast<int>(vectors_.cols()); }
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const { return index_of(token).has_value(); }
  std::optional<std::size_t> index_of(std::string_view token) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  const RowMatrixF& vectors() const { return vectors_; }
  auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

  /// Vector for `token` promoted to double; zero when out of vocabulary.
  Vector lookup(std::string_view token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  RowMatrixF vectors_;
};

/// Trains skip-gram vectors. Bitwise reproducible for a fixed config.
/// Throws DataError when nothing survives min_count filtering.
EmbeddingTable train_skipgram(const std::vector<TokenList>& sequences, const EmbedConfig& config);

/// Text format: "<vocab_size> <dim>" then "token v1 ... vdim" per line.
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable read_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

/// Paper attributes that feed an embedding.
struct FieldSet {
  bool title = false;
  bool abstract = false;
  bool keywords = false;
  bool venue = false;
  bool year = false;
  bool coauthors = false;
  bool org = false;

  bool any() const { return title || abstract || keywords || venue || year || coauthors || org; }
  bool operator==(const FieldSet&) const = default;

  /// title + keywords + organization of the author being disambiguated.
  static FieldSet paper_default() { return {.title = true, .keywords = true, .org = true}; }
  static FieldSet all() { return {true, true, true, true, true, true, true}; }
};

/// Comma separated list of title,abstract,keywords,venue,year,coauthors,org.
FieldSet parse_field_set(std::string_view spec);
std::string format_field_set(const FieldSet& fields);

/// Normalized coauthor names (underscore-joined) excluding `target_index`.
TokenList coauthor_tokens(const PaperRecord& paper, std::optional<std::size_t> target_index);

/// Tokens of the selected fields. The org field uses authors[target_index] only.
TokenList paper_tokens(const PaperRecord& paper, std::optional<std::size_t> target_index, const FieldSet& fields,
                       const Stoplist& stoplist = default_stoplist());

/// Training corpus over every paper: one sequence per paper covering title,
/// author names, keywords, abstract, venue, all organizations and year.
std::vector<TokenList> semantic_corpus(const PaperStore& store, const Stoplist& stoplist = default_stoplist());

/// Mean of in-vocabulary token vectors; zero when none is in vocabulary.
Vector mean_embedding(const TokenList& tokens, const EmbeddingTable& table);

/// Throws DataError when target_index is out of range.
Vector paper_embedding(const PaperRecord& paper, std::size_t target_index, const FieldSet& fields,
                       const EmbeddingTable& table, const Stoplist& stoplist = default_stoplist());

/// dot / (|u||v|), or 0 when either norm is 0. Throws std::invalid_argument on size mismatch.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  const double nu = static_cast<double>(u.norm());
  const double nv = static_cast<double>(v.norm());
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return static_cast<double>(u.dot(v)) / (nu * nv);
}

/// Rows scaled to unit length; zero rows stay zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> normalized_rows(
    const Eigen::MatrixBase<Derived>& m) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto n = out.row(i).norm();
    if (n > 0) out.row(i) /= n;
  }
  return out;
}

}  // namespace wiw
