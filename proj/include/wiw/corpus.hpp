#pragma once

// Benchmark-format datasets: loading, validation, splitting and writing.
//
// Schemas:
//   assignments  { name: { author_id: [paper_id, ...] } }
//   papers       { paper_id: { id, title, abstract, keywords, authors:[{name, org}], venue, year } }
//   ind          { author_id: { name, normal_data: [...], outliers: [...] } }
//   snd eval     { name: [paper_id, ...] }
//   rnd unassigned [ "paperid-authorindex", ... ]

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wiw/textnorm.hpp"

namespace wiw {

using Json = nlohmann::json;

struct PaperAuthor {
  std::string name;
  std::string org;
};

struct PaperRecord {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> keywords;
  std::vector<PaperAuthor> authors;
  std::string venue;
  int year = 0;
};

class PaperStore {
 public:
  PaperStore() = default;

  /// Throws DataError on a duplicate id.
  void insert(PaperRecord paper);

  const PaperRecord* find(std::string_view id) const;
  const PaperRecord& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return papers_.size(); }

  auto begin() const { return papers_.begin(); }
  auto end() const { return papers_.end(); }

 private:
  std::map<std::string, PaperRecord, std::less<>> papers_;
};

/// author-id -> paper-ids
using AuthorProfiles = std::map<std::string, std::vector<std::string>>;
/// normalized name -> author profiles sharing that name
using NameBlockSet = std::map<std::string, AuthorProfiles>;
/// normalized name -> flattened paper-ids (authorship stripped)
using SndEvalBlock = std::map<std::string, std::vector<std::string>>;

/// A paper plus the position of the author to disambiguate ("vebukM2n-1").
struct PaperRef {
  std::string paper_id;
  std::size_t author_index = 0;

  auto operator<=>(const PaperRef&) const = default;
};

std::string format_paper_ref(const PaperRef& ref);

/// Splits on the last hyphen; throws DataError on a malformed suffix.
PaperRef parse_paper_ref(std::string_view s);

struct IndAuthorRecord {
  std::string author_id;
  std::string name;
  std::vector<std::string> normal;
  std::vector<std::string> outliers;
};

/// Ground truth for RND: author-id, or "NIL" when no profile owns the paper.
using RndTruth = std::map<PaperRef, std::string>;

struct RndSplit {
  NameBlockSet profiles;
  std::vector<PaperRef> unassigned;
  RndTruth truth;
  std::vector<std::string> warnings;
};

struct SndPartition {
  SndEvalBlock papers;
  NameBlockSet truth;
};

struct SndSplit {
  NameBlockSet train;
  SndPartition valid;
  SndPartition test;
};

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

// Loading. All loaders throw DataError naming the offending key path.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

NameBlockSet parse_assignments(const Json& j);
NameBlockSet load_assignments(const std::filesystem::path& path);
PaperStore parse_papers(const Json& j);
PaperStore load_papers(const std::filesystem::path& path);
std::vector<IndAuthorRecord> parse_ind(const Json& j);
std::vector<IndAuthorRecord> load_ind(const std::filesystem::path& path);
SndEvalBlock parse_snd_eval(const Json& j);
std::vector<PaperRef> parse_unassigned(const Json& j);
RndTruth parse_rnd_truth(const Json& j);

Json to_json(const NameBlockSet& blocks);
Json to_json(const PaperRecord& paper);
Json to_json(const PaperStore& store);
Json to_json(const std::vector<IndAuthorRecord>& records);
Json to_json(const SndEvalBlock& block);
Json to_json(const std::vector<PaperRef>& refs);
Json to_json(const RndTruth& truth);

/// Throws DataError if a paper appears under two authors of one name.
void check_disjoint(const NameBlockSet& blocks);

/// Paper ids referenced by `blocks` that are missing from `store`.
std::vector<std::string> dangling_references(const NameBlockSet& blocks, const PaperStore& store);

/// Removes dangling ids (and authors left empty); returns one message per drop.
std::vector<std::string> drop_dangling(NameBlockSet& blocks, const PaperStore& store);

SndEvalBlock flatten(const NameBlockSet& blocks);

/// Position of the author in `paper` matching `name`: exact key match first,
/// then the first variant match.
std::optional<std::size_t> find_author_index(const PaperRecord& paper, const NameKey& name);

/// Block name owning `ref` in `profiles`: the normalized author name itself
/// when it is a key, otherwise the first key matching it as a name variant.
std::optional<std::string> resolve_block(const PaperRef& ref, const PaperStore& store,
                                         const NameBlockSet& profiles);

/// Partitions whole names; deterministic for a fixed seed.
SndSplit split_snd(const NameBlockSet& blocks, const SplitRatios& ratios, std::uint64_t seed);

/// Time split: within each author the latest ceil(ratio * n) papers (n > 1)
/// become unassigned; a nil_fraction share of authors per name is held out
/// entirely with truth NIL.
RndSplit split_rnd(const NameBlockSet& blocks, const PaperStore& papers, double ratio, double nil_fraction,
                   std::uint64_t seed);

}  // namespace wiw
