#pragma once

// Paper-level heterogeneous graphs for one name block, weighted meta-path
// walks over them, and the paper/author/org ego graphs used by RND.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wiw/corpus.hpp"
#include "wiw/embed.hpp"
#include "wiw/textnorm.hpp"

namespace wiw {

enum class Relation : std::uint8_t { CoAuthor = 0, CoOrg = 1, CoVenue = 2 };

std::string_view relation_name(Relation r);

class RelationSet {
 public:
  constexpr RelationSet() = default;
  constexpr RelationSet(std::initializer_list<Relation> rs) {
    for (auto r : rs) bits_ |= bit(r);
  }
  static constexpr RelationSet all() { return {Relation::CoAuthor, Relation::CoOrg, Relation::CoVenue}; }

  constexpr RelationSet& insert(Relation r) {
    bits_ |= bit(r);
    return *this;
  }
  constexpr bool contains(Relation r) const { return (bits_ & bit(r)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const RelationSet&) const = default;

  /// The 7 non-empty subsets of {CoAuthor, CoOrg, CoVenue}.
  static std::vector<RelationSet> nonempty_subsets();

 private:
  static constexpr std::uint8_t bit(Relation r) { return static_cast<std::uint8_t>(1u << static_cast<int>(r)); }
  std::uint8_t bits_ = 0;
};

/// Comma separated coauthor,coorg,covenue.
RelationSet parse_relation_set(std::string_view spec);
std::string format_relation_set(const RelationSet& rs);

struct Edge {
  std::size_t to;
  Relation type;
  int weight;
};

class HeteroGraph {
 public:
  HeteroGraph() = default;
  explicit HeteroGraph(std::vector<std::string> nodes);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges(std::size_t node) const { return adjacency_[node]; }
  bool isolated(std::size_t node) const { return adjacency_[node].empty(); }

  /// Weight of the typed edge, 0 when absent.
  int weight(std::size_t a, std::size_t b, Relation type) const;

  /// Adds the edge in both directions; zero weights and self-loops are ignored.
  void connect(std::size_t a, std::size_t b, Relation type, int weight);

 private:
  std::vector<std::string> nodes_;
  std::vector<std::vector<Edge>> adjacency_;
};

/// Attribute view of one paper as seen from the author being disambiguated.
struct PaperSignals {
  std::size_t author_index = 0;
  TokenSet coauthors;  // normalized names, target author excluded
  TokenSet org;        // tokens of the target author's organization
  TokenSet venue;
  TokenSet words;  // title and keyword tokens
};

/// Throws DataError when no author of `paper` matches `name`.
PaperSignals make_signals(const PaperRecord& paper, const NameKey& name, const Stoplist& stoplist = default_stoplist());
PaperSignals make_signals(const PaperRecord& paper, std::size_t author_index,
                          const Stoplist& stoplist = default_stoplist());

/// Edge weights are co-occurrence counts: shared coauthors (CoAuthor), shared
/// target-author org tokens (CoOrg), shared venue tokens (CoVenue).
HeteroGraph build_graph(const std::vector<PaperSignals>& papers, const std::vector<std::string>& ids,
                        RelationSet relations);
HeteroGraph build_graph(const std::vector<const PaperRecord*>& papers, const NameKey& target_name,
                        RelationSet relations, const Stoplist& stoplist = default_stoplist());

struct WalkConfig {
  int walk_length = 20;
  int walks_per_node = 5;
  double covenue_prob = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct WalkCorpus {
  std::vector<std::vector<std::string>> walks;
  std::vector<std::string> isolated;
};

/// Walks of at most walk_length nodes from every non-isolated node. Each
/// start node draws from its own stream seeded by (seed, node id), so the
/// corpus does not depend on `workers`.
WalkCorpus random_walks(const HeteroGraph& graph, const WalkConfig& config, std::size_t workers = 1);

/// Skip-gram over walk sequences with min_count forced to 1.
EmbeddingTable relational_embeddings(const std::vector<std::vector<std::string>>& walks, EmbedConfig config);

/// One line per walk, ids separated by single spaces.
void write_walks(std::ostream& out, const WalkCorpus& corpus);

enum class EgoNodeKind : std::uint8_t { Paper, Author, Coauthor, Org };

struct EgoNode {
  EgoNodeKind kind;
  std::string key;
};

/// Union of the target paper's neighborhood (coauthors, target-author org
/// tokens) and the candidate's (their papers, and those papers' coauthors and
/// org tokens). Node 0 is the target paper, node 1 the candidate author.
struct EgoGraph {
  std::string center_paper;
  std::string center_author;
  std::vector<EgoNode> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  /// Node indices of the candidate's papers, in profile order.
  std::vector<std::size_t> profile_nodes;
  /// Author position used for each paper node (target first, then profile);
  /// empty when the paper lists no author matching the target name.
  std::vector<std::optional<std::size_t>> author_index;

  std::size_t degree(std::size_t node) const;
  std::vector<std::size_t> neighbors(std::size_t node) const;
  std::size_t count(EgoNodeKind kind) const;
};

/// Profile papers are located by the target author's name; a profile paper
/// without a matching author contributes no coauthor or org nodes.
EgoGraph build_ego_graph(const PaperRef& target, const std::string& candidate,
                         const std::vector<const PaperRecord*>& profile, const PaperStore& store);

/// Score per profile paper: cosine between the target's aggregate and that
/// paper's aggregate, where an aggregate is the mean of the paper embedding and
/// the table vectors of its coauthor and org neighbors (zero vectors skipped).
std::vector<double> ego_relational_scores(const EgoGraph& ego, const PaperRecord& target,
                                          const std::vector<const PaperRecord*>& profile,
                                          const EmbeddingTable& table, const FieldSet& fields,
                                          const Stoplist& stoplist = default_stoplist());

}  // namespace wiw
