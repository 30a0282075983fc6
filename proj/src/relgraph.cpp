#include "wiw/relgraph.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "wiw/common.hpp"

namespace wiw {

namespace {

constexpr Relation kRelations[] = {Relation::CoAuthor, Relation::CoOrg, Relation::CoVenue};

}  // namespace

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::CoAuthor: return "coauthor";
    case Relation::CoOrg: return "coorg";
    case Relation::CoVenue: return "covenue";
  }
  return "?";
}

std::vector<RelationSet> RelationSet::nonempty_subsets() {
  std::vector<RelationSet> out;
  for (int mask = 1; mask < 8; ++mask) {
    RelationSet rs;
    for (int b = 0; b < 3; ++b)
      if (mask & (1 << b)) rs.insert(kRelations[b]);
    out.push_back(rs);
  }
  return out;
}

RelationSet parse_relation_set(std::string_view spec) {
  RelationSet out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    auto name = spec.substr(start, end - start);
    if (name == "coauthor") out.insert(Relation::CoAuthor);
    else if (name == "coorg") out.insert(Relation::CoOrg);
    else if (name == "covenue") out.insert(Relation::CoVenue);
    else if (!name.empty()) throw UsageError("unknown relation \"" + std::string(name) + "\"");
    start = end + 1;
  }
  if (out.empty()) throw UsageError("relation set must select at least one relation");
  return out;
}

std::string format_relation_set(const RelationSet& rs) {
  std::string out;
  for (auto r : kRelations) {
    if (!rs.contains(r)) continue;
    if (!out.empty()) out += ',';
    out += relation_name(r);
  }
  return out;
}

HeteroGraph::HeteroGraph(std::vector<std::string> nodes) : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {}

int HeteroGraph::weight(std::size_t a, std::size_t b, Relation type) const {
  for (const auto& e : adjacency_[a])
    if (e.to == b && e.type == type) return e.weight;
  return 0;
}

void HeteroGraph::connect(std::size_t a, std::size_t b, Relation type, int weight) {
  if (a == b || weight <= 0) return;
  adjacency_[a].push_back({b, type, weight});
  adjacency_[b].push_back({a, type, weight});
}

PaperSignals make_signals(const PaperRecord& paper, std::size_t author_index, const Stoplist& stoplist) {
  if (author_index >= paper.authors.size())
    throw DataError("paper " + paper.id + ": author index " + std::to_string(author_index) + " out of range");
  PaperSignals s;
  s.author_index = author_index;
  s.coauthors = to_set(coauthor_tokens(paper, author_index));
  s.org = to_set(tokenize(paper.authors[author_index].org, stoplist));
  s.venue = to_set(tokenize(paper.venue, stoplist));
  s.words = to_set(tokenize(paper.title, stoplist));
  for (const auto& kw : paper.keywords)
    for (auto& t : tokenize(kw, stoplist)) s.words.insert(std::move(t));
  return s;
}

PaperSignals make_signals(const PaperRecord& paper, const NameKey& name, const Stoplist& stoplist) {
  auto idx = find_author_index(paper, name);
  if (!idx) throw DataError("paper " + paper.id + " lists no author matching " + name.joined());
  return make_signals(paper, *idx, stoplist);
}

HeteroGraph build_graph(const std::vector<PaperSignals>& papers, const std::vector<std::string>& ids,
                        RelationSet relations) {
  if (papers.size() != ids.size()) throw std::invalid_argument("build_graph: ids and papers differ in length");
  HeteroGraph g(ids);
  for (std::size_t i = 0; i < papers.size(); ++i) {
    for (std::size_t j = i + 1; j < papers.size(); ++j) {
      if (relations.contains(Relation::CoAuthor))
        g.connect(i, j, Relation::CoAuthor, static_cast<int>(intersection_size(papers[i].coauthors, papers[j].coauthors)));
      if (relations.contains(Relation::CoOrg))
        g.connect(i, j, Relation::CoOrg, static_cast<int>(intersection_size(papers[i].org, papers[j].org)));
      if (relations.contains(Relation::CoVenue))
        g.connect(i, j, Relation::CoVenue, static_cast<int>(intersection_size(papers[i].venue, papers[j].venue)));
    }
  }
  return g;
}

HeteroGraph build_graph(const std::vector<const PaperRecord*>& papers, const NameKey& target_name,
                        RelationSet relations, const Stoplist& stoplist) {
  std::vector<PaperSignals> signals;
  std::vector<std::string> ids;
  signals.reserve(papers.size());
  ids.reserve(papers.size());
  for (const auto* p : papers) {
    signals.push_back(make_signals(*p, target_name, stoplist));
    ids.push_back(p->id);
  }
  return build_graph(signals, ids, relations);
}

void WalkConfig::validate() const {
  if (walk_length < 2) throw UsageError("walk length must be >= 2");
  if (walks_per_node < 1) throw UsageError("walks per node must be >= 1");
  if (!(covenue_prob >= 0.0 && covenue_prob <= 1.0)) throw UsageError("covenue probability must lie in [0, 1]");
}

namespace {

// Picks a neighbor among edges accepted by `accept`, proportionally to weight.
template <typename Accept>
std::optional<std::size_t> weighted_step(const std::vector<Edge>& edges, Rng& rng, Accept accept) {
  std::uint64_t total = 0;
  for (const auto& e : edges)
    if (accept(e.type)) total += static_cast<std::uint64_t>(e.weight);
  if (total == 0) return std::nullopt;
  std::uint64_t r = rng.below(total);
  for (const auto& e : edges) {
    if (!accept(e.type)) continue;
    if (r < static_cast<std::uint64_t>(e.weight)) return e.to;
    r -= static_cast<std::uint64_t>(e.weight);
  }
  return std::nullopt;
}

}  // namespace

WalkCorpus random_walks(const HeteroGraph& graph, const WalkConfig& config, std::size_t workers) {
  config.validate();
  const std::size_t n = graph.size();
  std::vector<std::vector<std::vector<std::string>>> per_node(n);

  parallel_for(n, workers, [&](std::size_t start) {
    if (graph.isolated(start)) return;
    Rng rng(stable_hash(graph.nodes()[start], config.seed));
    auto is_venue = [](Relation r) { return r == Relation::CoVenue; };
    auto not_venue = [](Relation r) { return r != Relation::CoVenue; };
    for (int w = 0; w < config.walks_per_node; ++w) {
      std::vector<std::string> walk{graph.nodes()[start]};
      std::size_t cur = start;
      while (static_cast<int>(walk.size()) < config.walk_length) {
        const auto& edges = graph.edges(cur);
        const bool venue_branch = rng.uniform() < config.covenue_prob;
        auto next = venue_branch ? weighted_step(edges, rng, is_venue) : weighted_step(edges, rng, not_venue);
        if (!next) next = venue_branch ? weighted_step(edges, rng, not_venue) : weighted_step(edges, rng, is_venue);
        if (!next) break;
        cur = *next;
        walk.push_back(graph.nodes()[cur]);
      }
      per_node[start].push_back(std::move(walk));
    }
  });

  WalkCorpus out;
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.isolated(i)) {
      out.isolated.push_back(graph.nodes()[i]);
      continue;
    }
    for (auto& w : per_node[i]) out.walks.push_back(std::move(w));
  }
  return out;
}

EmbeddingTable relational_embeddings(const std::vector<std::vector<std::string>>& walks, EmbedConfig config) {
  if (walks.empty()) throw DataError("relational embeddings: empty walk corpus");
  config.min_count = 1;
  return train_skipgram(walks, config);
}

void write_walks(std::ostream& out, const WalkCorpus& corpus) {
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i) out << ' ';
      out << walk[i];
    }
    out << '\n';
  }
}

std::size_t EgoGraph::degree(std::size_t node) const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const auto& e) {
    return e.first == node || e.second == node;
  }));
}

std::vector<std::size_t> EgoGraph::neighbors(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const auto& [a, b] : edges) {
    if (a == node) out.push_back(b);
    else if (b == node) out.push_back(a);
  }
  return out;
}

std::size_t EgoGraph::count(EgoNodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [&](const EgoNode& n) { return n.kind == kind; }));
}

EgoGraph build_ego_graph(const PaperRef& target, const std::string& candidate,
                         const std::vector<const PaperRecord*>& profile, const PaperStore& store) {
  const auto* paper = store.find(target.paper_id);
  if (!paper) throw DataError("ego graph: target paper " + target.paper_id + " missing from store");
  if (target.author_index >= paper->authors.size())
    throw DataError("ego graph: author index out of range for " + format_paper_ref(target));
  if (profile.empty()) throw DataError("ego graph: candidate " + candidate + " has an empty profile");
  const NameKey name = normalize_name(paper->authors[target.author_index].name);

  EgoGraph g;
  g.center_paper = paper->id;
  g.center_author = candidate;
  g.nodes.push_back({EgoNodeKind::Paper, paper->id});
  g.nodes.push_back({EgoNodeKind::Author, candidate});
  g.author_index.push_back(target.author_index);

  std::map<std::pair<EgoNodeKind, std::string>, std::size_t> shared;
  auto attribute_node = [&](EgoNodeKind kind, const std::string& key) {
    auto [it, fresh] = shared.emplace(std::make_pair(kind, key), g.nodes.size());
    if (fresh) g.nodes.push_back({kind, key});
    return it->second;
  };
  auto link_attributes = [&](std::size_t paper_node, const PaperRecord& p, std::size_t idx) {
    std::set<std::size_t> linked;
    for (const auto& co : coauthor_tokens(p, idx))
      if (auto n = attribute_node(EgoNodeKind::Coauthor, co); linked.insert(n).second) g.edges.emplace_back(paper_node, n);
    for (const auto& tok : to_set(tokenize(p.authors[idx].org)))
      if (auto n = attribute_node(EgoNodeKind::Org, tok); linked.insert(n).second) g.edges.emplace_back(paper_node, n);
  };

  link_attributes(0, *paper, target.author_index);
  for (const auto* p : profile) {
    const std::size_t node = g.nodes.size();
    g.nodes.push_back({EgoNodeKind::Paper, p->id});
    g.profile_nodes.push_back(node);
    g.edges.emplace_back(1, node);
    auto idx = find_author_index(*p, name);
    g.author_index.push_back(idx);
    if (idx) link_attributes(node, *p, *idx);
  }
  return g;
}

std::vector<double> ego_relational_scores(const EgoGraph& ego, const PaperRecord& target,
                                          const std::vector<const PaperRecord*>& profile,
                                          const EmbeddingTable& table, const FieldSet& fields,
                                          const Stoplist& stoplist) {
  if (profile.size() != ego.profile_nodes.size())
    throw std::invalid_argument("ego_relational_scores: profile does not match the ego graph");

  auto aggregate = [&](std::size_t node, const PaperRecord& p, std::optional<std::size_t> idx) {
    Vector sum = Vector::Zero(table.dim());
    std::size_t parts = 0;
    auto add = [&](const Vector& v) {
      if (v.squaredNorm() == 0.0) return;
      sum += v;
      ++parts;
    };
    add(mean_embedding(paper_tokens(p, idx, fields, stoplist), table));
    for (auto nb : ego.neighbors(node)) {
      const auto& n = ego.nodes[nb];
      if (n.kind == EgoNodeKind::Coauthor || n.kind == EgoNodeKind::Org) add(table.lookup(n.key));
    }
    if (parts > 0) sum /= static_cast<double>(parts);
    return sum;
  };

  const Vector center = aggregate(0, target, ego.author_index[0]);
  std::vector<double> scores;
  scores.reserve(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i)
    scores.push_back(cosine(center, aggregate(ego.profile_nodes[i], *profile[i], ego.author_index[i + 1])));
  return scores;
}

}  // namespace wiw
