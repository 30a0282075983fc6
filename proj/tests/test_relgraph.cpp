#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "wiw/relgraph.hpp"

using namespace wiw;

namespace {

using test::make_paper;

bool adjacent(const HeteroGraph& g, std::size_t a, std::size_t b) {
  for (const auto& e : g.edges(a))
    if (e.to == b) return true;
  return false;
}

std::map<std::string, std::size_t> index_of(const HeteroGraph& g) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i) out[g.nodes()[i]] = i;
  return out;
}

HeteroGraph random_graph(Rng& rng, std::size_t n) {
  std::vector<std::string> ids = test::numbered_ids(n, "n");
  HeteroGraph g(ids);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (Relation r : {Relation::CoAuthor, Relation::CoOrg, Relation::CoVenue})
        if (rng.below(4) == 0) g.connect(i, j, r, 1 + static_cast<int>(rng.below(3)));
  return g;
}

}  // namespace

TEST_CASE("default walk constants") {
  const WalkConfig w;
  CHECK(w.walk_length == 20);
  CHECK(w.walks_per_node == 5);
  CHECK(w.covenue_prob == 0.1);
}

TEST_CASE("relation sets") {
  CHECK(RelationSet::nonempty_subsets().size() == 7);
  CHECK(parse_relation_set("coauthor,covenue") == RelationSet{Relation::CoAuthor, Relation::CoVenue});
  CHECK(parse_relation_set(format_relation_set(RelationSet::all())) == RelationSet::all());
  CHECK_THROWS_AS(parse_relation_set("cofriend"), UsageError);
}

TEST_CASE("edge weights count shared signals") {
  const PaperRecord a = make_paper("a", {{"Ann Lee", "Acme Optics"}, {"Lishan Cui", ""}, {"Dan Zhu", ""}}, "", "Nature");
  const PaperRecord b = make_paper("b", {{"Lishan Cui", ""}, {"Dan Zhu", ""}, {"Ann Lee", "Acme Works"}}, "", "Nature");
  const PaperRecord c = make_paper("c", {{"Ann Lee", "Zeta Works"}, {"Ed Fox", ""}}, "", "Science Today");
  const HeteroGraph g = build_graph({&a, &b, &c}, normalize_name("ann lee"), RelationSet::all());

  CHECK(g.weight(0, 1, Relation::CoAuthor) == 2);
  CHECK(g.weight(0, 1, Relation::CoVenue) == 1);
  CHECK(g.weight(0, 1, Relation::CoOrg) == 1);
  CHECK(g.weight(1, 2, Relation::CoOrg) == 1);
  CHECK(g.weight(1, 0, Relation::CoAuthor) == 2);

  // Every other (pair, relation) is absent.
  std::size_t edges = 0;
  for (std::size_t i = 0; i < g.size(); ++i) edges += g.edges(i).size();
  CHECK(edges == 2 * 4);
  CHECK(g.weight(0, 2, Relation::CoAuthor) == 0);
  CHECK(g.weight(0, 2, Relation::CoOrg) == 0);
  CHECK(g.weight(0, 2, Relation::CoVenue) == 0);

  const HeteroGraph only_venue = build_graph({&a, &b, &c}, normalize_name("ann lee"), {Relation::CoVenue});
  CHECK(only_venue.weight(0, 1, Relation::CoAuthor) == 0);
  CHECK(only_venue.weight(0, 1, Relation::CoVenue) == 1);
  CHECK(only_venue.isolated(2));
}

TEST_CASE("a paper without the target name is an error") {
  const PaperRecord a = make_paper("a", {{"Bo Chan", ""}});
  CHECK_THROWS_AS(build_graph({&a}, normalize_name("ann lee"), RelationSet::all()), DataError);
}

TEST_CASE("walks on a single edge alternate") {
  HeteroGraph g({"p1", "p2"});
  g.connect(0, 1, Relation::CoAuthor, 1);
  const WalkCorpus w = random_walks(g, WalkConfig{});
  CHECK(w.walks.size() == 10);
  for (const auto& walk : w.walks) {
    CHECK(walk.size() == 20);
    for (std::size_t i = 1; i < walk.size(); ++i) CHECK(walk[i] != walk[i - 1]);
  }
}

TEST_CASE("isolated nodes get no walks") {
  HeteroGraph g({"p1", "p2", "lonely"});
  g.connect(0, 1, Relation::CoVenue, 2);
  const WalkCorpus w = random_walks(g, WalkConfig{});
  CHECK(w.isolated == std::vector<std::string>{"lonely"});
  for (const auto& walk : w.walks)
    for (const auto& id : walk) CHECK(id != "lonely");
}

TEST_CASE("walks follow edges, have bounded length and do not depend on worker count") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const HeteroGraph g = random_graph(rng, 2 + rng.below(10));
    WalkConfig cfg;
    cfg.walk_length = 2 + static_cast<int>(rng.below(10));
    cfg.walks_per_node = 1 + static_cast<int>(rng.below(3));
    cfg.covenue_prob = rng.uniform();
    cfg.seed = rng.next();
    const WalkCorpus w = random_walks(g, cfg);
    const auto idx = index_of(g);

    std::size_t connected = 0;
    for (std::size_t i = 0; i < g.size(); ++i) connected += !g.isolated(i);
    CHECK(w.walks.size() == connected * static_cast<std::size_t>(cfg.walks_per_node));
    CHECK(w.isolated.size() == g.size() - connected);
    for (const auto& walk : w.walks) {
      CHECK(static_cast<int>(walk.size()) == cfg.walk_length);
      for (std::size_t i = 1; i < walk.size(); ++i) CHECK(adjacent(g, idx.at(walk[i - 1]), idx.at(walk[i])));
    }

    const WalkCorpus again = random_walks(g, cfg, 3);
    CHECK(again.walks == w.walks);
  }
}

TEST_CASE("walk text output") {
  WalkCorpus c;
  c.walks = {{"a", "b"}, {"c"}};
  std::ostringstream out;
  write_walks(out, c);
  CHECK(out.str() == "a b\nc\n");
}

TEST_CASE("relational embeddings separate two cliques") {
  HeteroGraph g(test::numbered_ids(8, "q"));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      g.connect(i, j, Relation::CoAuthor, 1);
      g.connect(i + 4, j + 4, Relation::CoAuthor, 1);
    }
  EmbedConfig ec;
  ec.dim = 16;
  ec.epochs = 5;
  const EmbeddingTable t = relational_embeddings(random_walks(g, WalkConfig{}).walks, ec);
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j) {
      const double c = cosine(t.lookup(g.nodes()[i]), t.lookup(g.nodes()[j]));
      if ((i < 4) == (j < 4)) {
        within += c;
        ++nw;
      } else {
        across += c;
        ++na;
      }
    }
  CHECK(within / nw > across / na);

  const EmbeddingTable pair = relational_embeddings({{"p1", "p2"}}, ec);
  CHECK(pair.contains("p1"));
  CHECK(pair.contains("p2"));
  CHECK_THROWS_AS(relational_embeddings({}, ec), DataError);
}

TEST_CASE("ego graph node and edge counts") {
  PaperStore store;
  store.insert(make_paper("t", {{"Ann Lee", "Acme Optics"}, {"Bo Chan", ""}, {"Cy Dee", ""}, {"Di Ek", ""}}));
  store.insert(make_paper("p1", {{"Ann Lee", "Acme"}, {"Bo Chan", ""}}));
  store.insert(make_paper("p2", {{"Ed Fox", ""}, {"Ann Lee", "Zeta Works"}}));
  const std::vector<const PaperRecord*> profile{&store.at("p1"), &store.at("p2")};

  const EgoGraph g = build_ego_graph({"t", 0}, "cand", profile, store);
  CHECK(g.nodes[0].key == "t");
  CHECK(g.nodes[1].key == "cand");
  CHECK(g.degree(1) == 2);
  // Target: 3 coauthors + 2 org tokens. p1 adds nothing new. p2 adds ed_fox, zeta, works.
  CHECK(g.count(EgoNodeKind::Coauthor) == 4);
  CHECK(g.count(EgoNodeKind::Org) == 4);
  CHECK(g.count(EgoNodeKind::Paper) == 3);
  CHECK(g.nodes.size() == 12);
  CHECK(g.edges.size() == 5 + 2 + 2 + 3);
  CHECK(g.degree(0) == 5);
  CHECK(g.author_index == std::vector<std::optional<std::size_t>>{0, 0, 1});

  CHECK_THROWS_AS(build_ego_graph({"t", 7}, "cand", profile, store), DataError);
  CHECK_THROWS_AS(build_ego_graph({"t", 0}, "cand", {}, store), DataError);
}

namespace {

// Mean of the paper's own embedding and the table vectors of its coauthors
// and org tokens, skipping zero vectors; computed without the ego graph.
Vector aggregate_oracle(const PaperRecord& p, std::size_t idx, const EmbeddingTable& t, const FieldSet& fields) {
  std::vector<Vector> parts;
  Vector own = Vector::Zero(t.dim());
  int own_n = 0;
  for (const auto& tok : paper_tokens(p, idx, fields))
    if (t.contains(tok)) {
      own += t.lookup(tok);
      ++own_n;
    }
  if (own_n) parts.push_back(own / own_n);
  std::set<std::string> keys;
  for (std::size_t a = 0; a < p.authors.size(); ++a)
    if (a != idx) keys.insert(normalize_name(p.authors[a].name).joined());
  for (const auto& tok : tokenize(p.authors[idx].org)) keys.insert(tok);
  for (const auto& k : keys)
    if (t.contains(k) && !t.lookup(k).isZero()) parts.push_back(t.lookup(k));
  Vector out = Vector::Zero(t.dim());
  for (const auto& v : parts) out += v;
  return parts.empty() ? out : Vector(out / static_cast<double>(parts.size()));
}

double cosine_oracle(const Vector& a, const Vector& b) {
  double dot = 0, na = 0, nb = 0;
  for (int i = 0; i < a.size(); ++i) {
    dot += a(i) * b(i);
    na += a(i) * a(i);
    nb += b(i) * b(i);
  }
  return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("ego relational scores") {
  PaperStore store;
  store.insert(make_paper("t", {{"Ann Lee", "Acme Optics"}, {"Bo Chan", ""}}, "laser cavity", "", 0, {"optics"}));
  store.insert(make_paper("dup", {{"Ann Lee", "Acme Optics"}, {"Bo Chan", ""}}, "laser cavity", "", 0, {"optics"}));
  store.insert(make_paper("p2", {{"Ann Lee", "Zeta Works"}, {"Cy Dee", ""}}, "protein folding"));
  store.insert(make_paper("p3", {{"Ann Lee", "Acme"}, {"Ed Fox", ""}}, "laser protein"));
  store.insert(make_paper("blank", {{"Ann Lee", ""}}, ""));

  Rng rng(31);
  std::vector<std::string> vocab{"laser", "cavity", "optics", "protein", "folding", "acme", "zeta",
                                 "works", "bo_chan", "cy_dee", "ed_fox"};
  RowMatrixF vecs(static_cast<Eigen::Index>(vocab.size()), 6);
  for (Eigen::Index i = 0; i < vecs.rows(); ++i)
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) vecs(i, j) = static_cast<float>(rng.uniform() * 2 - 1);
  const EmbeddingTable table(vocab, vecs);
  const FieldSet fields = FieldSet::paper_default();
  const PaperRecord& target = store.at("t");

  SUBCASE("a duplicate of the target scores highest") {
    const std::vector<const PaperRecord*> profile{&store.at("p2"), &store.at("dup"), &store.at("p3")};
    const EgoGraph g = build_ego_graph({"t", 0}, "c", profile, store);
    const auto s = ego_relational_scores(g, target, profile, table, fields);
    REQUIRE(s.size() == 3);
    CHECK(s[1] == doctest::Approx(1.0));
    CHECK(s[1] > s[0]);
    CHECK(s[1] > s[2]);
  }

  SUBCASE("profile papers with no signal score 0") {
    const std::vector<const PaperRecord*> profile{&store.at("blank"), &store.at("blank")};
    const EgoGraph g = build_ego_graph({"t", 0}, "c", profile, store);
    for (double v : ego_relational_scores(g, target, profile, table, fields)) CHECK(v == 0.0);
  }

  SUBCASE("scores match a mean-aggregation oracle") {
    const std::vector<const PaperRecord*> profile{&store.at("p2"), &store.at("p3"), &store.at("dup")};
    const EgoGraph g = build_ego_graph({"t", 0}, "c", profile, store);
    const auto s = ego_relational_scores(g, target, profile, table, fields);
    const Vector center = aggregate_oracle(target, 0, table, fields);
    for (std::size_t i = 0; i < profile.size(); ++i)
      CHECK(s[i] == doctest::Approx(cosine_oracle(center, aggregate_oracle(*profile[i], 0, table, fields)))
                        .epsilon(1e-9));
  }
}
