#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "wiw/rnd.hpp"
#include "wiw/synth.hpp"

using namespace wiw;

namespace {

using test::make_paper;

Eigen::VectorXd pool_oracle(const std::vector<double>& sims, const KernelConfig& k) {
  Eigen::VectorXd out(k.count);
  for (int j = 0; j < k.count; ++j) {
    const double mu = -1.0 + 0.05 * j;
    const double sigma = j == k.count - 1 ? k.exact_sigma : k.sigma;
    double sum = 0;
    for (double s : sims) sum += std::exp(-(s - mu) * (s - mu) / (2 * sigma * sigma));
    out(j) = std::log(1 + sum);
  }
  return out;
}

Eigen::VectorXd candidate_features(const PaperRecord& target, std::size_t idx,
                                   const std::vector<const PaperRecord*>& candidate, const NameKey& name) {
  const CandidateView view = make_candidate_view(candidate, name);
  return adhoc_features(make_target_view(target, idx), view, build_adhoc_idf({&view}));
}

ScoredPaper scored(std::map<std::string, double> scores) { return {{"p", 0}, std::move(scores)}; }

// Small synthetic corpus split for assignment.
struct RndFixture {
  SynthCorpus corpus;
  EmbeddingTable table;
  RndSplit split;

  explicit RndFixture(std::uint64_t seed, int names = 3) {
    SynthConfig sc;
    sc.names = names;
    sc.authors_per_name = 4;
    sc.papers_per_author = 6;
    sc.seed = seed;
    corpus = generate(sc);
    table = train_skipgram(semantic_corpus(corpus.store), EmbedConfig{});
    split = split_rnd(corpus.blocks, corpus.store, 0.34, 0.0, seed);
  }
};

}  // namespace

TEST_CASE("feature widths and assignment defaults") {
  CHECK(kAdhocWidth == 36);
  CHECK(kKernelWidth == 41);
  CHECK(kFeatureWidth == 118);
  const RndConfig c;
  CHECK(c.negatives == 3);
  CHECK(c.nil_threshold == 0.5);
  CHECK(c.kernel.count == 41);
  CHECK(c.kernel.sigma == 0.1);
  CHECK(c.kernel.exact_sigma == 0.001);
  CHECK(family_offset(Family::Coauthor) == 0);
  CHECK(family_offset(Family::Title) == 4);
  CHECK(family_offset(Family::Keywords) == 28);
}

TEST_CASE("kernel centers") {
  const auto mus = KernelConfig{}.mus();
  REQUIRE(mus.size() == 41);
  CHECK(mus.front() == -1.0);
  CHECK(mus.back() == 1.0);
  CHECK(mus[20] == doctest::Approx(0.0));
  for (std::size_t j = 0; j < mus.size(); ++j) CHECK(mus[j] == doctest::Approx(-1.0 + 0.05 * j));
}

TEST_CASE("kernel_pool fixtures") {
  const KernelConfig k;
  CHECK(kernel_pool({}, k).isZero());
  const std::vector<double> one{1.0};
  const Eigen::VectorXd p = kernel_pool(one, k);
  CHECK(p(40) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (int j = 0; j < 40; ++j) CHECK(p(j) < p(40));
}

TEST_CASE("kernel_pool matches the formula, ignores order and grows with duplicates") {
  const KernelConfig k;
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> sims;
    for (std::size_t i = 0, n = 1 + rng.below(6); i < n; ++i) sims.push_back(rng.uniform() * 2 - 1);
    const Eigen::VectorXd p = kernel_pool(sims, k);
    CHECK((p - pool_oracle(sims, k)).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<double> shuffled = sims;
    rng.shuffle(shuffled);
    CHECK((kernel_pool(shuffled, k) - p).cwiseAbs().maxCoeff() < 1e-12);

    const std::vector<double> single{sims[0]}, doubled{sims[0], sims[0]};
    const Eigen::VectorXd a = kernel_pool(single, k), b = kernel_pool(doubled, k);
    for (int j = 0; j < k.count; ++j)
      if (a(j) > 0) CHECK(b(j) > a(j));
  }
}

TEST_CASE("ad-hoc features for an exact duplicate") {
  const PaperRecord t = make_paper("t", {{"Ann Lee", "Acme Optics"}, {"Bo Chan", ""}}, "Laser cavity design",
                                   "Optics Letters", 2001, {"lasers"});
  PaperRecord dup = t;
  dup.id = "dup";
  const Eigen::VectorXd x = candidate_features(t, 0, {&dup}, normalize_name("ann lee"));
  for (int c : {8, 10, 16, 18, 24, 26, 32, 34}) CHECK(x(c) == doctest::Approx(1.0));
  // Ratios are full too.
  for (Family f : {Family::Coauthor, Family::Title, Family::Venue, Family::Org, Family::Keywords}) {
    CHECK(x(family_offset(f) + 2) == 1.0);
    CHECK(x(family_offset(f) + 3) == 1.0);
  }
}

TEST_CASE("ad-hoc coauthor ratio") {
  const PaperRecord t =
      make_paper("t", {{"Ann Lee", ""}, {"Bo Chan", ""}, {"Cy Dee", ""}, {"Di Ek", ""}}, "alpha");
  const PaperRecord c = make_paper("c", {{"Bo Chan", ""}, {"Ann Lee", ""}, {"Cy Dee", ""}, {"Ed Fox", ""}}, "beta");
  const Eigen::VectorXd x = candidate_features(t, 0, {&c}, normalize_name("ann lee"));
  CHECK(x(2) == doctest::Approx(2.0 / 3.0));
  CHECK(x(3) == doctest::Approx(2.0 / 3.0));
  // One candidate document: idf = ln(2/2) + 1 = 1, each shared coauthor seen once.
  CHECK(x(0) == doctest::Approx(2.0));
  CHECK(x(1) == doctest::Approx(2.0 * 2.0));
}

TEST_CASE("ad-hoc features with no overlap are zero") {
  // No shared tokens, and no shared characters either, so every string similarity is 0 as well.
  const PaperRecord t = make_paper("t", {{"Ann Lee", "Acme"}, {"Bo Chan", ""}}, "alpha", "bmj", 0, {"kw"});
  const PaperRecord c = make_paper("c", {{"Ann Lee", "Quiz"}, {"Ed Fox", ""}}, "overt", "sun", 0, {"other"});
  const Eigen::VectorXd x = candidate_features(t, 0, {&c}, normalize_name("ann lee"));
  for (int i = 0; i < kAdhocWidth; ++i) CHECK_MESSAGE(x(i) == 0.0, "column " << i);
}

TEST_CASE("ad-hoc title similarity columns follow the set and string metrics") {
  const PaperRecord t = make_paper("t", {{"Ann Lee", ""}}, "graph neural networks");
  const PaperRecord c1 = make_paper("c1", {{"Ann Lee", ""}}, "graph kernels");
  const PaperRecord c2 = make_paper("c2", {{"Ann Lee", ""}}, "neural networks");
  const Eigen::VectorXd x = candidate_features(t, 0, {&c1, &c2}, normalize_name("ann lee"));
  const double j1 = jaccard({"graph", "neural", "networks"}, {"graph", "kernels"});
  const double j2 = jaccard({"graph", "neural", "networks"}, {"neural", "networks"});
  const double w1 = jaro_winkler("graph neural networks", "graph kernels");
  const double w2 = jaro_winkler("graph neural networks", "neural networks");
  CHECK(x(8) == doctest::Approx(std::max(j1, j2)));
  CHECK(x(9) == doctest::Approx((j1 + j2) / 2));
  CHECK(x(10) == doctest::Approx(std::max(w1, w2)));
  CHECK(x(11) == doctest::Approx((w1 + w2) / 2));
  CHECK(x(6) == 1.0);
  CHECK(x(7) == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("soft semantic features") {
  const KernelConfig k;
  Vector t(3), a(3), b(3);
  t << 1, 2, 3;
  a << 3, -1, 0.5;
  b << -2, 1, 1;
  const std::vector<double> one{1.0};
  CHECK((soft_semantic_features(t, {t}, k) - kernel_pool(one, k)).cwiseAbs().maxCoeff() < 1e-12);

  const std::vector<double> zeros{0.0, 0.0};
  CHECK((soft_semantic_features(Vector::Zero(3), {a, b}, k) - kernel_pool(zeros, k)).cwiseAbs().maxCoeff() < 1e-12);

  const std::vector<double> sims{t.dot(a) / (t.norm() * a.norm()), t.dot(b) / (t.norm() * b.norm())};
  CHECK((soft_semantic_features(t, {a, b}, k) - pool_oracle(sims, k)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("assemble and split") {
  const Eigen::VectorXd z = assemble(Eigen::VectorXd::Zero(36), Eigen::VectorXd::Zero(41), Eigen::VectorXd::Zero(41));
  CHECK(z.size() == 118);
  CHECK(z.isZero());

  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(36, 0, 35);
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(41, 7);
  const Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(41, -1, 1);
  const Eigen::VectorXd x = assemble(a, s, e);
  CHECK(x(0) == 0);
  CHECK(x(35) == 35);
  CHECK(x(36) == 7);
  CHECK(x(117) == 1);
  const FeatureParts parts = split_features(x);
  CHECK(parts.adhoc == a);
  CHECK(parts.soft == s);
  CHECK(parts.ego == e);
  CHECK_THROWS_AS(assemble(a, s, Eigen::VectorXd::Zero(40)), std::invalid_argument);
  CHECK_THROWS_AS(split_features(a), std::invalid_argument);
}

TEST_CASE("feature blocks") {
  CHECK(FeatureBlocks{}.columns().size() == 118);
  CHECK((FeatureBlocks{true, false, false}.columns().size()) == 36);
  CHECK((FeatureBlocks{false, false, true}.columns().front()) == 77);
  CHECK(parse_feature_blocks("adhoc,ego") == FeatureBlocks{true, false, true});
  CHECK(format_feature_blocks(FeatureBlocks{}) == "adhoc,soft,ego");
  CHECK_THROWS_AS(parse_feature_blocks("adhoc,magic"), UsageError);
}

TEST_CASE("logistic gradient matches central finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 16;
    Eigen::MatrixXd x(n, kFeatureWidth);
    Eigen::VectorXd y(n), params(kFeatureWidth + 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < kFeatureWidth; ++j) x(i, j) = rng.uniform() * 2 - 1;
      y(i) = static_cast<double>(rng.below(2));
    }
    for (int j = 0; j <= kFeatureWidth; ++j) params(j) = (rng.uniform() * 2 - 1) * 0.3;
    const double l2 = 1e-2;
    const Eigen::VectorXd g = logistic_gradient(params, x, y, l2);
    Eigen::VectorXd fd(params.size());
    const double h = 1e-5;
    for (Eigen::Index j = 0; j < params.size(); ++j) {
      Eigen::VectorXd up = params, down = params;
      up(j) += h;
      down(j) -= h;
      fd(j) = (logistic_loss(up, x, y, l2) - logistic_loss(down, x, y, l2)) / (2 * h);
    }
    CHECK((g - fd).norm() / std::max(g.norm(), fd.norm()) < 1e-4);
  }
}

TEST_CASE("logistic loss at zero parameters is ln 2") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  Eigen::VectorXd y(5);
  y << 1, 0, 1, 0, 0;
  CHECK(logistic_loss(Eigen::VectorXd::Zero(4), x, y, 0.5) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("scorer separates separable data") {
  Rng rng(3);
  const int n = 40;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, kFeatureWidth);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = i % 2;
    x(i, 5) = (i % 2 ? 1.0 : -1.0) * (0.5 + rng.uniform());
    for (int j = 40; j < 50; ++j) x(i, j) = rng.uniform();
  }
  const auto s = train_scorer(x, y, FeatureBlocks{}, LogisticConfig{});
  for (int i = 0; i < n; ++i) CHECK((s->score(x.row(i).transpose()) > 0.5) == (y(i) == 1));

  const auto again = train_scorer(x, y, FeatureBlocks{}, LogisticConfig{});
  CHECK(again->weights() == s->weights());
  CHECK(again->bias() == s->bias());
}

TEST_CASE("scorer falls back to the class prior without signal") {
  const int n = 10;
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(n, kFeatureWidth, 0.25);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  y.head(3).setOnes();
  const auto s = train_scorer(x, y, FeatureBlocks{}, LogisticConfig{});
  CHECK(s->score(x.row(0).transpose()) == doctest::Approx(0.3).epsilon(1e-3));
  CHECK_THROWS_AS(train_scorer(x, Eigen::VectorXd::Ones(n), FeatureBlocks{}, LogisticConfig{}), DataError);
}

TEST_CASE("scorer json round-trip") {
  const LogisticScorer s({0, 40, 117}, Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 0.5, 2),
                         Eigen::Vector3d(0.1, -0.2, 0.3), -0.4);
  const auto back = scorer_from_json(s.to_json());
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(118, 0, 1);
  CHECK(back->score(x) == s.score(x));
  CHECK(back->kind() == "logistic");
  CHECK_THROWS_AS(scorer_from_json(Json{{"kind", "forest"}}), DataError);
  CHECK_THROWS_AS(scorer_from_json(Json::parse(R"({"kind":"logistic","columns":[0],"bias":0,
    "mean":[0,1],"scale":[1],"weights":[1]})")), DataError);
}

TEST_CASE("choose_assignment") {
  CHECK(choose_assignment(scored({{"a", 0.9}}), 0.5).author == "a");
  CHECK(choose_assignment(scored({{"a", 0.3}, {"b", 0.2}}), 0.5).author == "NIL");
  CHECK(choose_assignment(scored({{"b", 0.7}, {"a", 0.7}}), 0.5).author == "a");
  CHECK(choose_assignment(scored({{"a", 0.5}}), 0.5).author == "NIL");
  const Assignment none = choose_assignment(scored({}), 0.5);
  CHECK(none.author == "NIL");
  CHECK(none.score == 0.0);
}

TEST_CASE("choose_assignment returns the argmax or NIL") {
  Rng rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::string, double> s;
    for (std::size_t i = 0, n = rng.below(6); i < n; ++i) s["a" + std::to_string(i)] = rng.uniform();
    const double threshold = rng.uniform();
    const Assignment a = choose_assignment(scored(s), threshold);
    double best = 0;
    for (const auto& [_, v] : s) best = std::max(best, v);
    if (s.empty() || best <= threshold) {
      CHECK(a.author == "NIL");
    } else {
      CHECK(s.at(a.author) == best);
      CHECK(a.score == best);
    }
  }
}

TEST_CASE("training pairs: one positive and up to the negative budget") {
  PaperStore store;
  NameBlockSet profiles;
  for (int a = 0; a < 5; ++a) {
    const std::string id = "big" + std::to_string(a);
    store.insert(make_paper(id, {{"Ann Lee", ""}}));
    profiles["ann_lee"]["author" + std::to_string(a)] = {id};
  }
  for (int a = 0; a < 2; ++a) {
    const std::string id = "small" + std::to_string(a);
    store.insert(make_paper(id, {{"Bo Chan", ""}}));
    profiles["bo_chan"]["author" + std::to_string(a)] = {id};
  }
  store.insert(make_paper("q1", {{"X Y", ""}, {"Ann Lee", ""}}));
  store.insert(make_paper("q2", {{"Bo Chan", ""}}));
  store.insert(make_paper("q3", {{"Ann Lee", ""}}));

  RndSplit split;
  split.profiles = profiles;
  split.unassigned = {{"q1", 1}, {"q2", 0}, {"q3", 0}};
  split.truth = {{{"q1", 1}, "author2"}, {{"q2", 0}, "author1"}, {{"q3", 0}, "NIL"}};

  const auto pairs = build_training_pairs(split, store, 3, 7);
  std::map<std::string, std::pair<int, int>> counts;  // paper -> (positives, negatives)
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : pairs) {
    (p.label ? counts[p.ref.paper_id].first : counts[p.ref.paper_id].second)++;
    CHECK(seen.insert({p.ref.paper_id, p.author}).second);
    if (p.label == 0) CHECK(p.author != split.truth.at(p.ref));
  }
  CHECK(counts["q1"] == std::pair{1, 3});
  CHECK(counts["q2"] == std::pair{1, 1});
  CHECK(counts["q3"] == std::pair{0, 3});

  const auto again = build_training_pairs(split, store, 3, 7);
  REQUIRE(again.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) CHECK(again[i].author == pairs[i].author);
}

TEST_CASE("identical candidates tie and the smaller author id wins") {
  PaperStore store;
  store.insert(make_paper("t", {{"Ann Lee", "Acme"}, {"Bo Chan", ""}}, "laser optics"));
  store.insert(make_paper("pz", {{"Ann Lee", "Acme"}, {"Bo Chan", ""}}, "laser cavity"));
  store.insert(make_paper("pa", {{"Ann Lee", "Acme"}, {"Bo Chan", ""}}, "laser cavity"));
  const NameBlockSet profiles{{"ann_lee", {{"zed", {"pz"}}, {"abe", {"pa"}}}}};
  const EmbeddingTable table({"laser", "optics", "cavity"}, RowMatrixF::Identity(3, 3));
  const RndFeaturizer f(store, profiles, table, RndConfig{});
  CHECK(f.features({"t", 0}, "ann_lee", "zed") == f.features({"t", 0}, "ann_lee", "abe"));

  const LogisticScorer s(FeatureBlocks{}.columns(), Eigen::VectorXd::Zero(118), Eigen::VectorXd::Ones(118),
                         Eigen::VectorXd::Constant(118, 0.05), 0.0);
  const Assignment a = assign({"t", 0}, f, s, 0.5);
  CHECK(a.author == "abe");
  CHECK(a.score > 0.5);

  CHECK(assign({"t", 1}, f, s, 0.5).author == "NIL");
  CHECK_THROWS_AS(f.features({"t", 0}, "ann_lee", "nobody"), DataError);
}

TEST_CASE("calibrate_nil_threshold") {
  SUBCASE("separated at 0.4 / 0.6") {
    std::vector<ScoredPaper> s;
    RndTruth truth;
    for (int i = 0; i < 4; ++i) {
      const PaperRef nil{"n" + std::to_string(i), 0}, real{"r" + std::to_string(i), 0};
      s.push_back({nil, {{"a", 0.4}}});
      s.push_back({real, {{"a", 0.6}}});
      truth[nil] = "NIL";
      truth[real] = "a";
    }
    const Calibration c = calibrate_nil_threshold(s, truth);
    CHECK(c.had_nil);
    CHECK(c.weighted_f1 == 1.0);
    // Assignment needs a score strictly above the threshold, so 0.40 already rejects 0.4.
    CHECK(c.threshold == doctest::Approx(0.40));
  }
  SUBCASE("all NIL") {
    std::vector<ScoredPaper> s;
    RndTruth truth;
    for (int i = 0; i < 5; ++i) {
      const PaperRef r{"n" + std::to_string(i), 0};
      s.push_back({r, {{"a", 0.93}, {"b", 0.91}}});
      truth[r] = "NIL";
    }
    CHECK(calibrate_nil_threshold(s, truth).threshold == doctest::Approx(0.95));
  }
  SUBCASE("no NIL keeps the default") {
    const Calibration c = calibrate_nil_threshold({{{"r", 0}, {{"a", 0.2}}}}, {{{"r", 0}, "a"}});
    CHECK_FALSE(c.had_nil);
    CHECK(c.threshold == 0.5);
  }
}

TEST_CASE("RndConfig validation and json round-trip") {
  RndConfig c;
  c.negatives = 5;
  c.nil_threshold = 0.35;
  c.blocks = {true, false, true};
  c.fields = FieldSet::all();
  c.scorer.l2 = 0.01;
  const RndConfig back = rnd_config_from_json(rnd_config_to_json(c));
  CHECK(back.negatives == 5);
  CHECK(back.nil_threshold == 0.35);
  CHECK(back.blocks == c.blocks);
  CHECK(back.fields == c.fields);
  CHECK(back.scorer.l2 == 0.01);

  c = RndConfig{};
  c.nil_threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = RndConfig{};
  c.blocks = {false, false, false};
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("assignments json") {
  const std::vector<Assignment> a{{{"p", 1}, "x", 0.75}, {{"q-r", 0}, "NIL", 0.1}};
  const Json j = assignments_to_json(a);
  const auto back = assignments_from_json(j);
  CHECK(back.at({"p", 1}) == "x");
  CHECK(back.at({"q-r", 0}) == "NIL");
}

TEST_CASE("end-to-end training on synthetic names") {
  const RndFixture fx(2);
  RndConfig cfg;
  const RndModel m = train_rnd(fx.split, nullptr, fx.corpus.store, fx.table, cfg);
  CHECK_FALSE(m.calibration.had_nil);
  CHECK(m.config.nil_threshold == 0.5);
  const RndEvaluation e = evaluate_rnd(m, fx.split, fx.corpus.store, fx.table);
  CHECK(e.metrics.f1 >= 0.9);

  // Features and models are identical across runs and worker counts.
  const RndFeaturizer f(fx.corpus.store, fx.split.profiles, fx.table, cfg);
  const auto pairs = build_training_pairs(fx.split, fx.corpus.store, 3, 1);
  CHECK(feature_matrix(pairs, f, 1) == feature_matrix(pairs, f, 3));
  const RndModel again = train_rnd(fx.split, nullptr, fx.corpus.store, fx.table, cfg, 2);
  CHECK(model_to_json(again) == model_to_json(m));

  const RndModel loaded = model_from_json(model_to_json(m));
  const RndEvaluation e2 = evaluate_rnd(loaded, fx.split, fx.corpus.store, fx.table);
  CHECK(e2.metrics.f1 == e.metrics.f1);

  std::ostringstream dump;
  write_feature_matrix(dump, feature_matrix(pairs, f), pairs);
  std::istringstream lines(dump.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string tok;
    std::size_t cols = 0;
    while (fields >> tok) ++cols;
    CHECK(cols == 119);
    ++rows;
  }
  CHECK(rows == pairs.size());
}
