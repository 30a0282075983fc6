#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "wiw/eval.hpp"

using namespace wiw;

namespace {

void check_prf(const PrfTriple& got, const PrfTriple& want) {
  CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
  CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
  CHECK(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));
}

std::map<PaperRef, std::string> refs(const std::vector<std::string>& authors) {
  std::map<PaperRef, std::string> out;
  for (std::size_t i = 0; i < authors.size(); ++i) out[{"p" + std::to_string(i), 0}] = authors[i];
  return out;
}

}  // namespace

TEST_CASE("f1_score") {
  CHECK(f1_score(0.0, 0.0) == 0.0);
  CHECK(f1_score(0.5, 1.0 / 3.0) == doctest::Approx(0.4));
  CHECK(f1_score(1.0, 1.0) == 1.0);
}

TEST_CASE("pairwise_prf fixtures") {
  check_prf(pairwise_prf({{"a", "b"}, {"c"}}, {{"a", "b"}, {"c"}}), {1, 1, 1});
  check_prf(pairwise_prf({{"p1", "p2"}, {"p3", "p4"}}, {{"p1", "p2", "p3"}, {"p4"}}), {0.5, 1.0 / 3.0, 0.4});
  check_prf(pairwise_prf({{"a"}, {"b"}, {"c"}}, {{"c"}, {"a"}, {"b"}}), {1, 1, 1});
  check_prf(pairwise_prf({{"a", "b"}}, {{"a"}, {"b"}}), {0, 0, 0});
}

TEST_CASE("pairwise_prf rejects mismatched paper sets") {
  CHECK_THROWS_AS(pairwise_prf({{"a", "b"}}, {{"a"}, {"c"}}), DataError);
  CHECK_THROWS_AS(pairwise_prf({{"a", "a"}}, {{"a"}}), DataError);
}

TEST_CASE("pairwise_prf matches the pair-enumeration oracle and ignores label order") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ids = test::numbered_ids(1 + rng.below(12));
    auto pred = test::random_partition(rng, ids, 1 + rng.below(5));
    auto truth = test::random_partition(rng, ids, 1 + rng.below(5));
    const PrfTriple got = pairwise_prf(pred, truth);
    check_prf(got, oracle::pairwise(pred, truth));
    rng.shuffle(pred);
    rng.shuffle(truth);
    check_prf(pairwise_prf(pred, truth), got);
  }
}

TEST_CASE("macro_pairwise_f1") {
  CHECK(macro_pairwise_f1({1.0, 0.4}) == doctest::Approx(0.7));
  CHECK(macro_pairwise_f1({0.3}) == 0.3);
  CHECK(macro_pairwise_f1({1.0, 1.0, 1.0}) == 1.0);
  CHECK_THROWS(macro_pairwise_f1({}));
}

TEST_CASE("score_snd averages per-name F1") {
  NameBlockSet truth{{"n1", {{"a1", {"x", "y"}}, {"a2", {"z"}}}}, {"n2", {{"b1", {"u", "v"}}}}};
  std::map<std::string, ClusterList> pred{{"n1", {{"x", "y"}, {"z"}}}, {"n2", {{"u"}, {"v"}}}};
  const SndScore s = score_snd(pred, truth);
  CHECK(s.per_name.at("n1").f1 == 1.0);
  CHECK(s.per_name.at("n2").f1 == 0.0);
  CHECK(s.macro_f1 == doctest::Approx(0.5));
  CHECK_THROWS_AS(score_snd({{"absent", {{"x"}}}}, truth), DataError);
}

TEST_CASE("weighted_prf fixtures") {
  const auto truth = refs({"a", "a", "b"});
  check_prf(weighted_prf(truth, truth), {1, 1, 1});

  // Truth counts 3 and 1; author "a" fully right, author "b" fully wrong.
  const auto t2 = refs({"a", "a", "a", "b"});
  const auto p2 = refs({"a", "a", "a", "c"});
  CHECK(weighted_prf(p2, t2).f1 == doctest::Approx(0.75));

  const auto all_nil = refs({"NIL", "NIL", "NIL"});
  CHECK(weighted_prf(all_nil, truth).f1 == 0.0);

  CHECK_THROWS_AS(weighted_prf(refs({"a"}), truth), DataError);
}

TEST_CASE("weighted_prf matches the oracle and stays in [0, 1]") {
  Rng rng(8);
  const std::vector<std::string> authors{"a", "b", "c", "NIL"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<std::string> t, p;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(authors[rng.below(authors.size())]);
      p.push_back(authors[rng.below(authors.size())]);
    }
    const auto got = weighted_prf(refs(p), refs(t));
    check_prf(got, oracle::weighted(refs(p), refs(t)));
    CHECK(got.f1 >= 0.0);
    CHECK(got.f1 <= 1.0 + 1e-12);
  }
}

TEST_CASE("auc fixtures") {
  CHECK(auc({0.9, 0.8, 0.1}, {1, 1, 0}) == 1.0);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
  CHECK(auc({0.9, 0.8, 0.7, 0.6}, {1, 0, 1, 0}) == 0.75);
  CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), DataError);
  CHECK_THROWS_AS(auc({0.1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("average_precision fixtures") {
  CHECK(average_precision({0.9, 0.5, 0.1}, {1, 0, 0}) == 1.0);
  CHECK(average_precision({0.9, 0.5, 0.1, 0.0}, {0, 0, 0, 1}) == doctest::Approx(0.25));
  CHECK(average_precision({0.9, 0.8, 0.7, 0.6}, {1, 0, 1, 0}) == doctest::Approx(5.0 / 6.0));
  CHECK(average_precision({0.5, 0.5}, {0, 1}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(average_precision({0.1}, {0}), DataError);
}

TEST_CASE("auc and average_precision match oracles; auc complements under label flip") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(11);
    std::vector<double> scores;
    std::vector<int> labels, flipped;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(static_cast<double>(rng.below(5)) / 4.0);  // coarse grid forces ties
      labels.push_back(i == 0 ? 1 : i == 1 ? 0 : static_cast<int>(rng.below(2)));
      flipped.push_back(1 - labels.back());
    }
    CHECK(auc(scores, labels) == doctest::Approx(oracle::auc(scores, labels)).epsilon(1e-12));
    CHECK(average_precision(scores, labels) ==
          doctest::Approx(oracle::average_precision(scores, labels)).epsilon(1e-12));
    CHECK(auc(scores, labels) + auc(scores, flipped) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
