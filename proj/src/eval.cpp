#include "wiw/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "wiw/common.hpp"

namespace wiw {

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

double pairs(std::size_t n) { return static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0) / 2.0; }

std::map<std::string, std::size_t> cluster_index(const ClusterList& clusters, const char* side) {
  std::map<std::string, std::size_t> out;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (const auto& id : clusters[c])
      if (!out.emplace(id, c).second) throw DataError(std::string(side) + " clustering lists paper " + id + " twice");
  return out;
}

}  // namespace

PrfTriple pairwise_prf(const ClusterList& pred, const ClusterList& truth) {
  auto pi = cluster_index(pred, "predicted");
  auto ti = cluster_index(truth, "true");
  if (pi.size() != ti.size() ||
      !std::equal(pi.begin(), pi.end(), ti.begin(), [](const auto& a, const auto& b) { return a.first == b.first; }))
    throw DataError("pairwise_prf: predicted and true clusterings cover different papers");

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> contingency;
  for (const auto& [id, p] : pi) ++contingency[{p, ti.at(id)}];

  double correct = 0.0, predicted = 0.0, actual = 0.0;
  for (const auto& [_, n] : contingency) correct += pairs(n);
  for (const auto& c : pred) predicted += pairs(c.size());
  for (const auto& c : truth) actual += pairs(c.size());

  if (predicted == 0.0 && actual == 0.0) return {1.0, 1.0, 1.0};
  PrfTriple r;
  r.precision = predicted > 0.0 ? correct / predicted : 0.0;
  r.recall = actual > 0.0 ? correct / actual : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

double macro_pairwise_f1(const std::vector<double>& per_name_f1) {
  if (per_name_f1.empty()) throw DataError("macro F1 needs at least one name");
  return std::accumulate(per_name_f1.begin(), per_name_f1.end(), 0.0) / static_cast<double>(per_name_f1.size());
}

SndScore score_snd(const std::map<std::string, ClusterList>& pred, const NameBlockSet& truth) {
  SndScore out;
  std::vector<double> f1s;
  for (const auto& [name, clusters] : pred) {
    auto it = truth.find(name);
    if (it == truth.end()) throw DataError("name " + name + " has no ground truth");
    ClusterList t;
    for (const auto& [_, ids] : it->second) t.push_back(ids);
    try {
      out.per_name[name] = pairwise_prf(clusters, t);
    } catch (const DataError& e) {
      throw DataError(name + ": " + e.what());
    }
    f1s.push_back(out.per_name[name].f1);
  }
  out.macro_f1 = macro_pairwise_f1(f1s);
  return out;
}

PrfTriple weighted_prf(const std::map<PaperRef, std::string>& assigned,
                       const std::map<PaperRef, std::string>& truth) {
  if (assigned.size() != truth.size() ||
      !std::equal(assigned.begin(), assigned.end(), truth.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; }))
    throw DataError("weighted_prf: assignment and truth keys differ");
  if (truth.empty()) return {};

  struct Counts {
    double truth = 0, assigned = 0, correct = 0;
  };
  std::map<std::string, Counts> per_author;
  for (const auto& [ref, author] : truth) ++per_author[author].truth;
  for (const auto& [ref, author] : assigned) {
    auto& c = per_author[author];
    ++c.assigned;
    if (truth.at(ref) == author) ++c.correct;
  }

  const double total = static_cast<double>(truth.size());
  PrfTriple r;
  for (const auto& [author, c] : per_author) {
    if (c.truth == 0) continue;
    const double w = c.truth / total;
    const double p = c.assigned > 0 ? c.correct / c.assigned : 0.0;
    const double rec = c.correct / c.truth;
    r.precision += w * p;
    r.recall += w * rec;
    r.f1 += w * f1_score(p, rec);
  }
  return r;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw DataError("auc needs both positive and negative labels");
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("average_precision: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] != 1) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  if (hits == 0) throw DataError("average precision needs at least one positive label");
  return sum / static_cast<double>(hits);
}

}  // namespace wiw
