#pragma once

// Evaluation protocols: pairwise precision/recall/F1 for clustering (SND),
// weighted precision/recall/F1 for assignment (RND), AUC and average
// precision for outlier ranking (IND).

#include <map>
#include <string>
#include <vector>

#include "wiw/corpus.hpp"

namespace wiw {

struct PrfTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean, 0 when precision + recall is 0.
double f1_score(double precision, double recall);

using ClusterList = std::vector<std::vector<std::string>>;

/// Pairwise P/R/F1 over unordered paper pairs. When neither side has any
/// co-clustered pair the result is (1, 1, 1). Throws DataError when the two
/// clusterings cover different paper sets.
PrfTriple pairwise_prf(const ClusterList& pred, const ClusterList& truth);

/// Unweighted mean of per-name F1 scores; throws on an empty list.
double macro_pairwise_f1(const std::vector<double>& per_name_f1);

struct SndScore {
  std::map<std::string, PrfTriple> per_name;
  double macro_f1 = 0.0;
};

/// Pairwise P/R/F1 per name against the author profiles of `truth`, then the
/// macro F1. Every predicted name must be present in `truth`.
SndScore score_snd(const std::map<std::string, ClusterList>& pred, const NameBlockSet& truth);

/// Per-author P/R/F1 (NIL counted as one more author) averaged with weights
/// proportional to each author's share of the papers to assign.
PrfTriple weighted_prf(const std::map<PaperRef, std::string>& assigned, const std::map<PaperRef, std::string>& truth);

/// Rank-based AUC with average ranks for ties. labels: 1 = positive.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Average precision of the positives when sorted by descending score, ties
/// kept in input order.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace wiw
