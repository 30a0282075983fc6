#pragma once

// Real-time assignment: 36 ad-hoc features, two kernel-pooled similarity
// blocks (soft semantic and ego-relational), a trained scorer and the
// NIL-aware assignment rule.
//
// Feature layout (0-based columns of the 118-vector):
//   [0, 36)    ad-hoc, by attribute family
//                0-3   coauthors: tfidf, tfidf x co-occurrences, ratio in target, ratio in candidate
//                4-11  title:     same four, then max/mean Jaccard, max/mean Jaro-Winkler
//                12-19 venue
//                20-27 organization of the disambiguated author
//                28-35 keywords
//   [36, 77)   soft semantic kernel features
//   [77, 118)  ego-relational kernel features

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wiw/corpus.hpp"
#include "wiw/embed.hpp"
#include "wiw/eval.hpp"
#include "wiw/relgraph.hpp"
#include "wiw/textnorm.hpp"

namespace wiw {

inline constexpr int kAdhocWidth = 36;
inline constexpr int kKernelWidth = 41;
inline constexpr int kFeatureWidth = kAdhocWidth + 2 * kKernelWidth;

struct KernelConfig {
  int count = kKernelWidth;
  double sigma = 0.1;
  double exact_sigma = 0.001;  // for the kernel centered at 1.0

  /// Evenly spaced over [-1, 1]: -1.0, -0.95, ..., 1.0 for 41 kernels.
  std::vector<double> mus() const;
  double sigma_at(int j) const { return j == count - 1 ? exact_sigma : sigma; }
  void validate() const;
};

/// Component j = ln(1 + sum_i exp(-(s_i - mu_j)^2 / (2 sigma_j^2))); empty input gives zeros.
Eigen::VectorXd kernel_pool(std::span<const double> sims, const KernelConfig& k);

enum class Family : std::uint8_t { Coauthor = 0, Title = 1, Venue = 2, Org = 3, Keywords = 4 };
inline constexpr std::size_t kFamilyCount = 5;

/// Column offset of a family inside the ad-hoc block.
constexpr int family_offset(Family f) { return f == Family::Coauthor ? 0 : 4 + 8 * (static_cast<int>(f) - 1); }

struct AttributeText {
  TokenSet tokens;
  std::string text;  // tokens in source order joined by single spaces
};

/// Target paper attributes as seen from the author at `author_index`.
struct TargetView {
  std::array<AttributeText, kFamilyCount> family;
};

/// A candidate author's attribute documents, concatenated over their papers.
struct CandidateView {
  std::array<TokenList, kFamilyCount> document;
  std::array<std::map<Token, std::size_t>, kFamilyCount> counts;
  std::array<std::vector<AttributeText>, kFamilyCount> per_paper;
};

TargetView make_target_view(const PaperRecord& paper, std::size_t author_index,
                            const Stoplist& stoplist = default_stoplist());

/// Each paper's own occurrence of `name` is excluded from its coauthors and
/// supplies its organization.
CandidateView make_candidate_view(const std::vector<const PaperRecord*>& papers, const NameKey& name,
                                  const Stoplist& stoplist = default_stoplist());

/// One idf table per family; documents are the candidate documents of a name block.
struct AdhocIdf {
  std::array<IdfTable, kFamilyCount> family;
};

AdhocIdf build_adhoc_idf(const std::vector<const CandidateView*>& candidates);

Eigen::VectorXd adhoc_features(const TargetView& target, const CandidateView& candidate, const AdhocIdf& idf);

Eigen::VectorXd soft_semantic_features(const Vector& target, const std::vector<Vector>& candidate_papers,
                                       const KernelConfig& k);

Eigen::VectorXd ego_features(const EgoGraph& ego, const PaperRecord& target,
                             const std::vector<const PaperRecord*>& profile, const EmbeddingTable& table,
                             const FieldSet& fields, const KernelConfig& k);

/// adhoc | soft | ego. Throws std::invalid_argument on a length mismatch.
Eigen::VectorXd assemble(const Eigen::VectorXd& adhoc, const Eigen::VectorXd& soft, const Eigen::VectorXd& ego);

struct FeatureParts {
  Eigen::VectorXd adhoc, soft, ego;
};
FeatureParts split_features(const Eigen::VectorXd& features);

/// Which feature blocks a scorer consumes.
struct FeatureBlocks {
  bool adhoc = true;
  bool soft = true;
  bool ego = true;

  bool any() const { return adhoc || soft || ego; }
  std::vector<int> columns() const;
  bool operator==(const FeatureBlocks&) const = default;
};

FeatureBlocks parse_feature_blocks(std::string_view spec);
std::string format_feature_blocks(const FeatureBlocks& b);

struct LogisticConfig {
  double l2 = 1e-3;
  int iterations = 800;
  std::uint64_t seed = 1;
};

struct RndConfig {
  int negatives = 3;
  double nil_threshold = 0.5;
  KernelConfig kernel;
  FieldSet fields = FieldSet::paper_default();
  FeatureBlocks blocks;
  LogisticConfig scorer;

  void validate() const;
};

/// Computes 118-dim features for (unassigned paper, candidate author) pairs.
/// All per-author state is built up front, so one instance can be shared
/// read-only across worker threads.
class RndFeaturizer {
 public:
  RndFeaturizer(const PaperStore& store, const NameBlockSet& profiles, const EmbeddingTable& table,
                const RndConfig& config, const Stoplist& stoplist = default_stoplist());

  const NameBlockSet& profiles() const { return *profiles_; }
  std::vector<std::string> candidates(const std::string& block) const;

  /// Block of `ref`, see resolve_block.
  std::optional<std::string> block_of(const PaperRef& ref) const;

  Eigen::VectorXd features(const PaperRef& target, const std::string& block, const std::string& author) const;

 private:
  struct AuthorState {
    std::vector<const PaperRecord*> papers;
    CandidateView view;
    std::vector<Vector> embeddings;
  };
  struct BlockState {
    AdhocIdf idf;
    std::map<std::string, AuthorState> authors;
  };

  const PaperStore* store_;
  const NameBlockSet* profiles_;
  const EmbeddingTable* table_;
  RndConfig config_;
  const Stoplist* stoplist_;
  std::map<std::string, BlockState> blocks_;
};

/// Scores a full 118-dim feature vector; output in (0, 1).
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string_view kind() const = 0;
  virtual double score(const Eigen::VectorXd& features) const = 0;
  virtual Json to_json() const = 0;
};

/// L2-regularized logistic model on standardized features.
class LogisticScorer final : public Scorer {
 public:
  LogisticScorer(std::vector<int> columns, Eigen::VectorXd mean, Eigen::VectorXd scale, Eigen::VectorXd weights,
                 double bias);

  std::string_view kind() const override { return "logistic"; }
  double score(const Eigen::VectorXd& features) const override;
  Json to_json() const override;

  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::vector<int> columns_;
  Eigen::VectorXd mean_, scale_, weights_;
  double bias_;
};

std::unique_ptr<Scorer> scorer_from_json(const Json& j);

/// Mean log-loss + (l2 / 2) |w|^2. params = [w; b]; the bias is not regularized.
double logistic_loss(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2);
Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double l2);

/// Full-batch gradient descent with step 1/L from the loss's Lipschitz bound.
/// Rows of `features` are full 118-vectors; labels are 0/1. Throws DataError
/// when only one class is present.
std::unique_ptr<LogisticScorer> train_scorer(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                             const FeatureBlocks& blocks, const LogisticConfig& config);

struct TrainingPair {
  PaperRef ref;
  std::string block;
  std::string author;
  int label = 0;
};

/// One positive per non-NIL unassigned paper plus up to `negatives` other
/// same-name candidates drawn without replacement; NIL papers contribute
/// negatives only.
std::vector<TrainingPair> build_training_pairs(const RndSplit& split, const PaperStore& store, int negatives,
                                               std::uint64_t seed);

Eigen::MatrixXd feature_matrix(const std::vector<TrainingPair>& pairs, const RndFeaturizer& featurizer,
                               std::size_t workers = 1);

/// One row per pair: 118 feature columns then the label.
void write_feature_matrix(std::ostream& out, const Eigen::MatrixXd& features, const std::vector<TrainingPair>& pairs);

struct ScoredPaper {
  PaperRef ref;
  std::map<std::string, double> scores;  // candidate -> score
};

struct Assignment {
  PaperRef ref;
  std::string author;  // or "NIL"
  double score = 0.0;
};

/// Best candidate if its score exceeds the threshold, else NIL. Ties go to the
/// lexicographically smaller author id; no candidates means NIL with score 0.
Assignment choose_assignment(const ScoredPaper& scored, double nil_threshold);

/// Scores every unassigned paper against all candidates of its block. Papers
/// whose block cannot be resolved get no candidates.
std::vector<ScoredPaper> score_unassigned(const std::vector<PaperRef>& unassigned, const RndFeaturizer& featurizer,
                                          const Scorer& scorer, std::size_t workers = 1);

Assignment assign(const PaperRef& target, const RndFeaturizer& featurizer, const Scorer& scorer, double nil_threshold);

std::vector<Assignment> assign_all(const std::vector<ScoredPaper>& scored, double nil_threshold);

struct Calibration {
  double threshold = 0.5;
  double weighted_f1 = 0.0;
  bool had_nil = false;
};

/// Grid search over 0.05, 0.10, ..., 0.95 maximizing weighted F1 (smaller on
/// ties). Without NIL papers in `truth` the default 0.5 is kept.
Calibration calibrate_nil_threshold(const std::vector<ScoredPaper>& scored, const RndTruth& truth);

/// A trained scorer plus the configuration its features were computed with.
struct RndModel {
  std::unique_ptr<Scorer> scorer;
  RndConfig config;
  Calibration calibration;
};

/// Builds pairs from `train`, trains the scorer, and calibrates the NIL
/// threshold on `valid` (on `train` itself when null). Without NIL papers in
/// the calibration split config.nil_threshold is kept.
RndModel train_rnd(const RndSplit& train, const RndSplit* valid, const PaperStore& store, const EmbeddingTable& table,
                   const RndConfig& config, std::size_t workers = 1);

struct RndEvaluation {
  std::vector<Assignment> assignments;
  PrfTriple metrics;
  std::size_t nil_papers = 0;
  std::size_t nil_detected = 0;  // NIL-truth papers assigned NIL
};

RndEvaluation evaluate_rnd(const RndModel& model, const RndSplit& test, const PaperStore& store,
                           const EmbeddingTable& table, std::size_t workers = 1);

Json rnd_config_to_json(const RndConfig& c);
RndConfig rnd_config_from_json(const Json& j);
Json model_to_json(const RndModel& model);
RndModel model_from_json(const Json& j);

Json assignments_to_json(const std::vector<Assignment>& assignments);
std::map<PaperRef, std::string> assignments_from_json(const Json& j);

}  // namespace wiw
