#pragma once

// Incorrect-assignment detection baseline: a paper's outlier score is its
// similarity deficit against the rest of the profile.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wiw/corpus.hpp"
#include "wiw/embed.hpp"
#include "wiw/relgraph.hpp"

namespace wiw {

struct IndScoreReport {
  std::string author_id;
  std::vector<std::pair<std::string, double>> scores;  // normal then outlier papers, in record order
};

struct IndConfig {
  FieldSet fields = FieldSet::paper_default();
  bool relational = false;
  RelationSet relations = RelationSet::all();
  WalkConfig walk;
  EmbedConfig relational_embed;

  void validate() const;
};

/// score = 1 - mean fused similarity to every other paper of the profile.
/// `relational` is a table over paper ids; without it only the semantic
/// modality is used. Throws DataError for fewer than 2 papers.
IndScoreReport ind_scores(const IndAuthorRecord& record, const PaperStore& store, const EmbeddingTable& semantic,
                          const EmbeddingTable* relational = nullptr, const FieldSet& fields = FieldSet::paper_default());

/// Relational table from walks over the profile's own paper graph; nullopt
/// when every paper is isolated.
std::optional<EmbeddingTable> ind_relational_table(const IndAuthorRecord& record, const PaperStore& store,
                                                   const IndConfig& config);

struct IndMetrics {
  std::map<std::string, std::pair<double, double>> per_author;  // author -> (AUC, AP)
  std::vector<std::string> skipped;  // authors without both classes
  double mean_auc = 0.0;
  double mean_ap = 0.0;
};

/// Outliers are the positive class. Authors lacking outliers or normal papers
/// are skipped; throws DataError if nothing is left.
IndMetrics evaluate_ind(const std::vector<IndScoreReport>& reports, const std::vector<IndAuthorRecord>& truth);

/// author -> [{paper_id, score}]
Json ind_reports_to_json(const std::vector<IndScoreReport>& reports);
std::vector<IndScoreReport> ind_reports_from_json(const Json& j);

}  // namespace wiw
