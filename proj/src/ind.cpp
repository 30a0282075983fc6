#include "wiw/ind.hpp"

#include <set>

#include "wiw/common.hpp"
#include "wiw/eval.hpp"
#include "wiw/snd.hpp"

namespace wiw {

void IndConfig::validate() const {
  if (!fields.any()) throw UsageError("field set is empty");
  if (relational) {
    if (relations.empty()) throw UsageError("relation set is empty");
    walk.validate();
    relational_embed.validate();
  }
}

namespace {

std::vector<std::string> profile_ids(const IndAuthorRecord& record) {
  std::vector<std::string> ids = record.normal;
  ids.insert(ids.end(), record.outliers.begin(), record.outliers.end());
  return ids;
}

}  // namespace

IndScoreReport ind_scores(const IndAuthorRecord& record, const PaperStore& store, const EmbeddingTable& semantic,
                          const EmbeddingTable* relational, const FieldSet& fields) {
  const auto ids = profile_ids(record);
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n < 2) throw DataError("author " + record.author_id + ": outlier scoring needs at least 2 papers");
  const NameKey name = normalize_name(record.name);

  Eigen::MatrixXd sem(n, semantic.dim());
  Eigen::MatrixXd rel;
  if (relational) rel = Eigen::MatrixXd::Zero(n, relational->dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& id = ids[static_cast<std::size_t>(i)];
    const auto* paper = store.find(id);
    if (!paper) throw DataError("author " + record.author_id + ": paper " + id + " missing from the paper store");
    sem.row(i) = mean_embedding(paper_tokens(*paper, find_author_index(*paper, name), fields), semantic).transpose();
    if (relational) rel.row(i) = relational->lookup(id).transpose();
  }

  const Eigen::MatrixXd s = fused_similarity(sem, rel, relational ? Modality::Both : Modality::Semantic);
  IndScoreReport report{record.author_id, {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double others = s.row(i).sum() - s(i, i);
    report.scores.emplace_back(ids[static_cast<std::size_t>(i)], 1.0 - others / static_cast<double>(n - 1));
  }
  return report;
}

std::optional<EmbeddingTable> ind_relational_table(const IndAuthorRecord& record, const PaperStore& store,
                                                   const IndConfig& config) {
  const NameKey name = normalize_name(record.name);
  const auto ids = profile_ids(record);
  std::vector<PaperSignals> signals;
  for (const auto& id : ids) {
    const auto& paper = store.at(id);
    auto idx = find_author_index(paper, name);
    if (idx) {
      signals.push_back(make_signals(paper, *idx));
    } else {
      // Still a node; it only links through venue.
      PaperSignals s;
      s.venue = to_set(tokenize(paper.venue));
      signals.push_back(std::move(s));
    }
  }
  HeteroGraph graph = build_graph(signals, ids, config.relations);
  WalkCorpus walks = random_walks(graph, config.walk);
  if (walks.walks.empty()) return std::nullopt;
  return relational_embeddings(walks.walks, config.relational_embed);
}

IndMetrics evaluate_ind(const std::vector<IndScoreReport>& reports, const std::vector<IndAuthorRecord>& truth) {
  std::map<std::string, const IndScoreReport*> by_author;
  for (const auto& r : reports) by_author[r.author_id] = &r;

  IndMetrics m;
  for (const auto& rec : truth) {
    auto it = by_author.find(rec.author_id);
    if (it == by_author.end()) throw DataError("no outlier scores for author " + rec.author_id);
    if (rec.normal.empty() || rec.outliers.empty()) {
      m.skipped.push_back(rec.author_id);
      continue;
    }
    const std::set<std::string> outliers(rec.outliers.begin(), rec.outliers.end());
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& [id, s] : it->second->scores) {
      scores.push_back(s);
      labels.push_back(outliers.contains(id) ? 1 : 0);
    }
    m.per_author[rec.author_id] = {auc(scores, labels), average_precision(scores, labels)};
  }
  if (m.per_author.empty()) throw DataError("no author has both normal and outlier papers");
  for (const auto& [_, v] : m.per_author) {
    m.mean_auc += v.first;
    m.mean_ap += v.second;
  }
  m.mean_auc /= static_cast<double>(m.per_author.size());
  m.mean_ap /= static_cast<double>(m.per_author.size());
  return m;
}

Json ind_reports_to_json(const std::vector<IndScoreReport>& reports) {
  Json j = Json::object();
  for (const auto& r : reports) {
    Json rows = Json::array();
    for (const auto& [id, s] : r.scores) rows.push_back({{"paper_id", id}, {"score", s}});
    j[r.author_id] = std::move(rows);
  }
  return j;
}

std::vector<IndScoreReport> ind_reports_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("/: expected an object of authors");
  std::vector<IndScoreReport> out;
  for (const auto& [author, rows] : j.items()) {
    if (!rows.is_array()) throw DataError("/" + author + ": expected a list");
    IndScoreReport r{author, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      const std::string at = "/" + author + "/" + std::to_string(i);
      if (!row.is_object() || !row.contains("paper_id") || !row["paper_id"].is_string())
        throw DataError(at + "/paper_id: expected a string");
      if (!row.contains("score") || !row["score"].is_number()) throw DataError(at + "/score: expected a number");
      r.scores.emplace_back(row["paper_id"].get<std::string>(), row["score"].get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace wiw
