#include "wiw/snd.hpp"

#include <algorithm>
#include <deque>

#include "wiw/common.hpp"

namespace wiw {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::Semantic: return "semantic";
    case Modality::Relational: return "relational";
    case Modality::Both: return "both";
  }
  return "?";
}

Modality parse_modality(std::string_view s) {
  if (s == "semantic") return Modality::Semantic;
  if (s == "relational") return Modality::Relational;
  if (s == "both") return Modality::Both;
  throw UsageError("unknown modality \"" + std::string(s) + "\"");
}

void SndConfig::validate() const {
  if (!(db_eps > 0.0 && db_eps <= 1.0)) throw UsageError("db_eps must lie in (0, 1]");
  if (db_min < 1) throw UsageError("db_min must be >= 1");
  if (!(post_threshold > 0.0)) throw UsageError("post-match threshold must be positive");
  if (!fields.any()) throw UsageError("field set is empty");
  if (relations.empty()) throw UsageError("relation set is empty");
  walk.validate();
  relational_embed.validate();
}

namespace {

Eigen::MatrixXd clipped_cosines(const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd n = normalized_rows(rows);
  Eigen::MatrixXd s = n * n.transpose();
  return s.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

Eigen::MatrixXd fused_similarity(const Eigen::MatrixXd& semantic, const Eigen::MatrixXd& relational,
                                 Modality modality) {
  switch (modality) {
    case Modality::Semantic: return clipped_cosines(semantic);
    case Modality::Relational: return clipped_cosines(relational);
    case Modality::Both:
      if (semantic.rows() != relational.rows())
        throw std::invalid_argument("fused_similarity: semantic and relational row counts differ");
      return 0.5 * (clipped_cosines(semantic) + clipped_cosines(relational));
  }
  return {};
}

Eigen::MatrixXd combined_distance(const Eigen::MatrixXd& semantic, const Eigen::MatrixXd& relational,
                                  Modality modality) {
  Eigen::MatrixXd d = (1.0 - fused_similarity(semantic, relational, modality).array()).matrix();
  d.diagonal().setZero();
  return d;
}

std::vector<int> dbscan(const Eigen::MatrixXd& dist, double eps, int min_pts) {
  const auto n = static_cast<std::size_t>(dist.rows());
  constexpr int kUnvisited = -2;
  std::vector<int> labels(n, kUnvisited);

  auto region = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j)
      if (dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= eps) out.push_back(j);
    return out;
  };

  int next_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    auto seeds = region(i);
    if (static_cast<int>(seeds.size()) < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int label = next_label++;
    labels[i] = label;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (labels[q] == kNoise) labels[q] = label;
      if (labels[q] != kUnvisited) continue;
      labels[q] = label;
      auto more = region(q);
      if (static_cast<int>(more.size()) >= min_pts) queue.insert(queue.end(), more.begin(), more.end());
    }
  }
  return labels;
}

double post_match_score(const PaperSignals& paper, const std::vector<const PaperSignals*>& cluster,
                        const PostMatchWeights& w) {
  if (cluster.empty()) return 0.0;
  double total = 0.0;
  for (const auto* other : cluster) {
    total += w.coauthor * static_cast<double>(intersection_size(paper.coauthors, other->coauthors)) +
             w.words * static_cast<double>(intersection_size(paper.words, other->words)) +
             w.org * tanimoto(paper.org, other->org) + w.venue * tanimoto(paper.venue, other->venue);
  }
  return total / static_cast<double>(cluster.size());
}

std::optional<int> post_match(const PaperSignals& paper,
                              const std::map<int, std::vector<const PaperSignals*>>& clusters,
                              const PostMatchWeights& weights, double threshold) {
  std::optional<int> best;
  double best_score = threshold;
  for (const auto& [label, members] : clusters) {
    double s = post_match_score(paper, members, weights);
    if (s > best_score) {
      best_score = s;
      best = label;
    }
  }
  return best;
}

std::size_t Clustering::cluster_count() const {
  int top = -1;
  for (const auto& [_, l] : labels) top = std::max(top, l);
  return static_cast<std::size_t>(top + 1);
}

std::vector<std::vector<std::string>> Clustering::clusters() const {
  std::vector<std::vector<std::string>> out(cluster_count());
  for (const auto& [id, l] : labels) out[static_cast<std::size_t>(l)].push_back(id);
  return out;
}

Clustering snd_pipeline(const NameKey& name, const std::vector<std::string>& paper_ids, const PaperStore& store,
                        const EmbeddingTable& semantic, const SndConfig& config, std::size_t workers) {
  config.validate();
  const std::size_t n = paper_ids.size();
  std::vector<const PaperRecord*> papers;
  std::vector<PaperSignals> signals;
  papers.reserve(n);
  signals.reserve(n);
  for (const auto& id : paper_ids) {
    papers.push_back(&store.at(id));
    signals.push_back(make_signals(*papers.back(), name));
  }

  Eigen::MatrixXd sem;
  if (config.modality != Modality::Relational) {
    sem.resize(static_cast<Eigen::Index>(n), semantic.dim());
    for (std::size_t i = 0; i < n; ++i)
      sem.row(static_cast<Eigen::Index>(i)) =
          paper_embedding(*papers[i], signals[i].author_index, config.fields, semantic).transpose();
  }

  Eigen::MatrixXd rel;
  if (config.modality != Modality::Semantic) {
    rel = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), config.relational_embed.dim);
    HeteroGraph graph = build_graph(signals, paper_ids, config.relations);
    WalkCorpus walks = random_walks(graph, config.walk, workers);
    if (!walks.walks.empty()) {
      EmbeddingTable table = relational_embeddings(walks.walks, config.relational_embed);
      for (std::size_t i = 0; i < n; ++i)
        if (!graph.isolated(i)) rel.row(static_cast<Eigen::Index>(i)) = table.lookup(paper_ids[i]).transpose();
    }
  }

  const Eigen::MatrixXd dist = combined_distance(sem, rel, config.modality);
  std::vector<int> labels = dbscan(dist, config.db_eps, config.db_min);

  std::map<int, std::vector<const PaperSignals*>> clusters;
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] != kNoise) clusters[labels[i]].push_back(&signals[i]);

  // Noise is matched against the DBSCAN clusters as found, so the outcome
  // does not depend on the order noise points are visited.
  std::vector<int> final_labels = labels;
  std::vector<std::size_t> singletons;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kNoise) continue;
    if (auto l = post_match(signals[i], clusters, config.post_weights, config.post_threshold)) {
      final_labels[i] = *l;
    } else {
      singletons.push_back(i);
    }
  }
  int next = static_cast<int>(clusters.empty() ? 0 : clusters.rbegin()->first + 1);
  for (auto i : singletons) final_labels[i] = next++;

  // Densify in order of first appearance.
  std::map<int, int> dense;
  Clustering out;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, _] = dense.emplace(final_labels[i], static_cast<int>(dense.size()));
    out.labels[paper_ids[i]] = it->second;
  }
  for (auto i : singletons) out.unmatched.push_back(paper_ids[i]);
  return out;
}

SndResult snd_all(const SndEvalBlock& blocks, const PaperStore& store, const EmbeddingTable& semantic,
                  const SndConfig& config, std::size_t workers) {
  config.validate();
  std::vector<const std::pair<const std::string, std::vector<std::string>>*> names;
  for (const auto& entry : blocks) names.push_back(&entry);
  std::vector<std::vector<std::vector<std::string>>> clusters(names.size());
  parallel_for(names.size(), workers, [&](std::size_t i) {
    const auto& [name, ids] = *names[i];
    clusters[i] = snd_pipeline(name_key_from_joined(name), ids, store, semantic, config).clusters();
  });
  SndResult out;
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace(names[i]->first, std::move(clusters[i]));
  return out;
}

Json clusters_to_json(const SndResult& result) {
  Json j = Json::object();
  for (const auto& [name, clusters] : result) j[name] = clusters;
  return j;
}

SndResult clusters_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("/: expected an object of names");
  SndResult out;
  for (const auto& [name, clusters] : j.items()) {
    if (!clusters.is_array()) throw DataError("/" + name + ": expected a list of clusters");
    auto& dst = out[name];
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (!clusters[c].is_array()) throw DataError("/" + name + "/" + std::to_string(c) + ": expected a list");
      std::vector<std::string> ids;
      for (const auto& id : clusters[c]) {
        if (!id.is_string()) throw DataError("/" + name + "/" + std::to_string(c) + ": expected paper ids");
        ids.push_back(id.get<std::string>());
      }
      dst.push_back(std::move(ids));
    }
  }
  return out;
}

}  // namespace wiw
