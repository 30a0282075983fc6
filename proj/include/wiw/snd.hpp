#pragma once

// From-scratch disambiguation: fuse semantic and relational similarity,
// cluster with DBSCAN, then fold noise points back in by rule.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wiw/corpus.hpp"
#include "wiw/embed.hpp"
#include "wiw/relgraph.hpp"

namespace wiw {

enum class Modality { Semantic, Relational, Both };

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view s);

struct PostMatchWeights {
  double coauthor = 1.5;
  double words = 0.33;
  double org = 1.0;
  double venue = 1.0;
};

struct SndConfig {
  double db_eps = 0.2;
  int db_min = 4;
  PostMatchWeights post_weights;
  double post_threshold = 1.5;
  Modality modality = Modality::Both;
  FieldSet fields = FieldSet::paper_default();
  RelationSet relations = RelationSet::all();
  WalkConfig walk;
  EmbedConfig relational_embed;

  void validate() const;
};

/// Fused similarity in [0, 1]: cosines clipped below at 0, averaged across
/// modalities when both are used. Zero rows (e.g. graph-isolated papers)
/// have similarity 0 to everything. Rows of `semantic` / `relational` are papers.
Eigen::MatrixXd fused_similarity(const Eigen::MatrixXd& semantic, const Eigen::MatrixXd& relational,
                                 Modality modality);

/// 1 - fused_similarity, with an exact zero diagonal.
Eigen::MatrixXd combined_distance(const Eigen::MatrixXd& semantic, const Eigen::MatrixXd& relational,
                                  Modality modality);

inline constexpr int kNoise = -1;

/// DBSCAN over a precomputed distance matrix. A point is core when at least
/// min_pts points (itself included) lie within eps. Points are visited and
/// expanded in ascending index order; noise is labeled kNoise.
std::vector<int> dbscan(const Eigen::MatrixXd& dist, double eps, int min_pts);

/// Cluster-averaged overlap score of one paper against a cluster's members.
double post_match_score(const PaperSignals& paper, const std::vector<const PaperSignals*>& cluster,
                        const PostMatchWeights& weights);

/// Best cluster whose score exceeds `threshold` (smaller label on ties), if any.
std::optional<int> post_match(const PaperSignals& paper,
                              const std::map<int, std::vector<const PaperSignals*>>& clusters,
                              const PostMatchWeights& weights, double threshold);

struct Clustering {
  std::map<std::string, int> labels;  // dense 0..k-1
  std::vector<std::string> unmatched;  // noise points left as singletons

  std::size_t cluster_count() const;
  std::vector<std::vector<std::string>> clusters() const;
};

/// Runs graph -> walks -> relational embeddings -> fusion -> DBSCAN -> post-match
/// for one name block. With Modality::Semantic no graph is built.
Clustering snd_pipeline(const NameKey& name, const std::vector<std::string>& paper_ids, const PaperStore& store,
                        const EmbeddingTable& semantic, const SndConfig& config, std::size_t workers = 1);

/// name -> list of clusters
using SndResult = std::map<std::string, std::vector<std::vector<std::string>>>;

/// snd_pipeline over every name; names run in parallel on `workers` threads.
SndResult snd_all(const SndEvalBlock& blocks, const PaperStore& store, const EmbeddingTable& semantic,
                  const SndConfig& config, std::size_t workers = 1);

Json clusters_to_json(const SndResult& result);
SndResult clusters_from_json(const Json& j);

}  // namespace wiw
