#pragma once

// Synthetic name blocks with known ground truth.
//
// Every author owns disjoint topic words, coauthors, an organization and a
// venue. Each paper carries the author's core coauthors and core topic words,
// so at zero noise same-author papers always overlap and cross-author papers
// never do.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wiw/corpus.hpp"

namespace wiw {

struct SynthConfig {
  int names = 4;
  int authors_per_name = 4;
  int papers_per_author = 8;
  int vocab_per_author = 12;
  int coauthor_pool_per_author = 6;
  double cross_noise = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

inline constexpr int kCoreCoauthors = 2;
inline constexpr int kCoreTopicWords = 3;

struct SynthCorpus {
  NameBlockSet blocks;  // doubles as the clustering ground truth
  PaperStore store;
};

/// Deterministic per config. Throws UsageError on an inconsistent config.
SynthCorpus generate(const SynthConfig& config);

/// One conflated profile per name: the name's first author with `injected`
/// papers of other same-name authors mixed in as outliers.
std::vector<IndAuthorRecord> conflated_profiles(const SynthCorpus& corpus, std::size_t injected, std::uint64_t seed);

}  // namespace wiw
