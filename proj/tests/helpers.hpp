#pragma once

// Test-only helpers: hand-rolled generators and small fixtures.

#include <string>
#include <vector>

#include "wiw/common.hpp"
#include "wiw/corpus.hpp"

namespace wiw::test {

inline PaperRecord make_paper(std::string id, std::vector<std::pair<std::string, std::string>> authors,
                              std::string title = "", std::string venue = "", int year = 0,
                              std::vector<std::string> keywords = {}) {
  PaperRecord p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.venue = std::move(venue);
  p.year = year;
  p.keywords = std::move(keywords);
  for (auto& [name, org] : authors) p.authors.push_back({name, org});
  return p;
}

inline std::string random_word(Rng& rng, std::size_t min_len, std::size_t max_len, std::string_view alphabet) {
  std::string s;
  const std::size_t n = min_len + rng.below(max_len - min_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

/// Random partition of `ids` into at most `max_clusters` non-empty clusters.
inline std::vector<std::vector<std::string>> random_partition(Rng& rng, const std::vector<std::string>& ids,
                                                              std::size_t max_clusters) {
  std::vector<std::vector<std::string>> out(max_clusters);
  for (const auto& id : ids) out[rng.below(max_clusters)].push_back(id);
  std::erase_if(out, [](const auto& c) { return c.empty(); });
  return out;
}

inline std::vector<std::string> numbered_ids(std::size_t n, std::string_view prefix = "p") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::string(prefix) + std::to_string(i));
  return ids;
}

}  // namespace wiw::test
