#include "wiw/synth.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "wiw/common.hpp"

namespace wiw {

void SynthConfig::validate() const {
  if (names < 1) throw UsageError("synth: names must be >= 1");
  if (authors_per_name < 2) throw UsageError("synth: authors_per_name must be >= 2");
  if (papers_per_author < 1) throw UsageError("synth: papers_per_author must be >= 1");
  if (vocab_per_author < kCoreTopicWords + 2)
    throw UsageError("synth: vocab_per_author must be >= " + std::to_string(kCoreTopicWords + 2));
  if (coauthor_pool_per_author < kCoreCoauthors)
    throw UsageError("synth: coauthor_pool_per_author must be >= " + std::to_string(kCoreCoauthors));
  if (!(cross_noise >= 0.0 && cross_noise <= 1.0)) throw UsageError("synth: cross_noise must lie in [0, 1]");
}

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kIdChars = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

class Namer {
 public:
  explicit Namer(Rng& rng) : rng_(rng) {}

  /// A fresh lowercase word never handed out before.
  std::string word(int syllables) {
    for (;;) {
      std::string w;
      for (int s = 0; s < syllables; ++s) {
        w += kConsonants[rng_.below(kConsonants.size())];
        w += kVowels[rng_.below(kVowels.size())];
      }
      if (words_.insert(w).second) return w;
    }
  }

  /// A two-part person name whose variants collide with no earlier name.
  std::string person(int first_syllables, int last_syllables) {
    for (;;) {
      std::string first = word(first_syllables), last = word(last_syllables);
      NameKey key{{first, last}};
      auto variants = name_variants(key);
      if (std::any_of(variants.begin(), variants.end(), [&](const NameKey& v) { return used_.contains(v); }))
        continue;
      used_.insert(variants.begin(), variants.end());
      first[0] = static_cast<char>(first[0] - 'a' + 'A');
      last[0] = static_cast<char>(last[0] - 'a' + 'A');
      return first + " " + last;
    }
  }

  std::string id(std::size_t length) {
    for (;;) {
      std::string s;
      for (std::size_t i = 0; i < length; ++i) s += kIdChars[rng_.below(kIdChars.size())];
      if (ids_.insert(s).second) return s;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> words_;
  std::set<NameKey> used_;
  std::set<std::string> ids_;
};

struct AuthorSpec {
  std::string id;
  std::vector<std::string> vocab;      // first kCoreTopicWords are in every paper
  std::vector<std::string> coauthors;  // first kCoreCoauthors are on every paper
  std::string org;
  std::string venue;
};

std::string capitalized(std::string w) {
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

template <typename T>
std::vector<T> sample(std::vector<T> pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(k);
  return pool;
}

}  // namespace

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Namer namer(rng);
  SynthCorpus out;

  for (int b = 0; b < config.names; ++b) {
    const std::string name = namer.person(2, 2);
    const std::string block = normalize_name(name).joined();

    std::vector<AuthorSpec> authors(static_cast<std::size_t>(config.authors_per_name));
    for (auto& a : authors) {
      a.id = namer.id(8);
      for (int i = 0; i < config.vocab_per_author; ++i) a.vocab.push_back(namer.word(3));
      for (int i = 0; i < config.coauthor_pool_per_author; ++i) a.coauthors.push_back(namer.person(2, 3));
      a.org = capitalized(namer.word(3)) + " " + capitalized(namer.word(4));
      a.venue = capitalized(namer.word(3)) + " " + capitalized(namer.word(3));
    }

    auto& profiles = out.blocks[block];
    for (std::size_t ai = 0; ai < authors.size(); ++ai) {
      const auto& a = authors[ai];
      auto& ids = profiles[a.id];
      const std::vector<std::string> extra_vocab(a.vocab.begin() + kCoreTopicWords, a.vocab.end());
      const std::vector<std::string> extra_coauthors(a.coauthors.begin() + kCoreCoauthors, a.coauthors.end());

      for (int p = 0; p < config.papers_per_author; ++p) {
        PaperRecord paper;
        paper.id = namer.id(8);

        std::vector<std::string> title(a.vocab.begin(), a.vocab.begin() + kCoreTopicWords);
        for (auto& w : sample(extra_vocab, 2, rng)) title.push_back(std::move(w));
        std::vector<std::string> names(a.coauthors.begin(), a.coauthors.begin() + kCoreCoauthors);
        for (auto& c : sample(extra_coauthors, rng.below(2) + 1, rng)) names.push_back(std::move(c));

        // Borrow from another author of the same name.
        auto other = [&]() -> const AuthorSpec& {
          std::size_t o = rng.below(authors.size() - 1);
          return authors[o >= ai ? o + 1 : o];
        };
        if (rng.uniform() < config.cross_noise) {
          const auto& o = other();
          title.push_back(o.vocab[rng.below(o.vocab.size())]);
        }
        if (rng.uniform() < config.cross_noise) {
          const auto& o = other();
          names.push_back(o.coauthors[rng.below(o.coauthors.size())]);
        }

        rng.shuffle(title);
        for (std::size_t i = 0; i < title.size(); ++i) paper.title += (i ? " " : "") + title[i];
        paper.title[0] = static_cast<char>(paper.title[0] - 'a' + 'A');
        paper.keywords = sample(a.vocab, 2, rng);
        for (const auto& w : sample(a.vocab, 6, rng)) paper.abstract += (paper.abstract.empty() ? "" : " ") + w;
        paper.venue = a.venue;
        paper.year = 2000 + static_cast<int>(rng.below(20));

        rng.shuffle(names);
        const std::size_t self = rng.below(names.size() + 1);
        for (std::size_t i = 0; i <= names.size(); ++i) {
          if (i == self) paper.authors.push_back({name, a.org});
          if (i < names.size()) paper.authors.push_back({names[i], "Dept. of " + capitalized(namer.word(3))});
        }

        ids.push_back(paper.id);
        out.store.insert(std::move(paper));
      }
    }
  }
  return out;
}

std::vector<IndAuthorRecord> conflated_profiles(const SynthCorpus& corpus, std::size_t injected, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<IndAuthorRecord> out;
  for (const auto& [block, authors] : corpus.blocks) {
    auto host = authors.begin();
    std::vector<std::string> pool;
    for (auto it = std::next(host); it != authors.end(); ++it) pool.insert(pool.end(), it->second.begin(), it->second.end());
    if (pool.size() < injected) throw UsageError("conflated_profiles: too few papers to inject from " + block);

    IndAuthorRecord r;
    r.author_id = host->first;
    const auto& first = corpus.store.at(host->second.front());
    r.name = first.authors[*find_author_index(first, name_key_from_joined(block))].name;
    r.normal = host->second;
    r.outliers = sample(pool, injected, rng);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace wiw
