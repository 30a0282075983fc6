#include "wiw/embed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "wiw/common.hpp"

namespace wiw {

void EmbedConfig::validate() const {
  if (dim < 1) throw UsageError("embedding dim must be >= 1");
  if (window < 1) throw UsageError("window must be >= 1");
  if (negative < 0) throw UsageError("negative must be >= 0");
  if (min_count < 1) throw UsageError("min_count must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, RowMatrixF vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(tokens_.size()) != vectors_.rows())
    throw DataError("embedding table: token count does not match vector rows");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (!index_.emplace(tokens_[i], i).second) throw DataError("embedding table: duplicate token " + tokens_[i]);
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vector EmbeddingTable::lookup(std::string_view token) const {
  if (auto i = index_of(token)) return row(*i).transpose().cast<double>();
  return Vector::Zero(dim());
}

namespace {

// Linear congruential stream as in the reference word2vec; cheap and fully
// specified, so runs are reproducible everywhere.
class TrainRng {
 public:
  explicit TrainRng(std::uint64_t seed) : state_(splitmix64(seed)) {}
  std::uint64_t next() {
    state_ = state_ * 25214903917ULL + 11ULL;
    return state_ >> 16;
  }
  double uniform() { return static_cast<double>(next() & 0xFFFFFFFFULL) / 4294967296.0; }

 private:
  std::uint64_t state_;
};

}  // namespace

EmbeddingTable train_skipgram(const std::vector<TokenList>& sequences, const EmbedConfig& config) {
  config.validate();

  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& seq : sequences)
    for (const auto& tok : seq) ++counts[tok];

  std::vector<std::pair<std::string, std::uint64_t>> vocab;
  for (auto& [tok, c] : counts)
    if (c >= static_cast<std::uint64_t>(config.min_count)) vocab.emplace_back(tok, c);
  if (vocab.empty()) throw DataError("skip-gram: empty vocabulary after min_count filtering");
  std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  std::unordered_map<std::string, std::int32_t> index;
  std::vector<std::string> tokens;
  tokens.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    index.emplace(vocab[i].first, static_cast<std::int32_t>(i));
    tokens.push_back(vocab[i].first);
  }

  std::vector<std::vector<std::int32_t>> corpus;
  std::uint64_t total_words = 0;
  corpus.reserve(sequences.size());
  for (const auto& seq : sequences) {
    std::vector<std::int32_t> ids;
    for (const auto& tok : seq)
      if (auto it = index.find(tok); it != index.end()) ids.push_back(it->second);
    total_words += ids.size();
    if (ids.size() > 1) corpus.push_back(std::move(ids));
  }

  // Noise distribution: unigram counts raised to 0.75.
  std::vector<double> noise_cdf(vocab.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    noise_cdf[i] = acc;
  }
  for (auto& v : noise_cdf) v /= acc;

  const auto n = static_cast<Eigen::Index>(vocab.size());
  const Eigen::Index dim = config.dim;
  TrainRng rng(config.seed);
  RowMatrixF input(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < dim; ++k)
      input(i, k) = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));
  RowMatrixF output = RowMatrixF::Zero(n, dim);
  Eigen::RowVectorXf grad(dim);

  auto draw_noise = [&]() -> std::int32_t {
    double u = rng.uniform();
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
    if (it == noise_cdf.end()) --it;
    return static_cast<std::int32_t>(it - noise_cdf.begin());
  };

  const double total_steps = static_cast<double>(total_words) * config.epochs + 1.0;
  double processed = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& seq : corpus) {
      const auto len = static_cast<std::ptrdiff_t>(seq.size());
      for (std::ptrdiff_t pos = 0; pos < len; ++pos, processed += 1.0) {
        const float alpha =
            static_cast<float>(config.learning_rate * std::max(1.0 - processed / total_steps, 1e-4));
        const auto reduced = static_cast<std::ptrdiff_t>(rng.next() % static_cast<std::uint64_t>(config.window));
        const std::ptrdiff_t span = config.window - reduced;
        const std::int32_t center = seq[static_cast<std::size_t>(pos)];
        for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, pos - span); c <= std::min(len - 1, pos + span); ++c) {
          if (c == pos) continue;
          const std::int32_t context = seq[static_cast<std::size_t>(c)];
          auto in = input.row(context);
          grad.setZero();
          for (int d = 0; d <= config.negative; ++d) {
            std::int32_t target = center;
            float label = 1.0f;
            if (d > 0) {
              target = draw_noise();
              if (target == center) continue;
              label = 0.0f;
            }
            auto out = output.row(target);
            const float f = in.dot(out);
            float g;
            if (f > 6.0f) {
              g = (label - 1.0f) * alpha;
            } else if (f < -6.0f) {
              g = label * alpha;
            } else {
              g = (label - 1.0f / (1.0f + std::exp(-f))) * alpha;
            }
            grad.noalias() += g * out;
            out.noalias() += g * in;
          }
          in += grad;
        }
      }
    }
  }
  return EmbeddingTable(std::move(tokens), std::move(input));
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  const auto& m = table.vectors();
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.tokens()[i];
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), m(static_cast<Eigen::Index>(i), k));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_embeddings(out, table);
}

EmbeddingTable read_embeddings(std::istream& in) {
  std::size_t rows = 0;
  int dim = 0;
  std::string header;
  if (!std::getline(in, header)) throw DataError("embedding file: missing header");
  {
    std::istringstream hs(header);
    if (!(hs >> rows >> dim) || dim < 1) throw DataError("embedding file: malformed header \"" + header + "\"");
  }
  std::vector<std::string> tokens;
  tokens.reserve(rows);
  RowMatrixF m(static_cast<Eigen::Index>(rows), dim);
  std::string line;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw DataError("embedding file: expected " + std::to_string(rows) + " rows");
    std::string_view rest(line);
    auto sp = rest.find(' ');
    if (sp == std::string_view::npos) throw DataError("embedding file: malformed row " + std::to_string(i + 1));
    tokens.emplace_back(rest.substr(0, sp));
    rest.remove_prefix(sp + 1);
    for (int k = 0; k < dim; ++k) {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      float v = 0.0f;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
      if (ec != std::errc{}) throw DataError("embedding file: bad value on row " + std::to_string(i + 1));
      m(static_cast<Eigen::Index>(i), k) = v;
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    }
  }
  return EmbeddingTable(std::move(tokens), std::move(m));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_embeddings(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

FieldSet parse_field_set(std::string_view spec) {
  FieldSet f;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    auto name = spec.substr(start, end - start);
    if (name == "title") f.title = true;
    else if (name == "abstract") f.abstract = true;
    else if (name == "keywords") f.keywords = true;
    else if (name == "venue") f.venue = true;
    else if (name == "year") f.year = true;
    else if (name == "coauthors") f.coauthors = true;
    else if (name == "org") f.org = true;
    else if (!name.empty()) throw UsageError("unknown field \"" + std::string(name) + "\"");
    start = end + 1;
  }
  if (!f.any()) throw UsageError("field set must select at least one field");
  return f;
}

std::string format_field_set(const FieldSet& f) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(f.title, "title");
  add(f.abstract, "abstract");
  add(f.keywords, "keywords");
  add(f.venue, "venue");
  add(f.year, "year");
  add(f.coauthors, "coauthors");
  add(f.org, "org");
  return out;
}

TokenList coauthor_tokens(const PaperRecord& paper, std::optional<std::size_t> target_index) {
  TokenList out;
  for (std::size_t i = 0; i < paper.authors.size(); ++i) {
    if (target_index && i == *target_index) continue;
    try {
      out.push_back(normalize_name(paper.authors[i].name).joined());
    } catch (const DataError&) {
    }
  }
  return out;
}

TokenList paper_tokens(const PaperRecord& paper, std::optional<std::size_t> target_index, const FieldSet& fields,
                       const Stoplist& stoplist) {
  TokenList out;
  auto append = [&out](TokenList more) { out.insert(out.end(), more.begin(), more.end()); };
  if (fields.title) append(tokenize(paper.title, stoplist));
  if (fields.keywords)
    for (const auto& kw : paper.keywords) append(tokenize(kw, stoplist));
  if (fields.abstract) append(tokenize(paper.abstract, stoplist));
  if (fields.venue) append(tokenize(paper.venue, stoplist));
  if (fields.org && target_index && *target_index < paper.authors.size())
    append(tokenize(paper.authors[*target_index].org, stoplist));
  if (fields.coauthors) append(coauthor_tokens(paper, target_index));
  if (fields.year && paper.year > 0) out.push_back(std::to_string(paper.year));
  return out;
}

std::vector<TokenList> semantic_corpus(const PaperStore& store, const Stoplist& stoplist) {
  std::vector<TokenList> out;
  out.reserve(store.size());
  for (const auto& [id, p] : store) {
    TokenList seq = tokenize(p.title, stoplist);
    auto append = [&seq](TokenList more) { seq.insert(seq.end(), more.begin(), more.end()); };
    append(coauthor_tokens(p, std::nullopt));
    for (const auto& kw : p.keywords) append(tokenize(kw, stoplist));
    append(tokenize(p.abstract, stoplist));
    append(tokenize(p.venue, stoplist));
    std::vector<std::string> seen;
    for (const auto& a : p.authors) {
      if (a.org.empty() || std::find(seen.begin(), seen.end(), a.org) != seen.end()) continue;
      seen.push_back(a.org);
      append(tokenize(a.org, stoplist));
    }
    if (p.year > 0) seq.push_back(std::to_string(p.year));
    if (!seq.empty()) out.push_back(std::move(seq));
  }
  return out;
}

Vector mean_embedding(const TokenList& tokens, const EmbeddingTable& table) {
  Vector sum = Vector::Zero(table.dim());
  std::size_t hits = 0;
  for (const auto& tok : tokens) {
    if (auto i = table.index_of(tok)) {
      sum += table.row(*i).transpose().cast<double>();
      ++hits;
    }
  }
  if (hits > 0) sum /= static_cast<double>(hits);
  return sum;
}

Vector paper_embedding(const PaperRecord& paper, std::size_t target_index, const FieldSet& fields,
                       const EmbeddingTable& table, const Stoplist& stoplist) {
  if (target_index >= paper.authors.size())
    throw DataError("paper " + paper.id + ": author index " + std::to_string(target_index) + " out of range");
  return mean_embedding(paper_tokens(paper, target_index, fields, stoplist), table);
}

}  // namespace wiw
