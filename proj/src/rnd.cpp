#include "wiw/rnd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "wiw/common.hpp"
#include "wiw/eval.hpp"

namespace wiw {

std::vector<double> KernelConfig::mus() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = 1.0;
    return out;
  }
  for (int j = 0; j < count; ++j) out[static_cast<std::size_t>(j)] = -1.0 + 2.0 * j / (count - 1);
  return out;
}

void KernelConfig::validate() const {
  if (count < 1) throw UsageError("kernel count must be >= 1");
  if (!(sigma > 0.0) || !(exact_sigma > 0.0)) throw UsageError("kernel sigmas must be positive");
}

Eigen::VectorXd kernel_pool(std::span<const double> sims, const KernelConfig& k) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k.count);
  if (sims.empty()) return out;
  const auto mus = k.mus();
  for (int j = 0; j < k.count; ++j) {
    const double mu = mus[static_cast<std::size_t>(j)];
    const double s2 = 2.0 * k.sigma_at(j) * k.sigma_at(j);
    double sum = 0.0;
    for (double s : sims) sum += std::exp(-(s - mu) * (s - mu) / s2);
    out(j) = std::log1p(sum);
  }
  return out;
}

namespace {

std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

AttributeText make_text(const TokenList& tokens) { return {to_set(tokens), join_tokens(tokens)}; }

std::array<TokenList, kFamilyCount> family_tokens(const PaperRecord& p, std::optional<std::size_t> idx,
                                                  const Stoplist& stoplist) {
  std::array<TokenList, kFamilyCount> out;
  out[0] = coauthor_tokens(p, idx);
  out[1] = tokenize(p.title, stoplist);
  out[2] = tokenize(p.venue, stoplist);
  if (idx) out[3] = tokenize(p.authors[*idx].org, stoplist);
  for (const auto& kw : p.keywords)
    for (auto& t : tokenize(kw, stoplist)) out[4].push_back(std::move(t));
  return out;
}

}  // namespace

TargetView make_target_view(const PaperRecord& paper, std::size_t author_index, const Stoplist& stoplist) {
  if (author_index >= paper.authors.size())
    throw DataError("paper " + paper.id + ": author index " + std::to_string(author_index) + " out of range");
  auto tokens = family_tokens(paper, author_index, stoplist);
  TargetView v;
  for (std::size_t f = 0; f < kFamilyCount; ++f) v.family[f] = make_text(tokens[f]);
  return v;
}

CandidateView make_candidate_view(const std::vector<const PaperRecord*>& papers, const NameKey& name,
                                  const Stoplist& stoplist) {
  CandidateView v;
  for (const auto* p : papers) {
    auto tokens = family_tokens(*p, find_author_index(*p, name), stoplist);
    for (std::size_t f = 0; f < kFamilyCount; ++f) {
      for (const auto& t : tokens[f]) ++v.counts[f][t];
      v.per_paper[f].push_back(make_text(tokens[f]));
      v.document[f].insert(v.document[f].end(), tokens[f].begin(), tokens[f].end());
    }
  }
  return v;
}

AdhocIdf build_adhoc_idf(const std::vector<const CandidateView*>& candidates) {
  AdhocIdf out;
  for (std::size_t f = 0; f < kFamilyCount; ++f) {
    std::vector<TokenList> docs;
    docs.reserve(candidates.size());
    for (const auto* c : candidates) docs.push_back(c->document[f]);
    out.family[f] = build_idf(docs);
  }
  return out;
}

Eigen::VectorXd adhoc_features(const TargetView& target, const CandidateView& candidate, const AdhocIdf& idf) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kAdhocWidth);
  for (std::size_t f = 0; f < kFamilyCount; ++f) {
    const auto& t = target.family[f];
    if (t.tokens.empty()) continue;
    const int o = family_offset(static_cast<Family>(f));
    const auto& counts = candidate.counts[f];

    double score = 0.0, cooccurrence = 0.0, common = 0.0;
    for (const auto& tok : t.tokens) {
      auto it = counts.find(tok);
      if (it == counts.end()) continue;
      common += 1.0;
      cooccurrence += static_cast<double>(it->second);
      score += static_cast<double>(it->second) * idf.family[f].idf(tok);
    }
    x(o) = score;
    x(o + 1) = score * cooccurrence;
    x(o + 2) = common / static_cast<double>(t.tokens.size());
    x(o + 3) = counts.empty() ? 0.0 : common / static_cast<double>(counts.size());

    if (f == static_cast<std::size_t>(Family::Coauthor) || candidate.per_paper[f].empty()) continue;
    double jmax = 0.0, jsum = 0.0, wmax = 0.0, wsum = 0.0;
    for (const auto& p : candidate.per_paper[f]) {
      const double j = jaccard(t.tokens, p.tokens);
      const double w = jaro_winkler(t.text, p.text);
      jmax = std::max(jmax, j);
      wmax = std::max(wmax, w);
      jsum += j;
      wsum += w;
    }
    const double n = static_cast<double>(candidate.per_paper[f].size());
    x(o + 4) = jmax;
    x(o + 5) = jsum / n;
    x(o + 6) = wmax;
    x(o + 7) = wsum / n;
  }
  return x;
}

Eigen::VectorXd soft_semantic_features(const Vector& target, const std::vector<Vector>& candidate_papers,
                                       const KernelConfig& k) {
  std::vector<double> sims;
  sims.reserve(candidate_papers.size());
  for (const auto& c : candidate_papers) sims.push_back(cosine(target, c));
  return kernel_pool(sims, k);
}

Eigen::VectorXd ego_features(const EgoGraph& ego, const PaperRecord& target,
                             const std::vector<const PaperRecord*>& profile, const EmbeddingTable& table,
                             const FieldSet& fields, const KernelConfig& k) {
  return kernel_pool(ego_relational_scores(ego, target, profile, table, fields), k);
}

Eigen::VectorXd assemble(const Eigen::VectorXd& adhoc, const Eigen::VectorXd& soft, const Eigen::VectorXd& ego) {
  if (adhoc.size() != kAdhocWidth || soft.size() != kKernelWidth || ego.size() != kKernelWidth)
    throw std::invalid_argument("assemble: expected blocks of 36, 41 and 41 values");
  Eigen::VectorXd x(kFeatureWidth);
  x << adhoc, soft, ego;
  return x;
}

FeatureParts split_features(const Eigen::VectorXd& x) {
  if (x.size() != kFeatureWidth) throw std::invalid_argument("split_features: expected 118 values");
  return {x.head(kAdhocWidth), x.segment(kAdhocWidth, kKernelWidth), x.tail(kKernelWidth)};
}

std::vector<int> FeatureBlocks::columns() const {
  std::vector<int> out;
  auto range = [&](int from, int to) {
    for (int c = from; c < to; ++c) out.push_back(c);
  };
  if (adhoc) range(0, kAdhocWidth);
  if (soft) range(kAdhocWidth, kAdhocWidth + kKernelWidth);
  if (ego) range(kAdhocWidth + kKernelWidth, kFeatureWidth);
  return out;
}

FeatureBlocks parse_feature_blocks(std::string_view spec) {
  FeatureBlocks b{false, false, false};
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto comma = spec.find(',', pos);
    auto item = spec.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (item == "adhoc") b.adhoc = true;
    else if (item == "soft") b.soft = true;
    else if (item == "ego") b.ego = true;
    else throw UsageError("unknown feature block \"" + std::string(item) + "\" (expected adhoc, soft, ego)");
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return b;
}

std::string format_feature_blocks(const FeatureBlocks& b) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(b.adhoc, "adhoc");
  add(b.soft, "soft");
  add(b.ego, "ego");
  return out;
}

void RndConfig::validate() const {
  if (negatives < 1) throw UsageError("negatives must be >= 1");
  if (!(nil_threshold > 0.0 && nil_threshold < 1.0)) throw UsageError("nil_threshold must lie in (0, 1)");
  kernel.validate();
  if (kernel.count != kKernelWidth) throw UsageError("kernel count must be 41 for the 118-dim feature layout");
  if (!fields.any()) throw UsageError("field set is empty");
  if (!blocks.any()) throw UsageError("feature block set is empty");
  if (!(scorer.l2 >= 0.0)) throw UsageError("l2 must be >= 0");
  if (scorer.iterations < 1) throw UsageError("iterations must be >= 1");
}

RndFeaturizer::RndFeaturizer(const PaperStore& store, const NameBlockSet& profiles, const EmbeddingTable& table,
                             const RndConfig& config, const Stoplist& stoplist)
    : store_(&store), profiles_(&profiles), table_(&table), config_(config), stoplist_(&stoplist) {
  for (const auto& [block, authors] : profiles) {
    const NameKey name = name_key_from_joined(block);
    BlockState state;
    for (const auto& [author, ids] : authors) {
      AuthorState a;
      for (const auto& id : ids)
        if (const auto* p = store.find(id)) a.papers.push_back(p);
      if (a.papers.empty()) continue;
      a.view = make_candidate_view(a.papers, name, stoplist);
      for (const auto* p : a.papers) {
        auto idx = find_author_index(*p, name);
        a.embeddings.push_back(mean_embedding(paper_tokens(*p, idx, config.fields, stoplist), table));
      }
      state.authors.emplace(author, std::move(a));
    }
    std::vector<const CandidateView*> views;
    for (const auto& [_, a] : state.authors) views.push_back(&a.view);
    state.idf = build_adhoc_idf(views);
    blocks_.emplace(block, std::move(state));
  }
}

std::vector<std::string> RndFeaturizer::candidates(const std::string& block) const {
  std::vector<std::string> out;
  if (auto it = blocks_.find(block); it != blocks_.end())
    for (const auto& [author, _] : it->second.authors) out.push_back(author);
  return out;
}

std::optional<std::string> RndFeaturizer::block_of(const PaperRef& ref) const {
  return resolve_block(ref, *store_, *profiles_);
}

Eigen::VectorXd RndFeaturizer::features(const PaperRef& target, const std::string& block,
                                        const std::string& author) const {
  const auto bit = blocks_.find(block);
  if (bit == blocks_.end()) throw DataError("unknown name block " + block);
  const auto ait = bit->second.authors.find(author);
  if (ait == bit->second.authors.end()) throw DataError("author " + author + " is not a candidate in " + block);
  const auto& a = ait->second;
  const auto& paper = store_->at(target.paper_id);

  const Eigen::VectorXd adhoc =
      adhoc_features(make_target_view(paper, target.author_index, *stoplist_), a.view, bit->second.idf);
  const Vector emb = paper_embedding(paper, target.author_index, config_.fields, *table_, *stoplist_);
  const Eigen::VectorXd soft = soft_semantic_features(emb, a.embeddings, config_.kernel);
  const EgoGraph ego = build_ego_graph(target, author, a.papers, *store_);
  const Eigen::VectorXd eg = kernel_pool(
      ego_relational_scores(ego, paper, a.papers, *table_, config_.fields, *stoplist_), config_.kernel);
  return assemble(adhoc, soft, eg);
}

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Json vector_json(const Eigen::VectorXd& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Eigen::VectorXd vector_from_json(const Json& j, const char* key, std::size_t expected) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != expected)
    throw DataError(std::string("/") + key + ": expected a list of " + std::to_string(expected) + " numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    if (!j[key][i].is_number()) throw DataError(std::string("/") + key + "/" + std::to_string(i) + ": expected a number");
    v(static_cast<Eigen::Index>(i)) = j[key][i].get<double>();
  }
  return v;
}

}  // namespace

LogisticScorer::LogisticScorer(std::vector<int> columns, Eigen::VectorXd mean, Eigen::VectorXd scale,
                               Eigen::VectorXd weights, double bias)
    : columns_(std::move(columns)), mean_(std::move(mean)), scale_(std::move(scale)), weights_(std::move(weights)),
      bias_(bias) {
  const auto d = static_cast<Eigen::Index>(columns_.size());
  if (mean_.size() != d || scale_.size() != d || weights_.size() != d)
    throw std::invalid_argument("LogisticScorer: parameter sizes disagree with the column list");
  for (int c : columns_)
    if (c < 0 || c >= kFeatureWidth) throw std::invalid_argument("LogisticScorer: column out of range");
}

double LogisticScorer::score(const Eigen::VectorXd& x) const {
  if (x.size() != kFeatureWidth) throw std::invalid_argument("score: expected a 118-dim feature vector");
  double z = bias_;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    z += weights_(k) * (x(columns_[i]) - mean_(k)) / scale_(k);
  }
  return sigmoid(z);
}

Json LogisticScorer::to_json() const {
  return Json{{"kind", "logistic"},
              {"columns", columns_},
              {"mean", vector_json(mean_)},
              {"scale", vector_json(scale_)},
              {"weights", vector_json(weights_)},
              {"bias", bias_}};
}

std::unique_ptr<Scorer> scorer_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw DataError("/kind: expected a string");
  const auto kind = j["kind"].get<std::string>();
  if (kind != "logistic") throw DataError("/kind: unsupported scorer kind \"" + kind + "\"");
  if (!j.contains("columns") || !j["columns"].is_array()) throw DataError("/columns: expected a list");
  std::vector<int> columns;
  for (const auto& c : j["columns"]) {
    if (!c.is_number_integer()) throw DataError("/columns: expected integers");
    columns.push_back(c.get<int>());
  }
  if (!j.contains("bias") || !j["bias"].is_number()) throw DataError("/bias: expected a number");
  const auto d = columns.size();
  try {
    return std::make_unique<LogisticScorer>(columns, vector_from_json(j, "mean", d), vector_from_json(j, "scale", d),
                                            vector_from_json(j, "weights", d), j["bias"].get<double>());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("/: ") + e.what());
  }
}

double logistic_loss(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2) {
  const auto d = x.cols();
  const Eigen::VectorXd z = (x * params.head(d)).array() + params(d);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y(i) * z(i);
  return loss / static_cast<double>(x.rows()) + 0.5 * l2 * params.head(d).squaredNorm();
}

Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  double l2) {
  const auto d = x.cols();
  const double n = static_cast<double>(x.rows());
  Eigen::VectorXd r = (x * params.head(d)).array() + params(d);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = sigmoid(r(i)) - y(i);
  Eigen::VectorXd g(d + 1);
  g.head(d) = x.transpose() * r / n + l2 * params.head(d);
  g(d) = r.sum() / n;
  return g;
}

std::unique_ptr<LogisticScorer> train_scorer(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                             const FeatureBlocks& blocks, const LogisticConfig& config) {
  if (features.rows() != labels.size()) throw std::invalid_argument("train_scorer: row and label counts differ");
  if (features.cols() != kFeatureWidth) throw std::invalid_argument("train_scorer: expected 118 feature columns");
  if (!blocks.any()) throw UsageError("train_scorer: no feature blocks selected");
  const Eigen::Index positives = (labels.array() > 0.5).count();
  if (positives == 0 || positives == labels.size())
    throw DataError("training pairs contain a single class; need positives and negatives");

  const std::vector<int> columns = blocks.columns();
  const auto d = static_cast<Eigen::Index>(columns.size());
  const auto n = features.rows();
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index c = 0; c < d; ++c) x.col(c) = features.col(columns[static_cast<std::size_t>(c)]);

  Eigen::VectorXd mean = x.colwise().mean().transpose();
  Eigen::VectorXd scale(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const double sd = std::sqrt((x.col(c).array() - mean(c)).square().mean());
    scale(c) = sd > 1e-8 ? sd : 1.0;
  }
  for (Eigen::Index c = 0; c < d; ++c) x.col(c) = (x.col(c).array() - mean(c)) / scale(c);

  // Lipschitz constant of the gradient: 0.25 * lambda_max(A^T A / n) + l2
  // with A the standardized design plus a ones column.
  Eigen::MatrixXd a(n, d + 1);
  a << x, Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd gram = a.transpose() * a / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = 0.25 * eig.eigenvalues().maxCoeff() + config.l2;
  const double step = 1.0 / lipschitz;

  Eigen::VectorXd params = Eigen::VectorXd::Zero(d + 1);
  for (int it = 0; it < config.iterations; ++it) params -= step * logistic_gradient(params, x, labels, config.l2);

  return std::make_unique<LogisticScorer>(columns, mean, scale, params.head(d), params(d));
}

std::vector<TrainingPair> build_training_pairs(const RndSplit& split, const PaperStore& store, int negatives,
                                               std::uint64_t seed) {
  std::vector<TrainingPair> out;
  for (const auto& ref : split.unassigned) {
    auto truth_it = split.truth.find(ref);
    if (truth_it == split.truth.end()) continue;
    auto block = resolve_block(ref, store, split.profiles);
    if (!block) continue;
    const auto& authors = split.profiles.at(*block);
    const std::string& truth = truth_it->second;

    std::vector<std::string> others;
    for (const auto& [author, _] : authors)
      if (author != truth) others.push_back(author);

    if (truth != kNil && authors.contains(truth)) out.push_back({ref, *block, truth, 1});

    Rng rng(stable_hash(format_paper_ref(ref), seed));
    const std::size_t take = std::min(others.size(), static_cast<std::size_t>(negatives));
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + rng.below(others.size() - i);
      std::swap(others[i], others[j]);
      out.push_back({ref, *block, others[i], 0});
    }
  }
  return out;
}

Eigen::MatrixXd feature_matrix(const std::vector<TrainingPair>& pairs, const RndFeaturizer& featurizer,
                               std::size_t workers) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pairs.size()), kFeatureWidth);
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    m.row(static_cast<Eigen::Index>(i)) =
        featurizer.features(pairs[i].ref, pairs[i].block, pairs[i].author).transpose();
  });
  return m;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_feature_matrix(std::ostream& out, const Eigen::MatrixXd& features, const std::vector<TrainingPair>& pairs) {
  if (features.rows() != static_cast<Eigen::Index>(pairs.size()))
    throw std::invalid_argument("write_feature_matrix: row and pair counts differ");
  std::string line;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      append_number(line, features(r, c));
      line += ' ';
    }
    line += pairs[static_cast<std::size_t>(r)].label ? '1' : '0';
    line += '\n';
    out << line;
  }
}

Assignment choose_assignment(const ScoredPaper& scored, double nil_threshold) {
  Assignment a{scored.ref, std::string(kNil), 0.0};
  const std::string* best = nullptr;
  for (const auto& [author, s] : scored.scores) {
    if (!best || s > a.score) {
      best = &author;
      a.score = s;
    }
  }
  if (best && a.score > nil_threshold) a.author = *best;
  return a;
}

std::vector<ScoredPaper> score_unassigned(const std::vector<PaperRef>& unassigned, const RndFeaturizer& featurizer,
                                          const Scorer& scorer, std::size_t workers) {
  std::vector<ScoredPaper> out(unassigned.size());
  parallel_for(unassigned.size(), workers, [&](std::size_t i) {
    out[i].ref = unassigned[i];
    auto block = featurizer.block_of(unassigned[i]);
    if (!block) return;
    for (const auto& author : featurizer.candidates(*block))
      out[i].scores[author] = scorer.score(featurizer.features(unassigned[i], *block, author));
  });
  return out;
}

Assignment assign(const PaperRef& target, const RndFeaturizer& featurizer, const Scorer& scorer,
                  double nil_threshold) {
  return choose_assignment(score_unassigned({target}, featurizer, scorer).front(), nil_threshold);
}

std::vector<Assignment> assign_all(const std::vector<ScoredPaper>& scored, double nil_threshold) {
  std::vector<Assignment> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(choose_assignment(s, nil_threshold));
  return out;
}

Calibration calibrate_nil_threshold(const std::vector<ScoredPaper>& scored, const RndTruth& truth) {
  Calibration best;
  for (const auto& [_, author] : truth)
    if (author == kNil) best.had_nil = true;
  if (!best.had_nil) return best;

  best.weighted_f1 = -1.0;
  for (int k = 1; k <= 19; ++k) {
    const double threshold = k / 20.0;
    std::map<PaperRef, std::string> assigned;
    for (const auto& s : scored)
      if (truth.contains(s.ref)) assigned[s.ref] = choose_assignment(s, threshold).author;
    for (const auto& [ref, _] : truth) assigned.try_emplace(ref, std::string(kNil));
    const double f1 = weighted_prf(assigned, truth).f1;
    if (f1 > best.weighted_f1) {
      best.weighted_f1 = f1;
      best.threshold = threshold;
    }
  }
  return best;
}

RndModel train_rnd(const RndSplit& train, const RndSplit* valid, const PaperStore& store, const EmbeddingTable& table,
                   const RndConfig& config, std::size_t workers) {
  config.validate();
  const auto pairs = build_training_pairs(train, store, config.negatives, config.scorer.seed);
  const RndFeaturizer featurizer(store, train.profiles, table, config);
  const Eigen::MatrixXd x = feature_matrix(pairs, featurizer, workers);
  Eigen::VectorXd y(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) y(static_cast<Eigen::Index>(i)) = pairs[i].label;

  RndModel model;
  model.config = config;
  model.scorer = train_scorer(x, y, config.blocks, config.scorer);

  const RndSplit& calib = valid ? *valid : train;
  const RndFeaturizer calib_features(store, calib.profiles, table, config);
  model.calibration = calibrate_nil_threshold(
      score_unassigned(calib.unassigned, calib_features, *model.scorer, workers), calib.truth);
  if (model.calibration.had_nil) model.config.nil_threshold = model.calibration.threshold;
  else model.calibration.threshold = config.nil_threshold;
  return model;
}

RndEvaluation evaluate_rnd(const RndModel& model, const RndSplit& test, const PaperStore& store,
                           const EmbeddingTable& table, std::size_t workers) {
  const RndFeaturizer featurizer(store, test.profiles, table, model.config);
  RndEvaluation out;
  out.assignments =
      assign_all(score_unassigned(test.unassigned, featurizer, *model.scorer, workers), model.config.nil_threshold);
  std::map<PaperRef, std::string> assigned;
  for (const auto& a : out.assignments) assigned[a.ref] = a.author;
  for (const auto& [ref, author] : test.truth) {
    if (author != kNil) continue;
    ++out.nil_papers;
    if (auto it = assigned.find(ref); it != assigned.end() && it->second == kNil) ++out.nil_detected;
  }
  out.metrics = weighted_prf(assigned, test.truth);
  return out;
}

Json rnd_config_to_json(const RndConfig& c) {
  return Json{{"negatives", c.negatives},
              {"nil_threshold", c.nil_threshold},
              {"kernel", {{"count", c.kernel.count}, {"sigma", c.kernel.sigma}, {"exact_sigma", c.kernel.exact_sigma}}},
              {"fields", format_field_set(c.fields)},
              {"blocks", format_feature_blocks(c.blocks)},
              {"scorer", {{"l2", c.scorer.l2}, {"iterations", c.scorer.iterations}, {"seed", c.scorer.seed}}}};
}

RndConfig rnd_config_from_json(const Json& j) {
  RndConfig c;
  try {
    c.negatives = j.at("negatives").get<int>();
    c.nil_threshold = j.at("nil_threshold").get<double>();
    c.kernel.count = j.at("kernel").at("count").get<int>();
    c.kernel.sigma = j.at("kernel").at("sigma").get<double>();
    c.kernel.exact_sigma = j.at("kernel").at("exact_sigma").get<double>();
    c.fields = parse_field_set(j.at("fields").get<std::string>());
    c.blocks = parse_feature_blocks(j.at("blocks").get<std::string>());
    c.scorer.l2 = j.at("scorer").at("l2").get<double>();
    c.scorer.iterations = j.at("scorer").at("iterations").get<int>();
    c.scorer.seed = j.at("scorer").at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("/config: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("/config: ") + e.what());
  }
  return c;
}

Json model_to_json(const RndModel& model) {
  return Json{{"config", rnd_config_to_json(model.config)},
              {"scorer", model.scorer->to_json()},
              {"calibration",
               {{"threshold", model.calibration.threshold},
                {"weighted_f1", model.calibration.weighted_f1},
                {"had_nil", model.calibration.had_nil}}}};
}

RndModel model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("config") || !j.contains("scorer"))
    throw DataError("/: expected a model with config and scorer");
  RndModel m;
  m.config = rnd_config_from_json(j["config"]);
  m.scorer = scorer_from_json(j["scorer"]);
  if (j.contains("calibration")) {
    const auto& c = j["calibration"];
    m.calibration.threshold = c.value("threshold", m.config.nil_threshold);
    m.calibration.weighted_f1 = c.value("weighted_f1", 0.0);
    m.calibration.had_nil = c.value("had_nil", false);
  }
  return m;
}

Json assignments_to_json(const std::vector<Assignment>& assignments) {
  Json j = Json::array();
  for (const auto& a : assignments)
    j.push_back({{"paper_ref", format_paper_ref(a.ref)}, {"author", a.author}, {"score", a.score}});
  return j;
}

std::map<PaperRef, std::string> assignments_from_json(const Json& j) {
  if (!j.is_array()) throw DataError("/: expected a list of assignments");
  std::map<PaperRef, std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string at = "/" + std::to_string(i);
    if (!e.is_object() || !e.contains("paper_ref") || !e["paper_ref"].is_string())
      throw DataError(at + "/paper_ref: expected a string");
    if (!e.contains("author") || !e["author"].is_string()) throw DataError(at + "/author: expected a string");
    auto ref = parse_paper_ref(e["paper_ref"].get<std::string>());
    if (!out.emplace(ref, e["author"].get<std::string>()).second)
      throw DataError(at + "/paper_ref: duplicate " + format_paper_ref(ref));
  }
  return out;
}

}  // namespace wiw
