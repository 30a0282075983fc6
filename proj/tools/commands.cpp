#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "wiw/common.hpp"
#include "wiw/corpus.hpp"
#include "wiw/embed.hpp"
#include "wiw/eval.hpp"
#include "wiw/ind.hpp"
#include "wiw/relgraph.hpp"
#include "wiw/rnd.hpp"
#include "wiw/snd.hpp"
#include "wiw/synth.hpp"

namespace fs = std::filesystem;

namespace wiw::cli {

// ---------------------------------------------------------------------------
// JSON config

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
  Json j = Json::object();
  for (const CLI::Option* opt : app->get_options({})) {
    if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
    const std::string& name = opt->get_lnames().front();
    auto results = opt->results();
    if (results.empty() && default_also && !opt->get_default_str().empty()) results = {opt->get_default_str()};
    if (results.size() == 1) j[name] = results.front();
    else if (!results.empty()) j[name] = results;
  }
  return j.dump(2) + "\n";
}

namespace {

std::string config_key(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return key;
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

void collect(const Json& obj, std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object()) {
      parents.push_back(key);
      collect(value, parents, out);
      parents.pop_back();
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = config_key(key);
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar_text(v));
    } else {
      item.inputs.push_back(scalar_text(value));
    }
    out.push_back(std::move(item));
  }
}

}  // namespace

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  Json j;
  try {
    j = Json::parse(input);
  } catch (const Json::parse_error& e) {
    throw CLI::ConversionError("config", e.what());
  }
  if (!j.is_object()) throw CLI::ConversionError("config", "expected a JSON object at the top level");
  std::vector<CLI::ConfigItem> out;
  std::vector<std::string> parents;
  collect(j, parents, out);
  return out;
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

fs::path input_path(const GlobalOptions& g, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !g.data_dir.empty()) return fs::path(g.data_dir) / path;
  return path;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

struct EmbedOptions {
  std::string embeddings;
  EmbedConfig config;
  std::string stoplist;
};

void add_embed_options(CLI::App* sub, EmbedOptions& o, bool with_file = true) {
  if (with_file)
    sub->add_option("--embeddings", o.embeddings,
                    "Semantic embedding table; trained on --papers with the options below when omitted");
  auto* group = sub->add_option_group("Semantic embedding");
  group->add_option("--dim", o.config.dim, "Vector dimension")->capture_default_str()->check(CLI::PositiveNumber);
  group->add_option("--window", o.config.window, "Context window")->capture_default_str()->check(CLI::PositiveNumber);
  group->add_option("--negative", o.config.negative, "Negative samples per context word")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  group->add_option("--min-count", o.config.min_count, "Minimum token count")->capture_default_str();
  group->add_option("--epochs", o.config.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
  group->add_option("--lr", o.config.learning_rate, "Initial learning rate")->capture_default_str();
  group->add_option("--stoplist", o.stoplist, "Stop word file, one token per line (default: built-in English list)");
}

const Stoplist& stoplist_for(const EmbedOptions& o, Stoplist& storage) {
  if (o.stoplist.empty()) return default_stoplist();
  storage = load_stoplist(o.stoplist);
  return storage;
}

EmbeddingTable semantic_table(const GlobalOptions& g, EmbedOptions o, const PaperStore& store) {
  if (!o.embeddings.empty()) return load_embeddings(input_path(g, o.embeddings));
  o.config.seed = g.seed;
  o.config.validate();
  Stoplist storage;
  return train_skipgram(semantic_corpus(store, stoplist_for(o, storage)), o.config);
}

struct SndOptions {
  SndConfig config;
  std::string modality = "both";
  std::string fields = "title,keywords,org";
  std::string relations = "coauthor,coorg,covenue";
  EmbedConfig rel;
};

void add_snd_options(CLI::App* sub, SndOptions& o) {
  auto* group = sub->add_option_group("Clustering");
  group->add_option("--db-eps", o.config.db_eps, "DBSCAN radius on the fused distance")->capture_default_str();
  group->add_option("--db-min", o.config.db_min, "DBSCAN minimum neighborhood size, self included")
      ->capture_default_str();
  group->add_option("--post-threshold", o.config.post_threshold, "Post-match score a noise paper must exceed")
      ->capture_default_str();
  group->add_option("--post-coauthor", o.config.post_weights.coauthor, "Post-match weight per shared coauthor")
      ->capture_default_str();
  group->add_option("--post-words", o.config.post_weights.words, "Post-match weight per shared title/keyword token")
      ->capture_default_str();
  group->add_option("--modality", o.modality, "semantic, relational or both")->capture_default_str();
  group->add_option("--fields", o.fields, "Paper fields for semantic embeddings")->capture_default_str();
  group->add_option("--relations", o.relations, "Relation types for the paper graph")->capture_default_str();
  group->add_option("--walk-length", o.config.walk.walk_length, "Nodes per walk")->capture_default_str();
  group->add_option("--walks-per-node", o.config.walk.walks_per_node, "Walks started at each node")
      ->capture_default_str();
  group->add_option("--covenue-prob", o.config.walk.covenue_prob, "Probability of taking a CoVenue step")
      ->capture_default_str();
  group->add_option("--rel-dim", o.rel.dim, "Relational embedding dimension")->capture_default_str();
  group->add_option("--rel-window", o.rel.window, "Relational skip-gram window")->capture_default_str();
  group->add_option("--rel-epochs", o.rel.epochs, "Relational skip-gram epochs")->capture_default_str();
}

SndConfig finish_snd(const GlobalOptions& g, SndOptions o) {
  o.config.modality = parse_modality(o.modality);
  o.config.fields = parse_field_set(o.fields);
  o.config.relations = parse_relation_set(o.relations);
  o.config.walk.seed = g.seed;
  o.rel.seed = g.seed;
  o.rel.min_count = 1;
  o.config.relational_embed = o.rel;
  o.config.validate();
  return o.config;
}

struct RndOptions {
  RndConfig config;
  std::string fields = "title,keywords,org";
  std::string blocks = "adhoc,soft,ego";
};

void add_rnd_options(CLI::App* sub, RndOptions& o) {
  auto* group = sub->add_option_group("Assignment model");
  group->add_option("--negatives", o.config.negatives, "Negative candidates sampled per training paper")
      ->capture_default_str();
  group->add_option("--nil-threshold", o.config.nil_threshold,
                    "NIL threshold used when calibration data has no NIL papers")
      ->capture_default_str();
  group->add_option("--kernel-sigma", o.config.kernel.sigma, "Kernel width")->capture_default_str();
  group->add_option("--kernel-exact-sigma", o.config.kernel.exact_sigma, "Width of the exact-match kernel at 1.0")
      ->capture_default_str();
  group->add_option("--fields", o.fields, "Paper fields for semantic embeddings")->capture_default_str();
  group->add_option("--blocks", o.blocks, "Feature blocks the scorer uses: adhoc,soft,ego")->capture_default_str();
  group->add_option("--l2", o.config.scorer.l2, "L2 penalty of the logistic scorer")->capture_default_str();
  group->add_option("--iterations", o.config.scorer.iterations, "Gradient descent iterations")
      ->capture_default_str();
}

RndConfig finish_rnd(const GlobalOptions& g, RndOptions o) {
  o.config.fields = parse_field_set(o.fields);
  o.config.blocks = parse_feature_blocks(o.blocks);
  o.config.scorer.seed = g.seed;
  o.config.validate();
  return o.config;
}

RndSplit load_rnd_split(const GlobalOptions& g, const std::string& profiles, const std::string& unassigned,
                        const std::string& truth) {
  RndSplit s;
  s.profiles = load_assignments(input_path(g, profiles));
  {
    const auto path = input_path(g, unassigned);
    try {
      s.unassigned = parse_unassigned(read_json(path));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  if (!truth.empty()) {
    const auto path = input_path(g, truth);
    try {
      s.truth = parse_rnd_truth(read_json(path));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  return s;
}

PaperStore load_store(const GlobalOptions& g, const std::string& path) { return load_papers(input_path(g, path)); }

void report_dangling(NameBlockSet& blocks, const PaperStore& store) {
  for (const auto& message : drop_dangling(blocks, store)) warn(message);
}

// ---------------------------------------------------------------------------
// load-check

void add_load_check(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string papers, assignments, ind, snd_eval, unassigned, truth;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("load-check", "Load and validate benchmark-format files");
  sub->add_option("--papers", o->papers, "Paper records")->required();
  sub->add_option("--assignments", o->assignments, "Author assignments (name -> author -> papers)");
  sub->add_option("--ind", o->ind, "Incorrect-assignment records");
  sub->add_option("--snd-eval", o->snd_eval, "Flattened name -> papers file");
  sub->add_option("--unassigned", o->unassigned, "Unassigned paper refs");
  sub->add_option("--truth", o->truth, "Assignment ground truth (paper ref -> author or NIL)");
  sub->callback([o, &g] {
    const PaperStore store = load_store(g, o->papers);
    std::cout << "papers " << store.size() << '\n';
    if (!o->assignments.empty()) {
      auto blocks = load_assignments(input_path(g, o->assignments));
      check_disjoint(blocks);
      std::size_t authors = 0;
      for (const auto& [_, a] : blocks) authors += a.size();
      const auto dangling = dangling_references(blocks, store);
      for (const auto& id : dangling) warn("assignments reference missing paper " + id);
      std::cout << "names " << blocks.size() << " authors " << authors << " dangling " << dangling.size() << '\n';
    }
    if (!o->ind.empty()) {
      const auto records = load_ind(input_path(g, o->ind));
      std::size_t outliers = 0;
      for (const auto& r : records) outliers += r.outliers.size();
      std::cout << "ind authors " << records.size() << " outliers " << outliers << '\n';
    }
    if (!o->snd_eval.empty()) {
      const auto path = input_path(g, o->snd_eval);
      SndEvalBlock block;
      try {
        block = parse_snd_eval(read_json(path));
      } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
      std::cout << "snd names " << block.size() << '\n';
    }
    if (!o->unassigned.empty()) {
      const auto path = input_path(g, o->unassigned);
      std::vector<PaperRef> refs;
      try {
        refs = parse_unassigned(read_json(path));
      } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
      std::size_t missing = 0;
      for (const auto& ref : refs)
        if (!store.contains(ref.paper_id)) ++missing;
      if (missing) warn(std::to_string(missing) + " unassigned refs point to missing papers");
      std::cout << "unassigned " << refs.size() << '\n';
    }
    if (!o->truth.empty()) {
      const auto path = input_path(g, o->truth);
      try {
        std::cout << "truth " << parse_rnd_truth(read_json(path)).size() << '\n';
      } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
    }
    std::cout << "ok\n";
  });
}

// ---------------------------------------------------------------------------
// split

void add_split(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string task = "rnd", assignments, papers, out = ".";
    double ratio = 0.2, nil_fraction = 0.1;
    SplitRatios ratios;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("split", "Split assignments for SND (by name) or RND (by time)");
  sub->add_option("--task", o->task, "snd or rnd")->capture_default_str()->check(CLI::IsMember({"snd", "rnd"}));
  sub->add_option("--assignments", o->assignments, "Author assignments")->required();
  sub->add_option("--papers", o->papers, "Paper records")->required();
  sub->add_option("--out", o->out, "Output directory")->capture_default_str();
  sub->add_option("--ratio", o->ratio, "RND: share of each author's latest papers held out")->capture_default_str();
  sub->add_option("--nil-fraction", o->nil_fraction, "RND: share of authors per name held out entirely as NIL")
      ->capture_default_str();
  sub->add_option("--train-ratio", o->ratios.train, "SND: share of names for training")->capture_default_str();
  sub->add_option("--valid-ratio", o->ratios.valid, "SND: share of names for validation")->capture_default_str();
  sub->add_option("--test-ratio", o->ratios.test, "SND: share of names for testing")->capture_default_str();
  sub->callback([o, &g] {
    auto blocks = load_assignments(input_path(g, o->assignments));
    const PaperStore store = load_store(g, o->papers);
    check_disjoint(blocks);
    report_dangling(blocks, store);
    const fs::path out(o->out);
    if (o->task == "rnd") {
      if (!(o->ratio > 0.0 && o->ratio < 1.0)) throw UsageError("--ratio must lie in (0, 1)");
      if (!(o->nil_fraction >= 0.0 && o->nil_fraction < 1.0)) throw UsageError("--nil-fraction must lie in [0, 1)");
      const RndSplit s = split_rnd(blocks, store, o->ratio, o->nil_fraction, g.seed);
      for (const auto& w : s.warnings) warn(w);
      write_json(out / "profiles.json", to_json(s.profiles));
      write_json(out / "unassigned.json", to_json(s.unassigned));
      write_json(out / "truth.json", to_json(s.truth));
      std::size_t nil = 0;
      for (const auto& [_, a] : s.truth) nil += a == kNil;
      std::cout << "rnd split: " << s.unassigned.size() << " unassigned (" << nil << " NIL)\n";
    } else {
      const SndSplit s = split_snd(blocks, o->ratios, g.seed);
      write_json(out / "train.json", to_json(s.train));
      write_json(out / "valid.json", to_json(s.valid.papers));
      write_json(out / "valid_truth.json", to_json(s.valid.truth));
      write_json(out / "test.json", to_json(s.test.papers));
      write_json(out / "test_truth.json", to_json(s.test.truth));
      std::cout << "snd split: " << s.train.size() << " train / " << s.valid.papers.size() << " valid / "
                << s.test.papers.size() << " test names\n";
    }
  });
}

// ---------------------------------------------------------------------------
// embed

void add_embed(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string papers, out = "embeddings.txt";
    EmbedOptions embed;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("embed", "Train semantic skip-gram embeddings over all papers");
  sub->add_option("--papers", o->papers, "Paper records")->required();
  sub->add_option("--out", o->out, "Embedding table (text format)")->capture_default_str();
  add_embed_options(sub, o->embed, false);
  sub->callback([o, &g] {
    const PaperStore store = load_store(g, o->papers);
    const EmbeddingTable table = semantic_table(g, o->embed, store);
    save_embeddings(o->out, table);
    std::cout << "embed: " << table.size() << " tokens x " << table.dim() << '\n';
  });
}

// ---------------------------------------------------------------------------
// snd

void add_snd(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string papers, blocks, assignments, truth, out = "clusters.json";
    EmbedOptions embed;
    SndOptions snd;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("snd", "Cluster each name's papers into authors");
  sub->add_option("--papers", o->papers, "Paper records")->required();
  auto* blocks = sub->add_option("--blocks", o->blocks, "Names to cluster (name -> paper ids)");
  auto* assign = sub->add_option("--assignments", o->assignments, "Cluster the papers of these assignments");
  blocks->excludes(assign);
  sub->add_option("--truth", o->truth, "Assignments to score the clustering against");
  sub->add_option("--out", o->out, "Clusters output (name -> list of paper-id lists)")->capture_default_str();
  add_embed_options(sub, o->embed);
  add_snd_options(sub, o->snd);
  sub->callback([o, &g] {
    const SndConfig config = finish_snd(g, o->snd);
    if (o->blocks.empty() && o->assignments.empty()) throw UsageError("one of --blocks or --assignments is required");
    const PaperStore store = load_store(g, o->papers);
    SndEvalBlock names;
    std::optional<NameBlockSet> truth;
    if (!o->assignments.empty()) {
      auto a = load_assignments(input_path(g, o->assignments));
      report_dangling(a, store);
      names = flatten(a);
      truth = std::move(a);
    } else {
      const auto path = input_path(g, o->blocks);
      try {
        names = parse_snd_eval(read_json(path));
      } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
    }
    if (!o->truth.empty()) truth = load_assignments(input_path(g, o->truth));

    const EmbeddingTable table = semantic_table(g, o->embed, store);
    const SndResult result = snd_all(names, store, table, config, g.workers);
    write_json(o->out, clusters_to_json(result));
    std::size_t clusters = 0;
    for (const auto& [_, c] : result) clusters += c.size();
    std::cout << "snd: " << result.size() << " names, " << clusters << " clusters";
    if (truth) std::cout << ", pairwise-F1 " << fmt3(score_snd(result, *truth).macro_f1);
    std::cout << '\n';
  });
}

// ---------------------------------------------------------------------------
// rnd-train / rnd-assign

void add_rnd_train(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string papers, profiles, unassigned, truth, valid_profiles, valid_unassigned, valid_truth;
    std::string model = "model.json", dump_pairs;
    EmbedOptions embed;
    RndOptions rnd;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("rnd-train", "Train the assignment scorer and calibrate the NIL threshold");
  sub->add_option("--papers", o->papers, "Paper records")->required();
  sub->add_option("--profiles", o->profiles, "Candidate author profiles")->required();
  sub->add_option("--unassigned", o->unassigned, "Training papers to assign")->required();
  sub->add_option("--truth", o->truth, "Training ground truth")->required();
  auto* vp = sub->add_option("--valid-profiles", o->valid_profiles, "Calibration profiles");
  auto* vu = sub->add_option("--valid-unassigned", o->valid_unassigned, "Calibration papers");
  auto* vt = sub->add_option("--valid-truth", o->valid_truth, "Calibration ground truth");
  vp->needs(vu)->needs(vt);
  vu->needs(vp);
  vt->needs(vp);
  sub->add_option("--model", o->model, "Model output")->capture_default_str();
  sub->add_option("--dump-pairs", o->dump_pairs, "Write the training feature matrix (118 columns + label)");
  add_embed_options(sub, o->embed);
  add_rnd_options(sub, o->rnd);
  sub->callback([o, &g] {
    const RndConfig config = finish_rnd(g, o->rnd);
    const PaperStore store = load_store(g, o->papers);
    const RndSplit train = load_rnd_split(g, o->profiles, o->unassigned, o->truth);
    std::optional<RndSplit> valid;
    if (!o->valid_profiles.empty())
      valid = load_rnd_split(g, o->valid_profiles, o->valid_unassigned, o->valid_truth);
    else
      warn("no validation split given; calibrating the NIL threshold on the training papers");
    const EmbeddingTable table = semantic_table(g, o->embed, store);

    if (!o->dump_pairs.empty()) {
      const auto pairs = build_training_pairs(train, store, config.negatives, config.scorer.seed);
      const RndFeaturizer featurizer(store, train.profiles, table, config);
      std::ofstream out(o->dump_pairs, std::ios::binary);
      if (!out) throw DataError("cannot write " + o->dump_pairs);
      write_feature_matrix(out, feature_matrix(pairs, featurizer, g.workers), pairs);
    }

    const RndModel model = train_rnd(train, valid ? &*valid : nullptr, store, table, config, g.workers);
    if (!model.calibration.had_nil) warn("calibration split has no NIL papers; keeping threshold " +
                                         fmt3(model.config.nil_threshold));
    write_json(o->model, model_to_json(model));
    std::cout << "rnd-train: nil threshold " << fmt3(model.config.nil_threshold);
    if (model.calibration.had_nil) std::cout << ", calibration weighted-F1 " << fmt3(model.calibration.weighted_f1);
    std::cout << '\n';
  });
}

void add_rnd_assign(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string model, papers, profiles, unassigned, truth, out = "assignments.json";
    std::optional<double> nil_threshold;
    EmbedOptions embed;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("rnd-assign", "Assign unassigned papers to candidate authors or NIL");
  sub->add_option("--model", o->model, "Model from rnd-train")->required();
  sub->add_option("--papers", o->papers, "Paper records")->required();
  sub->add_option("--profiles", o->profiles, "Candidate author profiles")->required();
  sub->add_option("--unassigned", o->unassigned, "Papers to assign")->required();
  sub->add_option("--truth", o->truth, "Ground truth to score the assignment against");
  sub->add_option("--nil-threshold", o->nil_threshold, "Override the model's calibrated NIL threshold");
  sub->add_option("--out", o->out, "Assignments output")->capture_default_str();
  add_embed_options(sub, o->embed);
  sub->callback([o, &g] {
    RndModel model = model_from_json(read_json(input_path(g, o->model)));
    if (o->nil_threshold) {
      model.config.nil_threshold = *o->nil_threshold;
      model.config.validate();
    }
    const PaperStore store = load_store(g, o->papers);
    RndSplit split = load_rnd_split(g, o->profiles, o->unassigned, o->truth);
    report_dangling(split.profiles, store);
    if (split.profiles.empty()) warn("no candidate profiles; every paper is assigned NIL");
    const EmbeddingTable table = semantic_table(g, o->embed, store);
    const RndFeaturizer featurizer(store, split.profiles, table, model.config);
    const auto scored = score_unassigned(split.unassigned, featurizer, *model.scorer, g.workers);
    const auto assignments = assign_all(scored, model.config.nil_threshold);
    write_json(o->out, assignments_to_json(assignments));

    std::size_t nil = 0;
    for (const auto& a : assignments) nil += a.author == kNil;
    std::cout << "rnd-assign: " << assignments.size() << " papers, " << nil << " NIL";
    if (!o->truth.empty()) {
      std::map<PaperRef, std::string> assigned;
      for (const auto& a : assignments) assigned[a.ref] = a.author;
      std::cout << ", weighted-F1 " << fmt3(weighted_prf(assigned, split.truth).f1);
    }
    std::cout << '\n';
  });
}

// ---------------------------------------------------------------------------
// ind

void add_ind(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string ind, papers, out = "ind_scores.json", fields = "title,keywords,org",
                                 relations = "coauthor,coorg,covenue";
    bool relational = false;
    WalkConfig walk;
    EmbedConfig rel;
    EmbedOptions embed;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ind", "Score papers of each profile for incorrect assignment");
  sub->add_option("--ind", o->ind, "Incorrect-assignment records")->required();
  sub->add_option("--papers", o->papers, "Paper records")->required();
  sub->add_option("--out", o->out, "Score report output")->capture_default_str();
  sub->add_option("--fields", o->fields, "Paper fields for semantic embeddings")->capture_default_str();
  sub->add_flag("--relational", o->relational, "Fuse in relational embeddings from each profile's paper graph");
  sub->add_option("--relations", o->relations, "Relation types for the profile graph")->capture_default_str();
  sub->add_option("--walk-length", o->walk.walk_length, "Nodes per walk")->capture_default_str();
  sub->add_option("--walks-per-node", o->walk.walks_per_node, "Walks started at each node")->capture_default_str();
  sub->add_option("--covenue-prob", o->walk.covenue_prob, "Probability of taking a CoVenue step")
      ->capture_default_str();
  sub->add_option("--rel-dim", o->rel.dim, "Relational embedding dimension")->capture_default_str();
  add_embed_options(sub, o->embed);
  sub->callback([o, &g] {
    IndConfig config;
    config.fields = parse_field_set(o->fields);
    config.relational = o->relational;
    config.relations = parse_relation_set(o->relations);
    config.walk = o->walk;
    config.walk.seed = g.seed;
    config.relational_embed = o->rel;
    config.relational_embed.seed = g.seed;
    config.relational_embed.min_count = 1;
    config.validate();

    const auto records = load_ind(input_path(g, o->ind));
    const PaperStore store = load_store(g, o->papers);
    const EmbeddingTable table = semantic_table(g, o->embed, store);
    std::vector<IndScoreReport> reports(records.size());
    parallel_for(records.size(), g.workers, [&](std::size_t i) {
      std::optional<EmbeddingTable> rel;
      if (config.relational) rel = ind_relational_table(records[i], store, config);
      reports[i] = ind_scores(records[i], store, table, rel ? &*rel : nullptr, config.fields);
    });
    write_json(o->out, ind_reports_to_json(reports));
    std::cout << "ind: " << reports.size() << " authors";
    bool any_outliers = false;
    for (const auto& r : records) any_outliers |= !r.outliers.empty() && !r.normal.empty();
    if (any_outliers) {
      const IndMetrics m = evaluate_ind(reports, records);
      std::cout << ", AUC " << fmt3(m.mean_auc) << ", MAP " << fmt3(m.mean_ap);
    }
    std::cout << '\n';
  });
}

// ---------------------------------------------------------------------------
// eval

Json prf_json(const PrfTriple& p, const std::string& prefix) {
  return Json{{prefix + "-Precision", p.precision}, {prefix + "-Recall", p.recall}, {prefix + "-F1", p.f1}};
}

void add_eval(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string task, pred, truth, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("eval", "Score predictions with the task's evaluation protocol");
  sub->add_option("--task", o->task, "snd, rnd or ind")->required()->check(CLI::IsMember({"snd", "rnd", "ind"}));
  sub->add_option("--pred", o->pred, "Predictions (clusters, assignments or outlier scores)")->required();
  sub->add_option("--truth", o->truth, "Ground truth (assignments, RND truth or IND records)")->required();
  sub->add_option("--out", o->out, "Report output");
  sub->callback([o, &g] {
    const auto pred_path = input_path(g, o->pred);
    const auto truth_path = input_path(g, o->truth);
    Json report;
    auto load = [](const fs::path& path, auto parse) {
      try {
        return parse(read_json(path));
      } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
    };
    if (o->task == "snd") {
      const auto pred = load(pred_path, clusters_from_json);
      const auto truth = load_assignments(truth_path);
      const SndScore s = score_snd(pred, truth);
      Json rows = Json::array();
      PrfTriple mean;
      for (const auto& [name, p] : s.per_name) {
        Json row = prf_json(p, "Pairwise");
        row["name"] = name;
        rows.push_back(std::move(row));
        mean.precision += p.precision / static_cast<double>(s.per_name.size());
        mean.recall += p.recall / static_cast<double>(s.per_name.size());
      }
      mean.f1 = s.macro_f1;
      report = {{"names", rows}, {"aggregate", prf_json(mean, "Pairwise")}};
      std::cout << "eval snd: " << s.per_name.size() << " names, pairwise-F1 " << fmt3(s.macro_f1) << '\n';
    } else if (o->task == "rnd") {
      const auto pred = load(pred_path, assignments_from_json);
      const auto truth = load(truth_path, parse_rnd_truth);
      const PrfTriple p = weighted_prf(pred, truth);
      report = {{"aggregate", prf_json(p, "Weighted")}};
      std::cout << "eval rnd: " << truth.size() << " papers, weighted-F1 " << fmt3(p.f1) << '\n';
    } else {
      const auto pred = load(pred_path, ind_reports_from_json);
      const auto truth = load_ind(truth_path);
      const IndMetrics m = evaluate_ind(pred, truth);
      Json rows = Json::array();
      for (const auto& [author, v] : m.per_author) rows.push_back({{"author", author}, {"AUC", v.first}, {"MAP", v.second}});
      report = {{"authors", rows}, {"skipped", m.skipped}, {"aggregate", {{"AUC", m.mean_auc}, {"MAP", m.mean_ap}}}};
      std::cout << "eval ind: " << m.per_author.size() << " authors, AUC " << fmt3(m.mean_auc) << ", MAP "
                << fmt3(m.mean_ap) << '\n';
    }
    if (!o->out.empty()) write_json(o->out, report);
  });
}

// ---------------------------------------------------------------------------
// ablate

void add_ablate(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    std::string task = "snd", grid = "modality", papers, assignments, out;
    double ratio = 0.2, nil_fraction = 0.1;
    EmbedOptions embed;
    SndOptions snd;
    RndOptions rnd;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ablate", "Rerun a pipeline over a grid of feature or modality settings");
  sub->add_option("--task", o->task, "snd or rnd")->capture_default_str()->check(CLI::IsMember({"snd", "rnd"}));
  sub->add_option("--grid", o->grid, "snd: modality, relations or fields; rnd: features or fields")
      ->capture_default_str()
      ->check(CLI::IsMember({"modality", "relations", "fields", "features"}));
  sub->add_option("--papers", o->papers, "Paper records")->required();
  sub->add_option("--assignments", o->assignments, "Ground-truth assignments")->required();
  sub->add_option("--out", o->out, "Report output (JSON rows)");
  sub->add_option("--ratio", o->ratio, "rnd: held-out share of each author's papers")->capture_default_str();
  sub->add_option("--nil-fraction", o->nil_fraction, "rnd: share of authors held out as NIL")->capture_default_str();
  add_embed_options(sub, o->embed);
  add_snd_options(sub, o->snd);
  auto* rgroup = sub->add_option_group("Assignment model");
  rgroup->add_option("--negatives", o->rnd.config.negatives, "Negatives per training paper")->capture_default_str();
  rgroup->add_option("--l2", o->rnd.config.scorer.l2, "L2 penalty")->capture_default_str();
  rgroup->add_option("--iterations", o->rnd.config.scorer.iterations, "Gradient descent iterations")
      ->capture_default_str();
  sub->callback([o, &g] {
    const PaperStore store = load_store(g, o->papers);
    auto truth = load_assignments(input_path(g, o->assignments));
    check_disjoint(truth);
    report_dangling(truth, store);
    const EmbeddingTable table = semantic_table(g, o->embed, store);
    const std::vector<std::string> all_fields = {"title", "abstract", "keywords", "venue", "year", "coauthors", "org"};

    Json rows = Json::array();
    auto print_row = [](const std::string& label, const std::string& metric, double v) {
      std::cout << label << "\t" << metric << " " << fmt4(v) << '\n';
    };

    if (o->task == "snd") {
      if (o->grid == "features") throw UsageError("the features grid applies to --task rnd");
      const SndConfig base = finish_snd(g, o->snd);
      std::vector<std::pair<std::string, SndConfig>> grid;
      if (o->grid == "modality") {
        for (auto m : {Modality::Semantic, Modality::Relational, Modality::Both}) {
          SndConfig c = base;
          c.modality = m;
          grid.emplace_back(std::string(modality_name(m)), c);
        }
      } else if (o->grid == "relations") {
        for (const auto& rs : RelationSet::nonempty_subsets()) {
          SndConfig c = base;
          c.relations = rs;
          c.modality = Modality::Relational;
          grid.emplace_back(format_relation_set(rs), c);
        }
      } else {
        for (const auto& f : all_fields) {
          SndConfig c = base;
          c.fields = parse_field_set(f);
          c.modality = Modality::Semantic;
          grid.emplace_back(f, c);
        }
      }
      const SndEvalBlock names = flatten(truth);
      std::cout << "setting\tmetric\n";
      for (const auto& [label, config] : grid) {
        const double f1 = score_snd(snd_all(names, store, table, config, g.workers), truth).macro_f1;
        print_row(label, "pairwise-F1", f1);
        rows.push_back({{"setting", label}, {"Pairwise-F1", f1}});
      }
    } else {
      if (o->grid != "features" && o->grid != "fields")
        throw UsageError("--task rnd supports the features and fields grids");
      const RndConfig base = finish_rnd(g, o->rnd);
      const SndSplit names = split_snd(truth, SplitRatios{0.6, 0.2, 0.2}, g.seed);
      const RndSplit train = split_rnd(names.train, store, o->ratio, o->nil_fraction, g.seed);
      const RndSplit valid = split_rnd(names.valid.truth, store, o->ratio, o->nil_fraction, g.seed);
      const RndSplit test = split_rnd(names.test.truth, store, o->ratio, o->nil_fraction, g.seed);
      std::vector<std::pair<std::string, RndConfig>> grid;
      if (o->grid == "features") {
        for (int mask = 1; mask < 8; ++mask) {
          RndConfig c = base;
          c.blocks = {(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
          grid.emplace_back(format_feature_blocks(c.blocks), c);
        }
      } else {
        for (const auto& f : all_fields) {
          RndConfig c = base;
          c.fields = parse_field_set(f);
          grid.emplace_back(f, c);
        }
      }
      std::cout << "setting\tmetric\n";
      for (const auto& [label, config] : grid) {
        const RndModel model = train_rnd(train, &valid, store, table, config, g.workers);
        const double f1 = evaluate_rnd(model, test, store, table, g.workers).metrics.f1;
        print_row(label, "weighted-F1", f1);
        rows.push_back({{"setting", label}, {"Weighted-F1", f1}, {"nil_threshold", model.config.nil_threshold}});
      }
    }
    if (!o->out.empty()) write_json(o->out, Json{{"task", o->task}, {"grid", o->grid}, {"rows", rows}});
  });
}

// ---------------------------------------------------------------------------
// synth

void add_synth(CLI::App& app, GlobalOptions& g) {
  struct Opts {
    SynthConfig config;
    std::string out = ".";
    std::size_t injected = 2;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("synth", "Generate a synthetic benchmark with known ground truth");
  sub->add_option("--out", o->out, "Output directory")->capture_default_str();
  sub->add_option("--names", o->config.names, "Name blocks")->capture_default_str();
  sub->add_option("--authors-per-name", o->config.authors_per_name, "Authors sharing each name")
      ->capture_default_str();
  sub->add_option("--papers-per-author", o->config.papers_per_author, "Papers per author")->capture_default_str();
  sub->add_option("--vocab-per-author", o->config.vocab_per_author, "Topic words per author")->capture_default_str();
  sub->add_option("--coauthor-pool", o->config.coauthor_pool_per_author, "Coauthors per author")
      ->capture_default_str();
  sub->add_option("--cross-noise", o->config.cross_noise, "Probability a paper borrows from another author")
      ->capture_default_str();
  sub->add_option("--ind-injected", o->injected, "Outlier papers per conflated IND profile")->capture_default_str();
  sub->callback([o, &g] {
    SynthConfig config = o->config;
    config.seed = g.seed;
    const SynthCorpus corpus = generate(config);
    const fs::path out(o->out);
    write_json(out / "assignments.json", to_json(corpus.blocks));
    write_json(out / "papers.json", to_json(corpus.store));
    write_json(out / "snd_eval.json", to_json(flatten(corpus.blocks)));
    write_json(out / "ind.json", to_json(conflated_profiles(corpus, o->injected, g.seed)));
    std::cout << "synth: " << corpus.blocks.size() << " names, " << corpus.store.size() << " papers\n";
  });
}

}  // namespace

void add_commands(CLI::App& app, GlobalOptions& g) {
  app.add_option("--workers", g.workers, "Worker threads for walks, feature extraction and per-name work")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed for every stochastic step")->capture_default_str();
  app.add_option("--data-dir", g.data_dir, "Directory relative input paths are resolved against")
      ->envname("WIW_DATA_DIR");
  add_load_check(app, g);
  add_split(app, g);
  add_embed(app, g);
  add_snd(app, g);
  add_rnd_train(app, g);
  add_rnd_assign(app, g);
  add_ind(app, g);
  add_eval(app, g);
  add_ablate(app, g);
  add_synth(app, g);
}

}  // namespace wiw::cli
