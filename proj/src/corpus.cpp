#include "wiw/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "wiw/common.hpp"

namespace wiw {

namespace {

std::string path_of(std::initializer_list<std::string_view> keys) {
  std::string out;
  for (auto k : keys) {
    out += '/';
    out += k;
  }
  return out;
}

std::string as_string(const Json& v, const std::string& where) {
  if (v.is_null()) return {};
  if (!v.is_string()) throw DataError(where + ": expected a string");
  return v.get<std::string>();
}

std::vector<std::string> as_string_list(const Json& v, const std::string& where) {
  if (!v.is_array()) throw DataError(where + ": expected an array of strings");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) throw DataError(where + "/" + std::to_string(i) + ": expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

int as_year(const Json& v, const std::string& where) {
  if (v.is_null()) return 0;
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number()) return static_cast<int>(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.empty()) return 0;
    int year = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), year);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError(where + ": year is not an integer");
    return year;
  }
  throw DataError(where + ": year is not an integer");
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalized_block_key(const std::string& raw) {
  try {
    return normalize_name(raw).joined();
  } catch (const DataError&) {
    throw DataError(path_of({raw}) + ": name key has no alphabetic content");
  }
}

}  // namespace

void PaperStore::insert(PaperRecord paper) {
  auto id = paper.id;
  auto [it, inserted] = papers_.emplace(id, std::move(paper));
  if (!inserted) throw DataError("duplicate paper id: " + id);
}

const PaperRecord* PaperStore::find(std::string_view id) const {
  auto it = papers_.find(id);
  return it == papers_.end() ? nullptr : &it->second;
}

const PaperRecord& PaperStore::at(std::string_view id) const {
  if (const auto* p = find(id)) return *p;
  throw DataError("unknown paper id: " + std::string(id));
}

std::string format_paper_ref(const PaperRef& ref) {
  return ref.paper_id + "-" + std::to_string(ref.author_index);
}

PaperRef parse_paper_ref(std::string_view s) {
  auto pos = s.rfind('-');
  if (pos == std::string_view::npos || pos == 0 || pos + 1 == s.size())
    throw DataError("malformed paper reference: \"" + std::string(s) + "\"");
  auto suffix = s.substr(pos + 1);
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), index);
  if (ec != std::errc{} || ptr != suffix.data() + suffix.size())
    throw DataError("malformed paper reference: \"" + std::string(s) + "\"");
  return {std::string(s.substr(0, pos)), index};
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void check_disjoint(const NameBlockSet& blocks) {
  for (const auto& [name, authors] : blocks) {
    std::map<std::string, std::string> owner;
    for (const auto& [author, papers] : authors) {
      for (const auto& pid : papers) {
        auto [it, fresh] = owner.emplace(pid, author);
        if (!fresh)
          throw DataError("paper " + pid + " appears twice under name " + name + " (authors " + it->second +
                          " and " + author + ")");
      }
    }
  }
}

NameBlockSet parse_assignments(const Json& j) {
  if (!j.is_object()) throw DataError("/: expected an object of names");
  NameBlockSet out;
  for (const auto& [raw_name, authors] : j.items()) {
    if (!authors.is_object()) throw DataError(path_of({raw_name}) + ": expected an object of author ids");
    auto& block = out[normalized_block_key(raw_name)];
    for (const auto& [author, papers] : authors.items()) {
      auto where = path_of({raw_name, author});
      auto ids = as_string_list(papers, where);
      if (ids.empty()) throw DataError(where + ": author has no papers");
      auto& dst = block[author];
      dst.insert(dst.end(), ids.begin(), ids.end());
    }
  }
  check_disjoint(out);
  return out;
}

NameBlockSet load_assignments(const std::filesystem::path& path) {
  try {
    return parse_assignments(read_json(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

PaperStore parse_papers(const Json& j) {
  if (!j.is_object()) throw DataError("/: expected an object of papers");
  PaperStore store;
  for (const auto& [key, rec] : j.items()) {
    auto where = path_of({key});
    if (!rec.is_object()) throw DataError(where + ": expected a paper object");
    PaperRecord p;
    p.id = key;
    if (auto it = rec.find("id"); it != rec.end() && !it->is_null()) {
      auto embedded = as_string(*it, where + "/id");
      if (embedded != key) throw DataError(where + "/id: \"" + embedded + "\" does not match its key");
    }
    auto field = [&](const char* name) -> std::string {
      auto it = rec.find(name);
      return it == rec.end() ? std::string{} : as_string(*it, where + "/" + name);
    };
    p.title = field("title");
    p.abstract = field("abstract");
    p.venue = field("venue");
    if (auto it = rec.find("keywords"); it != rec.end() && !it->is_null()) {
      p.keywords = as_string_list(*it, where + "/keywords");
      if (p.keywords.size() == 1 && p.keywords.front() == "null") p.keywords.clear();
    }
    if (auto it = rec.find("year"); it != rec.end()) p.year = as_year(*it, where + "/year");
    if (auto it = rec.find("authors"); it != rec.end() && !it->is_null()) {
      if (!it->is_array()) throw DataError(where + "/authors: expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& a = (*it)[i];
        auto awhere = where + "/authors/" + std::to_string(i);
        if (!a.is_object()) throw DataError(awhere + ": expected an author object");
        PaperAuthor author;
        author.name = trim(a.contains("name") ? as_string(a["name"], awhere + "/name") : std::string{});
        if (author.name.empty()) throw DataError(awhere + "/name: empty author name");
        author.org = a.contains("org") ? as_string(a["org"], awhere + "/org") : std::string{};
        if (author.org == "null") author.org.clear();
        p.authors.push_back(std::move(author));
      }
    }
    store.insert(std::move(p));
  }
  return store;
}

PaperStore load_papers(const std::filesystem::path& path) {
  try {
    return parse_papers(read_json(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<IndAuthorRecord> parse_ind(const Json& j) {
  if (!j.is_object()) throw DataError("/: expected an object of author ids");
  std::vector<IndAuthorRecord> out;
  for (const auto& [author, rec] : j.items()) {
    auto where = path_of({author});
    if (!rec.is_object()) throw DataError(where + ": expected an author record");
    IndAuthorRecord r;
    r.author_id = author;
    if (rec.contains("name")) r.name = as_string(rec["name"], where + "/name");
    if (!rec.contains("normal_data")) throw DataError(where + "/normal_data: missing");
    r.normal = as_string_list(rec["normal_data"], where + "/normal_data");
    if (r.normal.empty()) throw DataError(where + "/normal_data: empty");
    if (rec.contains("outliers") && !rec["outliers"].is_null())
      r.outliers = as_string_list(rec["outliers"], where + "/outliers");
    std::set<std::string> normal(r.normal.begin(), r.normal.end());
    for (const auto& pid : r.outliers)
      if (normal.contains(pid)) throw DataError(where + ": paper " + pid + " is both normal and outlier");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<IndAuthorRecord> load_ind(const std::filesystem::path& path) {
  try {
    return parse_ind(read_json(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SndEvalBlock parse_snd_eval(const Json& j) {
  if (!j.is_object()) throw DataError("/: expected an object of names");
  SndEvalBlock out;
  for (const auto& [name, ids] : j.items()) {
    auto& dst = out[normalized_block_key(name)];
    auto list = as_string_list(ids, path_of({name}));
    dst.insert(dst.end(), list.begin(), list.end());
  }
  return out;
}

std::vector<PaperRef> parse_unassigned(const Json& j) {
  std::vector<PaperRef> out;
  auto list = as_string_list(j, "/");
  out.reserve(list.size());
  for (const auto& s : list) out.push_back(parse_paper_ref(s));
  return out;
}

RndTruth parse_rnd_truth(const Json& j) {
  if (!j.is_object()) throw DataError("/: expected an object of paper references");
  RndTruth out;
  for (const auto& [ref, author] : j.items()) out[parse_paper_ref(ref)] = as_string(author, path_of({ref}));
  return out;
}

Json to_json(const NameBlockSet& blocks) {
  Json j = Json::object();
  for (const auto& [name, authors] : blocks) {
    Json a = Json::object();
    for (const auto& [author, papers] : authors) a[author] = papers;
    j[name] = std::move(a);
  }
  return j;
}

Json to_json(const PaperRecord& p) {
  Json authors = Json::array();
  for (const auto& a : p.authors) authors.push_back({{"name", a.name}, {"org", a.org}});
  return {{"id", p.id},           {"title", p.title},   {"abstract", p.abstract}, {"keywords", p.keywords},
          {"authors", authors},   {"venue", p.venue},   {"year", p.year}};
}

Json to_json(const PaperStore& store) {
  Json j = Json::object();
  for (const auto& [id, p] : store) j[id] = to_json(p);
  return j;
}

Json to_json(const std::vector<IndAuthorRecord>& records) {
  Json j = Json::object();
  for (const auto& r : records)
    j[r.author_id] = {{"name", r.name}, {"normal_data", r.normal}, {"outliers", r.outliers}};
  return j;
}

Json to_json(const SndEvalBlock& block) {
  Json j = Json::object();
  for (const auto& [name, ids] : block) j[name] = ids;
  return j;
}

Json to_json(const std::vector<PaperRef>& refs) {
  Json j = Json::array();
  for (const auto& r : refs) j.push_back(format_paper_ref(r));
  return j;
}

Json to_json(const RndTruth& truth) {
  Json j = Json::object();
  for (const auto& [ref, author] : truth) j[format_paper_ref(ref)] = author;
  return j;
}

std::vector<std::string> dangling_references(const NameBlockSet& blocks, const PaperStore& store) {
  std::vector<std::string> out;
  for (const auto& [name, authors] : blocks)
    for (const auto& [author, papers] : authors)
      for (const auto& pid : papers)
        if (!store.contains(pid)) out.push_back(pid);
  return out;
}

std::vector<std::string> drop_dangling(NameBlockSet& blocks, const PaperStore& store) {
  std::vector<std::string> messages;
  for (auto bit = blocks.begin(); bit != blocks.end();) {
    auto& authors = bit->second;
    for (auto ait = authors.begin(); ait != authors.end();) {
      auto& papers = ait->second;
      std::erase_if(papers, [&](const std::string& pid) {
        if (store.contains(pid)) return false;
        messages.push_back("dropped dangling paper " + pid + " (" + bit->first + "/" + ait->first + ")");
        return true;
      });
      ait = papers.empty() ? authors.erase(ait) : std::next(ait);
    }
    bit = authors.empty() ? blocks.erase(bit) : std::next(bit);
  }
  return messages;
}

SndEvalBlock flatten(const NameBlockSet& blocks) {
  SndEvalBlock out;
  for (const auto& [name, authors] : blocks) {
    auto& dst = out[name];
    for (const auto& [author, papers] : authors) dst.insert(dst.end(), papers.begin(), papers.end());
  }
  return out;
}

std::optional<std::size_t> find_author_index(const PaperRecord& paper, const NameKey& name) {
  std::vector<NameKey> keys;
  keys.reserve(paper.authors.size());
  for (const auto& a : paper.authors) {
    try {
      keys.push_back(normalize_name(a.name));
    } catch (const DataError&) {
      keys.emplace_back();
    }
  }
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (keys[i] == name) return i;
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (!keys[i].parts.empty() && same_name(keys[i], name)) return i;
  return std::nullopt;
}

std::optional<std::string> resolve_block(const PaperRef& ref, const PaperStore& store,
                                         const NameBlockSet& profiles) {
  const auto* paper = store.find(ref.paper_id);
  if (!paper || ref.author_index >= paper->authors.size()) return std::nullopt;
  NameKey key;
  try {
    key = normalize_name(paper->authors[ref.author_index].name);
  } catch (const DataError&) {
    return std::nullopt;
  }
  if (auto j = key.joined(); profiles.contains(j)) return j;
  for (const auto& [name, authors] : profiles)
    if (same_name(key, name_key_from_joined(name))) return name;
  return std::nullopt;
}

SndSplit split_snd(const NameBlockSet& blocks, const SplitRatios& r, std::uint64_t seed) {
  const double parts[3] = {r.train, r.valid, r.test};
  for (double p : parts)
    if (!(p >= 0.0) || p > 1.0) throw UsageError("split ratios must lie in [0, 1]");
  if (std::abs(r.train + r.valid + r.test - 1.0) > 1e-9) throw UsageError("split ratios must sum to 1");

  std::vector<std::string> names;
  for (const auto& [name, _] : blocks) names.push_back(name);
  const std::size_t n = names.size();
  const auto wanted = static_cast<std::size_t>(std::count_if(std::begin(parts), std::end(parts),
                                                             [](double p) { return p > 0.0; }));
  if (n < wanted)
    throw DataError("cannot split " + std::to_string(n) + " names into " + std::to_string(wanted) + " partitions");

  // Largest-remainder apportionment, then every positive share gets >= 1 name.
  std::size_t counts[3];
  double frac[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = parts[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (frac[i] > frac[best]) best = i;
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i) {
    if (parts[i] > 0.0 && counts[i] == 0) {
      int donor = static_cast<int>(std::max_element(std::begin(counts), std::end(counts)) - std::begin(counts));
      --counts[donor];
      ++counts[i];
    }
  }

  Rng rng(seed);
  rng.shuffle(names);
  SndSplit out;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < counts[0]; ++k, ++pos) out.train[names[pos]] = blocks.at(names[pos]);
  for (SndPartition* dst : {&out.valid, &out.test}) {
    std::size_t c = dst == &out.valid ? counts[1] : counts[2];
    for (std::size_t k = 0; k < c; ++k, ++pos) dst->truth[names[pos]] = blocks.at(names[pos]);
    dst->papers = flatten(dst->truth);
  }
  return out;
}

RndSplit split_rnd(const NameBlockSet& blocks, const PaperStore& papers, double ratio, double nil_fraction,
                   std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("rnd split ratio must lie in (0, 1)");
  if (!(nil_fraction >= 0.0 && nil_fraction < 1.0)) throw UsageError("nil fraction must lie in [0, 1)");

  RndSplit out;
  Rng rng(seed);
  for (const auto& [name, authors] : blocks) {
    const NameKey key = name_key_from_joined(name);

    std::vector<std::string> author_ids;
    for (const auto& [a, _] : authors) author_ids.push_back(a);
    // Stochastic rounding keeps the expected held-out share at nil_fraction
    // even for names with few authors; at least one author always stays.
    auto held = static_cast<std::size_t>(std::floor(nil_fraction * static_cast<double>(author_ids.size()) +
                                                    rng.uniform()));
    held = std::min(held, author_ids.empty() ? 0 : author_ids.size() - 1);
    rng.shuffle(author_ids);
    std::set<std::string> nil_authors(author_ids.begin(), author_ids.begin() + static_cast<std::ptrdiff_t>(held));

    for (const auto& [author, ids] : authors) {
      std::vector<const PaperRecord*> recs;
      for (const auto& pid : ids) {
        if (const auto* p = papers.find(pid)) {
          recs.push_back(p);
        } else {
          out.warnings.push_back("dropped dangling paper " + pid + " (" + name + "/" + author + ")");
        }
      }
      if (recs.empty()) continue;

      auto make_ref = [&](const PaperRecord& p) -> std::optional<PaperRef> {
        auto idx = find_author_index(p, key);
        if (!idx) {
          out.warnings.push_back("paper " + p.id + " lists no author matching " + name + "; skipped");
          return std::nullopt;
        }
        return PaperRef{p.id, *idx};
      };

      if (nil_authors.contains(author)) {
        for (const auto* p : recs) {
          if (auto ref = make_ref(*p)) {
            out.unassigned.push_back(*ref);
            out.truth[*ref] = std::string(kNil);
          }
        }
        continue;
      }

      std::sort(recs.begin(), recs.end(), [](const PaperRecord* a, const PaperRecord* b) {
        return std::tie(a->year, a->id) < std::tie(b->year, b->id);
      });
      const std::size_t n = recs.size();
      if (n > 1 && std::all_of(recs.begin(), recs.end(), [](const PaperRecord* p) { return p->year == 0; }))
        out.warnings.push_back("author " + name + "/" + author + " has no publication years; split by id order");
      std::size_t k = n <= 1 ? 0 : static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
      k = std::min(k, n - 1);

      auto& profile = out.profiles[name][author];
      for (std::size_t i = 0; i < n - k; ++i) profile.push_back(recs[i]->id);
      for (std::size_t i = n - k; i < n; ++i) {
        if (auto ref = make_ref(*recs[i])) {
          out.unassigned.push_back(*ref);
          out.truth[*ref] = author;
        }
      }
    }
  }
  return out;
}

}  // namespace wiw
