#include "tracex/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "tracex/error.hpp"

namespace tracex {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Artifact> read_artifact_dir(const fs::path& dir, Role role) {
  if (!fs::is_directory(dir)) throw DataError("artifact directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Artifact> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    Artifact a;
    a.id = f.stem().string();
    a.role = role;
    a.raw_text = read_file(f);
    a.origin_path = f.string();
    if (a.id.empty()) throw DataError("artifact file yields an empty id: " + f.string());
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), [](const Artifact& x, const Artifact& y) { return x.id < y.id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id) {
      throw DataError("duplicate artifact id '" + out[i].id + "' in " + dir.string());
    }
  }
  return out;
}

// Exact id first, then the CoEST file-name convention (basename sans extension).
std::optional<std::string> resolve_id(const std::string& raw, const std::set<std::string>& ids) {
  if (ids.count(raw)) return raw;
  std::string stem = fs::path(raw).stem().string();
  if (ids.count(stem)) return stem;
  return std::nullopt;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string json_string(const json& j, const char* key, const fs::path& manifest) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw DataError("manifest " + manifest.string() + " lacks string field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

}  // namespace

std::vector<const Artifact*> Testbed::empty_artifacts() const {
  std::vector<const Artifact*> out;
  for (const auto& a : sources)
    if (a.is_empty()) out.push_back(&a);
  for (const auto& a : targets)
    if (a.is_empty()) out.push_back(&a);
  return out;
}

std::vector<TraceLink> parse_oracle(const std::string& text) {
  std::vector<TraceLink> links;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;

    std::istringstream fields(line);
    std::string source;
    fields >> source;
    std::string target;
    bool any = false;
    while (fields >> target) {
      links.push_back(TraceLink{source, target});
      any = true;
    }
    if (!any) {
      throw DataError("malformed oracle line " + std::to_string(line_no) + ": '" + line +
                      "' (expected a source id followed by at least one target id)");
    }
  }
  return links;
}

Testbed load_testbed(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) throw DataError("manifest not found: " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw DataError("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  const fs::path base = manifest_path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  Testbed tb;
  tb.name = json_string(manifest, "name", manifest_path);
  tb.link_type = manifest.value("link_type", std::string{});
  tb.language_tag = manifest.value("language_tag", std::string{});
  tb.sources = read_artifact_dir(resolve(json_string(manifest, "source_dir", manifest_path)), Role::kSource);
  tb.targets = read_artifact_dir(resolve(json_string(manifest, "target_dir", manifest_path)), Role::kTarget);

  const fs::path oracle_path = resolve(json_string(manifest, "oracle_file", manifest_path));
  if (!fs::exists(oracle_path)) throw DataError("oracle file not found: " + oracle_path.string());
  const auto raw_links = parse_oracle(read_file(oracle_path));

  std::set<std::string> source_ids, target_ids;
  for (const auto& a : tb.sources) source_ids.insert(a.id);
  for (const auto& a : tb.targets) target_ids.insert(a.id);

  std::vector<std::string> unknown;
  auto note_unknown = [&](const std::string& id) {
    if (std::find(unknown.begin(), unknown.end(), id) == unknown.end()) unknown.push_back(id);
  };
  for (const auto& l : raw_links) {
    auto s = resolve_id(l.source_id, source_ids);
    auto t = resolve_id(l.target_id, target_ids);
    if (!s) note_unknown(l.source_id);
    if (!t) note_unknown(l.target_id);
    if (s && t) tb.links.insert(TraceLink{*s, *t});
  }
  if (!unknown.empty()) {
    throw DataError("oracle " + oracle_path.string() +
                    " references ids with no artifact file: " + join(unknown, ", "));
  }

  if (manifest.contains("counts")) {
    const auto& c = manifest.at("counts");
    TestbedCounts expected{c.value("all", std::size_t{0}), c.value("links", std::size_t{0}),
                           c.value("non_links", std::size_t{0})};
    const auto got = tb.counts();
    if (!(expected == got)) {
      std::ostringstream msg;
      msg << "testbed '" << tb.name << "' counts do not reconcile with manifest: expected all="
          << expected.all << " links=" << expected.links << " non_links=" << expected.non_links
          << ", loaded all=" << got.all << " links=" << got.links << " non_links=" << got.non_links;
      throw DataError(msg.str());
    }
  }
  return tb;
}

std::vector<CandidatePair> enumerate_candidates(const Testbed& tb) {
  std::vector<std::size_t> src_order(tb.sources.size()), tgt_order(tb.targets.size());
  for (std::size_t i = 0; i < src_order.size(); ++i) src_order[i] = i;
  for (std::size_t j = 0; j < tgt_order.size(); ++j) tgt_order[j] = j;
  std::stable_sort(src_order.begin(), src_order.end(),
                   [&](auto a, auto b) { return tb.sources[a].id < tb.sources[b].id; });
  std::stable_sort(tgt_order.begin(), tgt_order.end(),
                   [&](auto a, auto b) { return tb.targets[a].id < tb.targets[b].id; });

  std::vector<CandidatePair> out;
  out.reserve(src_order.size() * tgt_order.size());
  for (auto i : src_order) {
    for (auto j : tgt_order) {
      const auto& s = tb.sources[i].id;
      const auto& t = tb.targets[j].id;
      out.push_back(CandidatePair{s, t, tb.is_link(s, t), i, j});
    }
  }
  return out;
}

namespace {

constexpr std::array<const char*, 16> kSyllables = {"ka", "lo", "mi", "ne", "po", "ru", "sa", "ti",
                                                    "vu", "we", "xo", "yi", "zu", "be", "do", "fa"};

// Injective: fixed-width syllables over a base-16 expansion; single-digit ids
// get a leading zero syllable, which multi-digit expansions never start with.
std::string pseudo_word(std::size_t id) {
  std::string digits;
  do {
    digits.insert(0, kSyllables[id % kSyllables.size()]);
    id /= kSyllables.size();
  } while (id > 0);
  if (digits.size() < 4) digits.insert(0, kSyllables[0]);
  return digits;
}

std::size_t draw(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[draw(rng, i)]);
}

std::string padded(char prefix, std::size_t i, std::size_t width) {
  std::string n = std::to_string(i);
  return std::string(1, prefix) + std::string(width > n.size() ? width - n.size() : 0, '0') + n;
}

std::string render(const std::vector<std::string>& tokens) {
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    text += tokens[i];
    text += (i + 1) % 8 == 0 ? '\n' : ' ';
  }
  if (!text.empty()) text.back() = '\n';
  return text;
}

}  // namespace

Testbed generate_synthetic(std::uint64_t seed, std::size_t n_src, std::size_t n_tgt, double overlap) {
  if (n_src < 1 || n_tgt < 1) throw ConfigError("synthetic testbed needs at least one source and one target");
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw ConfigError("overlap must lie in [0,1], got " + std::to_string(overlap));
  }
  constexpr std::size_t kTopicWords = 12;
  constexpr std::size_t kMinLen = 24;
  constexpr std::size_t kMaxLen = 48;

  std::mt19937_64 rng(seed);
  std::size_t next_word = 0;

  Testbed tb;
  tb.name = "synthetic";
  tb.link_type = "req2src";
  tb.language_tag = "synthetic";
  const std::size_t width = std::to_string(std::max(n_src, n_tgt)).size();

  std::vector<std::vector<std::string>> topic_vocab(n_src);
  std::vector<std::vector<std::size_t>> source_streams(n_src);  // indices into topic_vocab
  for (std::size_t i = 0; i < n_src; ++i) {
    for (std::size_t k = 0; k < kTopicWords; ++k) topic_vocab[i].push_back(pseudo_word(next_word++));
    const std::size_t len = kMinLen + draw(rng, kMaxLen - kMinLen + 1);
    // Zipf-like word frequencies: word k has weight 1/(k+1).
    std::vector<double> cumulative(kTopicWords);
    double acc = 0.0;
    for (std::size_t k = 0; k < kTopicWords; ++k) cumulative[k] = (acc += 1.0 / static_cast<double>(k + 1));
    for (std::size_t t = 0; t < len; ++t) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
      const auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                              cumulative.begin());
      source_streams[i].push_back(std::min(k, kTopicWords - 1));
    }
    std::vector<std::string> tokens;
    for (auto k : source_streams[i]) tokens.push_back(topic_vocab[i][k]);
    tb.sources.push_back(Artifact{padded('S', i + 1, width), Role::kSource, render(tokens), "<synthetic>"});
  }

  const auto shared = static_cast<std::size_t>(std::llround(overlap * static_cast<double>(kTopicWords)));
  for (std::size_t j = 0; j < n_tgt; ++j) {
    const std::size_t s = j % n_src;
    std::vector<std::size_t> order(kTopicWords);
    for (std::size_t k = 0; k < kTopicWords; ++k) order[k] = k;
    shuffle_in_place(order, rng);
    std::vector<std::string> mapping(kTopicWords);
    for (std::size_t r = 0; r < kTopicWords; ++r) {
      mapping[order[r]] = r < shared ? topic_vocab[s][order[r]] : pseudo_word(next_word++);
    }
    std::vector<std::string> tokens;
    for (auto k : source_streams[s]) tokens.push_back(mapping[k]);
    shuffle_in_place(tokens, rng);
    Artifact a{padded('T', j + 1, width), Role::kTarget, render(tokens), "<synthetic>"};
    tb.links.insert(TraceLink{tb.sources[s].id, a.id});
    tb.targets.push_back(std::move(a));
  }
  return tb;
}

fs::path save_testbed(const Testbed& tb, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "sources", ec);
  fs::create_directories(dir / "targets", ec);
  if (ec) throw IoError("cannot create testbed directory " + dir.string() + ": " + ec.message());

  auto write = [](const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << body;
  };
  for (const auto& a : tb.sources) write(dir / "sources" / (a.id + ".txt"), a.raw_text);
  for (const auto& a : tb.targets) write(dir / "targets" / (a.id + ".txt"), a.raw_text);

  std::map<std::string, std::vector<std::string>> by_source;
  for (const auto& l : tb.links) by_source[l.source_id].push_back(l.target_id);
  std::string oracle = "# source_id target_id...\n";
  for (const auto& [s, ts] : by_source) oracle += s + "\t" + join(ts, " ") + "\n";
  write(dir / "oracle.txt", oracle);

  const auto c = tb.counts();
  json manifest = {{"name", tb.name},
                   {"link_type", tb.link_type},
                   {"language_tag", tb.language_tag},
                   {"source_dir", "sources"},
                   {"target_dir", "targets"},
                   {"oracle_file", "oracle.txt"},
                   {"counts", {{"all", c.all}, {"links", c.links}, {"non_links", c.non_links}}}};
  const fs::path manifest_path = dir / "manifest.json";
  write(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

}  // namespace tracex
