#pragma once

// Traceability testbeds: source/target artifacts plus a ground-truth link
// oracle, loaded from a CoEST-style layout or generated synthetically.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tracex {

enum class Role { kSource, kTarget };

struct Artifact {
  std::string id;
  Role role = Role::kSource;
  std::string raw_text;
  std::string origin_path;

  /// Empty artifacts are admitted; callers surface them as diagnostics.
  bool is_empty() const { return raw_text.find_first_not_of(" \t\r\n") == std::string::npos; }
};

struct TraceLink {
  std::string source_id;
  std::string target_id;

  auto operator<=>(const TraceLink&) const = default;
};

struct TestbedCounts {
  std::size_t all = 0;
  std::size_t links = 0;
  std::size_t non_links = 0;

  bool operator==(const TestbedCounts&) const = default;
};

struct Testbed {
  std::string name;
  std::string link_type;
  std::string language_tag;
  std::vector<Artifact> sources;  // sorted by id
  std::vector<Artifact> targets;  // sorted by id
  std::set<TraceLink> links;

  TestbedCounts counts() const {
    TestbedCounts c;
    c.all = sources.size() * targets.size();
    c.links = links.size();
    c.non_links = c.all - c.links;
    return c;
  }
  bool is_link(const std::string& source_id, const std::string& target_id) const {
    return links.count(TraceLink{source_id, target_id}) > 0;
  }
  std::vector<const Artifact*> empty_artifacts() const;
};

struct CandidatePair {
  std::string source_id;
  std::string target_id;
  bool is_link = false;
  // Positions into Testbed::sources / Testbed::targets.
  std::size_t source_index = 0;
  std::size_t target_index = 0;

  bool operator==(const CandidatePair&) const = default;
};

/// Manifest keys: name, link_type, language_tag, source_dir, target_dir,
/// oracle_file. Relative directories resolve against the manifest's folder.
/// An optional "counts" object {all, links, non_links} is reconciled after
/// loading.
Testbed load_testbed(const std::filesystem::path& manifest_path);

/// Parses a CoEST answer file body. Each record is
/// `source_id<ws>target_id_1 target_id_2 ...`; '#' lines and blank lines are
/// skipped. Throws DataError naming the line for records without targets.
std::vector<TraceLink> parse_oracle(const std::string& text);

/// Full cartesian product ordered by (source_id, target_id).
std::vector<CandidatePair> enumerate_candidates(const Testbed& tb);

/// Planted-overlap testbed. Target j is linked to source j mod n_src. A linked
/// target rewrites its source's token stream, keeping `overlap` of the source
/// vocabulary and renaming the rest to target-private words; distinct sources
/// never share words.
Testbed generate_synthetic(std::uint64_t seed, std::size_t n_src, std::size_t n_tgt,
                           double overlap);

/// Writes manifest.json, sources/, targets/ and oracle.txt under `dir`.
std::filesystem::path save_testbed(const Testbed& tb, const std::filesystem::path& dir);

}  // namespace tracex
