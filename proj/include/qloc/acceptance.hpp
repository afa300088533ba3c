#pragma once

// Acceptance runner: one criterion per JSON file in a config directory.
//
// Each file holds {"id", "name", "group", "params"}; params carry the sizes,
// seeds offsets and tolerances of the criterion. Verdicts are recomputed from
// the evidence stored next to them.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qloc/io.hpp"

namespace qloc {

struct CriterionConfig {
  int id = 0;
  std::string name;
  std::string group;
  Json params;
  std::filesystem::path file;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string group;
  std::vector<Verdict> verdicts;
  Json evidence = Json::object();
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0: no runtime budget

  bool within_budget() const { return budget_seconds <= 0.0 || seconds <= budget_seconds; }
  bool pass() const;
};

struct AcceptanceRun {
  std::uint64_t seed = 0;
  std::vector<CriterionResult> results;

  bool pass() const;
  /// Timing fields are dropped when with_timing is false; the rest is deterministic.
  Json to_json(bool with_timing = true) const;
};

/// Loads every *.json in `dir`, sorted by id. Throws InputError naming the file.
std::vector<CriterionConfig> load_acceptance_configs(const std::filesystem::path& dir);

/// `filter` selects criteria by group, name or id; empty runs everything.
AcceptanceRun run_acceptance(const std::filesystem::path& dir, std::uint64_t seed,
                             const std::string& filter = "");

std::filesystem::path default_acceptance_dir();

}  // namespace qloc
