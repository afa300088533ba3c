#pragma once

// Chain geometry and the region index family.
//
// Regions are arbitrary subsets of the sites {0, ..., n_sites-1}, ordered by
// inclusion, with orthogonality realized as disjointness. The empty region
// indexes the scalars C·e.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace qloc {

class NetConfig {
 public:
  NetConfig(int n_sites, int site_dim = 2);

  int n_sites() const { return n_sites_; }
  int site_dim() const { return site_dim_; }
  /// site_dim^n_sites
  std::size_t dim() const { return dim_; }

  friend bool operator==(const NetConfig&, const NetConfig&) = default;

 private:
  int n_sites_;
  int site_dim_;
  std::size_t dim_;
};

class Region {
 public:
  Region() = default;
  Region(std::initializer_list<int> sites);
  explicit Region(std::vector<int> sites);

  static Region interval(int first, int last_exclusive);
  static Region full(const NetConfig& config);
  static Region from_mask(std::uint64_t mask);
  /// Comma-separated literal, e.g. "0,2,3"; the empty string is the empty region.
  static Region parse(std::string_view text);

  const std::vector<int>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  bool contains(int site) const;
  bool valid_for(const NetConfig& config) const;
  std::uint64_t mask() const;
  std::string to_string() const;

  friend auto operator<=>(const Region&, const Region&) = default;

 private:
  std::vector<int> sites_;
};

bool leq(const Region& r1, const Region& r2);
bool orthogonal(const Region& r1, const Region& r2);
Region join(const Region& r1, const Region& r2);
Region intersection(const Region& r1, const Region& r2);
Region complement(const Region& r, const NetConfig& config);
/// Cyclic translate of every site by `shift` on a chain of `n_sites`.
Region shifted(const Region& r, int shift, int n_sites);

using OrthogonalityRelation = std::function<bool(const Region&, const Region&)>;

struct AxiomViolation {
  std::string axiom;  // "i", "ii" or "iii"
  Region alpha;
  Region beta;
  Region gamma;
};

struct AxiomReport {
  bool exhaustive = false;
  std::size_t regions_checked = 0;
  std::size_t triples_checked = 0;
  bool axiom_i = true;
  bool axiom_ii = true;
  bool axiom_iii = true;
  std::vector<AxiomViolation> violations;
  std::vector<std::string> precondition_violations;

  bool all_pass() const {
    return axiom_i && axiom_ii && axiom_iii && precondition_violations.empty();
  }
};

inline constexpr int kExhaustiveAxiomSites = 5;
inline constexpr std::size_t kSampledAxiomTriples = 10000;

/// Checks the three index-set axioms for the disjointness relation.
AxiomReport verify_index_axioms(const NetConfig& config, std::uint64_t seed = 0);

/// Same, with a caller-supplied orthogonality relation.
AxiomReport verify_index_axioms(const NetConfig& config,
                                const OrthogonalityRelation& perp,
                                std::uint64_t seed = 0);

}  // namespace qloc
