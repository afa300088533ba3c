#include "qloc/local_net.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>

#include "qloc/errors.hpp"
#include "qloc/linalg.hpp"

namespace qloc {

NetConfig::NetConfig(int n_sites, int site_dim) : n_sites_(n_sites), site_dim_(site_dim) {
  if (n_sites < 1) throw InputError("NetConfig: n_sites must be >= 1");
  if (site_dim < 2) throw InputError("NetConfig: site_dim must be >= 2");
  if (n_sites > 62) throw InputError("NetConfig: n_sites too large");
  dim_ = ipow(static_cast<std::size_t>(site_dim), static_cast<std::size_t>(n_sites));
}

Region::Region(std::initializer_list<int> sites) : Region(std::vector<int>(sites)) {}

Region::Region(std::vector<int> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end()) {
    throw InputError("Region: duplicate site index");
  }
  if (!sites_.empty() && sites_.front() < 0) {
    throw InputError("Region: negative site index");
  }
}

Region Region::interval(int first, int last_exclusive) {
  std::vector<int> s;
  for (int i = first; i < last_exclusive; ++i) s.push_back(i);
  return Region(std::move(s));
}

Region Region::full(const NetConfig& config) {
  return interval(0, config.n_sites());
}

Region Region::from_mask(std::uint64_t mask) {
  std::vector<int> s;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1U) s.push_back(i);
  }
  return Region(std::move(s));
}

Region Region::parse(std::string_view text) {
  std::vector<int> s;
  if (text.empty()) return Region();
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    std::string_view token = text.substr(pos, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token.empty()) {
      throw InputError("malformed region \"" + std::string(text) +
                       "\": empty site index at offset " + std::to_string(pos));
    }
    int value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size() || value < 0) {
      throw InputError("malformed region \"" + std::string(text) + "\": bad site index '" +
                       std::string(token) + "'");
    }
    s.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  try {
    return Region(std::move(s));
  } catch (const InputError& e) {
    throw InputError("malformed region \"" + std::string(text) + "\": " + e.what());
  }
}

bool Region::contains(int site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

bool Region::valid_for(const NetConfig& config) const {
  return sites_.empty() || sites_.back() < config.n_sites();
}

std::uint64_t Region::mask() const {
  std::uint64_t m = 0;
  for (int s : sites_) m |= (std::uint64_t{1} << s);
  return m;
}

std::string Region::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (i) os << ',';
    os << sites_[i];
  }
  return os.str();
}

bool leq(const Region& r1, const Region& r2) {
  return std::includes(r2.sites().begin(), r2.sites().end(), r1.sites().begin(),
                       r1.sites().end());
}

bool orthogonal(const Region& r1, const Region& r2) {
  return intersection(r1, r2).empty();
}

Region join(const Region& r1, const Region& r2) {
  std::vector<int> out;
  std::set_union(r1.sites().begin(), r1.sites().end(), r2.sites().begin(), r2.sites().end(),
                 std::back_inserter(out));
  return Region(std::move(out));
}

Region intersection(const Region& r1, const Region& r2) {
  std::vector<int> out;
  std::set_intersection(r1.sites().begin(), r1.sites().end(), r2.sites().begin(),
                        r2.sites().end(), std::back_inserter(out));
  return Region(std::move(out));
}

Region complement(const Region& r, const NetConfig& config) {
  std::vector<int> out;
  for (int s = 0; s < config.n_sites(); ++s) {
    if (!r.contains(s)) out.push_back(s);
  }
  return Region(std::move(out));
}

Region shifted(const Region& r, int shift, int n_sites) {
  std::vector<int> out;
  out.reserve(r.size());
  for (int s : r.sites()) out.push_back((((s + shift) % n_sites) + n_sites) % n_sites);
  return Region(std::move(out));
}

namespace {

struct AxiomChecker {
  const NetConfig& config;
  const OrthogonalityRelation& perp;
  AxiomReport& report;
  std::vector<Region> all_regions;  // filled only when small enough to search

  static constexpr std::size_t kMaxViolations = 32;

  void record(std::string axiom, Region a, Region b, Region c) {
    if (report.violations.size() < kMaxViolations) {
      report.violations.push_back({std::move(axiom), std::move(a), std::move(b), std::move(c)});
    }
  }

  // (i.) every region has an orthogonal partner; proper regions need a
  // nonempty one, the full region is paired with the scalars.
  void check_i(const Region& alpha) {
    const bool is_full = alpha.size() == static_cast<std::size_t>(config.n_sites());
    auto acceptable = [&](const Region& beta) {
      return perp(alpha, beta) && (is_full || !beta.empty());
    };
    const Region guess = is_full ? Region() : complement(alpha, config);
    if (acceptable(guess)) return;
    for (const Region& beta : all_regions) {
      if (acceptable(beta)) return;
    }
    report.axiom_i = false;
    record("i", alpha, Region(), Region());
  }

  // (ii.) α ≤ β and β ⊥ γ imply α ⊥ γ.
  void check_ii(const Region& alpha, const Region& beta, const Region& gamma) {
    if (leq(alpha, beta) && perp(beta, gamma) && !perp(alpha, gamma)) {
      report.axiom_ii = false;
      record("ii", alpha, beta, gamma);
    }
  }

  // (iii.) α ⊥ β and α ⊥ γ give some δ ≥ β, γ with α ⊥ δ.
  void check_iii(const Region& alpha, const Region& beta, const Region& gamma) {
    if (!(perp(alpha, beta) && perp(alpha, gamma))) return;
    const Region candidate = join(beta, gamma);
    if (perp(alpha, candidate)) return;
    for (const Region& delta : all_regions) {
      if (leq(beta, delta) && leq(gamma, delta) && perp(alpha, delta)) return;
    }
    report.axiom_iii = false;
    record("iii", alpha, beta, gamma);
  }
};

}  // namespace

AxiomReport verify_index_axioms(const NetConfig& config, std::uint64_t seed) {
  return verify_index_axioms(config, OrthogonalityRelation(orthogonal), seed);
}

AxiomReport verify_index_axioms(const NetConfig& config, const OrthogonalityRelation& perp,
                                std::uint64_t seed) {
  AxiomReport report;
  const int n = config.n_sites();
  if (n < 2) {
    report.precondition_violations.push_back(
        "axiom (i.): on a " + std::to_string(n) + "-site chain the full region {" +
        Region::full(config).to_string() +
        "} is its own only nonempty region; its sole orthogonal partner is the empty "
        "region (needs n_sites >= 2)");
  }

  AxiomChecker checker{config, perp, report, {}};
  const std::uint64_t n_regions = std::uint64_t{1} << n;
  if (n <= 10) {
    checker.all_regions.reserve(n_regions);
    for (std::uint64_t m = 0; m < n_regions; ++m) {
      checker.all_regions.push_back(Region::from_mask(m));
    }
  }

  if (n <= kExhaustiveAxiomSites) {
    report.exhaustive = true;
    const auto& regions = checker.all_regions;
    for (const Region& alpha : regions) checker.check_i(alpha);
    report.regions_checked = regions.size();
    for (const Region& alpha : regions) {
      for (const Region& beta : regions) {
        for (const Region& gamma : regions) {
          checker.check_ii(alpha, beta, gamma);
          checker.check_iii(alpha, beta, gamma);
          ++report.triples_checked;
        }
      }
    }
    return report;
  }

  Rng rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, n_regions - 1);
  for (std::size_t t = 0; t < kSampledAxiomTriples; ++t) {
    const Region alpha = Region::from_mask(pick(rng));
    const Region beta = Region::from_mask(pick(rng));
    const Region gamma = Region::from_mask(pick(rng));
    checker.check_i(alpha);
    ++report.regions_checked;
    // (ii.) needs α ≤ β to be informative; also test the sub-region α ∩ β.
    checker.check_ii(alpha, beta, gamma);
    checker.check_ii(intersection(alpha, beta), beta, gamma);
    checker.check_iii(alpha, beta, gamma);
    ++report.triples_checked;
  }
  return report;
}

}  // namespace qloc
