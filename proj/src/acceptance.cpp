#include "qloc/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "qloc/asymptotics.hpp"
#include "qloc/errors.hpp"
#include "qloc/forms.hpp"
#include "qloc/gns.hpp"

namespace qloc {

namespace {

// ---- config access -------------------------------------------------------

[[noreturn]] void bad_param(const CriterionConfig& c, const std::string& key, const std::string& why) {
  throw InputError(c.file.string() + ": field 'params." + key + "': " + why);
}

const Json& param(const CriterionConfig& c, const std::string& key) {
  const auto it = c.params.find(key);
  if (it == c.params.end()) bad_param(c, key, "missing");
  return *it;
}

double num(const CriterionConfig& c, const std::string& key) {
  const Json& j = param(c, key);
  if (!j.is_number()) bad_param(c, key, "expected a number");
  return j.get<double>();
}

int integer(const CriterionConfig& c, const std::string& key) {
  const Json& j = param(c, key);
  if (!j.is_number_integer()) bad_param(c, key, "expected an integer");
  return j.get<int>();
}

std::vector<int> int_list(const CriterionConfig& c, const std::string& key) {
  const Json& j = param(c, key);
  if (!j.is_array() || j.empty()) bad_param(c, key, "expected a nonempty list of integers");
  std::vector<int> out;
  for (const Json& v : j) {
    if (!v.is_number_integer()) bad_param(c, key, "expected a nonempty list of integers");
    out.push_back(v.get<int>());
  }
  return out;
}

std::vector<double> num_list(const CriterionConfig& c, const std::string& key) {
  const Json& j = param(c, key);
  if (!j.is_array() || j.empty()) bad_param(c, key, "expected a nonempty list of numbers");
  std::vector<double> out;
  for (const Json& v : j) {
    if (!v.is_number()) bad_param(c, key, "expected a nonempty list of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string text(const CriterionConfig& c, const std::string& key) {
  const Json& j = param(c, key);
  if (!j.is_string()) bad_param(c, key, "expected a string");
  return j.get<std::string>();
}

Region region_param(const CriterionConfig& c, const Json& j, const std::string& key) {
  if (!j.is_string()) bad_param(c, key, "expected a region literal");
  try {
    return Region::parse(j.get<std::string>());
  } catch (const InputError& e) {
    bad_param(c, key, e.what());
  }
}

// A state panel entry: {"n": sites, "kind": "pure"|"mixed"|"trace", "rank": k, "count": m}.
struct PanelEntry {
  int n = 1;
  std::string kind;
  int rank = 1;
  int count = 1;
};

std::vector<PanelEntry> panel_param(const CriterionConfig& c, const std::string& key) {
  const Json& j = param(c, key);
  if (!j.is_array() || j.empty()) bad_param(c, key, "expected a nonempty list of panel entries");
  std::vector<PanelEntry> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& e = j[i];
    const std::string where = key + "[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("n") || !e.contains("kind") || !e["n"].is_number_integer() ||
        !e["kind"].is_string()) {
      bad_param(c, where, "expected {\"n\": int, \"kind\": string, ...}");
    }
    PanelEntry p;
    p.n = e["n"].get<int>();
    p.kind = e["kind"].get<std::string>();
    p.rank = e.value("rank", 1);
    p.count = e.value("count", 1);
    if (p.n < 1 || p.n > 4) bad_param(c, where, "n must be in 1..4");
    if (p.kind != "pure" && p.kind != "mixed" && p.kind != "trace") {
      bad_param(c, where, "kind must be pure, mixed or trace");
    }
    if (p.kind == "mixed" && (p.rank < 2 || static_cast<std::size_t>(p.rank) > ipow(2, p.n))) {
      bad_param(c, where, "rank out of range");
    }
    out.push_back(p);
  }
  return out;
}

struct PanelState {
  Functional omega;
  std::string label;
  bool pure = false;
};

std::vector<PanelState> build_panel(const std::vector<PanelEntry>& entries, Rng& rng) {
  std::vector<PanelState> out;
  for (const PanelEntry& p : entries) {
    const NetConfig c(p.n);
    for (int k = 0; k < p.count; ++k) {
      const std::string tag = "n" + std::to_string(p.n) + "_" + p.kind;
      if (p.kind == "pure") {
        out.push_back({vector_state(c, random_unit_vector(c.dim(), rng)), tag, true});
      } else if (p.kind == "mixed") {
        out.push_back({density_state(c, random_density(c.dim(), p.rank, rng)),
                       tag + std::to_string(p.rank), false});
      } else {
        out.push_back({maximally_mixed(c), tag, false});
      }
    }
  }
  return out;
}

// ---- verdicts ------------------------------------------------------------

Verdict at_most(std::string name, double value, double tol) {
  return {std::move(name), value <= tol, value, "<=", tol};
}

Verdict at_least(std::string name, double value, double tol) {
  return {std::move(name), value >= tol, value, ">=", tol};
}

Verdict equals(std::string name, double value, double target) {
  return {std::move(name), value == target, value, "==", target};
}

Verdict within(std::string name, double value, double lo, double hi) {
  return {std::move(name), value >= lo && value <= hi, value, "in", Json::array({lo, hi})};
}

Matrix unit_norm(const Matrix& m) { return m / op_norm(m); }

Rng criterion_rng(std::uint64_t seed, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return Rng(seq);
}

// ---- criteria ------------------------------------------------------------

void gns_reconstruction(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const int states = integer(cfg, "states");
  const std::vector<int> sites = int_list(cfg, "sites");
  const int randoms = integer(cfg, "random_elements");
  const double tol = num(cfg, "tol");
  double worst = 0.0;
  Json per_state = Json::array();
  for (int k = 0; k < states; ++k) {
    const NetConfig c(sites[k % sites.size()]);
    const std::size_t d = c.dim();
    const std::size_t rank = 1 + rng() % d;
    const Functional w = density_state(c, random_density(d, rank, rng));
    const GnsTriple t = gns_construct(w);
    const Vector& xi = t.cyclic_vector();
    double defect = 0.0;
    auto check = [&](const Matrix& x) {
      defect = std::max(defect, std::abs(evaluate(w, x) - xi.dot(t.rep(x) * xi)));
    };
    for (const Matrix& e : matrix_units(d)) check(e);
    for (int s = 0; s < randoms; ++s) check(unit_norm(ginibre(d, d, rng)));
    worst = std::max(worst, defect);
    per_state.push_back({{"n", c.n_sites()}, {"rank", rank}, {"hilbert_dim", t.hilbert_dim()},
                         {"defect", defect}});
  }
  r.evidence["states"] = per_state;
  r.verdicts.push_back(at_most("max_reconstruction_defect", worst, tol));
}

void purity_agreement(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const std::vector<PanelState> panel = build_panel(panel_param(cfg, "panel"), rng);
  const auto samples = static_cast<std::size_t>(integer(cfg, "samples"));
  const double threshold = num(cfg, "proportionality_threshold");
  std::size_t disagreements = 0, bad_pure = 0, bad_mixed = 0;
  double min_defect = HUGE_VAL;
  Json rows = Json::array();
  for (std::size_t k = 0; k < panel.size(); ++k) {
    const PanelState& s = panel[k];
    const PurityCertificate p = purity_certificate(s.omega, kDefaultTol, seed + k, samples);
    if (!p.legs_agree() || p.pure != s.pure) ++disagreements;
    if (s.pure && p.commutant_dim != 1) ++bad_pure;
    if (!s.pure) {
      const bool ok = p.witness_verified() && p.proportionality_defect >= threshold;
      if (!ok) ++bad_mixed;
      min_defect = std::min(min_defect, p.proportionality_defect);
    }
    rows.push_back({{"state", s.label},
                    {"commutant_dim", p.commutant_dim},
                    {"pure", p.pure},
                    {"sampling_pure", p.sampling_pure()},
                    {"extremal", p.extremal()},
                    {"witness_verified", p.witness_verified()},
                    {"proportionality_defect", p.proportionality_defect},
                    {"nu_mass", p.nu_mass},
                    {"decomposition_gap", p.decomposition_gap},
                    {"dominated_nonproportional", p.dominated_nonproportional}});
  }
  r.evidence["panel"] = rows;
  r.verdicts.push_back(at_least("panel_size", static_cast<double>(panel.size()), 30));
  r.verdicts.push_back(equals("three_way_disagreements", static_cast<double>(disagreements), 0));
  r.verdicts.push_back(equals("pure_states_with_commutant_dim_not_1", static_cast<double>(bad_pure), 0));
  r.verdicts.push_back(equals("mixed_states_without_verified_witness", static_cast<double>(bad_mixed), 0));
  r.verdicts.push_back(at_least("min_witness_proportionality_defect", min_defect, threshold));
}

void commutant_equality(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const std::vector<PanelState> panel = build_panel(panel_param(cfg, "panel"), rng);
  const double tol = num(cfg, "tol");
  double worst = 0.0;
  std::size_t dim_mismatch = 0;
  Json rows = Json::array();
  for (const PanelState& s : panel) {
    const GnsTriple t = gns_construct(s.omega);
    const CommutantEquality e = commutant_equality_check(t);
    worst = std::max(worst, e.defect);
    if (e.local_dim != e.full_dim) ++dim_mismatch;
    rows.push_back({{"state", s.label}, {"local_dim", e.local_dim}, {"full_dim", e.full_dim},
                    {"defect", e.defect}});
  }
  r.evidence["panel"] = rows;
  r.verdicts.push_back(at_most("max_principal_angle_defect", worst, tol));
  r.verdicts.push_back(equals("dimension_mismatches", static_cast<double>(dim_mismatch), 0));
}

void rep_contractivity(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const std::vector<PanelState> panel = build_panel(panel_param(cfg, "panel"), rng);
  const int per_state = integer(cfg, "samples_per_state");
  const double tol = num(cfg, "tol");
  double worst = 0.0;
  Json rows = Json::array();
  for (const PanelState& s : panel) {
    const GnsTriple t = gns_construct(s.omega);
    const std::size_t d = s.omega.config().dim();
    std::vector<Matrix> xs;
    for (int k = 0; k < per_state; ++k) xs.push_back(ginibre(d, d, rng));
    const double ratio = rep_norm_bound_check(t, xs);
    worst = std::max(worst, ratio);
    rows.push_back({{"state", s.label}, {"max_ratio", ratio}});
  }
  r.evidence["panel"] = rows;
  r.verdicts.push_back(at_most("max_norm_ratio", worst, 1.0 + tol));
}

void product_clustering(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const NetConfig c(integer(cfg, "n_sites"));
  const double tol = num(cfg, "tol");
  std::vector<Matrix> rhos;
  for (int s = 0; s < c.n_sites(); ++s) rhos.push_back(random_density(2, 2, rng));
  const Functional w = product_state(c, rhos);
  double worst = 0.0;
  std::size_t pairs = 0;
  std::string worst_pair;
  for (int s = 0; s < c.n_sites(); ++s) {
    for (int t = s + 1; t < c.n_sites(); ++t) {
      for (char p : {'X', 'Y', 'Z'}) {
        const Element a = embed(pauli(p), Region{s}, c);
        for (char q : {'X', 'Y', 'Z'}) {
          const double d = clustering_defect(w, a, embed(pauli(q), Region{t}, c));
          ++pairs;
          if (d > worst || worst_pair.empty()) {
            worst = std::max(worst, d);
            worst_pair = std::string(1, p) + std::to_string(s) + " " + q + std::to_string(t);
          }
        }
      }
    }
  }
  r.evidence["pairs"] = pairs;
  r.evidence["worst_pair"] = worst_pair;
  r.verdicts.push_back(at_most("max_clustering_defect", worst, tol));
  const double expected = 9.0 * c.n_sites() * (c.n_sites() - 1) / 2.0;
  r.verdicts.push_back(equals("pairs_tested", static_cast<double>(pairs), expected));
}

Matrix bell_density() {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

void modification_bound(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const NetConfig c(integer(cfg, "n_sites"));
  const double weight = num(cfg, "bell_weight");
  const int b_count = integer(cfg, "b_count");
  const double ratio_tol = num(cfg, "ratio_tol");
  const double scan_eps = num(cfg, "scan_eps");
  const int min_samples = integer(cfg, "min_samples");
  const Region buffer = region_param(cfg, param(cfg, "buffer"), "buffer");
  const Region local = region_param(cfg, param(cfg, "local_region"), "local_region");
  const std::size_t local_dim = ipow(2, local.size());

  // (1 − w)·ρ^{⊗n} + w·Bell_{01} ⊗ ρ^{⊗(n−2)}
  const Matrix rho = random_density(2, 2, rng);
  Matrix prod = Matrix::Identity(1, 1);
  Matrix corr = bell_density();
  for (int s = 0; s < c.n_sites(); ++s) prod = kron(prod, rho);
  for (int s = 2; s < c.n_sites(); ++s) corr = kron(corr, rho);
  const Functional w(c, (1.0 - weight) * prod + weight * corr);

  const Element cm = embed(ginibre(local_dim, local_dim, rng), local, c);
  std::vector<Element> bs;
  for (int k = 0; k < b_count; ++k) bs.push_back(embed(ginibre(local_dim, local_dim, rng), local, c));
  const ModificationAcReport m = verify_modification_ac(w, cm, bs, buffer, seed);

  // ε from ac_scan on the elements the bound is proved for, at the first buffer
  double scan_epsilon = 0.0;
  Json scans = Json::array();
  std::vector<Element> needed = {adjoint(cm) * cm};
  for (const Element& b : bs) needed.push_back(adjoint(cm) * b * cm);
  for (const Element& y : needed) {
    const AcScan s = ac_scan(w, y, scan_eps, seed);
    scan_epsilon = std::max(scan_epsilon, s.candidates.front().epsilon);
    scans.push_back({{"buffer", s.candidates.front().buffer.to_string()},
                     {"epsilon", s.candidates.front().epsilon},
                     {"worst_probe", s.candidates.front().worst_label}});
  }
  // ε for the b's themselves, as a description of the state
  double state_epsilon = 0.0;
  for (const Element& b : bs) {
    state_epsilon = std::max(state_epsilon, ac_scan(w, b, scan_eps, seed).candidates.front().epsilon);
  }
  r.evidence["buffer"] = m.buffer.to_string();
  r.evidence["epsilon_used"] = m.epsilon;
  r.evidence["epsilon_of_b"] = state_epsilon;
  r.evidence["scans"] = scans;
  r.evidence["max_defect"] = m.max_defect;
  r.evidence["samples"] = m.samples;
  r.verdicts.push_back(at_most("max_defect_to_bound_ratio", m.max_ratio, 1.0 + ratio_tol));
  r.verdicts.push_back(at_least("samples", static_cast<double>(m.samples), min_samples));
  r.verdicts.push_back(at_most("scan_vs_bound_epsilon_gap", std::abs(scan_epsilon - m.epsilon), 1e-14));
  r.verdicts.push_back(at_least("nontrivial_defect", m.max_defect, 1e-9));
}

void ergodic_modification(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const NetConfig c(integer(cfg, "n_sites"));
  const int n_min = integer(cfg, "N_min");
  const auto n_max = static_cast<std::size_t>(integer(cfg, "N_max"));
  const double tail_tol = num(cfg, "tail_tol");
  const Json& regions = param(cfg, "b_regions");
  const std::vector<double> weights = num_list(cfg, "convex_weights");
  if (!regions.is_array() || regions.size() != weights.size()) {
    bad_param(cfg, "b_regions", "need one region per convex weight");
  }
  const Matrix rho = random_density(2, 2, rng);
  const Functional w = product_state(c, std::vector<Matrix>(c.n_sites(), rho));
  const Element x = embed(pauli('Z'), Region{0}, c);
  const double base = evaluate(w, x).real();

  std::vector<std::pair<Element, double>> terms;
  Region far = minimal_support(x);
  double worst_ratio = 0.0, worst_tail = 0.0;
  Json rows = Json::array();
  Json series = Json::array();
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const Region reg = region_param(cfg, regions[k], "b_regions");
    const std::size_t ld = ipow(2, reg.size());
    const Element b = embed(ginibre(ld, ld, rng), reg, c);
    terms.emplace_back(b, weights[k]);
    far = join(far, reg);
    const ShiftAction action{1, join(minimal_support(x), reg)};
    const MeanLimitReport m = modified_mean_limit(w, b, x, n_max, action);
    const double nb = op_norm(b);
    const double wbb = evaluate(w, adjoint(b) * b).real();
    double ratio = 0.0;
    for (std::size_t nn = n_min; nn <= n_max; ++nn) {
      const double dev = std::abs(m.values[nn - 1] - base);
      const double bound = 4.0 * nb * nb * op_norm(x) / (static_cast<double>(nn) * wbb);
      ratio = std::max(ratio, dev / bound);
      series.push_back({reg.to_string(), nn, dev, bound});
    }
    const double tail = std::abs(m.values[n_max - 1] - base);
    worst_ratio = std::max(worst_ratio, ratio);
    worst_tail = std::max(worst_tail, tail);
    rows.push_back({{"b_region", reg.to_string()}, {"tail", tail}, {"max_ratio_to_bound", ratio},
                    {"c_estimate", m.c_estimate}, {"omega_in_domain", m.omega_in_domain}});
  }
  const ShiftAction joint{1, far};
  const MeanLimitReport combo = convex_combination_limit(terms, w, x, n_max, joint, tail_tol);
  const double combo_tail = std::abs(combo.values[n_max - 1] - base);
  r.evidence["modifications"] = rows;
  r.evidence["series"] = {{"columns", {"b_region", "N", "deviation", "bound"}}, {"rows", series}};
  r.evidence["convex_tail"] = combo_tail;
  r.evidence["omega_x"] = base;
  r.verdicts.push_back(at_most("max_deviation_to_bound_ratio", worst_ratio, 1.0));
  r.verdicts.push_back(at_most("max_tail_at_N_max", worst_tail, tail_tol));
  r.verdicts.push_back(at_most("convex_combination_tail", combo_tail, tail_tol));
}

Functional averaged_over_shifts(const Functional& w) {
  const NetConfig& c = w.config();
  Matrix sum = Matrix::Zero(c.dim(), c.dim());
  for (int g = 0; g < c.n_sites(); ++g) sum += translate_matrix(w.weight(), shift_permutation(c, g));
  return Functional(c, sum / static_cast<double>(c.n_sites()));
}

void invariance_identity(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const auto n_max = static_cast<std::size_t>(integer(cfg, "N_max"));
  const double tol = num(cfg, "tol");
  const std::vector<int> sites = int_list(cfg, "sites");
  const ShiftAction action{1, {}};
  double worst = 0.0;
  std::size_t non_invariant = 0;
  Json rows = Json::array();
  for (int n : sites) {
    const NetConfig c(n);
    std::vector<std::pair<std::string, Functional>> states;
    states.emplace_back("uniform_product", product_state(c, std::vector<Matrix>(n, random_density(2, 2, rng))));
    states.emplace_back("maximally_mixed", maximally_mixed(c));
    if (n <= 6) {
      states.emplace_back("shift_averaged", averaged_over_shifts(density_state(c, random_density(c.dim(), 3, rng))));
    }
    const std::vector<Element> xs = {embed(pauli('Z'), Region{0}, c),
                                     embed(ginibre(4, 4, rng), Region{0, 1}, c)};
    for (const auto& [label, w] : states) {
      if (!is_invariant(w, action)) ++non_invariant;
      for (const Element& x : xs) {
        const cplx wx = evaluate(w, x);
        double dev = 0.0;
        for (const cplx& v : mean_values(w.weight(), x, n_max, action)) dev = std::max(dev, std::abs(v - wx));
        worst = std::max(worst, dev);
        rows.push_back({{"n", n}, {"state", label}, {"max_deviation", dev}});
      }
    }
  }
  r.evidence["cases"] = rows;
  r.verdicts.push_back(at_most("max_deviation", worst, tol));
  r.verdicts.push_back(equals("non_invariant_states", static_cast<double>(non_invariant), 0));
}

void lp_dichotomy(const CriterionConfig& cfg, std::uint64_t, CriterionResult& r) {
  const Integrand good = parse_integrand(text(cfg, "good"));
  const Integrand bad = parse_integrand(text(cfg, "bad"));
  const double p = num(cfg, "p");
  const std::vector<int> levels = int_list(cfg, "levels");
  const std::vector<double> interval = num_list(cfg, "gamma_interval");
  const std::vector<int> growth_levels = int_list(cfg, "growth_levels");
  const int step = integer(cfg, "growth_step");
  const double growth_min = num(cfg, "growth_min");
  if (interval.size() != 2) bad_param(cfg, "gamma_interval", "expected [lo, hi]");

  const RefinementLadder lg = build_ladder(good, levels);
  const RefinementLadder lb = build_ladder(bad, levels);
  const ClosureReport cg = closure_probe(lg, p);
  const ClosureReport cb = closure_probe(lb, p);

  double min_step = HUGE_VAL;
  for (std::size_t i = 1; i < cg.gamma.size(); ++i) min_step = std::min(min_step, cg.gamma[i] - cg.gamma[i - 1]);
  auto gamma_at = [&](const ClosureReport& rep, int level) {
    const auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) bad_param(cfg, "growth_levels", "level " + std::to_string(level) + " not in levels");
    return rep.gamma[it - levels.begin()];
  };
  Json table = Json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) table.push_back({levels[i], cg.gamma[i], cb.gamma[i]});
  r.evidence["gamma"] = {{"columns", {"L", "gamma_good", "gamma_bad"}}, {"rows", table}};
  r.evidence["good_closure_value"] = cg.closure_value ? Json(*cg.closure_value) : Json(nullptr);
  r.evidence["good_in_l2"] = in_lp(good, 2.0);
  r.evidence["bad_in_l2"] = in_lp(bad, 2.0);

  r.verdicts.push_back(within("good_gamma_at_last_level", cg.gamma.back(), interval[0], interval[1]));
  r.verdicts.push_back(at_least("good_gamma_min_increment", min_step, 0.0));
  for (int l : growth_levels) {
    const double ratio = gamma_at(cb, l + step) / gamma_at(cb, l);
    r.verdicts.push_back(at_least("bad_growth_L" + std::to_string(l), ratio, growth_min));
  }
  const bool good_closure = cg.lp_cauchy && cg.omega_cauchy && cg.gamma_bounded && cg.closure_value.has_value();
  const bool bad_closure = cb.omega_cauchy || cb.gamma_bounded || cb.closure_value.has_value();
  r.verdicts.push_back(equals("good_closure_certified", good_closure ? 1.0 : 0.0, 1.0));
  r.verdicts.push_back(equals("bad_closure_refused", bad_closure ? 0.0 : 1.0, 1.0));
  r.verdicts.push_back(equals("bad_lp_cauchy", cb.lp_cauchy ? 1.0 : 0.0, 1.0));
}

void form_suite(const CriterionConfig& cfg, std::uint64_t seed, CriterionResult& r) {
  Rng rng = criterion_rng(seed, cfg.id);
  const std::vector<PanelState> panel = build_panel(panel_param(cfg, "panel"), rng);
  const int samples = integer(cfg, "samples_per_state");
  const double bound_tol = num(cfg, "bound_tol");
  const double modification_tol = num(cfg, "modification_tol");
  std::size_t axiom_failures = 0;
  double worst_bound = 0.0, worst_mod = 0.0, worst_invariance = 0.0;
  Json rows = Json::array();
  for (const PanelState& s : panel) {
    const NetConfig& c = s.omega.config();
    const std::size_t d = c.dim();
    const SesqForm form = gns_form(s.omega);
    const FormAxiomReport ax = check_form_axioms(form);
    if (!ax.positive || !ax.invariant) ++axiom_failures;
    worst_invariance = std::max(worst_invariance, ax.invariance_defect);
    std::vector<std::pair<Matrix, Matrix>> pairs;
    for (int k = 0; k < samples; ++k) pairs.emplace_back(ginibre(d, d, rng), ginibre(d, d, rng));
    const double bound = form_bound_check(form, pairs);
    worst_bound = std::max(worst_bound, bound);
    Matrix b = unit_norm(ginibre(d, d, rng));
    const SesqForm lhs = form_modification(form, b);
    const SesqForm rhs = gns_form(local_modification(s.omega, Element(c, b, Region::full(c))));
    const double mod = (lhs.gram() - rhs.gram()).cwiseAbs().maxCoeff();
    worst_mod = std::max(worst_mod, mod);
    rows.push_back({{"state", s.label},
                    {"positive", ax.positive},
                    {"min_eigenvalue", ax.min_eigenvalue},
                    {"invariance_defect", ax.invariance_defect},
                    {"bound_ratio", bound},
                    {"modification_defect", mod}});
  }
  r.evidence["panel"] = rows;
  r.evidence["max_invariance_defect"] = worst_invariance;
  r.verdicts.push_back(equals("axiom_failures", static_cast<double>(axiom_failures), 0));
  r.verdicts.push_back(at_most("max_bound_ratio", worst_bound, 1.0 + bound_tol));
  r.verdicts.push_back(at_most("max_modification_defect", worst_mod, modification_tol));
}

using CriterionFn = std::function<void(const CriterionConfig&, std::uint64_t, CriterionResult&)>;

const std::map<std::string, CriterionFn>& registry() {
  static const std::map<std::string, CriterionFn> table = {
      {"gns_reconstruction", gns_reconstruction},
      {"purity_agreement", purity_agreement},
      {"commutant_equality", commutant_equality},
      {"rep_contractivity", rep_contractivity},
      {"product_clustering", product_clustering},
      {"modification_bound", modification_bound},
      {"ergodic_modification", ergodic_modification},
      {"invariance_identity", invariance_identity},
      {"lp_dichotomy", lp_dichotomy},
      {"form_suite", form_suite},
  };
  return table;
}

constexpr const char* kDeterminism = "determinism";

CriterionResult run_one(const CriterionConfig& cfg, std::uint64_t seed) {
  CriterionResult r;
  r.id = cfg.id;
  r.name = cfg.name;
  r.group = cfg.group;
  if (cfg.params.contains("budget_seconds")) r.budget_seconds = num(cfg, "budget_seconds");
  const auto start = std::chrono::steady_clock::now();
  try {
    registry().at(cfg.name)(cfg, seed, r);
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    r.verdicts.push_back({"completed", false, 0.0, "==", 1.0});
    r.evidence["error"] = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_all(const std::vector<CriterionConfig>& configs, std::uint64_t seed) {
  std::vector<CriterionResult> out;
  for (const CriterionConfig& cfg : configs) {
    if (cfg.name != kDeterminism) out.push_back(run_one(cfg, seed));
  }
  return out;
}

Json results_json(const std::vector<CriterionResult>& results, bool with_timing) {
  Json out = Json::array();
  for (const CriterionResult& r : results) {
    Json vs = Json::array();
    bool verdicts_pass = true;
    for (const Verdict& v : r.verdicts) {
      vs.push_back(verdict_to_json(v));
      verdicts_pass = verdicts_pass && v.pass;
    }
    Json j = {{"id", r.id}, {"name", r.name}, {"group", r.group}, {"verdicts", vs},
              {"verdicts_pass", verdicts_pass}, {"evidence", r.evidence}};
    if (with_timing) {
      j["seconds"] = r.seconds;
      j["budget_seconds"] = r.budget_seconds;
      j["within_budget"] = r.within_budget();
      j["pass"] = r.pass();
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

bool CriterionResult::pass() const {
  if (verdicts.empty() || !within_budget()) return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

bool AcceptanceRun::pass() const {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass(); });
}

Json AcceptanceRun::to_json(bool with_timing) const {
  Json j = {{"schema_version", kReportSchemaVersion},
            {"analysis", "acceptance"},
            {"seed", seed},
            {"criteria", results_json(results, with_timing)}};
  if (with_timing) j["pass"] = pass();
  return j;
}

std::filesystem::path default_acceptance_dir() { return QLOC_ACCEPTANCE_DIR; }

std::vector<CriterionConfig> load_acceptance_configs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw InputError(dir.string() + ": acceptance config directory not found");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) throw InputError(dir.string() + ": no acceptance configs");
  std::sort(files.begin(), files.end());
  std::vector<CriterionConfig> out;
  for (const auto& f : files) {
    const Json j = load_json_file(f);
    auto fail = [&](const std::string& why) { throw InputError(f.string() + ": " + why); };
    if (!j.is_object()) fail("expected a JSON object");
    if (!j.contains("id") || !j["id"].is_number_integer()) fail("field 'id': missing or not an integer");
    if (!j.contains("name") || !j["name"].is_string()) fail("field 'name': missing or not a string");
    if (!j.contains("group") || !j["group"].is_string()) fail("field 'group': missing or not a string");
    if (!j.contains("params") || !j["params"].is_object()) fail("field 'params': missing or not an object");
    CriterionConfig c{j["id"].get<int>(), j["name"].get<std::string>(), j["group"].get<std::string>(),
                      j["params"], f};
    if (c.name != kDeterminism && !registry().contains(c.name)) fail("unknown criterion '" + c.name + "'");
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

AcceptanceRun run_acceptance(const std::filesystem::path& dir, std::uint64_t seed, const std::string& filter) {
  const std::vector<CriterionConfig> configs = load_acceptance_configs(dir);
  auto selected = [&](const CriterionConfig& c) {
    return filter.empty() || filter == c.group || filter == c.name || filter == std::to_string(c.id);
  };
  AcceptanceRun run;
  run.seed = seed;
  std::vector<CriterionConfig> chosen;
  for (const CriterionConfig& c : configs) {
    if (selected(c)) chosen.push_back(c);
  }
  if (chosen.empty()) throw InputError("acceptance: filter '" + filter + "' selects no criterion");

  for (const CriterionConfig& c : chosen) {
    if (c.name != kDeterminism) run.results.push_back(run_one(c, seed));
  }
  for (const CriterionConfig& c : chosen) {
    if (c.name != kDeterminism) continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    r.group = c.group;
    const auto start = std::chrono::steady_clock::now();
    const auto det_seed = static_cast<std::uint64_t>(integer(c, "seed"));
    const bool full_main_run = filter.empty() && det_seed == seed;
    const std::vector<CriterionResult> first = full_main_run ? run.results : run_all(configs, det_seed);
    const std::vector<CriterionResult> second = run_all(configs, det_seed);
    const std::string a = results_json(first, false).dump();
    const std::string b = results_json(second, false).dump();
    r.evidence["seed"] = det_seed;
    r.evidence["reused_main_run"] = full_main_run;
    r.evidence["criteria_compared"] = first.size();
    r.evidence["report_bytes"] = a.size();
    r.verdicts.push_back(equals("reports_identical", a == b ? 1.0 : 0.0, 1.0));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.results.push_back(std::move(r));
  }
  return run;
}

}  // namespace qloc
