#include "qloc/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>

#include "qloc/acceptance.hpp"
#include "qloc/asymptotics.hpp"
#include "qloc/errors.hpp"
#include "qloc/forms.hpp"
#include "qloc/gns.hpp"
#include "qloc/io.hpp"

namespace qloc {

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 42;
  double tol = kDefaultTol;
  std::string out_path;
  std::string format = "json";
  int sites = 0;
  int site_dim = 2;
  std::string state;
};

// Config file plus command-line overrides. A config looks like
// {"net": {...}, "state": {...}, "elements": {"x": ..., "b": ...}, "params": {...}}.
class Inputs {
 public:
  Inputs(const Globals& g, const CLI::App& app) : g_(g), app_(app) {
    if (!g.config_path.empty()) config_ = load_json_file(g.config_path);
    if (!config_.is_object()) throw InputError(g.config_path + ": expected a JSON object");
  }

  const Json& config() const { return config_; }

  NetConfig net() const {
    if (app_.get_option("--sites")->count() > 0) return NetConfig(g_.sites, g_.site_dim);
    if (config_.contains("net")) return net_from_json(config_["net"]);
    throw InputError("no chain given: pass --sites or a config with a \"net\" entry");
  }

  Functional state() const {
    const NetConfig c = net();
    if (!g_.state.empty()) {
      const auto first = g_.state.find_first_not_of(" \t\n");
      const Json j = first != std::string::npos && g_.state[first] == '{'
                         ? parse_json_text(g_.state, "--state")
                         : load_json_file(g_.state);
      return state_from_json(j, c);
    }
    if (config_.contains("state")) return state_from_json(config_["state"], c);
    throw InputError("no state given: pass --state or a config with a \"state\" entry");
  }

  /// Element from its flag, or from config.elements[name].
  Element element(const std::string& name, const std::string& flag) const {
    const NetConfig c = net();
    if (!flag.empty()) return element_from_text(flag, c);
    const Json* e = config_element(name);
    if (e == nullptr) throw InputError("no element '" + name + "': pass --" + name + " or set elements." + name);
    return element_from_json(*e, c);
  }

  std::vector<Element> elements(const std::string& name, const std::vector<std::string>& flags) const {
    const NetConfig c = net();
    std::vector<Element> out;
    for (const std::string& f : flags) out.push_back(element_from_text(f, c));
    if (!out.empty()) return out;
    const Json* e = config_element(name);
    if (e == nullptr) return out;
    if (e->is_array()) {
      for (const Json& item : *e) out.push_back(element_from_json(item, c));
    } else {
      out.push_back(element_from_json(*e, c));
    }
    return out;
  }

  bool has_element(const std::string& name, const std::string& flag) const {
    return !flag.empty() || config_element(name) != nullptr;
  }

  /// Flag if given on the command line, else config.params[key], else the flag default.
  template <class T>
  T param(const std::string& option, const std::string& key, const T& flag) const {
    const CLI::App* sub = active_subcommand();
    const CLI::Option* opt = sub != nullptr ? sub->get_option_no_throw(option) : nullptr;
    if (opt != nullptr && opt->count() > 0) return flag;
    if (config_.contains("params") && config_["params"].contains(key)) {
      try {
        return config_["params"][key].get<T>();
      } catch (const Json::exception&) {
        throw InputError("field 'params." + key + "': wrong type");
      }
    }
    return flag;
  }

 private:
  const Json* config_element(const std::string& name) const {
    if (!config_.contains("elements")) return nullptr;
    const Json& es = config_["elements"];
    if (!es.is_object() || !es.contains(name)) return nullptr;
    return &es[name];
  }

  const CLI::App* active_subcommand() const {
    const CLI::App* cur = &app_;
    while (true) {
      const auto subs = cur->get_subcommands();
      if (subs.empty()) return cur;
      cur = subs.front();
    }
  }

  const Globals& g_;
  const CLI::App& app_;
  Json config_ = Json::object();
};

Verdict check(std::string name, bool pass, double value, std::string relation, Json tolerance) {
  return {std::move(name), pass, value, std::move(relation), std::move(tolerance)};
}

Verdict at_most(std::string name, double value, double tol) {
  return check(std::move(name), value <= tol, value, "<=", tol);
}

Verdict holds(std::string name, bool value) {
  return check(std::move(name), value, value ? 1.0 : 0.0, "==", 1.0);
}

Json complex_json(cplx z) { return complex_to_json(z); }

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InputError("malformed levels \"" + text + "\": expected \"a..b\" or a comma list");
    }
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots));
    const int hi = to_int(text.substr(dots + 2));
    if (hi < lo) throw InputError("malformed levels \"" + text + "\": empty range");
    for (int l = lo; l <= hi; ++l) out.push_back(l);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(to_int(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Json region_list(const std::vector<Region>& rs) {
  Json out = Json::array();
  for (const Region& r : rs) out.push_back(r.to_string());
  return out;
}

std::string generator_label(const NetConfig& c, std::size_t k) {
  const int site = static_cast<int>(k / 2);
  if (c.site_dim() == 2) return std::string(k % 2 == 0 ? "X" : "Z") + std::to_string(site);
  return std::string(k % 2 == 0 ? "shift" : "clock") + "@" + std::to_string(site);
}

// ---- analyses --------------------------------------------------------------

struct Flags {
  std::string x, a_single, b, c, element, region, filter, dir, integrand, levels = "5..20", far_field;
  std::vector<std::string> as, xs;
  double eps = 0.5, exponent = 0.0, p = 1.0, tail_tol = 1e-2, cauchy_tol = kCauchyTol;
  int n_max = static_cast<int>(kDefaultNMax), shift = 1, samples = 100, j_max = 16, max_buffer = -1;
  bool dim_only = false;
};

Report net_verify(const Inputs& in, const Globals& g) {
  const NetConfig c = in.net();
  const AxiomReport a = verify_index_axioms(c, g.seed);
  Report r;
  r.analysis = "net verify";
  Json violations = Json::array();
  for (const AxiomViolation& v : a.violations) {
    violations.push_back({{"axiom", v.axiom}, {"alpha", v.alpha.to_string()}, {"beta", v.beta.to_string()},
                          {"gamma", v.gamma.to_string()}});
  }
  r.results = {{"exhaustive", a.exhaustive},         {"regions_checked", a.regions_checked},
               {"triples_checked", a.triples_checked}, {"axiom_i", a.axiom_i},
               {"axiom_ii", a.axiom_ii},               {"axiom_iii", a.axiom_iii},
               {"violations", violations},             {"precondition_violations", a.precondition_violations}};
  r.verdicts.push_back(check("index_axioms", a.all_pass(),
                             static_cast<double>(a.violations.size() + a.precondition_violations.size()), "==", 0));
  return r;
}

Report algebra_support(const Inputs& in, const Globals& g, const Flags& f) {
  const Element e = in.element("element", f.element);
  const Region m = minimal_support(e, g.tol);
  Report r;
  r.analysis = "algebra support";
  r.results = {{"declared_support", e.support().to_string()}, {"minimal_support", m.to_string()},
               {"norm", op_norm(e)}};
  r.verdicts.push_back(holds("declared_support_covers_minimal", leq(m, e.support())));
  return r;
}

Report algebra_norm(const Inputs& in, const Globals& g, const Flags& f) {
  const Element e = in.element("element", f.element);
  const double n = op_norm(e);
  const double cstar = std::abs(op_norm(adjoint(e) * e) - n * n);
  Report r;
  r.analysis = "algebra norm";
  r.results = {{"norm", n}, {"adjoint_norm", op_norm(adjoint(e))}, {"cstar_defect", cstar},
               {"support", minimal_support(e, g.tol).to_string()}};
  r.verdicts.push_back(at_most("cstar_defect", cstar, g.tol * std::max(1.0, n * n)));
  return r;
}

Report states_check(const Inputs& in, const Globals& g, const Flags& f) {
  const Functional w = in.state();
  const std::vector<Element> xs = in.elements("x", f.xs);
  const RepresentabilityReport rep = check_representable(w, xs, g.tol);
  Report r;
  r.analysis = "states check";
  Json gamma = Json::array();
  for (double v : rep.gamma) gamma.push_back(v);
  r.results = {{"L1", rep.l1},
               {"L2", rep.l2},
               {"L3", rep.l3},
               {"min_eigenvalue", rep.min_eigenvalue},
               {"hermiticity_defect", rep.hermiticity_defect},
               {"gamma", gamma},
               {"unit_value", complex_json(w.unit_value())},
               {"is_state", w.is_state()}};
  r.verdicts.push_back(holds("representable", rep.l1 && rep.l2 && rep.l3));
  return r;
}

Report states_restrict(const Inputs& in, const Globals&, const Flags& f) {
  const Functional w = in.state();
  const Region reg = Region::parse(in.param<std::string>("--region", "region", f.region));
  const LocalFunctional lf = restrict_to(w, reg);
  Report r;
  r.analysis = "states restrict";
  r.results = {{"region", reg.to_string()}, {"weight", matrix_to_json(lf.weight)},
               {"trace", complex_json(lf.weight.trace())}};
  return r;
}

Report states_compat(const Inputs& in, const Globals& g, const Flags&) {
  const NetConfig c = in.net();
  const Json& cfg = in.config();
  if (!cfg.contains("family") || !cfg["family"].is_array()) {
    throw InputError("field 'family': expected a list of {\"region\", \"matrix\"} local functionals");
  }
  std::vector<LocalFunctional> family;
  for (std::size_t i = 0; i < cfg["family"].size(); ++i) {
    const Json& m = cfg["family"][i];
    const std::string field = "family[" + std::to_string(i) + "]";
    if (!m.is_object() || !m.contains("region") || !m["region"].is_string() || !m.contains("matrix")) {
      throw InputError("field '" + field + "': expected {\"region\": \"0,1\", \"matrix\": ...}");
    }
    const Region reg = Region::parse(m["region"].get<std::string>());
    Matrix weight = matrix_from_json(m["matrix"], field + ".matrix");
    if (static_cast<std::size_t>(weight.rows()) != ipow(c.site_dim(), reg.size())) {
      throw InputError("field '" + field + ".matrix': dimension does not match the region");
    }
    family.push_back({reg, std::move(weight), c.site_dim()});
  }
  const CompatibilityReport rep = check_compatibility(family, g.tol);
  Report r;
  r.analysis = "states compat";
  Json pairs = Json::array();
  for (const CompatibilityPair& p : rep.pairs) {
    pairs.push_back({{"first", p.first}, {"second", p.second}, {"overlap", p.overlap.to_string()},
                     {"defect", p.defect}});
  }
  r.results = {{"compatible", rep.compatible}, {"max_defect", rep.max_defect}, {"pairs", pairs}};
  r.verdicts.push_back(at_most("max_marginal_defect", rep.max_defect, g.tol));
  return r;
}

Report states_modify(const Inputs& in, const Globals& g, const Flags& f) {
  const Functional w = in.state();
  const Element b = in.element("b", f.b);
  const Functional m = local_modification(w, b, g.tol);
  const RepresentabilityReport rep = check_representable(m, {}, g.tol);
  Report r;
  r.analysis = "states modify";
  r.results = {{"weight", matrix_to_json(m.weight())},
               {"omega_bb", complex_json(evaluate(w, adjoint(b) * b))},
               {"is_state", m.is_state()},
               {"L1", rep.l1},
               {"L2", rep.l2},
               {"L3", rep.l3}};
  r.verdicts.push_back(holds("modified_is_representable_state", m.is_state() && rep.l1 && rep.l2 && rep.l3));
  return r;
}

Report gns_build(const Inputs& in, const Globals& g, const Flags&) {
  const Functional w = in.state();
  const GnsTriple t = gns_construct(w, g.tol);
  const Vector& xi = t.cyclic_vector();
  double recon = 0.0;
  for (const Matrix& e : matrix_units(w.config().dim())) {
    recon = std::max(recon, std::abs(evaluate(w, e) - xi.dot(t.rep(e) * xi)));
  }
  Json gens = Json::object();
  const std::vector<Matrix> small = local_generators(w.config());
  for (std::size_t k = 0; k < small.size(); ++k) {
    gens[generator_label(w.config(), k)] = matrix_to_json(t.rep(small[k]));
  }
  Report r;
  r.analysis = "gns build";
  r.results = {{"hilbert_dim", t.hilbert_dim()},
               {"cyclic_vector", vector_to_json(xi)},
               {"rep", gens},
               {"reconstruction_defect", recon}};
  r.verdicts.push_back(at_most("reconstruction_defect", recon, 1e-9));
  return r;
}

Report gns_purity(const Inputs& in, const Globals& g, const Flags& f) {
  const Functional w = in.state();
  const auto samples = static_cast<std::size_t>(in.param<int>("--samples", "samples", f.samples));
  const PurityCertificate p = purity_certificate(w, g.tol, g.seed, samples);
  Report r;
  r.analysis = "gns purity";
  r.results = {{"pure", p.pure},
               {"commutant_dim", p.commutant_dim},
               {"has_witness", p.has_witness},
               {"witness_verified", p.witness_verified()},
               {"nu_mass", p.nu_mass},
               {"proportionality_defect", p.proportionality_defect},
               {"nu_leq_omega", p.nu_leq_omega},
               {"nu_representable", p.nu_representable},
               {"decomposition_found", p.decomposition_found},
               {"decomposition_gap", p.decomposition_gap},
               {"samples", p.samples},
               {"dominated_nonproportional", p.dominated_nonproportional},
               {"max_sample_defect", p.max_sample_defect}};
  if (p.has_witness) {
    r.results["nu_weight"] = matrix_to_json(p.nu_weight);
    r.results["projection_rank"] = std::lround(p.projection.trace().real());
  }
  r.verdicts.push_back(holds("legs_agree", p.legs_agree()));
  return r;
}

Report gns_commutant(const Inputs& in, const Globals& g, const Flags& f) {
  const Functional w = in.state();
  const GnsTriple t = gns_construct(w, g.tol);
  const CommutantBasis wc = weak_commutant(t, g.tol);
  const CommutantBasis z = center(wc, t, g.tol);
  Report r;
  r.analysis = "gns commutant";
  r.results = {{"hilbert_dim", t.hilbert_dim()},
               {"commutant_dim", wc.dimension()},
               {"center_dim", z.dimension()},
               {"quasi_irreducible", wc.dimension() == 1},
               {"primary", z.dimension() == 1},
               {"sparse_path", wc.sparse_path}};
  if (!f.dim_only) {
    Json els = Json::array();
    for (const Matrix& m : wc.elements) els.push_back(matrix_to_json(m));
    r.results["elements"] = els;
  }
  return r;
}

ShiftAction action_for(const Inputs& in, const Flags& f, const Region& default_far) {
  ShiftAction a;
  a.step = in.param<int>("--shift", "shift", f.shift);
  const std::string far = in.param<std::string>("--far-field", "far_field", f.far_field);
  a.far_field = far.empty() ? default_far : (far == "none" ? Region() : Region::parse(far));
  return a;
}

Report asym_mean(const Inputs& in, const Globals&, const Flags& f) {
  const Functional w = in.state();
  const Element x = in.element("x", f.x);
  const auto n_max = static_cast<std::size_t>(in.param<int>("--N-max", "N_max", f.n_max));
  const double tol = in.param<double>("--cauchy-tol", "cauchy_tol", f.cauchy_tol);
  const ShiftAction a = action_for(in, f, Region());
  const ErgodicSeries s = omega_x_infinity(w, x, n_max, a, tol);
  Report r;
  r.analysis = "asym mean";
  Json rows = Json::array();
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    rows.push_back({k + 1, s.values[k].real(), s.values[k].imag(), std::abs(s.values[k] - s.limit)});
  }
  r.series["omega_x_N"] = {{"columns", {"N", "re", "im", "defect"}}, {"rows", rows}};
  r.results = {{"in_domain", s.in_domain},
               {"limit", complex_json(s.limit)},
               {"cauchy_defect", s.cauchy_defect},
               {"tail_start", s.tail_start},
               {"invariant", is_invariant(w, a)},
               {"omega_x", complex_json(evaluate(w, x))},
               {"shifts", shift_sequence(a, w.config().n_sites(), std::min<std::size_t>(n_max, 16))}};
  r.verdicts.push_back(at_most("cauchy_defect", s.cauchy_defect, tol));
  return r;
}

Report asym_ac_scan(const Inputs& in, const Globals& g, const Flags& f) {
  const Functional w = in.state();
  const Element b = in.element("b", f.b);
  const double eps = in.param<double>("--eps", "eps", f.eps);
  const AcScan s = ac_scan(w, b, eps, g.seed, in.param<int>("--max-buffer", "max_buffer", f.max_buffer));
  Report r;
  r.analysis = "asym ac-scan";
  Json rows = Json::array();
  for (const AcCandidate& c : s.candidates) rows.push_back({c.buffer.to_string(), c.epsilon, c.worst_label});
  r.series["candidates"] = {{"columns", {"buffer", "epsilon", "worst_probe"}}, {"rows", rows}};
  r.results = {{"is_AC", s.is_ac},
               {"buffer", s.buffer.to_string()},
               {"epsilon", s.epsilon},
               {"eps", eps},
               {"worst_region", s.worst_region.to_string()},
               {"worst_probe", s.worst_label},
               {"worst_defect", s.worst_defect}};
  r.verdicts.push_back(holds("is_AC", s.is_ac));
  return r;
}

Report asym_modify_limit(const Inputs& in, const Globals&, const Flags& f) {
  const Functional w = in.state();
  const Element x = in.element("x", f.x);
  const auto n_max = static_cast<std::size_t>(in.param<int>("--N-max", "N_max", f.n_max));
  const double tail_tol = in.param<double>("--tail-tol", "tail_tol", f.tail_tol);
  const std::vector<Element> bs = in.elements("b", f.b.empty() ? std::vector<std::string>{} : std::vector<std::string>{f.b});
  if (bs.empty()) throw InputError("no element 'b': pass --b or set elements.b");
  Region far = minimal_support(x);
  for (const Element& b : bs) far = join(far, minimal_support(b));
  const ShiftAction a = action_for(in, f, far);
  MeanLimitReport m;
  if (bs.size() == 1) {
    m = modified_mean_limit(w, bs[0], x, n_max, a, tail_tol);
  } else {
    const Json& ws = in.config().value("params", Json::object()).value("weights", Json());
    if (!ws.is_array() || ws.size() != bs.size()) {
      throw InputError("field 'params.weights': need one weight per element in elements.b");
    }
    std::vector<std::pair<Element, double>> terms;
    for (std::size_t k = 0; k < bs.size(); ++k) terms.emplace_back(bs[k], ws[k].get<double>());
    m = convex_combination_limit(terms, w, x, n_max, a, tail_tol);
  }
  Report r;
  r.analysis = "asym modify-limit";
  Json rows = Json::array();
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    rows.push_back({k + 1, m.values[k].real(), m.values[k].imag(), m.deviations[k]});
  }
  r.series["phi_x_N"] = {{"columns", {"N", "re", "im", "deviation"}}, {"rows", rows}};
  r.results = {{"limit", complex_json(m.limit)},
               {"omega_in_domain", m.omega_in_domain},
               {"tail", m.tail},
               {"c_estimate", m.c_estimate},
               {"far_field", a.far_field.to_string()},
               {"terms", bs.size()}};
  r.verdicts.push_back(at_most("tail", m.tail, tail_tol));
  return r;
}

Report asym_cluster(const Inputs& in, const Globals& g, const Flags& f) {
  const Functional w = in.state();
  const Element a = in.element("a", f.a_single);
  const Element x = in.element("x", f.x);
  const auto j_max = static_cast<std::size_t>(in.param<int>("--j-max", "j_max", f.j_max));
  const ShiftAction act = action_for(in, f, Region());
  const std::vector<double> d = cluster_sweep(w, a, x, j_max, act);
  const std::vector<int> shifts = shift_sequence(act, w.config().n_sites(), j_max);
  Report r;
  r.analysis = "asym cluster";
  Json rows = Json::array();
  if (in.has_element("b", f.b)) {
    const Element b = in.element("b", f.b);
    const ModifiedClusterSweep m = modified_cluster_sweep(w, b, a, x, j_max, act, g.tol);
    for (std::size_t j = 0; j < d.size(); ++j) {
      rows.push_back({j + 1, shifts[j], d[j], m.defects[j], m.bounds[j], static_cast<bool>(m.applicable[j])});
    }
    r.series["cluster"] = {{"columns", {"j", "shift", "defect", "modified_defect", "bound", "bound_applies"}},
                           {"rows", rows}};
    r.results["max_ratio"] = m.max_ratio;
    r.verdicts.push_back(at_most("modified_defect_to_bound_ratio", m.max_ratio, 1.0 + 1e-9));
  } else {
    for (std::size_t j = 0; j < d.size(); ++j) rows.push_back({j + 1, shifts[j], d[j]});
    r.series["cluster"] = {{"columns", {"j", "shift", "defect"}}, {"rows", rows}};
  }
  r.results["last_defect"] = d.back();
  return r;
}

Report asym_primary(const Inputs& in, const Globals&, const Flags& f) {
  const Functional w = in.state();
  const std::vector<Element> as = in.elements("a", f.as);
  if (as.empty()) throw InputError("no element 'a': pass --a (repeatable) or set elements.a");
  const Element x = in.element("x", f.x);
  const auto n_max = static_cast<std::size_t>(in.param<int>("--N-max", "N_max", f.n_max));
  const double tol = in.param<double>("--tail-tol", "tail_tol", 1e-3);
  const ShiftAction act = action_for(in, f, minimal_support(x));
  const PrimaryReport p = primary_asymptotic_check(w, as, x, n_max, act, tol);
  Report r;
  r.analysis = "asym primary";
  Json rows = Json::array();
  for (std::size_t k = 0; k < n_max; ++k) {
    Json row = {k + 1};
    for (const auto& dev : p.deviations) row.push_back(dev[k]);
    rows.push_back(row);
  }
  Json cols = {"N"};
  for (std::size_t i = 0; i < as.size(); ++i) cols.push_back("a" + std::to_string(i));
  r.series["deviations"] = {{"columns", cols}, {"rows", rows}};
  r.results = {{"commutant_dim", p.commutant_dim}, {"center_dim", p.center_dim},
               {"omega_in_domain", p.series.in_domain}, {"limit", complex_json(p.series.limit)},
               {"tails", p.tails}, {"max_tail", p.max_tail}};
  r.verdicts.push_back(holds("omega_in_domain", p.series.in_domain));
  r.verdicts.push_back(at_most("max_tail", p.max_tail, tol));
  return r;
}

Report forms_axioms(const Inputs& in, const Globals& g, const Flags& f) {
  const Functional w = in.state();
  const SesqForm form = gns_form(w);
  const FormAxiomReport ax = check_form_axioms(form, g.tol);
  Rng rng(g.seed);
  const std::size_t d = w.config().dim();
  std::vector<std::pair<Matrix, Matrix>> pairs;
  const int samples = in.param<int>("--samples", "samples", f.samples);
  for (int k = 0; k < samples; ++k) pairs.emplace_back(ginibre(d, d, rng), ginibre(d, d, rng));
  const double bound = form_bound_check(form, pairs, g.tol);
  Report r;
  r.analysis = "forms axioms";
  r.results = {{"positive", ax.positive},
               {"min_eigenvalue", ax.min_eigenvalue},
               {"invariant", ax.invariant},
               {"invariance_defect", ax.invariance_defect},
               {"bound_ratio", bound},
               {"samples", samples}};
  r.verdicts.push_back(holds("positive", ax.positive));
  r.verdicts.push_back(at_most("invariance_defect", ax.invariance_defect, g.tol));
  r.verdicts.push_back(at_most("bound_ratio", bound, 1.0 + 1e-9));
  return r;
}

Integrand integrand_for(const Inputs& in, const CLI::App& sub, const Flags& f) {
  if (sub.get_option("--integrand")->count() > 0) return parse_integrand(f.integrand);
  if (sub.get_option("--exponent")->count() > 0) {
    std::ostringstream s;
    s.precision(17);
    s << "pow:" << f.exponent;
    return parse_integrand(s.str());
  }
  const std::string spec = in.param<std::string>("--integrand", "integrand", "");
  if (spec.empty()) throw InputError("no integrand: pass --exponent or --integrand");
  return parse_integrand(spec);
}

Report forms_lp_gamma(const Inputs& in, const CLI::App& sub, const Flags& f) {
  const Integrand fn = integrand_for(in, sub, f);
  const double p = in.param<double>("--p", "p", f.p);
  const std::vector<int> levels = parse_levels(in.param<std::string>("--levels", "levels", f.levels));
  const std::vector<double> gamma = lp_gamma_series(fn, p, levels);
  Report r;
  r.analysis = "forms lp-gamma";
  Json rows = Json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    rows.push_back({levels[i], gamma[i], i == 0 ? Json(nullptr) : Json(gamma[i] / gamma[i - 1])});
  }
  r.series["lp_gamma"] = {{"columns", {"L", "gamma_L", "growth_ratio"}}, {"rows", rows}};
  r.results = {{"integrand", fn.spec}, {"p", p}, {"in_L2", in_lp(fn, 2.0)}, {"gamma_last", gamma.back()}};
  return r;
}

Report forms_closure(const Inputs& in, const CLI::App& sub, const Flags& f, const Globals& g) {
  const Integrand fn = integrand_for(in, sub, f);
  const double p = in.param<double>("--p", "p", f.p);
  const std::vector<int> levels = parse_levels(in.param<std::string>("--levels", "levels", f.levels));
  if (!in_lp(fn, p)) throw NonIntegrable("integrand " + fn.spec + " is not in L^" + std::to_string(p));
  const ClosureReport c = closure_probe(build_ladder(fn, levels), p, g.tol);
  Report r;
  r.analysis = "forms closure";
  Json rows = Json::array();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    rows.push_back({levels[i], c.gamma[i], i == 0 ? Json(nullptr) : Json(c.lp_increments[i - 1]),
                    i == 0 ? Json(nullptr) : Json(c.omega_increments[i - 1])});
  }
  r.series["ladder"] = {{"columns", {"L", "gamma_L", "lp_increment", "omega_increment"}}, {"rows", rows}};
  r.results = {{"integrand", fn.spec},
               {"p", p},
               {"lp_cauchy", c.lp_cauchy},
               {"omega_cauchy", c.omega_cauchy},
               {"wt_holds", c.wt_holds},
               {"gamma_bounded", c.gamma_bounded},
               {"closure_value", c.closure_value ? Json(*c.closure_value) : Json(nullptr)},
               {"in_domain", c.closure_value.has_value()},
               {"in_L2", in_lp(fn, 2.0)}};
  const bool certified = c.lp_cauchy && c.omega_cauchy && c.closure_value.has_value();
  r.verdicts.push_back(holds("closure_matches_L2_membership", certified == in_lp(fn, 2.0)));
  return r;
}

Report acceptance_report(const Globals& g, const Flags& f) {
  const std::filesystem::path dir = f.dir.empty() ? default_acceptance_dir() : std::filesystem::path(f.dir);
  const AcceptanceRun run = run_acceptance(dir, g.seed, f.filter);
  Report r;
  r.analysis = "acceptance";
  r.inputs = {{"dir", dir.string()}, {"filter", f.filter}, {"seed", g.seed}};
  const Json j = run.to_json(true);
  r.results = {{"criteria", j["criteria"]}};
  Json rows = Json::array();
  double total = 0.0;
  for (const CriterionResult& c : run.results) {
    r.verdicts.push_back(check(std::to_string(c.id) + "_" + c.name, c.pass(), c.pass() ? 1.0 : 0.0, "==", 1.0));
    rows.push_back({c.id, c.name, c.group, c.pass(), c.seconds});
    total += c.seconds;
  }
  r.series["criteria"] = {{"columns", {"id", "name", "group", "pass", "seconds"}}, {"rows", rows}};
  r.wall_time = total;
  return r;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qloc: finite quasi-local quasi *-algebra lab on spin chains"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  Flags f;
  app.add_option("--config", g.config_path, "JSON config with net, state, elements and params");
  app.add_option("--seed", g.seed, "Seed for all random draws")->capture_default_str();
  app.add_option("--tol", g.tol, "Numerical tolerance")->capture_default_str();
  app.add_option("--out", g.out_path, "Write the report here instead of stdout");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--sites", g.sites, "Number of chain sites (overrides config net)");
  app.add_option("--site-dim", g.site_dim, "Local dimension")->capture_default_str();
  app.add_option("--state", g.state, "State JSON file, or inline JSON");

  std::function<Report(const Inputs&)> action;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    CLI::App* s = parent->add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  CLI::App* net = app.add_subcommand("net", "Index set checks")->require_subcommand(1);
  net->fallthrough();
  leaf(net, "verify", "Check the three index-set axioms")->callback([&] {
    action = [&](const Inputs& in) { return net_verify(in, g); };
  });

  CLI::App* alg = app.add_subcommand("algebra", "Chain elements")->require_subcommand(1);
  alg->fallthrough();
  CLI::App* sup = leaf(alg, "support", "Minimal support of an element");
  sup->add_option("--element", f.element, "Pauli text or {\"region\", \"matrix\"} JSON");
  sup->callback([&] { action = [&](const Inputs& in) { return algebra_support(in, g, f); }; });
  CLI::App* nrm = leaf(alg, "norm", "Operator norm and C*-identity check");
  nrm->add_option("--element", f.element, "Pauli text or {\"region\", \"matrix\"} JSON");
  nrm->callback([&] { action = [&](const Inputs& in) { return algebra_norm(in, g, f); }; });

  CLI::App* st = app.add_subcommand("states", "Functionals")->require_subcommand(1);
  st->fallthrough();
  CLI::App* chk = leaf(st, "check", "Representability (L1)-(L3) and the γ_x table");
  chk->add_option("--x", f.xs, "Elements for the γ table (repeatable)");
  chk->callback([&] { action = [&](const Inputs& in) { return states_check(in, g, f); }; });
  CLI::App* rst = leaf(st, "restrict", "Restriction to a region");
  rst->add_option("--region", f.region, "Region literal, e.g. 0,2");
  rst->callback([&] { action = [&](const Inputs& in) { return states_restrict(in, g, f); }; });
  leaf(st, "compat", "Compatibility of the config's local family")->callback([&] {
    action = [&](const Inputs& in) { return states_compat(in, g, f); };
  });
  CLI::App* mod = leaf(st, "modify", "Local modification ω_b");
  mod->add_option("--b", f.b, "Modifying element");
  mod->callback([&] { action = [&](const Inputs& in) { return states_modify(in, g, f); }; });

  CLI::App* gn = app.add_subcommand("gns", "GNS triples and commutants")->require_subcommand(1);
  gn->fallthrough();
  leaf(gn, "build", "GNS triple")->callback([&] {
    action = [&](const Inputs& in) { return gns_build(in, g, f); };
  });
  CLI::App* pur = leaf(gn, "purity", "Purity certificate");
  pur->add_option("--samples", f.samples, "Commutant samples")->capture_default_str();
  pur->callback([&] { action = [&](const Inputs& in) { return gns_purity(in, g, f); }; });
  f.samples = static_cast<int>(kPuritySamples);
  CLI::App* com = leaf(gn, "commutant", "Weak commutant and its center");
  com->add_flag("--dim-only", f.dim_only, "Omit the basis matrices");
  com->callback([&] { action = [&](const Inputs& in) { return gns_commutant(in, g, f); }; });

  CLI::App* as = app.add_subcommand("asym", "Shifts, means and clustering")->require_subcommand(1);
  as->fallthrough();
  auto shift_opts = [&](CLI::App* s) {
    s->add_option("--shift", f.shift, "Sites per shift")->capture_default_str();
    s->add_option("--far-field", f.far_field, "Region translates must leave after the first lap ('none' for plain cyclic)");
  };
  CLI::App* mean = leaf(as, "mean", "Ergodic means ω(x_N)");
  mean->add_option("--x", f.x, "Element x");
  mean->add_option("--N-max", f.n_max, "Largest N")->capture_default_str();
  mean->add_option("--cauchy-tol", f.cauchy_tol, "Cauchy tolerance on the last quarter")->capture_default_str();
  shift_opts(mean);
  mean->callback([&] { action = [&](const Inputs& in) { return asym_mean(in, g, f); }; });
  CLI::App* acs = leaf(as, "ac-scan", "Almost-clustering scan");
  acs->add_option("--b", f.b, "Element b");
  acs->add_option("--eps", f.eps, "ε")->capture_default_str();
  acs->add_option("--max-buffer", f.max_buffer, "Largest buffer size (default n-1)");
  acs->callback([&] { action = [&](const Inputs& in) { return asym_ac_scan(in, g, f); }; });
  CLI::App* mlim = leaf(as, "modify-limit", "ω_b(x_N) against ω(x_∞)");
  mlim->add_option("--b", f.b, "Modifying element");
  mlim->add_option("--x", f.x, "Element x");
  mlim->add_option("--N-max", f.n_max, "Largest N")->capture_default_str();
  mlim->add_option("--tail-tol", f.tail_tol, "Tolerance on the deviation at N_max")->capture_default_str();
  shift_opts(mlim);
  mlim->callback([&] { action = [&](const Inputs& in) { return asym_modify_limit(in, g, f); }; });
  CLI::App* clu = leaf(as, "cluster", "Cluster-property sweep");
  clu->add_option("--a", f.a_single, "Element a");
  clu->add_option("--x", f.x, "Element x");
  clu->add_option("--b", f.b, "Optional modifying element");
  clu->add_option("--j-max", f.j_max, "Sweep length")->capture_default_str();
  shift_opts(clu);
  clu->callback([&] { action = [&](const Inputs& in) { return asym_cluster(in, g, f); }; });
  CLI::App* pri = leaf(as, "primary", "Asymptotic factorization for primary states");
  pri->add_option("--a", f.as, "Elements a (repeatable)");
  pri->add_option("--x", f.x, "Element x");
  pri->add_option("--N-max", f.n_max, "Largest N")->capture_default_str();
  pri->add_option("--tail-tol", f.tail_tol, "Tolerance on the tails");
  shift_opts(pri);
  pri->callback([&] { action = [&](const Inputs& in) { return asym_primary(in, g, f); }; });

  CLI::App* fo = app.add_subcommand("forms", "Sesquilinear forms and the L^p model")->require_subcommand(1);
  fo->fallthrough();
  CLI::App* axs = leaf(fo, "axioms", "GNS form axioms and bound");
  axs->add_option("--samples", f.samples, "Random (x, a) pairs for the bound");
  axs->callback([&] { action = [&](const Inputs& in) { return forms_axioms(in, g, f); }; });
  auto integrand_opts = [&](CLI::App* s) {
    s->add_option("--exponent", f.exponent, "Power-law exponent α for f(x) = x^α");
    s->add_option("--integrand", f.integrand, "pow:<alpha> or expr:<id>");
    s->add_option("--p", f.p, "p ≥ 1")->capture_default_str();
    s->add_option("--levels", f.levels, "Levels as a..b or a comma list")->capture_default_str();
  };
  CLI::App* lpg = leaf(fo, "lp-gamma", "γ_L over dyadic levels");
  integrand_opts(lpg);
  lpg->callback([&] { action = [&, lpg](const Inputs& in) { return forms_lp_gamma(in, *lpg, f); }; });
  CLI::App* clo = leaf(fo, "closure", "Closure probe on the refinement ladder");
  integrand_opts(clo);
  clo->callback([&] { action = [&, clo](const Inputs& in) { return forms_closure(in, *clo, f, g); }; });

  CLI::App* acc = app.add_subcommand("acceptance", "Run the acceptance bundle");
  acc->fallthrough();
  acc->add_option("--filter", f.filter, "Group, name or id");
  acc->add_option("--dir", f.dir, "Config directory");
  acc->callback([&] { action = [&](const Inputs&) { return acceptance_report(g, f); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const Inputs in(g, app);
    Report report = action(in);
    if (report.analysis != "acceptance") {
      report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    report.inputs["seed"] = g.seed;
    report.inputs["tol"] = g.tol;
    if (!g.config_path.empty()) report.inputs["config"] = in.config();
    if (app.get_option("--sites")->count() > 0) report.inputs["net"] = net_to_json(NetConfig(g.sites, g.site_dim));
    if (!g.state.empty()) report.inputs["state"] = g.state;
    const std::string text = g.format == "csv" ? report.to_csv() : report.to_json().dump(2) + "\n";
    if (g.out_path.empty()) {
      out << text;
    } else {
      std::ofstream file(g.out_path);
      if (!file) throw InputError(g.out_path + ": cannot write");
      file << text;
    }
    return report.pass() ? 0 : 1;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace qloc
