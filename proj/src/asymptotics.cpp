#include "qloc/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qloc/errors.hpp"
#include "qloc/gns.hpp"

namespace qloc {

std::vector<int> shift_sequence(const ShiftAction& action, int n_sites, std::size_t count) {
  const int step = ((action.step % n_sites) + n_sites) % n_sites;
  const int lap = step == 0 ? 1 : n_sites / std::gcd(step, n_sites);
  std::vector<int> out;
  out.reserve(count);
  long misses = 0;
  for (long k = 1; out.size() < count; ++k) {
    const int shift = static_cast<int>((k * step) % n_sites);
    const bool first_lap = k < lap;
    const bool far = action.far_field.empty() ||
                     orthogonal(shifted(action.far_field, shift, n_sites), action.far_field);
    if (first_lap || far) {
      out.push_back(shift);
      misses = 0;
    } else if (++misses > lap) {
      throw InputError("shift_sequence: no shift by multiples of " + std::to_string(action.step) +
                       " moves {" + action.far_field.to_string() + "} off itself");
    }
  }
  return out;
}

std::vector<std::size_t> shift_permutation(const NetConfig& config, int shift) {
  const int n = config.n_sites();
  const auto d = static_cast<std::size_t>(config.site_dim());
  shift = ((shift % n) + n) % n;
  std::vector<std::size_t> perm(config.dim());
  std::vector<std::size_t> digits(n);
  std::vector<std::size_t> moved(n);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::size_t rem = i;
    for (int s = n - 1; s >= 0; --s) {
      digits[s] = rem % d;
      rem /= d;
    }
    for (int s = 0; s < n; ++s) moved[(s + shift) % n] = digits[s];
    std::size_t j = 0;
    for (int s = 0; s < n; ++s) j = j * d + moved[s];
    perm[i] = j;
  }
  return perm;
}

Matrix translate_matrix(const Matrix& x, const std::vector<std::size_t>& perm) {
  const Eigen::Index n = x.rows();
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(perm[i], perm[j]) = x(i, j);
  }
  return out;
}

Element translate(const Element& x, int shift) {
  const NetConfig& c = x.config();
  return Element(c, translate_matrix(x.matrix(), shift_permutation(c, shift)),
                 shifted(x.support(), shift, c.n_sites()));
}

bool is_invariant(const Functional& omega, const ShiftAction& action, double tol) {
  const Matrix& f = omega.weight();
  const Matrix moved = translate_matrix(f, shift_permutation(omega.config(), action.step));
  return op_norm(Matrix(moved - f)) <= tol;
}

Element ergodic_mean(const Element& x, std::size_t n, const ShiftAction& action) {
  if (n < 1) throw InputError("ergodic_mean: N must be >= 1");
  const NetConfig& c = x.config();
  const std::vector<int> seq = shift_sequence(action, c.n_sites(), n);
  std::map<int, std::vector<std::size_t>> perms;
  Matrix sum = Matrix::Zero(c.dim(), c.dim());
  Region support;
  for (int g : seq) {
    auto it = perms.find(g);
    if (it == perms.end()) it = perms.emplace(g, shift_permutation(c, g)).first;
    sum += translate_matrix(x.matrix(), it->second);
    support = join(support, shifted(x.support(), g, c.n_sites()));
  }
  return Element(c, sum / static_cast<double>(n), support);
}

std::vector<cplx> mean_values(const Matrix& weight, const Element& x, std::size_t n_max,
                              const ShiftAction& action) {
  const NetConfig& c = x.config();
  const Matrix& xm = x.matrix();
  struct Entry {
    Eigen::Index i;
    Eigen::Index j;
    cplx v;
  };
  std::vector<Entry> nonzero;
  for (Eigen::Index j = 0; j < xm.cols(); ++j) {
    for (Eigen::Index i = 0; i < xm.rows(); ++i) {
      if (xm(i, j) != cplx(0.0, 0.0)) nonzero.push_back({i, j, xm(i, j)});
    }
  }
  const std::vector<int> seq = shift_sequence(action, c.n_sites(), n_max);
  std::map<int, cplx> term_of_shift;
  std::vector<cplx> out;
  out.reserve(n_max);
  cplx running(0.0, 0.0);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    auto it = term_of_shift.find(seq[k]);
    if (it == term_of_shift.end()) {
      const std::vector<std::size_t> perm = shift_permutation(c, seq[k]);
      cplx t(0.0, 0.0);
      // tr(M τ(x)) with τ(x)(perm i, perm j) = x(i, j)
      for (const Entry& e : nonzero) t += weight(perm[e.j], perm[e.i]) * e.v;
      it = term_of_shift.emplace(seq[k], t).first;
    }
    running += it->second;
    out.push_back(running / static_cast<double>(k + 1));
  }
  return out;
}

double cauchy_defect(std::span<const cplx> values) {
  if (values.empty()) return 0.0;
  const std::size_t q = (values.size() + 3) / 4;
  const std::size_t start = values.size() - q;
  double worst = 0.0;
  for (std::size_t i = start; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      worst = std::max(worst, std::abs(values[i] - values[j]));
    }
  }
  return worst;
}

ErgodicSeries omega_x_infinity(const Functional& omega, const Element& x, std::size_t n_max,
                               const ShiftAction& action, double tol) {
  if (n_max < 2) throw InputError("omega_x_infinity: N_max must be >= 2");
  ErgodicSeries s;
  s.values = mean_values(omega.weight(), x, n_max, action);
  s.tail_start = n_max - (n_max + 3) / 4 + 1;
  s.cauchy_defect = cauchy_defect(s.values);
  s.in_domain = s.cauchy_defect <= tol;
  s.limit = s.values.back();
  return s;
}

double clustering_defect(const Functional& omega, const Element& a, const Element& b) {
  return std::abs(evaluate(omega, a * b) - evaluate(omega, a) * evaluate(omega, b));
}

namespace {

Matrix site_letter(int d, int which) {
  if (d == 2) return pauli("XYZ"[which]);
  // Weyl operator shift^p clock^q, (p, q) ≠ (0, 0)
  const int p = (which + 1) / d;
  const int q = (which + 1) % d;
  Matrix m = Matrix::Identity(d, d);
  const Matrix s = shift_matrix(d);
  const Matrix c = clock_matrix(d);
  for (int k = 0; k < p; ++k) m = m * s;
  for (int k = 0; k < q; ++k) m = m * c;
  return m;
}

std::string letter_label(int d, int which, int site) {
  if (d == 2) return std::string(1, "XYZ"[which]) + std::to_string(site);
  const int p = (which + 1) / d;
  const int q = (which + 1) % d;
  return "W" + std::to_string(p) + std::to_string(q) + "@" + std::to_string(site);
}

}  // namespace

std::vector<Probe> probe_set(const NetConfig& config, const Region& gamma, std::uint64_t seed,
                             std::size_t random_count) {
  std::vector<Probe> out;
  if (gamma.empty()) return out;
  const int d = config.site_dim();
  const int letters = d * d - 1;
  const auto& sites = gamma.sites();
  for (int s : sites) {
    SiteSplit split(config.n_sites(), d, std::vector<int>{s});
    for (int w = 0; w < letters; ++w) {
      Matrix m = embed_matrix(site_letter(d, w), split);
      out.push_back({letter_label(d, w, s), m / op_norm(m)});
    }
  }
  for (std::size_t u = 0; u < sites.size(); ++u) {
    for (std::size_t v = u + 1; v < sites.size(); ++v) {
      SiteSplit split(config.n_sites(), d, std::vector<int>{sites[u], sites[v]});
      for (int w1 = 0; w1 < letters; ++w1) {
        for (int w2 = 0; w2 < letters; ++w2) {
          Matrix m = embed_matrix(kron(site_letter(d, w1), site_letter(d, w2)), split);
          out.push_back({letter_label(d, w1, sites[u]) + " " + letter_label(d, w2, sites[v]),
                         m / op_norm(m)});
        }
      }
    }
  }
  Rng rng(seed);
  SiteSplit split(config.n_sites(), d, sites);
  for (std::size_t r = 0; r < random_count; ++r) {
    out.push_back({"haar#" + std::to_string(r), embed_matrix(haar_unitary(split.kept_dim(), rng), split)});
  }
  return out;
}

namespace {

// tr(A B) for square matrices
cplx trace_of_product(const Matrix& a, const Matrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

}  // namespace

ProbeMax ac_epsilon(const Functional& omega, const Matrix& b, std::span<const Probe> probes) {
  ProbeMax out;
  const double nb = op_norm(b);
  if (nb == 0.0) return out;
  const Matrix& f = omega.weight();
  const Matrix bf = b * f;  // ω(ab) = tr(F a b) = tr(bF a)
  const cplx wb = trace_of_product(f, b);
  for (const Probe& p : probes) {
    const cplx wab = trace_of_product(bf, p.matrix);
    const cplx wa = trace_of_product(f, p.matrix);
    const double v = std::abs(wab - wa * wb) / (op_norm(p.matrix) * nb);
    if (v > out.value) {
      out.value = v;
      out.label = p.label;
    }
  }
  return out;
}

AcScan ac_scan(const Functional& omega, const Element& b, double eps, std::uint64_t seed,
               int max_buffer_size) {
  if (!(eps > 0.0)) throw InputError("ac_scan: eps must be positive");
  const NetConfig& c = omega.config();
  const Region core = minimal_support(b);
  const int n = c.n_sites();
  if (max_buffer_size < 0) max_buffer_size = std::max<int>(n - 1, static_cast<int>(core.size()));

  std::vector<int> free_sites;
  for (int s = 0; s < n; ++s) {
    if (!core.contains(s)) free_sites.push_back(s);
  }
  std::vector<Region> buffers;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << free_sites.size()); ++m) {
    std::vector<int> extra;
    for (std::size_t k = 0; k < free_sites.size(); ++k) {
      if (m >> k & 1U) extra.push_back(free_sites[k]);
    }
    Region r = join(core, Region(extra));
    if (static_cast<int>(r.size()) <= max_buffer_size) buffers.push_back(std::move(r));
  }
  std::sort(buffers.begin(), buffers.end(), [](const Region& x, const Region& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x.sites() < y.sites();
  });

  AcScan out;
  for (const Region& alpha : buffers) {
    const Region gamma = complement(alpha, c);
    const std::vector<Probe> probes = probe_set(c, gamma, seed);
    const ProbeMax m = ac_epsilon(omega, b.matrix(), probes);
    out.candidates.push_back({alpha, m.value, m.label});
    if (m.value <= eps) {
      out.is_ac = true;
      out.buffer = alpha;
      out.epsilon = m.value;
      return out;
    }
    if (m.value > out.worst_defect) {
      out.worst_defect = m.value;
      out.worst_region = gamma;
      out.worst_label = m.label;
    }
  }
  return out;
}

ModificationAcReport verify_modification_ac(const Functional& omega, const Element& c,
                                            std::span<const Element> bs, const Region& buffer,
                                            std::uint64_t seed, double tol) {
  const NetConfig& cfg = omega.config();
  const Functional modified = local_modification(omega, c, tol);
  const Matrix& cm = c.matrix();
  const double wcc = evaluate(omega, Matrix(cm.adjoint() * cm)).real();
  const double nc = op_norm(cm);

  ModificationAcReport out;
  out.buffer = join(buffer, minimal_support(c));
  for (const Element& b : bs) out.buffer = join(out.buffer, minimal_support(b));
  const Region gamma = complement(out.buffer, cfg);
  if (gamma.empty()) {
    throw InputError("verify_modification_ac: buffer {" + out.buffer.to_string() +
                     "} leaves no room for far elements");
  }
  const std::vector<Probe> probes = probe_set(cfg, gamma, seed);

  out.epsilon = ac_epsilon(omega, Matrix(cm.adjoint() * cm), probes).value;
  for (const Element& b : bs) {
    const Matrix y = cm.adjoint() * b.matrix() * cm;
    out.epsilon = std::max(out.epsilon, ac_epsilon(omega, y, probes).value);
  }

  const Matrix& fc = modified.weight();
  for (const Element& b : bs) {
    const Matrix& bm = b.matrix();
    const double nb = op_norm(bm);
    const Matrix bfc = bm * fc;
    const cplx wb = trace_of_product(fc, bm);
    for (const Probe& p : probes) {
      const double defect =
          std::abs(trace_of_product(bfc, p.matrix) - trace_of_product(fc, p.matrix) * wb);
      const double bound = 2.0 * out.epsilon * nc * nc * op_norm(p.matrix) * nb / wcc;
      ++out.samples;
      out.max_defect = std::max(out.max_defect, defect);
      if (defect <= 1e-13) continue;
      out.max_ratio = std::max(out.max_ratio, bound > 0.0 ? defect / bound : HUGE_VAL);
    }
  }
  return out;
}

namespace {

MeanLimitReport limit_report(const Matrix& phi, const Functional& omega, const Element& x,
                             std::size_t n_max, const ShiftAction& action, double tol) {
  MeanLimitReport r;
  const ErgodicSeries base = omega_x_infinity(omega, x, n_max, action);
  r.limit = base.limit;
  r.omega_in_domain = base.in_domain;
  r.values = mean_values(phi, x, n_max, action);
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    const double dev = std::abs(r.values[k] - r.limit);
    r.deviations.push_back(dev);
    r.c_estimate = std::max(r.c_estimate, dev * static_cast<double>(k + 1));
  }
  r.tail = r.deviations.back();
  r.tail_ok = r.tail <= tol;
  return r;
}

}  // namespace

MeanLimitReport modified_mean_limit(const Functional& omega, const Element& b, const Element& x,
                                    std::size_t n_max, const ShiftAction& action, double tol) {
  const Functional mod = local_modification(omega, b);
  return limit_report(mod.weight(), omega, x, n_max, action, tol);
}

MeanLimitReport convex_combination_limit(std::span<const std::pair<Element, double>> terms,
                                         const Functional& omega, const Element& x,
                                         std::size_t n_max, const ShiftAction& action,
                                         double tol) {
  if (terms.empty()) throw WeightError("convex_combination_limit: no terms");
  double total = 0.0;
  for (const auto& [b, lambda] : terms) {
    if (!(lambda >= 0.0)) throw WeightError("convex_combination_limit: negative weight");
    total += lambda;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw WeightError("convex_combination_limit: weights sum to " + std::to_string(total));
  }
  Matrix phi = Matrix::Zero(omega.weight().rows(), omega.weight().cols());
  for (const auto& [b, lambda] : terms) phi += lambda * local_modification(omega, b).weight();
  return limit_report(phi, omega, x, n_max, action, tol);
}

double cluster_property_defect(const Functional& omega, const Element& a, const Element& x,
                               std::size_t j, const ShiftAction& action) {
  if (j < 1) throw InputError("cluster_property_defect: j must be >= 1");
  const int g = shift_sequence(action, omega.config().n_sites(), j).back();
  return clustering_defect(omega, a, translate(x, g));
}

std::vector<double> cluster_sweep(const Functional& omega, const Element& a, const Element& x,
                                  std::size_t j_max, const ShiftAction& action) {
  std::vector<double> out;
  for (int g : shift_sequence(action, omega.config().n_sites(), j_max)) {
    out.push_back(clustering_defect(omega, a, translate(x, g)));
  }
  return out;
}

ModifiedClusterSweep modified_cluster_sweep(const Functional& omega, const Element& b,
                                            const Element& a, const Element& x,
                                            std::size_t j_max, const ShiftAction& action,
                                            double tol) {
  const Functional mod = local_modification(omega, b, tol);
  const Element big_a = adjoint(b) * a * b;
  const Element big_b = adjoint(b) * b;
  const double wb = evaluate(omega, big_b).real();
  const double wa = std::abs(evaluate(omega, big_a));
  const Region sb = minimal_support(b);
  const Region sx = minimal_support(x);
  const int n = omega.config().n_sites();

  ModifiedClusterSweep out;
  for (int g : shift_sequence(action, n, j_max)) {
    const Element y = translate(x, g);
    const double defect = clustering_defect(mod, a, y);
    const bool applies = orthogonal(shifted(sx, g, n), sb);
    const double bound =
        (clustering_defect(omega, big_a, y) * wb + wa * clustering_defect(omega, big_b, y)) /
        (wb * wb);
    out.defects.push_back(defect);
    out.bounds.push_back(bound);
    out.applicable.push_back(applies);
    if (applies && defect > 1e-13) {
      out.max_ratio = std::max(out.max_ratio, bound > 0.0 ? defect / bound : HUGE_VAL);
    }
  }
  return out;
}

PrimaryReport primary_asymptotic_check(const Functional& omega, std::span<const Element> as,
                                       const Element& x, std::size_t n_max,
                                       const ShiftAction& action, double tol) {
  PrimaryReport r;
  const GnsTriple triple = gns_construct(omega);
  const std::vector<Matrix> gens = local_generators(omega.config());
  const CommutantBasis comm = weak_commutant(triple, gens);
  r.commutant_dim = comm.dimension();
  r.center_dim = center(comm, triple).dimension();
  if (r.center_dim != 1) {
    throw NotPrimary("primary_asymptotic_check: center of the commutant has dimension " +
                     std::to_string(r.center_dim));
  }
  r.series = omega_x_infinity(omega, x, n_max, action);
  const cplx limit = r.series.limit;
  r.ok = r.series.in_domain;
  for (const Element& a : as) {
    const Matrix fa = omega.weight() * a.matrix();
    const cplx wa = evaluate(omega, a);
    const std::vector<cplx> vals = mean_values(fa, x, n_max, action);
    std::vector<double> dev;
    for (const cplx& v : vals) dev.push_back(std::abs(v - wa * limit));
    r.tails.push_back(dev.back());
    r.max_tail = std::max(r.max_tail, dev.back());
    r.deviations.push_back(std::move(dev));
  }
  r.ok = r.ok && r.max_tail <= tol;
  return r;
}

}  // namespace qloc
