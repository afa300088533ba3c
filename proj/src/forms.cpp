#include "qloc/forms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "qloc/asymptotics.hpp"
#include "qloc/errors.hpp"

namespace qloc {

SesqForm::SesqForm(NetConfig config, Matrix gram) : config_(config), gram_(std::move(gram)) {
  const auto n = static_cast<Eigen::Index>(config_.dim() * config_.dim());
  if (gram_.rows() != n || gram_.cols() != n) {
    throw DimensionMismatch("SesqForm: gram must be " + std::to_string(n) + "x" + std::to_string(n));
  }
}

Vector coordinates(const Matrix& a) {
  Vector c(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) c(i * a.cols() + j) = a(i, j);
  }
  return c;
}

cplx SesqForm::operator()(const Matrix& a, const Matrix& b) const {
  return coordinates(b).dot(gram_ * coordinates(a));
}

SesqForm gns_form(const Functional& omega) {
  const auto d = static_cast<Eigen::Index>(omega.config().dim());
  return SesqForm(omega.config(), kron(Matrix::Identity(d, d), omega.weight().transpose()));
}

FormAxiomReport check_form_axioms(const SesqForm& form, double tol) {
  FormAxiomReport r;
  const Matrix& q = form.gram();
  r.min_eigenvalue = min_eigenvalue(q);
  r.positive = r.min_eigenvalue >= -tol && hermiticity_defect(q) <= tol;

  // Q L_x − L_{x*}† Q for x = E_pq with L_x = E_pq ⊗ I, written blockwise in
  // the D × D blocks B_ik of Q: block (i,q) holds B_ip, block (p,k) loses B_qk.
  const auto d = static_cast<Eigen::Index>(form.config().dim());
  auto block = [&](Eigen::Index i, Eigen::Index k) { return q.block(i * d, k * d, d, d); };
  std::vector<double> block_max(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) block_max[i * d + k] = block(i, k).cwiseAbs().maxCoeff();
  }
  double worst = 0.0;
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index s = 0; s < d; ++s) {
      for (Eigen::Index i = 0; i < d; ++i) {
        if (i != p) worst = std::max(worst, block_max[i * d + p]);
      }
      for (Eigen::Index k = 0; k < d; ++k) {
        if (k != s) worst = std::max(worst, block_max[s * d + k]);
      }
      worst = std::max(worst, Matrix(block(p, p) - block(s, s)).cwiseAbs().maxCoeff());
    }
  }
  r.invariance_defect = worst;
  r.invariant = worst <= tol;
  return r;
}

double form_bound_check(const SesqForm& form, std::span<const std::pair<Matrix, Matrix>> samples,
                        double tol) {
  double worst = 0.0;
  for (const auto& [x, a] : samples) {
    const double aa = form(a, a).real();
    const double nx = op_norm(x);
    if (aa <= tol || nx == 0.0) continue;
    worst = std::max(worst, std::abs(form(Matrix(x * a), a)) / (nx * aa));
  }
  return worst;
}

SesqForm form_modification(const SesqForm& form, const Matrix& b, double tol) {
  const cplx bb = form(b, b);
  if (!(bb.real() > tol)) {
    throw DegenerateModification("form_modification: Ω(b,b) = " + std::to_string(bb.real()) +
                                 " is not above tolerance");
  }
  const auto d = static_cast<Eigen::Index>(form.config().dim());
  const Matrix r = kron(Matrix::Identity(d, d), b.transpose());
  return SesqForm(form.config(), r.adjoint() * form.gram() * r / bb.real());
}

namespace {

// sup over probes of |Ω(a,z) − Ω(a,e)Ω(e,z)| / (‖a‖‖z‖)
double form_epsilon(const SesqForm& form, const Matrix& z, std::span<const Probe> probes) {
  const double nz = op_norm(z);
  if (nz == 0.0) return 0.0;
  const auto d = static_cast<Eigen::Index>(form.config().dim());
  const Vector ce = coordinates(Matrix::Identity(d, d));
  const Vector cz = coordinates(z);
  const Vector uz = form.gram().adjoint() * cz;
  const Vector ue = form.gram().adjoint() * ce;
  const cplx ez = cz.dot(form.gram() * ce);
  double worst = 0.0;
  for (const Probe& p : probes) {
    const Vector ca = coordinates(p.matrix);
    const double v = std::abs(uz.dot(ca) - ue.dot(ca) * ez) / (op_norm(p.matrix) * nz);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

FormAcReport form_ac_check(const SesqForm& form, const Element& b, double eps, const Element& c,
                           std::uint64_t seed, double tol) {
  if (!(eps > 0.0)) throw InputError("form_ac_check: eps must be positive");
  const NetConfig& cfg = form.config();
  const int n = cfg.n_sites();
  const Region core = minimal_support(b);
  std::vector<Region> buffers;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    Region r = Region::from_mask(m);
    if (leq(core, r) && static_cast<int>(r.size()) <= std::max<int>(n - 1, core.size())) {
      buffers.push_back(std::move(r));
    }
  }
  std::sort(buffers.begin(), buffers.end(), [](const Region& x, const Region& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x.sites() < y.sites();
  });

  FormAcReport r;
  for (const Region& alpha : buffers) {
    const std::vector<Probe> probes = probe_set(cfg, complement(alpha, cfg), seed);
    const double e = form_epsilon(form, b.matrix(), probes);
    r.candidates.emplace_back(alpha, e);
    r.buffer = alpha;
    if (e <= eps) {
      r.is_ac = true;
      r.epsilon = e;
      break;
    }
    r.worst_defect = std::max(r.worst_defect, e);
  }

  // Ω_c against the far elements; the same invariance rewrite as for states
  // reduces the proof to clustering of c*bc and c*c.
  const Matrix& cm = c.matrix();
  const SesqForm modified = form_modification(form, cm, tol);
  const double cc = form(cm, cm).real();
  const double nc = op_norm(cm);
  const double nb = op_norm(b.matrix());
  r.modified_buffer = join(r.buffer, join(minimal_support(c), core));
  const Region gamma = complement(r.modified_buffer, cfg);
  if (gamma.empty() || nb == 0.0) return r;
  const std::vector<Probe> probes = probe_set(cfg, gamma, seed);
  r.modified_epsilon = std::max(form_epsilon(form, Matrix(cm.adjoint() * b.matrix() * cm), probes),
                                form_epsilon(form, Matrix(cm.adjoint() * cm), probes));
  const auto d = static_cast<Eigen::Index>(cfg.dim());
  const Vector ce = coordinates(Matrix::Identity(d, d));
  const Vector cb = coordinates(b.matrix());
  const Matrix& qc = modified.gram();
  const Vector ub = qc.adjoint() * cb;
  const Vector ue = qc.adjoint() * ce;
  const cplx eb = cb.dot(qc * ce);
  for (const Probe& p : probes) {
    const Vector ca = coordinates(p.matrix);
    const double defect = std::abs(ub.dot(ca) - ue.dot(ca) * eb);
    const double bound = 2.0 * r.modified_epsilon * nc * nc * op_norm(p.matrix) * nb / cc;
    ++r.samples;
    if (defect <= 1e-13) continue;
    r.max_ratio = std::max(r.max_ratio, bound > 0.0 ? defect / bound : HUGE_VAL);
  }
  return r;
}

// L^p model

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(1e-10 * std::abs(whole), 1e-300);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// ∫_0^h f, splitting [h/2^{m+1}, h/2^m] towards the singular end.
double integral_from_zero(const std::function<double(double)>& f, double h) {
  double total = 0.0;
  double hi = h;
  for (int m = 0; m < 1000; ++m) {
    const double lo = 0.5 * hi;
    const double piece = adaptive_simpson(f, lo, hi);
    total += piece;
    if (m >= 8 && std::abs(piece) <= 1e-16 * std::abs(total)) break;
    hi = lo;
    if (hi < std::numeric_limits<double>::min()) break;
  }
  return total;
}

double parse_double(std::string_view s, std::string_view whole) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw InputError("malformed integrand \"" + std::string(whole) + "\": bad exponent");
  }
  return v;
}

}  // namespace

std::vector<std::string> integrand_catalog() { return {"one", "neglog", "sqrt", "invsqrtlog"}; }

Integrand parse_integrand(std::string_view spec) {
  Integrand g;
  g.spec = std::string(spec);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (spec.starts_with("pow:")) {
    g.power = true;
    g.alpha = parse_double(spec.substr(4), spec);
    const double a = g.alpha;
    g.f = [a](double x) { return std::pow(x, a); };
    g.max_p = a < 0.0 ? -1.0 / a : inf;
    g.max_p_inclusive = false;
    return g;
  }
  if (spec.starts_with("expr:")) {
    const std::string_view id = spec.substr(5);
    g.max_p = inf;
    if (id == "one") {
      g.f = [](double) { return 1.0; };
    } else if (id == "neglog") {
      g.f = [](double x) { return -std::log(x); };
    } else if (id == "sqrt") {
      g.f = [](double x) { return std::sqrt(x); };
    } else if (id == "invsqrtlog") {
      // 1/(√x (1 − log x)): in L², ‖f‖₂² = 1, not in L^p for p > 2
      g.f = [](double x) { return 1.0 / (std::sqrt(x) * (1.0 - std::log(x))); };
      g.max_p = 2.0;
      g.max_p_inclusive = true;
    } else {
      throw InputError("unknown integrand \"" + std::string(spec) + "\"; catalog: one, neglog, sqrt, invsqrtlog");
    }
    return g;
  }
  throw InputError("malformed integrand \"" + std::string(spec) + "\": expected pow:<alpha> or expr:<id>");
}

bool in_lp(const Integrand& f, double p) {
  if (f.power && f.alpha <= -1.0) return false;
  return f.max_p_inclusive ? p <= f.max_p : p < f.max_p;
}

std::vector<double> interval_means(const Integrand& f, int level) {
  if (level < 0 || level > kMaxLevel) {
    throw InputError("level " + std::to_string(level) + " outside 0.." + std::to_string(kMaxLevel));
  }
  if (f.power && f.alpha <= -1.0) {
    throw NonIntegrable("integrand " + f.spec + " is not integrable at 0");
  }
  const std::size_t count = std::size_t{1} << level;
  const double h = std::ldexp(1.0, -level);
  std::vector<double> m(count);
  if (f.power) {
    const double a = f.alpha;
    const double beta = a + 1.0;
    const double scale = std::pow(h, a) / beta;
    // ((k+1)^β − k^β) = k^β·expm1(β·log1p(1/k)) keeps precision for large k
    m[0] = scale;
    for (std::size_t k = 1; k < count; ++k) {
      const double kd = static_cast<double>(k);
      m[k] = scale * std::pow(kd, beta) * std::expm1(beta * std::log1p(1.0 / kd));
    }
  } else {
    m[0] = integral_from_zero(f.f, h) / h;
    for (std::size_t k = 1; k < count; ++k) {
      m[k] = adaptive_simpson(f.f, k * h, (k + 1) * h) / h;
    }
  }
  for (double v : m) {
    if (!std::isfinite(v)) throw NonIntegrable("integrand " + f.spec + ": interval mean diverges");
  }
  return m;
}

namespace {

std::vector<double> coarsen(const std::vector<double>& fine) {
  std::vector<double> out(fine.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (fine[2 * k] + fine[2 * k + 1]);
  return out;
}

double gamma_of(const std::vector<double>& means) {
  double s = 0.0;
  for (double v : means) s += v * v;
  return std::sqrt(s / static_cast<double>(means.size()));
}

void require_increasing(std::span<const int> levels) {
  if (levels.empty()) throw InputError("no levels given");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] > kMaxLevel) {
      throw InputError("level " + std::to_string(levels[i]) + " outside 0.." +
                       std::to_string(kMaxLevel));
    }
    if (i > 0 && levels[i] <= levels[i - 1]) throw InputError("levels must increase");
  }
}

}  // namespace

RefinementLadder build_ladder(const Integrand& f, std::span<const int> levels) {
  require_increasing(levels);
  RefinementLadder ladder;
  ladder.target = f;
  std::vector<double> current = interval_means(f, levels.back());
  int level = levels.back();
  ladder.members.resize(levels.size());
  for (std::size_t i = levels.size(); i-- > 0;) {
    while (level > levels[i]) {
      current = coarsen(current);
      --level;
    }
    ladder.members[i] = {level, current};
  }
  return ladder;
}

std::vector<double> lp_gamma_series(const Integrand& f, double p, std::span<const int> levels) {
  if (p < 1.0) throw InputError("p must be >= 1");
  if (!in_lp(f, p)) {
    throw NonIntegrable("integrand " + f.spec + " is not in L^" + std::to_string(p));
  }
  const RefinementLadder ladder = build_ladder(f, levels);
  std::vector<double> out;
  for (const StepFunction& s : ladder.members) out.push_back(gamma_of(s.values));
  return out;
}

double lp_gamma_estimate(const Integrand& f, double p, int level) {
  const int levels[] = {level};
  return lp_gamma_series(f, p, levels).front();
}

GeometricTail geometric_tail(std::span<const double> increments, double tol) {
  GeometricTail g;
  if (std::all_of(increments.begin(), increments.end(), [&](double v) { return std::abs(v) <= tol; })) {
    g.converges = true;
    return g;
  }
  if (increments.size() < 2) return g;
  const std::size_t n = increments.size();
  const std::size_t first = n >= 4 ? n - 4 : 0;
  double worst = 0.0;
  for (std::size_t i = first; i + 1 < n; ++i) {
    const double a = std::abs(increments[i]);
    const double b = std::abs(increments[i + 1]);
    if (a <= tol) {
      if (b > tol) worst = HUGE_VAL;
      continue;
    }
    worst = std::max(worst, b / a);
  }
  g.ratio = worst;
  g.converges = worst < 0.98;
  if (g.converges) g.remainder = std::abs(increments.back()) * worst / (1.0 - worst);
  return g;
}

ClosureReport closure_probe(const RefinementLadder& ladder, double p, double tol) {
  if (ladder.members.empty()) throw InputError("closure_probe: empty ladder");
  if (p < 1.0) throw InputError("p must be >= 1");
  ClosureReport r;
  std::vector<double> gamma_sq;
  for (const StepFunction& s : ladder.members) {
    const double g = gamma_of(s.values);
    r.gamma.push_back(g);
    gamma_sq.push_back(g * g);
  }
  for (std::size_t i = 0; i + 1 < ladder.members.size(); ++i) {
    const StepFunction& lo = ladder.members[i];
    const StepFunction& hi = ladder.members[i + 1];
    const int shift = hi.level - lo.level;
    double acc = 0.0;
    for (std::size_t k = 0; k < hi.values.size(); ++k) {
      acc += std::pow(std::abs(hi.values[k] - lo.values[k >> shift]), p);
    }
    r.lp_increments.push_back(std::pow(acc / static_cast<double>(hi.values.size()), 1.0 / p));
    // nested conditional averages: ‖x_{n+1} − x_n‖₂² = ‖x_{n+1}‖₂² − ‖x_n‖₂²
    r.omega_increments.push_back(gamma_sq[i + 1] - gamma_sq[i]);
  }
  std::vector<double> gamma_steps;
  for (std::size_t i = 0; i + 1 < r.gamma.size(); ++i) gamma_steps.push_back(r.gamma[i + 1] - r.gamma[i]);

  r.lp_cauchy = geometric_tail(r.lp_increments, tol).converges;
  const GeometricTail omega_tail = geometric_tail(r.omega_increments, tol);
  r.omega_cauchy = omega_tail.converges;
  r.gamma_bounded = geometric_tail(gamma_steps, tol).converges;
  if (r.lp_cauchy && r.omega_cauchy) r.closure_value = gamma_sq.back() + omega_tail.remainder;
  return r;
}

}  // namespace qloc
