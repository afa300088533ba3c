#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qloc/errors.hpp"
#include "qloc/forms.hpp"
#include "qloc/gns.hpp"

using namespace qloc;

namespace {

// max |Ω(xa, b) − Ω(a, x*b)| over all matrix-unit triples, evaluated one by one.
double invariance_defect_oracle(const SesqForm& form) {
  const auto units = matrix_units(form.config().dim());
  double worst = 0.0;
  for (const Matrix& x : units) {
    for (const Matrix& a : units) {
      for (const Matrix& b : units) {
        worst = std::max(worst, std::abs(form(Matrix(x * a), b) - form(a, Matrix(x.adjoint() * b))));
      }
    }
  }
  return worst;
}

Matrix bell_density() {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

// γ_L for x^alpha straight from the antiderivative, no cancellation guards.
double power_gamma_oracle(double alpha, int level) {
  const double beta = alpha + 1.0;
  const double n = std::ldexp(1.0, level);
  long double s = 0.0L;
  for (long k = 0; k < static_cast<long>(n); ++k) {
    const long double lo = k / static_cast<long double>(n), hi = (k + 1) / static_cast<long double>(n);
    const long double m = (std::pow(hi, static_cast<long double>(beta)) - std::pow(lo, static_cast<long double>(beta))) /
                          (beta * (hi - lo));
    s += m * m / n;
  }
  return std::sqrt(static_cast<double>(s));
}

}  // namespace

TEST(FormAxioms, GnsFormOfState) {
  Rng rng(1);
  const NetConfig c(1);
  const SesqForm form = gns_form(density_state(c, random_density(2, 2, rng)));
  const FormAxiomReport r = check_form_axioms(form);
  EXPECT_TRUE(r.positive);
  EXPECT_TRUE(r.invariant);
  EXPECT_LT(invariance_defect_oracle(form), 1e-14);
}

TEST(FormAxioms, GnsFormMatchesDefinition) {
  Rng rng(2);
  const NetConfig c(2);
  const Functional w = density_state(c, random_density(4, 3, rng));
  const SesqForm form = gns_form(w);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = ginibre(4, 4, rng), b = ginibre(4, 4, rng);
    EXPECT_LT(std::abs(form(a, b) - evaluate(w, Matrix(b.adjoint() * a))), 1e-11);
  }
}

TEST(FormAxioms, NegativeGramFailsPositivity) {
  const NetConfig c(1);
  const FormAxiomReport r = check_form_axioms(SesqForm(c, -Matrix::Identity(4, 4)));
  EXPECT_FALSE(r.positive);
  EXPECT_NEAR(r.min_eigenvalue, -1.0, 1e-14);
}

TEST(FormAxioms, NonInvariantWeightHasQuantifiedDefect) {
  // Ω(a, b) = tr(b* W a) with W = diag(0.7, 0.3) is invariant only for scalar W;
  // x = E_01, a = E_10, b = E_00 gives |W_0 − W_1| = 0.4
  const NetConfig c(1);
  Matrix w = Matrix::Zero(2, 2);
  w(0, 0) = 0.7;
  w(1, 1) = 0.3;
  const SesqForm form(c, kron(w, Matrix::Identity(2, 2)));
  const FormAxiomReport r = check_form_axioms(form);
  EXPECT_TRUE(r.positive);
  EXPECT_FALSE(r.invariant);
  EXPECT_NEAR(r.invariance_defect, 0.4, 1e-14);
  EXPECT_NEAR(invariance_defect_oracle(form), r.invariance_defect, 1e-14);
}

TEST(FormAxioms, BlockwiseDefectMatchesOracleOnRandomGrams) {
  Rng rng(3);
  const NetConfig c(1);
  for (int t = 0; t < 5; ++t) {
    const Matrix g = ginibre(4, 4, rng);
    const SesqForm form(c, g.adjoint() * g);
    EXPECT_NEAR(check_form_axioms(form).invariance_defect, invariance_defect_oracle(form), 1e-12);
  }
}

TEST(FormBound, Examples) {
  Rng rng(4);
  const NetConfig c(2);
  const SesqForm form = gns_form(density_state(c, random_density(4, 2, rng)));
  std::vector<std::pair<Matrix, Matrix>> unit, unitary, random;
  for (int t = 0; t < 100; ++t) {
    const Matrix a = ginibre(4, 4, rng);
    unit.emplace_back(Matrix::Identity(4, 4), a);
    unitary.emplace_back(haar_unitary(4, rng), a);
    random.emplace_back(ginibre(4, 4, rng), a);
  }
  EXPECT_NEAR(form_bound_check(form, unit), 1.0, 1e-12);
  EXPECT_LE(form_bound_check(form, unitary), 1.0 + 1e-9);
  EXPECT_LE(form_bound_check(form, random), 1.0 + 1e-9);
}

TEST(FormModification, Examples) {
  Rng rng(5);
  const NetConfig c1(1);
  const SesqForm form = gns_form(density_state(c1, random_density(2, 2, rng)));
  const SesqForm same = form_modification(form, Matrix::Identity(2, 2));
  EXPECT_LT((same.gram() - form.gram() / form(Matrix::Identity(2, 2), Matrix::Identity(2, 2)).real()).norm(),
            1e-14);
  Matrix p1 = Matrix::Zero(2, 2);
  p1(1, 1) = 1.0;
  Matrix p0 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  EXPECT_THROW(form_modification(gns_form(Functional(c1, p0)), p1), DegenerateModification);
}

TEST(FormModification, MatchesModifiedState) {
  Rng rng(6);
  for (int n : {1, 2, 3}) {
    const NetConfig c(n);
    const std::size_t d = c.dim();
    const Functional w = density_state(c, random_density(d, 2, rng));
    const Matrix b = ginibre(d, d, rng);
    const SesqForm lhs = form_modification(gns_form(w), b);
    const SesqForm rhs = gns_form(local_modification(w, Element(c, b, Region::full(c))));
    EXPECT_LT((lhs.gram() - rhs.gram()).cwiseAbs().maxCoeff(), 1e-10) << n;
    const FormAxiomReport r = check_form_axioms(lhs, 1e-9);
    EXPECT_TRUE(r.positive && r.invariant);
  }
}

TEST(FormAc, Examples) {
  Rng rng(7);
  const NetConfig c(3);
  const Matrix rho = random_density(2, 2, rng);
  const SesqForm prod = gns_form(product_state(c, std::vector<Matrix>{rho, rho, rho}));
  const Element b = embed(ginibre(2, 2, rng), Region{0}, c);
  const Element cm = embed(ginibre(2, 2, rng), Region{0}, c);
  const FormAcReport p = form_ac_check(prod, b, 1e-10, cm, 1);
  EXPECT_TRUE(p.is_ac);
  EXPECT_EQ(p.buffer, (Region{0}));
  EXPECT_EQ(p.max_ratio, 0.0);

  const SesqForm bell = gns_form(Functional(c, kron(bell_density(), rho)));
  const Element z = embed(pauli('Z'), Region{0}, c);
  const FormAcReport q = form_ac_check(bell, z, 0.5, cm, 2);
  ASSERT_GE(q.candidates.size(), 2u);
  EXPECT_GT(q.candidates[0].second, 0.5);
  EXPECT_TRUE(q.is_ac);
  EXPECT_EQ(q.buffer, (Region{0, 1}));
  EXPECT_LE(q.max_ratio, 1.0 + 1e-10);

  const FormAcReport u = form_ac_check(bell, Element::identity(c), 1e-12, cm, 3);
  EXPECT_TRUE(u.is_ac);
  EXPECT_LT(u.epsilon, 1e-14);
}

TEST(Integrand, ParseAndCatalog) {
  EXPECT_NEAR(parse_integrand("pow:-0.4").alpha, -0.4, 1e-15);
  EXPECT_TRUE(in_lp(parse_integrand("pow:-0.4"), 2.0));
  EXPECT_FALSE(in_lp(parse_integrand("pow:-0.6"), 2.0));
  EXPECT_TRUE(in_lp(parse_integrand("pow:-0.6"), 1.0));
  EXPECT_TRUE(in_lp(parse_integrand("expr:invsqrtlog"), 2.0));
  EXPECT_FALSE(in_lp(parse_integrand("expr:invsqrtlog"), 2.5));
  for (const std::string& id : integrand_catalog()) EXPECT_NO_THROW(parse_integrand("expr:" + id));
  EXPECT_THROW(parse_integrand("expr:nope"), InputError);
  EXPECT_THROW(parse_integrand("pow:abc"), InputError);
  EXPECT_THROW(parse_integrand("x^2"), InputError);
}

TEST(IntervalMeans, PowerLawMatchesAntiderivative) {
  const Integrand f = parse_integrand("pow:-0.6");
  const std::vector<double> m = interval_means(f, 8);
  for (std::size_t k = 0; k < m.size(); k += 17) {
    const double lo = k / 256.0, hi = (k + 1) / 256.0;
    EXPECT_NEAR(m[k], (std::pow(hi, 0.4) - std::pow(lo, 0.4)) / (0.4 / 256.0), 1e-11 * m[k]);
  }
  EXPECT_THROW(interval_means(parse_integrand("pow:-1.2"), 4), NonIntegrable);
}

TEST(IntervalMeans, QuadratureMatchesClosedForms) {
  // ∫ −log x = x − x log x, ∫ √x = (2/3) x^{3/2}
  const std::vector<double> neglog = interval_means(parse_integrand("expr:neglog"), 6);
  const std::vector<double> root = interval_means(parse_integrand("expr:sqrt"), 6);
  auto g = [](double x) { return x > 0 ? x - x * std::log(x) : 0.0; };
  for (std::size_t k = 0; k < 64; ++k) {
    const double lo = k / 64.0, hi = (k + 1) / 64.0;
    EXPECT_NEAR(neglog[k], (g(hi) - g(lo)) * 64.0, 1e-9 * std::abs(neglog[k]));
    EXPECT_NEAR(root[k], (2.0 / 3.0) * (std::pow(hi, 1.5) - std::pow(lo, 1.5)) * 64.0, 1e-9);
  }
}

TEST(LpGamma, Examples) {
  const Integrand one = parse_integrand("expr:one");
  for (int l : {0, 3, 10}) EXPECT_NEAR(lp_gamma_estimate(one, 1.0, l), 1.0, 1e-12);

  const Integrand f4 = parse_integrand("pow:-0.4");
  const std::vector<int> levels = {5, 10, 15, 20};
  const std::vector<double> g4 = lp_gamma_series(f4, 1.0, levels);
  const std::vector<double> frozen4 = {1.9712, 2.1078, 2.1729, 2.2047};
  for (std::size_t i = 0; i < levels.size(); ++i) {
    EXPECT_NEAR(g4[i], frozen4[i], 1e-4);
    if (i > 0) EXPECT_GT(g4[i], g4[i - 1]);
    EXPECT_LT(g4[i], std::sqrt(5.0));
  }
  EXPECT_NEAR(g4[1], power_gamma_oracle(-0.4, 10), 1e-10);

  const Integrand f6 = parse_integrand("pow:-0.6");
  const std::vector<double> g6 = lp_gamma_series(f6, 1.0, levels);
  const std::vector<double> frozen6 = {4.1804, 6.3207, 9.2143, 13.2215};
  for (std::size_t i = 0; i < levels.size(); ++i) EXPECT_NEAR(g6[i], frozen6[i], 1e-4);
  EXPECT_NEAR(g6[1], power_gamma_oracle(-0.6, 10), 1e-9);

  EXPECT_THROW(lp_gamma_estimate(f6, 2.0, 5), NonIntegrable);
}

TEST(LpGamma, MonotoneInLevel) {
  for (const char* spec : {"pow:-0.3", "expr:neglog", "expr:invsqrtlog"}) {
    const Integrand f = parse_integrand(spec);
    std::vector<int> levels;
    for (int l = 0; l <= 12; ++l) levels.push_back(l);
    const std::vector<double> g = lp_gamma_series(f, 1.0, levels);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GE(g[i], g[i - 1] - 1e-12) << spec;
  }
}

TEST(Ladder, CoarseLevelsAreConditionalAverages) {
  const Integrand f = parse_integrand("expr:neglog");
  const std::vector<int> levels = {2, 5};
  const RefinementLadder ladder = build_ladder(f, levels);
  const std::vector<double> direct = interval_means(f, 2);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(ladder.members[0].values[k], direct[k], 1e-9);
  EXPECT_EQ(ladder.members[1].values.size(), 32u);
  const std::vector<int> bad = {5, 5};
  EXPECT_THROW(build_ladder(f, bad), InputError);
}

TEST(Closure, Dichotomy) {
  std::vector<int> levels;
  for (int l = 5; l <= 20; ++l) levels.push_back(l);

  const ClosureReport one = closure_probe(build_ladder(parse_integrand("expr:one"), levels), 1.0);
  EXPECT_TRUE(one.lp_cauchy && one.omega_cauchy && one.gamma_bounded);
  ASSERT_TRUE(one.closure_value.has_value());
  EXPECT_NEAR(*one.closure_value, 1.0, 1e-12);

  const ClosureReport good = closure_probe(build_ladder(parse_integrand("pow:-0.4"), levels), 1.0);
  EXPECT_TRUE(good.lp_cauchy);
  EXPECT_TRUE(good.omega_cauchy);
  EXPECT_TRUE(good.gamma_bounded);
  EXPECT_TRUE(good.wt_holds);
  ASSERT_TRUE(good.closure_value.has_value());
  EXPECT_NEAR(*good.closure_value, 5.0, 0.02);

  const ClosureReport bad = closure_probe(build_ladder(parse_integrand("pow:-0.6"), levels), 1.0);
  EXPECT_TRUE(bad.lp_cauchy);
  EXPECT_FALSE(bad.omega_cauchy);
  EXPECT_FALSE(bad.gamma_bounded);
  EXPECT_FALSE(bad.closure_value.has_value());
}

TEST(Closure, GeometricTail) {
  const std::vector<double> shrinking = {1.0, 0.5, 0.25, 0.125};
  const GeometricTail g = geometric_tail(shrinking, 1e-12);
  EXPECT_TRUE(g.converges);
  EXPECT_NEAR(g.ratio, 0.5, 1e-15);
  EXPECT_NEAR(g.remainder, 0.125, 1e-15);
  const std::vector<double> growing = {1.0, 1.2, 1.44};
  EXPECT_FALSE(geometric_tail(growing, 1e-12).converges);
  const std::vector<double> zeros = {0.0, 0.0};
  EXPECT_TRUE(geometric_tail(zeros, 1e-12).converges);
}
