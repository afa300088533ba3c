#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "qloc/asymptotics.hpp"
#include "qloc/errors.hpp"

using namespace qloc;

namespace {

Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

Matrix bell_density() {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

Functional uniform_product(const NetConfig& c, const Matrix& rho) {
  return product_state(c, std::vector<Matrix>(c.n_sites(), rho));
}

// ⟨σ_z⟩ of a one-site density.
double z_expectation(const Matrix& rho) { return (rho * pauli('Z')).trace().real(); }

// Bell pair on {0,1} tensored with a fixed product state on the rest.
Functional bell_in_chain(const NetConfig& c, const Matrix& rho) {
  Matrix w = bell_density();
  for (int s = 2; s < c.n_sites(); ++s) w = kron(w, rho);
  return Functional(c, w);
}

}  // namespace

TEST(Shift, Examples) {
  const NetConfig c3(3);
  const Element x = translate(embed(pauli('X'), Region{0}, c3), 1);
  EXPECT_LT((x.matrix() - embed(pauli('X'), Region{1}, c3).matrix()).norm(), 1e-15);
  EXPECT_EQ(x.support(), (Region{1}));
  const Element e = translate(Element::identity(c3), 2);
  EXPECT_LT((e.matrix() - Matrix::Identity(8, 8)).norm(), 1e-15);
  const NetConfig c4(4);
  const Element moved = translate(embed(cnot(), Region{0, 1}, c4), 2);
  EXPECT_LT((moved.matrix() - embed(cnot(), Region{2, 3}, c4).matrix()).norm(), 1e-15);
}

TEST(Shift, AutomorphismCovarianceIsometry) {
  Rng rng(1);
  const NetConfig c(4);
  for (int g = 0; g < 4; ++g) {
    const Element a = embed(ginibre(4, 4, rng), Region{0, 1}, c);
    const Element b = embed(ginibre(2, 2, rng), Region{3}, c);
    EXPECT_LT((translate(a * b, g).matrix() - (translate(a, g) * translate(b, g)).matrix()).norm(), 1e-12);
    EXPECT_LT((translate(adjoint(a), g).matrix() - adjoint(translate(a, g)).matrix()).norm(), 1e-15);
    EXPECT_NEAR(op_norm(translate(a, g)), op_norm(a), 1e-12);
    EXPECT_EQ(minimal_support(translate(a, g)), shifted(Region{0, 1}, g, 4));
  }
}

TEST(Shift, SequenceSkipsReturnsToFarField) {
  const ShiftAction plain{1, {}};
  EXPECT_EQ(shift_sequence(plain, 4, 6), (std::vector<int>{1, 2, 3, 0, 1, 2}));
  const ShiftAction far{1, Region{0}};
  EXPECT_EQ(shift_sequence(far, 4, 6), (std::vector<int>{1, 2, 3, 1, 2, 3}));
  const ShiftAction wide{2, Region{0, 1}};
  EXPECT_EQ(shift_sequence(wide, 4, 4), (std::vector<int>{2, 2, 2, 2}));
  const ShiftAction stuck{1, Region{0, 1, 2, 3}};
  EXPECT_THROW(shift_sequence(stuck, 4, 8), InputError);
}

TEST(Invariance, Examples) {
  Rng rng(2);
  const NetConfig c(3);
  const ShiftAction a{1, {}};
  EXPECT_TRUE(is_invariant(uniform_product(c, random_density(2, 2, rng)), a));
  const std::vector<Matrix> mixed = {random_density(2, 2, rng), random_density(2, 2, rng),
                                     random_density(2, 2, rng)};
  EXPECT_FALSE(is_invariant(product_state(c, mixed), a));
  EXPECT_TRUE(is_invariant(maximally_mixed(c), a));
}

TEST(ErgodicMean, Examples) {
  Rng rng(3);
  const NetConfig c(4);
  const ShiftAction a{1, {}};
  const Element x = embed(ginibre(2, 2, rng), Region{0}, c);
  EXPECT_LT((ergodic_mean(x, 1, a).matrix() - translate(x, 1).matrix()).norm(), 1e-15);
  EXPECT_LT((ergodic_mean(Element::identity(c), 5, a).matrix() - Matrix::Identity(16, 16)).norm(), 1e-14);
  const Element z = embed(pauli('Z'), Region{0}, c);
  Matrix oracle = Matrix::Zero(16, 16);
  const Matrix i2 = Matrix::Identity(2, 2);
  for (int s = 0; s < 4; ++s) {
    Matrix term = Matrix::Identity(1, 1);
    for (int t = 0; t < 4; ++t) term = kron(term, t == s ? pauli('Z') : i2);
    oracle += term / 4.0;
  }
  EXPECT_LT((ergodic_mean(z, 4, a).matrix() - oracle).norm(), 1e-14);
  for (std::size_t n = 1; n <= 9; ++n) EXPECT_LE(op_norm(ergodic_mean(x, n, a)), op_norm(x) * (1 + 1e-12));
}

TEST(ErgodicMean, MeanValuesMatchFormedMeans) {
  Rng rng(4);
  const NetConfig c(4);
  const ShiftAction a{1, Region{0, 1}};
  const Element x = embed(ginibre(4, 4, rng), Region{0, 1}, c);
  const Matrix m = ginibre(16, 16, rng);
  const std::vector<cplx> vals = mean_values(m, x, 10, a);
  for (std::size_t n = 1; n <= 10; ++n) {
    EXPECT_LT(std::abs(vals[n - 1] - (m * ergodic_mean(x, n, a).matrix()).trace()), 1e-11);
  }
}

TEST(OmegaInfinity, InvariantStateIsConstant) {
  Rng rng(5);
  const NetConfig c(4);
  const Functional w = uniform_product(c, random_density(2, 2, rng));
  const Element z = embed(pauli('Z'), Region{0}, c);
  const ErgodicSeries s = omega_x_infinity(w, z, 64, ShiftAction{1, {}});
  EXPECT_TRUE(s.in_domain);
  for (const cplx& v : s.values) EXPECT_LT(std::abs(v - evaluate(w, z)), 1e-12);
}

TEST(OmegaInfinity, NonInvariantProductAveragesSites) {
  Rng rng(6);
  const NetConfig c(4);
  std::vector<Matrix> rhos;
  double oracle = 0.0;
  for (int s = 0; s < 4; ++s) {
    rhos.push_back(random_density(2, 2, rng));
    oracle += z_expectation(rhos.back()) / 4.0;
  }
  const ErgodicSeries s =
      omega_x_infinity(product_state(c, rhos), embed(pauli('Z'), Region{0}, c), 64, ShiftAction{1, {}});
  for (std::size_t n = 4; n <= 64; n += 4) EXPECT_NEAR(s.values[n - 1].real(), oracle, 1e-12);
  // the partial laps oscillate with amplitude O(1/N): Cauchy at 1e-6 needs a looser tolerance
  EXPECT_NEAR(s.limit.real(), oracle, 1e-12);
  EXPECT_TRUE(omega_x_infinity(product_state(c, rhos), embed(pauli('Z'), Region{0}, c), 64,
                               ShiftAction{1, {}}, 0.05)
                  .in_domain);
}

TEST(OmegaInfinity, UnitGivesOne) {
  Rng rng(7);
  const NetConfig c(3);
  const ErgodicSeries s =
      omega_x_infinity(density_state(c, random_density(8, 3, rng)), Element::identity(c), 16, ShiftAction{1, {}});
  EXPECT_TRUE(s.in_domain);
  EXPECT_LT(std::abs(s.limit - 1.0), 1e-12);
}

TEST(Clustering, Examples) {
  Rng rng(8);
  const NetConfig c(3);
  const Functional prod = product_state(
      c, std::vector<Matrix>{random_density(2, 2, rng), random_density(2, 2, rng), random_density(2, 2, rng)});
  EXPECT_LE(clustering_defect(prod, embed(ginibre(4, 4, rng), Region{0, 1}, c),
                              embed(ginibre(2, 2, rng), Region{2}, c)),
            1e-12);
  const NetConfig c2(2);
  const Functional bell(c2, bell_density());
  const Element z0 = embed(pauli('Z'), Region{0}, c2), z1 = embed(pauli('Z'), Region{1}, c2);
  const double oracle = std::abs((bell_density() * kron(pauli('Z'), pauli('Z'))).trace() -
                                 (bell_density() * z0.matrix()).trace() * (bell_density() * z1.matrix()).trace());
  EXPECT_NEAR(clustering_defect(bell, z0, z1), 1.0, 1e-14);
  EXPECT_NEAR(clustering_defect(bell, z0, z1), oracle, 1e-14);
  EXPECT_LT(clustering_defect(prod, embed(ginibre(2, 2, rng), Region{1}, c), Element::identity(c)), 1e-14);
}

TEST(AcScan, ProductStateIsAcAtSupport) {
  Rng rng(9);
  const NetConfig c(4);
  const Functional w = uniform_product(c, random_density(2, 2, rng));
  const AcScan s = ac_scan(w, embed(ginibre(2, 2, rng), Region{1}, c), 1e-10, 3);
  EXPECT_TRUE(s.is_ac);
  EXPECT_EQ(s.buffer, (Region{1}));
  EXPECT_LE(s.epsilon, 1e-12);
}

TEST(AcScan, BellPairNeedsBuffer) {
  Rng rng(10);
  const NetConfig c(4);
  const Functional w = bell_in_chain(c, random_density(2, 2, rng));
  const Element b = embed(pauli('Z'), Region{0}, c);
  const AcScan s = ac_scan(w, b, 0.5, 4);
  ASSERT_GE(s.candidates.size(), 2u);
  EXPECT_EQ(s.candidates[0].buffer, (Region{0}));
  EXPECT_GT(s.candidates[0].epsilon, 0.5);
  EXPECT_EQ(s.candidates[0].worst_label, "Z1");
  EXPECT_TRUE(s.is_ac);
  EXPECT_EQ(s.buffer, (Region{0, 1}));
}

TEST(AcScan, UnitIsAlwaysAc) {
  Rng rng(11);
  const NetConfig c(3);
  const AcScan s = ac_scan(density_state(c, random_density(8, 8, rng)), Element::identity(c), 1e-12, 5);
  EXPECT_TRUE(s.is_ac);
  EXPECT_TRUE(s.buffer.empty());
}

TEST(AcScan, ProbeSetCoversWeightTwoPaulis) {
  const NetConfig c(4);
  const std::vector<Probe> probes = probe_set(c, Region{1, 2, 3}, 0);
  // 3·3 weight-one + 3·9 weight-two + 50 random
  EXPECT_EQ(probes.size(), 9u + 27u + kRandomProbes);
  for (const Probe& p : probes) {
    EXPECT_NEAR(op_norm(p.matrix), 1.0, 1e-12);
    EXPECT_TRUE(orthogonal(minimal_support(Element(c, p.matrix, Region::full(c))), Region{0}));
  }
}

TEST(ModificationAc, ProductStateStaysExact) {
  Rng rng(12);
  const NetConfig c(4);
  const Functional w = uniform_product(c, random_density(2, 2, rng));
  const Element cm = embed(ginibre(2, 2, rng), Region{0}, c);
  const std::vector<Element> bs = {embed(ginibre(2, 2, rng), Region{1}, c)};
  const ModificationAcReport r = verify_modification_ac(w, cm, bs, Region{0}, 1);
  EXPECT_LE(r.max_defect, 1e-13);
  EXPECT_EQ(r.max_ratio, 0.0);
}

TEST(ModificationAc, WeaklyCorrelatedStateWithinBound) {
  Rng rng(13);
  const NetConfig c(4);
  const Matrix rho = random_density(2, 2, rng);
  Matrix prod = Matrix::Identity(1, 1);
  for (int s = 0; s < 4; ++s) prod = kron(prod, rho);
  Matrix bell = bell_density();
  for (int s = 2; s < 4; ++s) bell = kron(bell, rho);
  const Functional w(c, 0.95 * prod + 0.05 * bell);
  const Element cm = embed(ginibre(2, 2, rng), Region{0}, c);
  std::vector<Element> bs;
  for (int k = 0; k < 4; ++k) bs.push_back(embed(ginibre(2, 2, rng), Region{0}, c));
  const ModificationAcReport r = verify_modification_ac(w, cm, bs, Region{0}, 2);
  EXPECT_EQ(r.buffer, (Region{0}));
  EXPECT_GT(r.epsilon, 0.0);
  EXPECT_GT(r.max_defect, 1e-6);
  EXPECT_LE(r.max_ratio, 1.0 + 1e-10);

  // c = e: bound is 2ε‖a‖‖b‖ and the defect is at most ε‖a‖‖b‖
  const ModificationAcReport unit = verify_modification_ac(w, Element::identity(c), bs, Region{0}, 2);
  EXPECT_LE(unit.max_ratio, 0.5 + 1e-10);
}

TEST(ModifiedMean, Examples) {
  Rng rng(14);
  const NetConfig c(8);
  const Functional w = uniform_product(c, random_density(2, 2, rng));
  const Element z = embed(pauli('Z'), Region{0}, c);
  const ShiftAction plain{1, {}};
  const MeanLimitReport unit = modified_mean_limit(w, Element::identity(c), z, 64, plain);
  const ErgodicSeries base = omega_x_infinity(w, z, 64, plain);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_LT(std::abs(unit.values[k] - base.values[k]), 1e-12);

  const Element b = embed(ginibre(2, 2, rng), Region{0}, c);
  const MeanLimitReport e = modified_mean_limit(w, b, Element::identity(c), 64, plain);
  for (double d : e.deviations) EXPECT_LT(d, 1e-12);
}

TEST(ModifiedMean, DeviationComesFromOverlappingTranslates) {
  // invariant product ω on n = 8, b@{0,1}; τ_{g_j}(σ_z@0) meets supp b only
  // at shift 1, so ω_b(x_N) − ω(x) = (ω_b(σ_z@1) − ω(σ_z))/N
  Rng rng(15);
  const NetConfig c(8);
  const Matrix rho = random_density(2, 2, rng);
  const Functional w = uniform_product(c, rho);
  const Element b = embed(ginibre(4, 4, rng), Region{0, 1}, c);
  const Element z = embed(pauli('Z'), Region{0}, c);
  const ShiftAction a{1, Region{0, 1}};
  const MeanLimitReport r = modified_mean_limit(w, b, z, 64, a);
  const Matrix two = kron(rho, rho);
  const Matrix local_b = [&] {
    // recover the 4×4 local factor: b = b_loc ⊗ I
    Matrix m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = b.matrix()(i * 64, j * 64);
    return m;
  }();
  const Matrix mod = local_b * two * local_b.adjoint();
  const double z1 = (mod * kron(Matrix::Identity(2, 2), pauli('Z'))).trace().real() / mod.trace().real();
  const double base = z_expectation(rho);
  for (std::size_t n = 1; n <= 64; ++n) {
    EXPECT_NEAR(std::abs(r.values[n - 1] - base), std::abs(z1 - base) / n, 1e-12) << n;
  }
  EXPECT_NEAR(r.c_estimate, std::abs(z1 - base), 1e-12);
  EXPECT_TRUE(r.tail_ok || std::abs(z1 - base) / 64 > kCauchyTol);
}

TEST(ConvexCombination, Examples) {
  Rng rng(16);
  const NetConfig c(8);
  const Functional w = uniform_product(c, random_density(2, 2, rng));
  const Element z = embed(pauli('Z'), Region{0}, c);
  const ShiftAction a{1, Region{0}};
  const Element b = embed(ginibre(2, 2, rng), Region{0}, c);
  const std::vector<std::pair<Element, double>> single = {{b, 1.0}};
  const MeanLimitReport one = convex_combination_limit(single, w, z, 64, a);
  const MeanLimitReport direct = modified_mean_limit(w, b, z, 64, a);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_LT(std::abs(one.values[k] - direct.values[k]), 1e-12);

  const std::vector<std::pair<Element, double>> units = {{Element::identity(c), 0.5},
                                                         {Element::identity(c), 0.5}};
  const MeanLimitReport u = convex_combination_limit(units, w, z, 64, a);
  const ErgodicSeries base = omega_x_infinity(w, z, 64, a);
  for (std::size_t k = 0; k < 64; ++k) EXPECT_LT(std::abs(u.values[k] - base.values[k]), 1e-12);

  std::vector<std::pair<Element, double>> three;
  for (double lambda : {0.2, 0.3, 0.5}) three.push_back({embed(ginibre(2, 2, rng), Region{0}, c), lambda});
  const MeanLimitReport t = convex_combination_limit(three, w, z, 64, a, 1e-3);
  EXPECT_TRUE(t.tail_ok);
  EXPECT_LE(t.tail, 1e-3);

  const std::vector<std::pair<Element, double>> bad = {{b, 0.7}, {b, 0.7}};
  EXPECT_THROW(convex_combination_limit(bad, w, z, 64, a), WeightError);
  const std::vector<std::pair<Element, double>> negative = {{b, 1.5}, {b, -0.5}};
  EXPECT_THROW(convex_combination_limit(negative, w, z, 64, a), WeightError);
}

TEST(ClusterProperty, Examples) {
  Rng rng(17);
  const NetConfig c(6);
  const ShiftAction a{1, {}};
  const Functional prod = uniform_product(c, random_density(2, 2, rng));
  const Element x = embed(ginibre(2, 2, rng), Region{0}, c);
  const Element z = embed(pauli('Z'), Region{0}, c);
  for (std::size_t j = 1; j <= 5; ++j) EXPECT_LT(cluster_property_defect(prod, z, x, j, a), 1e-12);
  const Functional bell = bell_in_chain(c, random_density(2, 2, rng));
  EXPECT_NEAR(cluster_property_defect(bell, z, z, 1, a), 1.0, 1e-12);
  for (std::size_t j = 2; j <= 5; ++j) EXPECT_LT(cluster_property_defect(bell, z, z, j, a), 1e-12);
  for (double d : cluster_sweep(bell, z, Element::identity(c), 6, a)) EXPECT_LT(d, 1e-12);
}

TEST(ClusterProperty, ModificationBound) {
  Rng rng(18);
  const NetConfig c(6);
  const Matrix rho = random_density(2, 2, rng);
  Matrix prod = Matrix::Identity(1, 1);
  Matrix corr = bell_density();
  for (int s = 0; s < 6; ++s) prod = kron(prod, rho);
  for (int s = 2; s < 6; ++s) corr = kron(corr, rho);
  const Functional w(c, 0.9 * prod + 0.1 * corr);
  const Element b = embed(ginibre(2, 2, rng), Region{3}, c);
  const Element a = embed(ginibre(2, 2, rng), Region{0}, c);
  const Element x = embed(ginibre(2, 2, rng), Region{0}, c);
  const ModifiedClusterSweep s = modified_cluster_sweep(w, b, a, x, 10, ShiftAction{1, {}});
  ASSERT_EQ(s.defects.size(), 10u);
  EXPECT_LE(s.max_ratio, 1.0 + 1e-10);
  EXPECT_FALSE(s.applicable[2]);  // shift 3 lands on supp b
  EXPECT_TRUE(s.applicable[0]);
}

TEST(Primary, VectorProductState) {
  Rng rng(19);
  const NetConfig c(8);
  const Vector v = random_unit_vector(2, rng);
  const Functional w = uniform_product(c, v * v.adjoint());
  const Element z = embed(pauli('Z'), Region{0}, c);
  const std::vector<Element> as = {embed(ginibre(2, 2, rng), Region{0}, c), Element::identity(c)};
  const PrimaryReport r = primary_asymptotic_check(w, as, z, 64, ShiftAction{1, Region{0}});
  EXPECT_EQ(r.commutant_dim, 1u);
  EXPECT_EQ(r.center_dim, 1u);
  EXPECT_TRUE(r.ok);
  EXPECT_LE(r.max_tail, 1e-3);
  // a = e reduces to the plain series
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_NEAR(r.deviations[1][k], std::abs(r.series.values[k] - r.series.limit), 1e-12);
  }
  const std::vector<Element> ones = {as[0]};
  const PrimaryReport unit = primary_asymptotic_check(w, ones, Element::identity(c), 16, ShiftAction{1, {}});
  EXPECT_LT(unit.max_tail, 1e-12);
}
