#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qloc/algebra.hpp"
#include "qloc/errors.hpp"
#include "qloc/states.hpp"

using namespace qloc;

namespace {

Matrix ket_bra(std::size_t dim, std::size_t i, std::size_t j) {
  Matrix m = Matrix::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

Matrix bell_density() {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

// Reduced density on the first qubit of a two-qubit matrix, by indices.
Matrix trace_second_qubit(const Matrix& a) {
  Matrix out = Matrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out(i, j) = a(2 * i, 2 * j) + a(2 * i + 1, 2 * j + 1);
    }
  }
  return out;
}

}  // namespace

TEST(Evaluate, Examples) {
  const NetConfig c2(2);
  EXPECT_NEAR(std::abs(evaluate(maximally_mixed(c2), Element::identity(c2)) - 1.0), 0.0, 1e-15);
  const NetConfig c1(1);
  EXPECT_NEAR(std::abs(evaluate(maximally_mixed(c1), embed(pauli('Z'), Region{0}, c1))), 0.0, 1e-15);
  Vector e0 = Vector::Zero(2);
  e0(0) = 1.0;
  const Functional w = vector_state(c1, e0);
  const Matrix oracle = ket_bra(2, 0, 0) * pauli('Z');
  EXPECT_NEAR(std::abs(evaluate(w, embed(pauli('Z'), Region{0}, c1)) - oracle.trace()), 0.0, 1e-15);
}

TEST(Evaluate, IsLinearAndMatchesTrace) {
  Rng rng(1);
  const NetConfig c(2);
  const Functional w = density_state(c, random_density(4, 2, rng));
  const Matrix a = ginibre(4, 4, rng);
  const Matrix b = ginibre(4, 4, rng);
  const cplx s(0.3, -1.2);
  EXPECT_LT(std::abs(evaluate(w, Matrix(a + s * b)) - evaluate(w, a) - s * evaluate(w, b)), 1e-12);
  EXPECT_LT(std::abs(evaluate(w, a) - (w.weight() * a).trace()), 1e-12);
}

TEST(Representable, Examples) {
  const NetConfig c1(1);
  Rng rng(2);
  const Functional rho(c1, random_density(2, 2, rng));
  const std::vector<Element> xs = {Element::identity(c1)};
  const RepresentabilityReport r1 = check_representable(rho, xs);
  EXPECT_TRUE(r1.l1 && r1.l2 && r1.l3);
  ASSERT_EQ(r1.gamma.size(), 1u);
  EXPECT_NEAR(r1.gamma[0], 1.0, 1e-12);

  const RepresentabilityReport r2 = check_representable(Functional(c1, 0.5 * pauli('Z')));
  EXPECT_FALSE(r2.l1);
  EXPECT_TRUE(r2.l2);
  EXPECT_NEAR(r2.min_eigenvalue, -0.5, 1e-14);

  const RepresentabilityReport r3 = check_representable(Functional(c1, cplx(0, 1) * pauli('X')));
  EXPECT_FALSE(r3.l2);
}

TEST(Representable, GammaIsOptimalCauchySchwarzConstant) {
  Rng rng(3);
  const NetConfig c(2);
  const Functional w = density_state(c, random_density(4, 3, rng));
  for (int t = 0; t < 30; ++t) {
    const Element x(c, ginibre(4, 4, rng), Region::full(c));
    const Element a(c, ginibre(4, 4, rng), Region::full(c));
    const std::vector<Element> xs = {x};
    const double gamma = check_representable(w, xs).gamma[0];
    const double lhs = std::abs(evaluate(w, adjoint(x) * a));
    const double rhs = gamma * std::sqrt(evaluate(w, adjoint(a) * a).real());
    EXPECT_LE(lhs, rhs * (1 + 1e-12));
    // equality at a = x
    EXPECT_NEAR(std::abs(evaluate(w, adjoint(x) * x)), gamma * gamma, 1e-10 * gamma * gamma);
  }
}

TEST(Representable, StateIsBoundedByNorm) {
  Rng rng(4);
  const NetConfig c(2);
  const Functional w = density_state(c, random_density(4, 4, rng));
  for (int t = 0; t < 20; ++t) {
    const Matrix g = ginibre(4, 4, rng);
    const Element x(c, g.adjoint() * g, Region::full(c));
    EXPECT_LE(evaluate(w, x).real(), w.unit_value().real() * op_norm(x) * (1 + 1e-12));
  }
}

TEST(Restrict, Examples) {
  Rng rng(5);
  const NetConfig c(2);
  const Matrix r0 = random_density(2, 2, rng);
  const Matrix r1 = random_density(2, 1, rng);
  const std::vector<Matrix> sites = {r0, r1};
  const Functional prod = product_state(c, sites);
  EXPECT_LT((restrict_to(prod, Region{0}).weight - r0).norm(), 1e-14);
  EXPECT_LT((restrict_to(prod, Region{1}).weight - r1).norm(), 1e-14);
  EXPECT_LT((restrict_to(prod, Region::full(c)).weight - prod.weight()).norm(), 1e-15);
  const Functional bell = density_state(c, bell_density());
  const Matrix half = 0.5 * Matrix::Identity(2, 2);
  EXPECT_LT((restrict_to(bell, Region{0}).weight - half).norm(), 1e-15);
  EXPECT_LT((restrict_to(bell, Region{0}).weight - trace_second_qubit(bell_density())).norm(), 1e-15);
}

TEST(Restrict, ContractOnLocalElements) {
  Rng rng(6);
  const NetConfig c(4);
  const Functional w = density_state(c, random_density(16, 3, rng));
  for (const Region& r : {Region{1}, Region{0, 2}, Region{1, 2, 3}, Region{}}) {
    const LocalFunctional local = restrict_to(w, r);
    const Matrix x = ginibre(local.weight.rows(), local.weight.cols(), rng);
    EXPECT_LT(std::abs((local.weight * x).trace() - evaluate(w, embed(x, r, c))), 1e-12);
  }
}

TEST(Restrict, NestedRestrictionComposes) {
  Rng rng(7);
  const NetConfig c(3);
  const Functional w = density_state(c, random_density(8, 8, rng));
  const LocalFunctional outer = restrict_to(w, Region{0, 2});
  EXPECT_LT((restrict_to(outer, Region{2}).weight - restrict_to(w, Region{2}).weight).norm(), 1e-14);
  EXPECT_THROW(restrict_to(outer, Region{1}), InputError);
}

TEST(Compatibility, Examples) {
  Rng rng(8);
  const NetConfig c(3);
  const Functional w = density_state(c, random_density(8, 2, rng));
  const std::vector<LocalFunctional> marginals = {restrict_to(w, Region{0, 1}),
                                                  restrict_to(w, Region{1, 2})};
  const CompatibilityReport ok = check_compatibility(marginals);
  EXPECT_TRUE(ok.compatible);
  EXPECT_LT(ok.max_defect, 1e-14);

  const std::vector<LocalFunctional> clash = {{Region{0, 1}, ket_bra(4, 0, 0), 2},
                                              {Region{1, 2}, ket_bra(4, 3, 3), 2}};
  const CompatibilityReport bad = check_compatibility(clash);
  EXPECT_FALSE(bad.compatible);
  EXPECT_NEAR(bad.max_defect, 1.0, 1e-14);
  ASSERT_EQ(bad.pairs.size(), 1u);
  EXPECT_EQ(bad.pairs[0].overlap, (Region{1}));

  const std::vector<LocalFunctional> disjoint = {{Region{0}, ket_bra(2, 0, 0), 2},
                                                 {Region{2}, ket_bra(2, 1, 1), 2}};
  EXPECT_TRUE(check_compatibility(disjoint).compatible);

  const std::vector<LocalFunctional> one = {marginals[0]};
  EXPECT_THROW(check_compatibility(one), InputError);
}

TEST(Assemble, Examples) {
  const NetConfig c(2);
  const std::vector<LocalFunctional> family = {{Region{0}, ket_bra(2, 0, 0), 2},
                                               {Region{1}, 0.5 * Matrix::Identity(2, 2), 2}};
  const Functional w = assemble_product(family, c);
  EXPECT_LT((w.weight() - kron(ket_bra(2, 0, 0), 0.5 * Matrix::Identity(2, 2))).norm(), 1e-15);
  EXPECT_TRUE(w.is_state());
}

TEST(Assemble, RoundTripOnRandomSites) {
  Rng rng(9);
  const NetConfig c(3);
  std::vector<LocalFunctional> family;
  for (int s : {2, 0, 1}) family.push_back({Region{s}, random_density(2, 2, rng), 2});
  const Functional w = assemble_product(family, c);
  for (const LocalFunctional& f : family) {
    EXPECT_LE((restrict_to(w, f.region).weight - f.weight).norm(), 1e-12);
  }
  const RepresentabilityReport r = check_representable(w);
  EXPECT_TRUE(r.l1 && r.l2 && r.l3);
}

TEST(Assemble, Errors) {
  const NetConfig c(3);
  const Matrix q = 0.25 * Matrix::Identity(4, 4);
  const std::vector<LocalFunctional> overlap = {{Region{0, 1}, q, 2}, {Region{1, 2}, q, 2}};
  EXPECT_THROW(assemble_product(overlap, c), OverlapError);
  const std::vector<LocalFunctional> bad = {{Region{0, 1}, q, 2}, {Region{2}, pauli('Z'), 2}};
  EXPECT_THROW(assemble_product(bad, c), NotAState);
  const std::vector<LocalFunctional> partial = {{Region{0, 1}, q, 2}};
  EXPECT_THROW(assemble_product(partial, c), UnsupportedAssembly);
}

TEST(Modification, Examples) {
  Rng rng(10);
  const NetConfig c(2);
  const Functional w = density_state(c, random_density(4, 3, rng));
  EXPECT_LT((local_modification(w, Element::identity(c)).weight() - w.weight()).norm(), 1e-14);

  const Vector psi = random_unit_vector(4, rng);
  const Matrix u = haar_unitary(4, rng);
  const Functional mod = local_modification(vector_state(c, psi), Element(c, u, Region::full(c)));
  const Vector moved = u * psi;
  EXPECT_LT((mod.weight() - moved * moved.adjoint()).norm(), 1e-12);
  EXPECT_TRUE(mod.is_state());

  const Functional zero_site = product_state(
      c, std::vector<Matrix>{ket_bra(2, 0, 0), random_density(2, 2, rng)});
  EXPECT_THROW(local_modification(zero_site, embed(ket_bra(2, 1, 1), Region{0}, c)),
               DegenerateModification);
}

TEST(Modification, CompositionAndFixedPoint) {
  Rng rng(11);
  const NetConfig c(2);
  const Functional w = density_state(c, random_density(4, 4, rng));
  for (int t = 0; t < 10; ++t) {
    const Element b(c, ginibre(4, 4, rng), Region::full(c));
    const Element d(c, ginibre(4, 4, rng), Region::full(c));
    const Functional wb = local_modification(w, b);
    EXPECT_LT((local_modification(wb, Element::identity(c)).weight() - wb.weight()).norm(), 1e-12);
    // (ω_b)_d(a) = ω_b(d*ad) ∝ ω(b*d*adb) = ω_{db}(a)
    const Functional twice = local_modification(wb, d);
    EXPECT_LT((twice.weight() - local_modification(w, d * b).weight()).norm(), 1e-10);
    const RepresentabilityReport r = check_representable(twice);
    EXPECT_TRUE(r.l1 && r.l2 && r.l3);
  }
}

TEST(Order, Examples) {
  Rng rng(12);
  const NetConfig c1(1);
  const Functional w = density_state(c1, random_density(2, 2, rng));
  for (double lambda : {0.0, 0.3, 1.0}) {
    EXPECT_TRUE(functional_leq(Functional(c1, lambda * w.weight()), w));
  }
  EXPECT_FALSE(functional_leq(Functional(c1, ket_bra(2, 0, 0)), maximally_mixed(c1)));
  EXPECT_TRUE(functional_leq(Functional(c1, Matrix::Zero(2, 2)), w));
}

TEST(Order, PartialOrderLaws) {
  Rng rng(13);
  const NetConfig c(2);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = random_density(4, 2, rng);
    const Matrix b = a + random_density(4, 1, rng);
    const Matrix d = b + random_density(4, 3, rng);
    EXPECT_TRUE(weight_leq(a, a));
    EXPECT_TRUE(weight_leq(a, b) && weight_leq(b, d) && weight_leq(a, d));
    EXPECT_FALSE(weight_leq(b, a));
  }
}

TEST(Cone, Examples) {
  const NetConfig c1(1);
  const ConeMembership unit = cone_membership(Element::identity(c1));
  EXPECT_TRUE(unit.member);
  ASSERT_EQ(unit.witness.size(), 1u);
  EXPECT_LT((unit.witness[0].matrix() - Matrix::Identity(2, 2)).norm(), 1e-14);

  EXPECT_FALSE(cone_membership(embed(pauli('Z'), Region{0}, c1)).member);

  const ConeMembership two = cone_membership(embed(2.0 * ket_bra(2, 0, 0), Region{0}, c1));
  EXPECT_TRUE(two.member);
  EXPECT_LT((two.witness[0].matrix() - std::sqrt(2.0) * ket_bra(2, 0, 0)).norm(), 1e-14);

  EXPECT_THROW(cone_membership(embed(ket_bra(2, 0, 1), Region{0}, c1)), NotHermitian);
}

TEST(Cone, WitnessReconstructsRandomPositive) {
  Rng rng(14);
  const NetConfig c(3);
  for (int t = 0; t < 10; ++t) {
    const Matrix g = ginibre(8, 8, rng);
    const ConeMembership m = cone_membership(Element(c, g.adjoint() * g, Region::full(c)));
    ASSERT_TRUE(m.member);
    const Matrix w = m.witness[0].matrix();
    EXPECT_LT((w.adjoint() * w - g.adjoint() * g).norm(), 1e-9 * (g.adjoint() * g).norm());
    EXPECT_LT(m.reconstruction_defect, 1e-9 * (g.adjoint() * g).norm());
  }
}

TEST(Proportionality, Extremes) {
  Rng rng(15);
  const Matrix a = random_density(4, 2, rng);
  EXPECT_LT(proportionality_defect(0.3 * a, a), 1e-14);
  EXPECT_NEAR(proportionality_defect(ket_bra(2, 0, 0), ket_bra(2, 1, 1)), 1.0, 1e-14);
}
