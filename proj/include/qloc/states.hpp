#pragma once

// Linear functionals ω(a) = tr(F a) on the chain algebra.

#include <span>
#include <vector>

#include "qloc/algebra.hpp"
#include "qloc/linalg.hpp"
#include "qloc/local_net.hpp"

namespace qloc {

class Functional {
 public:
  /// Flags are decided once, at construction, with tolerance `tol`.
  Functional(NetConfig config, Matrix weight, double tol = kDefaultTol);

  const NetConfig& config() const { return config_; }
  const Matrix& weight() const { return weight_; }
  bool hermitian() const { return hermitian_; }
  bool positive() const { return positive_; }
  bool normalized() const { return normalized_; }
  bool is_state() const { return positive_ && normalized_; }
  /// ω(e) = tr F.
  cplx unit_value() const { return weight_.trace(); }

 private:
  NetConfig config_;
  Matrix weight_;
  bool hermitian_ = false;
  bool positive_ = false;
  bool normalized_ = false;
};

Functional density_state(const NetConfig& config, const Matrix& rho);
/// Rank-one weight |ψ⟩⟨ψ|/⟨ψ,ψ⟩.
Functional vector_state(const NetConfig& config, const Vector& psi);
/// ⊗_s rho_s with one density matrix per site, in site order.
Functional product_state(const NetConfig& config, std::span<const Matrix> site_densities);
Functional maximally_mixed(const NetConfig& config);

cplx evaluate(const Functional& omega, const Element& a);
/// tr(F a) for a raw chain matrix.
cplx evaluate(const Functional& omega, const Matrix& a);

struct RepresentabilityReport {
  bool l1 = false;
  bool l2 = false;
  bool l3 = false;
  double min_eigenvalue = 0.0;
  double hermiticity_defect = 0.0;
  /// γ_x = ω(x*x)^{1/2}, the optimal (Cauchy–Schwarz) constant, one per requested x.
  std::vector<double> gamma;
};

RepresentabilityReport check_representable(const Functional& omega,
                                           std::span<const Element> xs = {},
                                           double tol = kDefaultTol);

struct LocalFunctional {
  Region region;
  Matrix weight;
  int site_dim = 2;
};

/// Partial trace of the weight over the complement of r.
LocalFunctional restrict_to(const Functional& omega, const Region& r);
/// Restriction of a local functional to a subregion of its own region.
LocalFunctional restrict_to(const LocalFunctional& omega, const Region& r);

struct CompatibilityPair {
  std::size_t first = 0;
  std::size_t second = 0;
  Region overlap;
  double defect = 0.0;  // operator norm of the difference of the two marginals
};

struct CompatibilityReport {
  bool compatible = true;
  double max_defect = 0.0;
  std::vector<CompatibilityPair> pairs;
};

CompatibilityReport check_compatibility(std::span<const LocalFunctional> family,
                                        double tol = kDefaultTol);

/// Tensor product of a family of local states on disjoint regions covering the chain.
Functional assemble_product(std::span<const LocalFunctional> family, const NetConfig& config,
                            double tol = kDefaultTol);

/// ω_b(a) = ω(b*ab)/ω(b*b), weight bFb†/ω(b*b).
Functional local_modification(const Functional& omega, const Element& b,
                              double tol = kDefaultTol);

/// ν ≤ ω in the cone order: F_ω − F_ν ⪰ −tol.
bool functional_leq(const Functional& nu, const Functional& omega, double tol = kDefaultTol);
bool weight_leq(const Matrix& nu, const Matrix& omega, double tol = kDefaultTol);

struct ConeMembership {
  bool member = false;
  double min_eigenvalue = 0.0;
  /// x_k with Σ x_k* x_k = a; a single square root when a is positive.
  std::vector<Element> witness;
  double reconstruction_defect = 0.0;
};

ConeMembership cone_membership(const Element& a, double tol = kDefaultTol);

/// min_λ ‖F_ν − λF_ω‖_F / ‖F_ν‖_F; 0 when ν = λω, 1 when ν ⟂ ω.
double proportionality_defect(const Matrix& nu, const Matrix& omega);

}  // namespace qloc
