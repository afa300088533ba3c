#pragma once

// GNS triples, commutants and the purity certificate.
//
// Two constructions share one interface. The block route works on the full
// chain algebra: with F = W Λ W† and T = W Λ^{1/2} (rank columns kept),
// λ(a) is the row-major vectorization of a·T and π(x) = x ⊗ I_rank. The basis
// route takes an explicit Hilbert–Schmidt orthonormal basis {e_a} of a unital
// *-subalgebra, builds the Gram matrix G_ab = ω(e_a* e_b) and quotients out
// its null space; with all matrix units as the basis it is the textbook
// construction and serves as the oracle for the block route.

#include <cstdint>
#include <span>
#include <vector>

#include "qloc/algebra.hpp"
#include "qloc/linalg.hpp"
#include "qloc/states.hpp"

namespace qloc {

enum class GnsRoute { kBlock, kBasis };

class GnsTriple {
 public:
  const NetConfig& config() const { return config_; }
  GnsRoute route() const { return route_; }
  std::size_t hilbert_dim() const { return hilbert_dim_; }
  const Vector& cyclic_vector() const { return xi_; }

  /// π(x) for a chain matrix x.
  Matrix rep(const Matrix& x) const;
  Matrix rep(const Element& x) const { return rep(x.matrix()); }
  /// λ(a); for the basis route a is first projected onto the subalgebra.
  Vector lambda(const Matrix& a) const;
  /// The algebra basis the quotient map is expressed in: matrix units
  /// E_ij in row-major order for the block route, the given basis otherwise.
  std::vector<Matrix> algebra_basis() const;
  /// Columns λ(e_i) over algebra_basis().
  Matrix quotient_map() const;
  /// Generators used when no family is given: matrix units (block route) or
  /// the subalgebra basis.
  std::vector<Matrix> default_generators() const;
  /// A small generating family: shift and clock on every site (block route),
  /// the subalgebra basis otherwise.
  std::vector<Matrix> small_generators() const;
  /// Weight matrix of ν(a) = ⟨π(a)ξ, η⟩.
  Matrix weight_of(const Vector& eta) const;

  friend GnsTriple gns_construct(const Functional& omega, double tol);
  friend GnsTriple gns_construct(const Functional& omega, std::span<const Matrix> basis,
                                 double tol);

 private:
  explicit GnsTriple(NetConfig config) : config_(config) {}

  NetConfig config_;
  GnsRoute route_ = GnsRoute::kBlock;
  std::size_t hilbert_dim_ = 0;
  Vector xi_;
  Matrix factor_;              // block route: T (D × rank)
  std::vector<Matrix> basis_;  // basis route
  Matrix q_;                   // basis route: Λ^{1/2} V† (rank × K)
  Matrix q_pinv_;              // basis route: V Λ^{-1/2} (K × rank)
};

/// Block route over the full chain algebra. Throws NotRepresentable.
GnsTriple gns_construct(const Functional& omega, double tol = kDefaultTol);
/// Basis route over span{basis}, which must be a unital *-subalgebra with a
/// Hilbert–Schmidt orthonormal basis.
GnsTriple gns_construct(const Functional& omega, std::span<const Matrix> basis,
                        double tol = kDefaultTol);

std::vector<Matrix> matrix_units(std::size_t dim);
std::vector<Matrix> matrix_unit_generators(const NetConfig& config);
/// Shift and clock on every site; for qubits σ_x and σ_z.
std::vector<Matrix> local_generators(const NetConfig& config);

struct CommutantBasis {
  std::vector<Matrix> elements;  // orthonormal under tr(A†B)
  bool sparse_path = false;
  std::size_t dimension() const { return elements.size(); }
};

/// Joint null space of X ↦ XA − AX and X ↦ XA† − A†X over `ops`, in canonical
/// form (see the implementation notes). Uses an exact class-merging solver when
/// every operator has at most one nonzero per row and column.
CommutantBasis commutant_of(std::span<const Matrix> ops, double tol = kDefaultTol);
/// Always the dense Kronecker-sum solver; kept callable for cross-checks.
CommutantBasis commutant_dense(std::span<const Matrix> ops, double tol = kDefaultTol);

CommutantBasis weak_commutant(const GnsTriple& triple, double tol = kDefaultTol);
CommutantBasis weak_commutant(const GnsTriple& triple, std::span<const Matrix> generators,
                              double tol = kDefaultTol);

/// max(‖U − VV†U‖, ‖V − UU†V‖) over vectorized bases; 1 if dimensions differ.
double subspace_defect(const CommutantBasis& u, const CommutantBasis& v);

struct CommutantEquality {
  std::size_t local_dim = 0;
  std::size_t full_dim = 0;
  double defect = 0.0;
};

CommutantEquality commutant_equality_check(const GnsTriple& triple,
                                           std::span<const Matrix> local_family,
                                           std::span<const Matrix> full_family,
                                           double tol = kDefaultTol);
/// Local family = shift/clock generators, full family = all matrix units.
CommutantEquality commutant_equality_check(const GnsTriple& triple, double tol = kDefaultTol);

bool is_quasi_irreducible(const GnsTriple& triple, double tol = kDefaultTol);

/// Elements of the commutant that commute with the whole commutant.
CommutantBasis center(const CommutantBasis& commutant, const GnsTriple& triple,
                      double tol = kDefaultTol);

/// max ‖π(x)‖/‖x‖ over the samples (zero samples skipped).
double rep_norm_bound_check(const GnsTriple& triple, std::span<const Matrix> samples);

inline constexpr std::size_t kPuritySamples = 200;
inline constexpr double kProportionalityThreshold = 1e-3;

struct PurityCertificate {
  std::size_t commutant_dim = 0;
  bool pure = false;  // exact leg: commutant is C·I

  // witness, present when not pure
  bool has_witness = false;
  Matrix projection;
  Matrix nu_weight;
  double nu_mass = 0.0;  // ν(e)
  double proportionality_defect = 0.0;
  bool nu_leq_omega = false;
  bool nu_representable = false;

  // extremality leg
  bool decomposition_found = false;
  Matrix nu1;
  Matrix nu2;
  double decomposition_gap = 0.0;  // ‖ν₁ − ν₂‖

  // sampling leg
  std::size_t samples = 0;
  std::size_t dominated_nonproportional = 0;
  double max_sample_defect = 0.0;

  bool witness_verified() const {
    return has_witness && nu_leq_omega && nu_representable &&
           proportionality_defect >= kProportionalityThreshold;
  }
  bool sampling_pure() const { return dominated_nonproportional == 0; }
  bool extremal() const { return !decomposition_found; }
  /// All three predicates agree, and a mixed state carries a verified witness.
  bool legs_agree() const {
    return pure == sampling_pure() && pure == extremal() && (pure || witness_verified());
  }
};

PurityCertificate purity_certificate(const Functional& omega, double tol = kDefaultTol,
                                     std::uint64_t seed = 0,
                                     std::size_t samples = kPuritySamples);
PurityCertificate purity_certificate(const GnsTriple& triple, const Functional& omega,
                                     double tol = kDefaultTol, std::uint64_t seed = 0,
                                     std::size_t samples = kPuritySamples);

}  // namespace qloc
