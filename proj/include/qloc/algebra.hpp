#pragma once

// Concrete chain algebra: elements are matrices on (C^d)^{⊗n} carrying a
// declared support region. Site 0 is the leftmost (slowest-varying)
// Kronecker factor.

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "qloc/linalg.hpp"
#include "qloc/local_net.hpp"

namespace qloc {

/// Index bookkeeping for splitting a tensor product into the factors at
/// `kept` positions and the rest, both in increasing position order.
class SiteSplit {
 public:
  SiteSplit(int n_sites, int site_dim, std::span<const int> kept);

  std::size_t full_dim() const { return full_dim_; }
  std::size_t kept_dim() const { return kept_dim_; }
  std::size_t rest_dim() const { return rest_dim_; }

  std::size_t kept_of(std::size_t full) const { return kept_of_[full]; }
  std::size_t rest_of(std::size_t full) const { return rest_of_[full]; }
  std::size_t compose(std::size_t kept, std::size_t rest) const {
    return full_of_[kept * rest_dim_ + rest];
  }

 private:
  std::size_t full_dim_;
  std::size_t kept_dim_;
  std::size_t rest_dim_;
  std::vector<std::size_t> kept_of_;
  std::vector<std::size_t> rest_of_;
  std::vector<std::size_t> full_of_;
};

/// local ⊗ I on the rest, with local acting on the kept positions.
Matrix embed_matrix(const Matrix& local, const SiteSplit& split);
/// Partial trace over the rest.
Matrix partial_trace(const Matrix& m, const SiteSplit& split);

class Element {
 public:
  Element(NetConfig config, Matrix matrix, Region declared_support);

  /// The unit e.
  static Element identity(const NetConfig& config);

  const NetConfig& config() const { return config_; }
  const Matrix& matrix() const { return matrix_; }
  const Region& support() const { return support_; }

 private:
  NetConfig config_;
  Matrix matrix_;
  Region support_;
};

Element embed(const Matrix& local, const Region& region, const NetConfig& config);

Element operator*(const Element& a, const Element& b);
Element operator+(const Element& a, const Element& b);
Element operator-(const Element& a, const Element& b);
Element operator*(cplx scalar, const Element& a);
Element adjoint(const Element& a);

double op_norm(const Element& a);

/// Smallest region outside of which `a` acts as the identity, decided site by
/// site with the partial-trace test ‖a − ptr_s(a)/d ⊗ I_s‖ ≤ tol.
Region minimal_support(const Element& a, double tol = kDefaultTol);

struct CommutationCheck {
  double defect = 0.0;        // ‖ab − ba‖
  bool supports_orthogonal = false;
  bool contract_holds = true;  // orthogonal supports ⇒ defect ≤ tol
};

CommutationCheck check_disjoint_commutation(const Element& a, const Element& b,
                                            double tol = kDefaultTol);

struct PauliTerm {
  cplx coefficient{1.0, 0.0};
  std::vector<std::pair<int, char>> letters;  // (site, 'X'|'Y'|'Z')
};

Element pauli_element(const PauliTerm& term, const NetConfig& config);
Element pauli_sum(std::span<const PauliTerm> terms, const NetConfig& config);

/// Parses "0.5 X0 Z2 + 1.0 Y1". Coefficients may carry an 'i' suffix for
/// imaginary values; a term without a coefficient has coefficient 1, and a
/// term with no letters is a multiple of the unit.
std::vector<PauliTerm> parse_pauli_sum(std::string_view text);

}  // namespace qloc
