#include "qloc/states.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qloc/errors.hpp"

namespace qloc {

Functional::Functional(NetConfig config, Matrix weight, double tol)
    : config_(config), weight_(std::move(weight)) {
  const auto n = static_cast<Eigen::Index>(config_.dim());
  if (weight_.rows() != n || weight_.cols() != n) {
    throw DimensionMismatch("Functional: weight is " + std::to_string(weight_.rows()) + "x" +
                            std::to_string(weight_.cols()) + ", chain dimension is " +
                            std::to_string(n));
  }
  hermitian_ = hermiticity_defect(weight_) <= tol;
  positive_ = hermitian_ && min_eigenvalue(weight_) >= -tol;
  normalized_ = std::abs(weight_.trace() - cplx(1.0, 0.0)) <= tol;
}

Functional density_state(const NetConfig& config, const Matrix& rho) {
  return Functional(config, rho);
}

Functional vector_state(const NetConfig& config, const Vector& psi) {
  const double norm2 = psi.squaredNorm();
  if (norm2 == 0.0) throw InputError("vector_state: zero vector");
  return Functional(config, psi * psi.adjoint() / norm2);
}

Functional product_state(const NetConfig& config, std::span<const Matrix> site_densities) {
  if (static_cast<int>(site_densities.size()) != config.n_sites()) {
    throw DimensionMismatch("product_state: need one density per site");
  }
  Matrix w = Matrix::Identity(1, 1);
  for (const Matrix& rho : site_densities) {
    if (rho.rows() != config.site_dim() || rho.cols() != config.site_dim()) {
      throw DimensionMismatch("product_state: site density has the wrong dimension");
    }
    w = kron(w, rho);
  }
  return Functional(config, std::move(w));
}

Functional maximally_mixed(const NetConfig& config) {
  const auto n = config.dim();
  return Functional(config, Matrix::Identity(n, n) / static_cast<double>(n));
}

cplx evaluate(const Functional& omega, const Matrix& a) {
  const Matrix& f = omega.weight();
  if (a.rows() != f.rows() || a.cols() != f.cols()) {
    throw DimensionMismatch("evaluate: element and functional dimensions differ");
  }
  // tr(F a) without forming the product
  return (f.transpose().cwiseProduct(a)).sum();
}

cplx evaluate(const Functional& omega, const Element& a) {
  if (!(omega.config() == a.config())) {
    throw ConfigMismatch("evaluate: functional and element live on different chains");
  }
  return evaluate(omega, a.matrix());
}

RepresentabilityReport check_representable(const Functional& omega,
                                           std::span<const Element> xs, double tol) {
  RepresentabilityReport r;
  r.min_eigenvalue = min_eigenvalue(omega.weight());
  r.hermiticity_defect = hermiticity_defect(omega.weight());
  r.l2 = r.hermiticity_defect <= tol;
  r.l1 = r.min_eigenvalue >= -tol;
  r.l3 = r.l1 && r.l2;
  for (const Element& x : xs) {
    const double v = evaluate(omega, adjoint(x) * x).real();
    r.gamma.push_back(std::sqrt(std::max(v, 0.0)));
  }
  return r;
}

namespace {

// Positions (within `outer`) of the sites of `inner`.
std::vector<int> positions_within(const Region& inner, const Region& outer) {
  std::vector<int> pos;
  for (int s : inner.sites()) {
    const auto it = std::lower_bound(outer.sites().begin(), outer.sites().end(), s);
    if (it == outer.sites().end() || *it != s) {
      throw InputError("restrict: {" + inner.to_string() + "} is not inside {" +
                       outer.to_string() + "}");
    }
    pos.push_back(static_cast<int>(it - outer.sites().begin()));
  }
  return pos;
}

}  // namespace

LocalFunctional restrict_to(const LocalFunctional& omega, const Region& r) {
  const std::vector<int> pos = positions_within(r, omega.region);
  SiteSplit split(static_cast<int>(omega.region.size()), omega.site_dim, pos);
  return {r, partial_trace(omega.weight, split), omega.site_dim};
}

LocalFunctional restrict_to(const Functional& omega, const Region& r) {
  const NetConfig& c = omega.config();
  if (!r.valid_for(c)) throw InputError("restrict: region {" + r.to_string() + "} outside the chain");
  LocalFunctional whole{Region::full(c), omega.weight(), c.site_dim()};
  return restrict_to(whole, r);
}

CompatibilityReport check_compatibility(std::span<const LocalFunctional> family, double tol) {
  if (family.size() < 2) throw InputError("check_compatibility: need at least two members");
  CompatibilityReport report;
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      CompatibilityPair p;
      p.first = i;
      p.second = j;
      p.overlap = intersection(family[i].region, family[j].region);
      const Matrix mi = restrict_to(family[i], p.overlap).weight;
      const Matrix mj = restrict_to(family[j], p.overlap).weight;
      p.defect = op_norm(mi - mj);
      report.max_defect = std::max(report.max_defect, p.defect);
      if (p.defect > tol) report.compatible = false;
      report.pairs.push_back(std::move(p));
    }
  }
  return report;
}

Functional assemble_product(std::span<const LocalFunctional> family, const NetConfig& config,
                            double tol) {
  if (family.empty()) throw UnsupportedAssembly("assemble_product: empty family");
  Region covered;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const LocalFunctional& m = family[i];
    if (!m.region.valid_for(config)) {
      throw InputError("assemble_product: member " + std::to_string(i) + " outside the chain");
    }
    if (!orthogonal(covered, m.region)) {
      throw OverlapError("assemble_product: member " + std::to_string(i) + " on {" +
                         m.region.to_string() + "} overlaps an earlier member");
    }
    covered = join(covered, m.region);
  }
  if (covered.size() != static_cast<std::size_t>(config.n_sites())) {
    throw UnsupportedAssembly("assemble_product: members cover {" + covered.to_string() +
                              "}, not the whole chain");
  }
  Matrix w = Matrix::Identity(config.dim(), config.dim());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const LocalFunctional& m = family[i];
    const Matrix& f = m.weight;
    if (m.site_dim != config.site_dim()) {
      throw DimensionMismatch("assemble_product: site dimension mismatch");
    }
    const bool state = hermiticity_defect(f) <= tol && min_eigenvalue(f) >= -tol &&
                       std::abs(f.trace() - cplx(1.0, 0.0)) <= tol;
    if (!state) {
      throw NotAState("assemble_product: member " + std::to_string(i) + " on {" +
                      m.region.to_string() + "} is not a state");
    }
    SiteSplit split(config.n_sites(), config.site_dim(), m.region.sites());
    w = w * embed_matrix(f, split);
  }
  return Functional(config, std::move(w), tol);
}

Functional local_modification(const Functional& omega, const Element& b, double tol) {
  if (!(omega.config() == b.config())) {
    throw ConfigMismatch("local_modification: functional and element on different chains");
  }
  const Matrix& f = omega.weight();
  const Matrix& bm = b.matrix();
  const cplx norm = evaluate(omega, Matrix(bm.adjoint() * bm));
  if (std::abs(norm) <= tol) {
    throw DegenerateModification("local_modification: ω(b*b) = " + std::to_string(norm.real()) +
                                 " is not above tolerance");
  }
  return Functional(omega.config(), bm * f * bm.adjoint() / norm, tol);
}

bool weight_leq(const Matrix& nu, const Matrix& omega, double tol) {
  return min_eigenvalue(omega - nu) >= -tol;
}

bool functional_leq(const Functional& nu, const Functional& omega, double tol) {
  if (!(nu.config() == omega.config())) {
    throw ConfigMismatch("functional_leq: functionals on different chains");
  }
  return weight_leq(nu.weight(), omega.weight(), tol);
}

ConeMembership cone_membership(const Element& a, double tol) {
  const double defect = hermiticity_defect(a.matrix());
  if (defect > tol) {
    throw NotHermitian("cone_membership: ‖a − a*‖ = " + std::to_string(defect));
  }
  ConeMembership out;
  out.min_eigenvalue = min_eigenvalue(a.matrix());
  out.member = out.min_eigenvalue >= -tol;
  if (out.member) {
    Element root(a.config(), psd_sqrt(a.matrix()), a.support());
    out.reconstruction_defect = op_norm((adjoint(root) * root).matrix() - a.matrix());
    out.witness.push_back(std::move(root));
  }
  return out;
}

double proportionality_defect(const Matrix& nu, const Matrix& omega) {
  const double nn = nu.norm();
  if (nn == 0.0) return 0.0;
  const double oo = omega.squaredNorm();
  if (oo == 0.0) return 1.0;
  const cplx lambda = (omega.conjugate().cwiseProduct(nu)).sum() / oo;
  return (nu - lambda * omega).norm() / nn;
}

}  // namespace qloc
