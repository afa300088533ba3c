#include "qloc/gns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qloc/errors.hpp"

namespace qloc {

namespace {

// Row-major vectorization of an r × c matrix, index i*c + j.
Vector vec_rows(const Matrix& m) {
  Vector v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  }
  return v;
}

Matrix unvec_rows(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(i * cols + j);
  }
  return m;
}

// tr(A† B)
cplx hs_inner(const Matrix& a, const Matrix& b) { return (a.conjugate().cwiseProduct(b)).sum(); }

void require_representable(const Functional& omega, double tol) {
  const double herm = hermiticity_defect(omega.weight());
  if (herm > tol) {
    throw NotRepresentable("gns_construct: (L2) fails, ‖F − F*‖ = " + std::to_string(herm));
  }
  const double lo = min_eigenvalue(omega.weight());
  if (lo < -tol) {
    throw NotRepresentable("gns_construct: (L1) fails, min eigenvalue " + std::to_string(lo));
  }
}

// Indices of eigenvalues above tol·λmax, largest first.
std::vector<Eigen::Index> kept_spectrum(const RealVector& values, double tol) {
  const double top = values.size() ? values.maxCoeff() : 0.0;
  if (top <= 0.0) {
    throw NotRepresentable("gns_construct: the functional vanishes on all squares");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = values.size() - 1; i >= 0; --i) {
    if (values(i) > tol * top) keep.push_back(i);
  }
  return keep;
}

}  // namespace

GnsTriple gns_construct(const Functional& omega, double tol) {
  require_representable(omega, tol);
  const auto [values, vectors] = eigh(omega.weight());
  const std::vector<Eigen::Index> keep = kept_spectrum(values, tol);
  const auto d = static_cast<Eigen::Index>(omega.config().dim());
  const auto k = static_cast<Eigen::Index>(keep.size());

  GnsTriple t(omega.config());
  t.route_ = GnsRoute::kBlock;
  t.factor_.resize(d, k);
  for (Eigen::Index m = 0; m < k; ++m) {
    t.factor_.col(m) = vectors.col(keep[m]) * std::sqrt(values(keep[m]));
  }
  t.hilbert_dim_ = static_cast<std::size_t>(d * k);
  t.xi_ = vec_rows(t.factor_);
  return t;
}

GnsTriple gns_construct(const Functional& omega, std::span<const Matrix> basis, double tol) {
  require_representable(omega, tol);
  const auto d = static_cast<Eigen::Index>(omega.config().dim());
  const auto kk = static_cast<Eigen::Index>(basis.size());
  if (kk == 0) throw InputError("gns_construct: empty algebra basis");
  for (const Matrix& e : basis) {
    if (e.rows() != d || e.cols() != d) {
      throw DimensionMismatch("gns_construct: basis element has the wrong dimension");
    }
  }
  Matrix overlap(kk, kk);
  for (Eigen::Index a = 0; a < kk; ++a) {
    for (Eigen::Index b = 0; b < kk; ++b) overlap(a, b) = hs_inner(basis[a], basis[b]);
  }
  if (op_norm(overlap - Matrix::Identity(kk, kk)) > 1e-9) {
    throw InputError("gns_construct: algebra basis is not Hilbert-Schmidt orthonormal");
  }
  const Matrix id = Matrix::Identity(d, d);
  Vector unit(kk);
  Matrix rebuilt = Matrix::Zero(d, d);
  for (Eigen::Index a = 0; a < kk; ++a) {
    unit(a) = hs_inner(basis[a], id);
    rebuilt += unit(a) * basis[a];
  }
  if (op_norm(rebuilt - id) > 1e-9) {
    throw InputError("gns_construct: the unit is not in the span of the algebra basis");
  }

  const Matrix& f = omega.weight();
  Matrix gram(kk, kk);
  for (Eigen::Index a = 0; a < kk; ++a) {
    const Matrix fa = f * basis[a].adjoint();
    for (Eigen::Index b = 0; b < kk; ++b) gram(a, b) = (fa.transpose().cwiseProduct(basis[b])).sum();
  }
  const auto [values, vectors] = eigh(gram);
  const std::vector<Eigen::Index> keep = kept_spectrum(values, tol);
  const auto r = static_cast<Eigen::Index>(keep.size());

  GnsTriple t(omega.config());
  t.route_ = GnsRoute::kBasis;
  t.basis_.assign(basis.begin(), basis.end());
  t.q_.resize(r, kk);
  t.q_pinv_.resize(kk, r);
  for (Eigen::Index m = 0; m < r; ++m) {
    const double s = std::sqrt(values(keep[m]));
    t.q_.row(m) = s * vectors.col(keep[m]).adjoint();
    t.q_pinv_.col(m) = vectors.col(keep[m]) / s;
  }
  t.hilbert_dim_ = static_cast<std::size_t>(r);
  t.xi_ = t.q_ * unit;
  return t;
}

Matrix GnsTriple::rep(const Matrix& x) const {
  const auto d = static_cast<Eigen::Index>(config_.dim());
  if (x.rows() != d || x.cols() != d) throw DimensionMismatch("rep: element has the wrong dimension");
  if (route_ == GnsRoute::kBlock) {
    return kron(x, Matrix::Identity(factor_.cols(), factor_.cols()));
  }
  const auto kk = static_cast<Eigen::Index>(basis_.size());
  Matrix left(kk, kk);
  for (Eigen::Index b = 0; b < kk; ++b) {
    const Matrix xb = x * basis_[b];
    for (Eigen::Index a = 0; a < kk; ++a) left(a, b) = hs_inner(basis_[a], xb);
  }
  return q_ * left * q_pinv_;
}

Vector GnsTriple::lambda(const Matrix& a) const {
  const auto d = static_cast<Eigen::Index>(config_.dim());
  if (a.rows() != d || a.cols() != d) throw DimensionMismatch("lambda: element has the wrong dimension");
  if (route_ == GnsRoute::kBlock) return vec_rows(a * factor_);
  Vector c(basis_.size());
  for (std::size_t b = 0; b < basis_.size(); ++b) c(b) = hs_inner(basis_[b], a);
  return q_ * c;
}

std::vector<Matrix> GnsTriple::algebra_basis() const {
  if (route_ == GnsRoute::kBasis) return basis_;
  return matrix_units(config_.dim());
}

Matrix GnsTriple::quotient_map() const {
  if (route_ == GnsRoute::kBasis) return q_;
  const auto d = static_cast<Eigen::Index>(config_.dim());
  const Eigen::Index k = factor_.cols();
  Matrix out = Matrix::Zero(d * k, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index m = 0; m < k; ++m) out(i * k + m, i * d + j) = factor_(j, m);
    }
  }
  return out;
}

std::vector<Matrix> GnsTriple::default_generators() const {
  if (route_ == GnsRoute::kBasis) return basis_;
  return matrix_unit_generators(config_);
}

std::vector<Matrix> GnsTriple::small_generators() const {
  if (route_ == GnsRoute::kBasis) return basis_;
  return local_generators(config_);
}

Matrix GnsTriple::weight_of(const Vector& eta) const {
  if (eta.size() != static_cast<Eigen::Index>(hilbert_dim_)) {
    throw DimensionMismatch("weight_of: vector is not in the GNS space");
  }
  if (route_ == GnsRoute::kBlock) {
    const Matrix y = unvec_rows(eta, factor_.rows(), factor_.cols());
    return factor_ * y.adjoint();
  }
  const Vector u = q_.adjoint() * eta;
  const auto d = static_cast<Eigen::Index>(config_.dim());
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t a = 0; a < basis_.size(); ++a) m += u(a) * basis_[a];
  return m.adjoint();
}

std::vector<Matrix> matrix_units(std::size_t dim) {
  std::vector<Matrix> out;
  out.reserve(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      Matrix e = Matrix::Zero(dim, dim);
      e(i, j) = 1.0;
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<Matrix> matrix_unit_generators(const NetConfig& config) {
  return matrix_units(config.dim());
}

std::vector<Matrix> local_generators(const NetConfig& config) {
  std::vector<Matrix> out;
  const Matrix shift = shift_matrix(config.site_dim());
  const Matrix clock = clock_matrix(config.site_dim());
  for (int s = 0; s < config.n_sites(); ++s) {
    SiteSplit split(config.n_sites(), config.site_dim(), std::vector<int>{s});
    out.push_back(embed_matrix(shift, split));
    out.push_back(embed_matrix(clock, split));
  }
  return out;
}

namespace {

// At most one entry above `eps` in every row and every column.
struct MonomialPattern {
  std::vector<Eigen::Index> col_of_row;  // -1 when the row is empty
  std::vector<Eigen::Index> row_of_col;
  bool ok = true;
};

MonomialPattern monomial_pattern(const Matrix& a) {
  MonomialPattern p;
  const Eigen::Index h = a.rows();
  p.col_of_row.assign(h, -1);
  p.row_of_col.assign(h, -1);
  const double eps = 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < h && p.ok; ++j) {
    for (Eigen::Index i = 0; i < h; ++i) {
      if (std::abs(a(i, j)) <= eps) continue;
      if (p.col_of_row[i] >= 0 || p.row_of_col[j] >= 0) {
        p.ok = false;
        break;
      }
      p.col_of_row[i] = j;
      p.row_of_col[j] = i;
    }
  }
  return p;
}

// Union-find over the entries of X with X_p = weight_p · X_root.
class WeightedClasses {
 public:
  explicit WeightedClasses(std::size_t n) : parent_(n), weight_(n, cplx(1.0, 0.0)), zero_(n, false) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t p) {
    std::size_t root = p;
    path_.clear();
    while (parent_[root] != root) {
      path_.push_back(root);
      root = parent_[root];
    }
    // nearest-to-root first: each node's old parent already points at the root
    cplx acc(1.0, 0.0);
    for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
      acc = weight_[*it] * acc;
      weight_[*it] = acc;
      parent_[*it] = root;
    }
    return root;
  }

  cplx weight_to_root(std::size_t p) {
    find(p);
    return parent_[p] == p ? cplx(1.0, 0.0) : weight_[p];
  }

  void force_zero(std::size_t p) { zero_[find(p)] = true; }

  // X_p = ratio · X_q
  void relate(std::size_t p, std::size_t q, cplx ratio) {
    const std::size_t rp = find(p);
    const std::size_t rq = find(q);
    const cplx wp = weight_to_root(p);
    const cplx wq = weight_to_root(q);
    if (rp == rq) {
      const cplx lhs = wp;
      const cplx rhs = ratio * wq;
      if (std::abs(lhs - rhs) > 1e-9 * std::max(std::abs(lhs), std::abs(rhs))) zero_[rp] = true;
      return;
    }
    // wp·X_rp = ratio·wq·X_rq
    parent_[rp] = rq;
    weight_[rp] = ratio * wq / wp;
    zero_[rq] = zero_[rq] || zero_[rp];
  }

  bool zero(std::size_t root) const { return zero_[root]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<cplx> weight_;
  std::vector<bool> zero_;
  std::vector<std::size_t> path_;
};

bool sparse_applicable(std::span<const Matrix> ops, std::vector<MonomialPattern>& patterns) {
  for (const Matrix& a : ops) {
    patterns.push_back(monomial_pattern(a));
    if (!patterns.back().ok) return false;
  }
  return true;
}

CommutantBasis commutant_sparse(std::span<const Matrix> ops,
                                const std::vector<MonomialPattern>& patterns, Eigen::Index h) {
  const auto n = static_cast<std::size_t>(h * h);
  WeightedClasses classes(n);
  auto idx = [h](Eigen::Index i, Eigen::Index j) { return static_cast<std::size_t>(i * h + j); };
  for (std::size_t g = 0; g < ops.size(); ++g) {
    const Matrix& a = ops[g];
    const MonomialPattern& pat = patterns[g];
    // (XA − AX)(i,j) = X(i, r(j))·A(r(j), j) − A(i, c(i))·X(c(i), j)
    for (Eigen::Index i = 0; i < h; ++i) {
      const Eigen::Index c = pat.col_of_row[i];
      for (Eigen::Index j = 0; j < h; ++j) {
        const Eigen::Index r = pat.row_of_col[j];
        const bool left = r >= 0;
        const bool right = c >= 0;
        if (!left && !right) continue;
        if (left && !right) {
          classes.force_zero(idx(i, r));
        } else if (!left && right) {
          classes.force_zero(idx(c, j));
        } else {
          const cplx alpha = a(r, j);
          const cplx beta = a(i, c);
          const std::size_t p = idx(i, r);
          const std::size_t q = idx(c, j);
          if (p == q) {
            if (std::abs(alpha - beta) > 1e-12 * std::max(std::abs(alpha), std::abs(beta))) {
              classes.force_zero(p);
            }
          } else {
            classes.relate(p, q, beta / alpha);
          }
        }
      }
    }
  }

  // one element per surviving class, ordered by the smallest member index
  std::vector<long> slot(n, -1);
  std::vector<std::vector<std::pair<std::size_t, cplx>>> members;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t root = classes.find(p);
    if (classes.zero(root)) continue;
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(members.size());
      members.emplace_back();
    }
    members[slot[root]].emplace_back(p, classes.weight_to_root(p));
  }
  CommutantBasis out;
  out.sparse_path = true;
  for (const auto& m : members) {
    const cplx lead = m.front().second;
    Matrix x = Matrix::Zero(h, h);
    for (const auto& [p, w] : m) x(p / h, p % h) = w / lead;
    x /= x.norm();
    out.elements.push_back(std::move(x));
  }
  return out;
}

// Gram–Schmidt over the projections of E_p (p in row-major order) onto the
// span of the columns of `null`, whose columns are column-major vec(X).
std::vector<Matrix> canonical_basis(const Matrix& null, Eigen::Index h) {
  const Eigen::Index r = null.cols();
  std::vector<Vector> chosen;
  for (Eigen::Index p = 0; p < h * h && static_cast<Eigen::Index>(chosen.size()) < r; ++p) {
    const Eigen::Index i = p / h;
    const Eigen::Index j = p % h;
    const Eigen::Index pos = i + j * h;
    Vector v = null * null.row(pos).adjoint();
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& u : chosen) v -= u.dot(v) * u;
    }
    const double nv = v.norm();
    if (nv > 1e-8) chosen.push_back(v / nv);
  }
  if (static_cast<Eigen::Index>(chosen.size()) < r) {
    chosen.clear();
    for (Eigen::Index c = 0; c < r; ++c) chosen.push_back(null.col(c));
  }
  std::vector<Matrix> out;
  for (const Vector& v : chosen) out.push_back(Eigen::Map<const Matrix>(v.data(), h, h));
  return out;
}

Eigen::Index common_dim(std::span<const Matrix> ops) {
  if (ops.empty()) throw InputError("commutant: no operators given");
  const Eigen::Index h = ops.front().rows();
  for (const Matrix& a : ops) {
    if (a.rows() != h || a.cols() != h) throw DimensionMismatch("commutant: operators differ in size");
  }
  return h;
}

std::vector<Matrix> with_adjoints(std::span<const Matrix> ops) {
  std::vector<Matrix> all;
  all.reserve(2 * ops.size());
  for (const Matrix& a : ops) {
    all.push_back(a);
    if (hermiticity_defect(a) > 0.0) all.push_back(a.adjoint());
  }
  return all;
}

}  // namespace

CommutantBasis commutant_dense(std::span<const Matrix> ops, double tol) {
  const Eigen::Index h = common_dim(ops);
  const std::vector<Matrix> all = with_adjoints(ops);
  const Matrix id = Matrix::Identity(h, h);
  Matrix s1 = Matrix::Zero(h, h);
  Matrix s2 = Matrix::Zero(h, h);
  Matrix m = Matrix::Zero(h * h, h * h);
  for (const Matrix& a : all) {
    s1 += a.conjugate() * a.transpose();
    s2 += a.adjoint() * a;
    m -= kron(a.conjugate(), a) + kron(a.transpose(), a.adjoint());
  }
  m += kron(s1, id) + kron(id, s2);
  const auto [values, vectors] = eigh(m);
  const double top = std::max(values.maxCoeff(), 0.0);
  std::vector<Eigen::Index> null;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) <= tol * top) null.push_back(i);
  }
  Matrix basis(h * h, static_cast<Eigen::Index>(null.size()));
  for (std::size_t c = 0; c < null.size(); ++c) basis.col(c) = vectors.col(null[c]);
  CommutantBasis out;
  out.elements = canonical_basis(basis, h);
  return out;
}

CommutantBasis commutant_of(std::span<const Matrix> ops, double tol) {
  const Eigen::Index h = common_dim(ops);
  const std::vector<Matrix> all = with_adjoints(ops);
  std::vector<MonomialPattern> patterns;
  if (sparse_applicable(all, patterns)) return commutant_sparse(all, patterns, h);
  return commutant_dense(ops, tol);
}

CommutantBasis weak_commutant(const GnsTriple& triple, std::span<const Matrix> generators,
                              double tol) {
  std::vector<Matrix> ops;
  ops.reserve(generators.size());
  for (const Matrix& g : generators) ops.push_back(triple.rep(g));
  return commutant_of(ops, tol);
}

CommutantBasis weak_commutant(const GnsTriple& triple, double tol) {
  const std::vector<Matrix> gens = triple.default_generators();
  return weak_commutant(triple, gens, tol);
}

double subspace_defect(const CommutantBasis& u, const CommutantBasis& v) {
  if (u.dimension() != v.dimension()) return 1.0;
  if (u.dimension() == 0) return 0.0;
  auto stack = [](const CommutantBasis& b) {
    const Eigen::Index len = b.elements.front().size();
    Matrix m(len, static_cast<Eigen::Index>(b.dimension()));
    for (std::size_t c = 0; c < b.dimension(); ++c) {
      m.col(c) = Eigen::Map<const Vector>(b.elements[c].data(), len);
    }
    return m;
  };
  const Matrix a = stack(u);
  const Matrix b = stack(v);
  if (a.rows() != b.rows()) return 1.0;
  return std::max(op_norm(Matrix(a - b * (b.adjoint() * a))),
                  op_norm(Matrix(b - a * (a.adjoint() * b))));
}

CommutantEquality commutant_equality_check(const GnsTriple& triple,
                                           std::span<const Matrix> local_family,
                                           std::span<const Matrix> full_family, double tol) {
  const CommutantBasis local = weak_commutant(triple, local_family, tol);
  const CommutantBasis full = weak_commutant(triple, full_family, tol);
  return {local.dimension(), full.dimension(), subspace_defect(local, full)};
}

CommutantEquality commutant_equality_check(const GnsTriple& triple, double tol) {
  const std::vector<Matrix> local = triple.small_generators();
  const std::vector<Matrix> full = triple.default_generators();
  return commutant_equality_check(triple, local, full, tol);
}

bool is_quasi_irreducible(const GnsTriple& triple, double tol) {
  const std::vector<Matrix> gens = triple.small_generators();
  return weak_commutant(triple, gens, tol).dimension() == 1;
}

CommutantBasis center(const CommutantBasis& commutant, const GnsTriple& triple, double tol) {
  if (commutant.dimension() <= 1) return commutant;
  std::vector<Matrix> ops;
  for (const Matrix& g : triple.small_generators()) ops.push_back(triple.rep(g));
  for (const Matrix& c : commutant.elements) ops.push_back(c);
  return commutant_of(ops, tol);
}

double rep_norm_bound_check(const GnsTriple& triple, std::span<const Matrix> samples) {
  double worst = 0.0;
  for (const Matrix& x : samples) {
    const double nx = op_norm(x);
    if (nx == 0.0) continue;
    worst = std::max(worst, op_norm(triple.rep(x)) / nx);
  }
  return worst;
}

namespace {

// Hermitian non-scalar commutant element with the largest non-scalar part.
Matrix pick_hermitian(const CommutantBasis& c) {
  Matrix best;
  double best_score = -1.0;
  const cplx minus_i(0.0, -1.0);
  for (const Matrix& b : c.elements) {
    const Eigen::Index h = b.rows();
    for (const Matrix& cand : {hermitian_part(b), hermitian_part(Matrix(minus_i * b))}) {
      const cplx mean = cand.trace() / static_cast<double>(h);
      const double score = (cand - mean * Matrix::Identity(h, h)).norm();
      if (score > best_score * (1.0 + 1e-9) + 1e-300) {
        best_score = score;
        best = cand;
      }
    }
  }
  return best;
}

// Spectral projection onto the eigenvalues above the median (or at/above it
// when the strict set is trivial).
Matrix spectral_projection(const Matrix& herm) {
  const auto [values, vectors] = eigh(herm);
  const Eigen::Index n = values.size();
  const double median = n % 2 ? values(n / 2) : 0.5 * (values(n / 2 - 1) + values(n / 2));
  const double delta = 1e-8 * std::max(values(n - 1) - values(0), 1e-300);
  auto select = [&](auto pred) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pred(values(i))) idx.push_back(i);
    }
    return idx;
  };
  std::vector<Eigen::Index> idx = select([&](double v) { return v > median + delta; });
  if (idx.empty() || static_cast<Eigen::Index>(idx.size()) == n) {
    idx = select([&](double v) { return v >= median - delta; });
  }
  if (idx.empty() || static_cast<Eigen::Index>(idx.size()) == n) {
    const double mid = 0.5 * (values(0) + values(n - 1));
    idx = select([&](double v) { return v > mid; });
  }
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i : idx) p += vectors.col(i) * vectors.col(i).adjoint();
  return p;
}

struct Split {
  bool found = false;
  Matrix nu1;
  Matrix nu2;
  double gap = 0.0;
};

// ω = tν₁ + (1−t)ν₂ with t = ν(e).
Split decompose(const Matrix& nu, const Matrix& omega, double tol) {
  Split s;
  const double t = nu.trace().real();
  if (!(t > 1e-9 && t < 1.0 - 1e-9)) return s;
  s.nu1 = nu / t;
  s.nu2 = (omega - nu) / (1.0 - t);
  s.gap = op_norm(Matrix(s.nu1 - s.nu2));
  s.found = s.gap > 1e-6 && min_eigenvalue(s.nu1) >= -tol && min_eigenvalue(s.nu2) >= -tol;
  return s;
}

}  // namespace

PurityCertificate purity_certificate(const GnsTriple& triple, const Functional& omega, double tol,
                                     std::uint64_t seed, std::size_t samples) {
  if (!omega.is_state()) throw NotAState("purity_certificate: functional is not a state");
  const Matrix& f = omega.weight();
  const double scale = std::max(1.0, op_norm(f));
  const double leq_tol = tol * scale;
  const Vector& xi = triple.cyclic_vector();

  PurityCertificate cert;
  const CommutantBasis comm = weak_commutant(triple, tol);
  cert.commutant_dim = comm.dimension();
  cert.pure = cert.commutant_dim == 1;

  if (!cert.pure) {
    cert.has_witness = true;
    cert.projection = spectral_projection(pick_hermitian(comm));
    cert.nu_weight = triple.weight_of(cert.projection * xi);
    cert.nu_mass = cert.nu_weight.trace().real();
    cert.proportionality_defect = proportionality_defect(cert.nu_weight, f);
    cert.nu_leq_omega = weight_leq(cert.nu_weight, f, leq_tol);
    cert.nu_representable = hermiticity_defect(cert.nu_weight) <= leq_tol &&
                            min_eigenvalue(cert.nu_weight) >= -leq_tol;
    const Split s = decompose(cert.nu_weight, f, leq_tol);
    if (s.found) {
      cert.decomposition_found = true;
      cert.nu1 = s.nu1;
      cert.nu2 = s.nu2;
      cert.decomposition_gap = s.gap;
    }
  }

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto record = [&](const Matrix& nu) {
    ++cert.samples;
    if (!weight_leq(nu, f, leq_tol)) return;
    const double defect = proportionality_defect(nu, f);
    cert.max_sample_defect = std::max(cert.max_sample_defect, defect);
    if (defect < kProportionalityThreshold) return;
    ++cert.dominated_nonproportional;
    if (!cert.decomposition_found) {
      const Split s = decompose(nu, f, leq_tol);
      if (s.found) {
        cert.decomposition_found = true;
        cert.nu1 = s.nu1;
        cert.nu2 = s.nu2;
        cert.decomposition_gap = s.gap;
      }
    }
  };

  // positive contractions in the commutant
  const auto h = static_cast<Eigen::Index>(triple.hilbert_dim());
  for (std::size_t s = 0; s < samples; ++s) {
    Matrix z = Matrix::Zero(h, h);
    for (const Matrix& b : comm.elements) z += cplx(normal(rng), normal(rng)) * b;
    const auto [values, vectors] = eigh(z);
    const double lo = values(0);
    const double hi = values(values.size() - 1);
    Matrix t;
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      t = uniform(rng) * Matrix::Identity(h, h);
    } else {
      const RealVector scaled = (values.array() - lo) / (hi - lo);
      t = vectors * scaled.cast<cplx>().asDiagonal() * vectors.adjoint();
    }
    record(triple.weight_of(t * xi));
  }

  // F^{1/2} S F^{1/2} with 0 ≤ S ≤ I
  const Matrix root = psd_sqrt(f);
  const std::size_t weight_samples = samples / 4;
  for (std::size_t s = 0; s < weight_samples; ++s) {
    const Matrix u = haar_unitary(f.rows(), rng);
    RealVector diag(f.rows());
    for (Eigen::Index i = 0; i < diag.size(); ++i) diag(i) = uniform(rng);
    const Matrix sm = u * diag.cast<cplx>().asDiagonal() * u.adjoint();
    record(Matrix(root * sm * root));
  }
  return cert;
}

PurityCertificate purity_certificate(const Functional& omega, double tol, std::uint64_t seed,
                                     std::size_t samples) {
  if (!omega.is_state()) throw NotAState("purity_certificate: functional is not a state");
  return purity_certificate(gns_construct(omega, tol), omega, tol, seed, samples);
}

}  // namespace qloc
