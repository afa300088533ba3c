#include "qloc/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

#include "qloc/errors.hpp"

namespace qloc {

SiteSplit::SiteSplit(int n_sites, int site_dim, std::span<const int> kept) {
  const auto d = static_cast<std::size_t>(site_dim);
  full_dim_ = ipow(d, static_cast<std::size_t>(n_sites));
  kept_dim_ = ipow(d, kept.size());
  rest_dim_ = full_dim_ / kept_dim_;

  std::vector<bool> is_kept(n_sites, false);
  for (int p : kept) {
    if (p < 0 || p >= n_sites) throw DimensionMismatch("SiteSplit: position out of range");
    is_kept[p] = true;
  }

  kept_of_.resize(full_dim_);
  rest_of_.resize(full_dim_);
  full_of_.resize(full_dim_);
  std::vector<std::size_t> digits(n_sites);
  for (std::size_t full = 0; full < full_dim_; ++full) {
    std::size_t rem = full;
    for (int s = n_sites - 1; s >= 0; --s) {
      digits[s] = rem % d;
      rem /= d;
    }
    std::size_t k = 0;
    std::size_t r = 0;
    for (int s = 0; s < n_sites; ++s) {
      if (is_kept[s]) {
        k = k * d + digits[s];
      } else {
        r = r * d + digits[s];
      }
    }
    kept_of_[full] = k;
    rest_of_[full] = r;
    full_of_[k * rest_dim_ + r] = full;
  }
}

Matrix embed_matrix(const Matrix& local, const SiteSplit& split) {
  const auto kd = static_cast<Eigen::Index>(split.kept_dim());
  if (local.rows() != kd || local.cols() != kd) {
    throw DimensionMismatch("embed: local matrix is " + std::to_string(local.rows()) + "x" +
                            std::to_string(local.cols()) + ", expected " +
                            std::to_string(kd) + "x" + std::to_string(kd));
  }
  const std::size_t n = split.full_dim();
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ik = split.kept_of(i);
    const std::size_t ir = split.rest_of(i);
    for (std::size_t jk = 0; jk < split.kept_dim(); ++jk) {
      out(i, split.compose(jk, ir)) = local(ik, jk);
    }
  }
  return out;
}

Matrix partial_trace(const Matrix& m, const SiteSplit& split) {
  const auto n = static_cast<Eigen::Index>(split.full_dim());
  if (m.rows() != n || m.cols() != n) {
    throw DimensionMismatch("partial_trace: matrix dimension does not match the split");
  }
  Matrix out = Matrix::Zero(split.kept_dim(), split.kept_dim());
  for (std::size_t i = 0; i < split.full_dim(); ++i) {
    const std::size_t ik = split.kept_of(i);
    const std::size_t ir = split.rest_of(i);
    for (std::size_t jk = 0; jk < split.kept_dim(); ++jk) {
      out(ik, jk) += m(i, split.compose(jk, ir));
    }
  }
  return out;
}

Element::Element(NetConfig config, Matrix matrix, Region declared_support)
    : config_(config), matrix_(std::move(matrix)), support_(std::move(declared_support)) {
  const auto n = static_cast<Eigen::Index>(config_.dim());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw DimensionMismatch("Element: matrix is " + std::to_string(matrix_.rows()) + "x" +
                            std::to_string(matrix_.cols()) + ", chain dimension is " +
                            std::to_string(n));
  }
  if (!support_.valid_for(config_)) {
    throw InputError("Element: support {" + support_.to_string() + "} outside the chain");
  }
}

Element Element::identity(const NetConfig& config) {
  return Element(config, Matrix::Identity(config.dim(), config.dim()), Region());
}

Element embed(const Matrix& local, const Region& region, const NetConfig& config) {
  if (!region.valid_for(config)) {
    throw InputError("embed: region {" + region.to_string() + "} outside the chain");
  }
  SiteSplit split(config.n_sites(), config.site_dim(), region.sites());
  return Element(config, embed_matrix(local, split), region);
}

namespace {

void require_same_config(const Element& a, const Element& b, const char* op) {
  if (!(a.config() == b.config())) {
    throw ConfigMismatch(std::string(op) + ": elements live on different chains");
  }
}

}  // namespace

Element operator*(const Element& a, const Element& b) {
  require_same_config(a, b, "mul");
  return Element(a.config(), a.matrix() * b.matrix(), join(a.support(), b.support()));
}

Element operator+(const Element& a, const Element& b) {
  require_same_config(a, b, "add");
  return Element(a.config(), a.matrix() + b.matrix(), join(a.support(), b.support()));
}

Element operator-(const Element& a, const Element& b) {
  require_same_config(a, b, "sub");
  return Element(a.config(), a.matrix() - b.matrix(), join(a.support(), b.support()));
}

Element operator*(cplx scalar, const Element& a) {
  return Element(a.config(), scalar * a.matrix(), a.support());
}

Element adjoint(const Element& a) {
  return Element(a.config(), a.matrix().adjoint(), a.support());
}

double op_norm(const Element& a) { return op_norm(a.matrix()); }

Region minimal_support(const Element& a, double tol) {
  const NetConfig& c = a.config();
  const double d = c.site_dim();
  std::vector<int> sites;
  std::vector<int> others;
  for (int s = 0; s < c.n_sites(); ++s) {
    others.clear();
    for (int t = 0; t < c.n_sites(); ++t) {
      if (t != s) others.push_back(t);
    }
    SiteSplit split(c.n_sites(), c.site_dim(), others);
    const Matrix reduced = partial_trace(a.matrix(), split) / d;
    if (op_norm(a.matrix() - embed_matrix(reduced, split)) > tol) sites.push_back(s);
  }
  return Region(std::move(sites));
}

CommutationCheck check_disjoint_commutation(const Element& a, const Element& b, double tol) {
  require_same_config(a, b, "commutation");
  CommutationCheck out;
  out.defect = op_norm(a.matrix() * b.matrix() - b.matrix() * a.matrix());
  out.supports_orthogonal = orthogonal(minimal_support(a, tol), minimal_support(b, tol));
  out.contract_holds = !out.supports_orthogonal || out.defect <= tol;
  return out;
}

Element pauli_element(const PauliTerm& term, const NetConfig& config) {
  if (config.site_dim() != 2) {
    throw InputError("Pauli strings need a qubit chain (site_dim 2)");
  }
  std::vector<int> sites;
  for (const auto& [site, letter] : term.letters) {
    if (site < 0 || site >= config.n_sites()) {
      throw InputError("Pauli string: site " + std::to_string(site) + " outside the chain");
    }
    sites.push_back(site);
  }
  Region region(sites);  // rejects repeated sites
  auto letters = term.letters;
  std::sort(letters.begin(), letters.end());
  Matrix local = Matrix::Identity(1, 1);
  for (const auto& [site, letter] : letters) local = kron(local, pauli(letter));
  Element e = embed(term.coefficient * local, region, config);
  return e;
}

Element pauli_sum(std::span<const PauliTerm> terms, const NetConfig& config) {
  if (terms.empty()) throw InputError("Pauli sum: no terms");
  Element total = pauli_element(terms.front(), config);
  for (std::size_t k = 1; k < terms.size(); ++k) total = total + pauli_element(terms[k], config);
  return total;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

PauliTerm parse_term(std::string_view text, double sign, std::string_view whole) {
  PauliTerm term;
  term.coefficient = sign;
  bool seen_coefficient = false;
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) {
    throw InputError("malformed Pauli string \"" + std::string(whole) + "\": " + why);
  };
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    std::string_view tok = text.substr(pos, end - pos);
    pos = end;
    const char head = tok.front();
    if (head == 'X' || head == 'Y' || head == 'Z') {
      int site = 0;
      const auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), site);
      if (tok.size() < 2 || ec != std::errc() || p != tok.data() + tok.size()) {
        fail("bad Pauli factor '" + std::string(tok) + "'");
      }
      term.letters.emplace_back(site, head);
      continue;
    }
    if (seen_coefficient || !term.letters.empty()) {
      fail("unexpected token '" + std::string(tok) + "'");
    }
    bool imaginary = false;
    std::string_view num = tok;
    if (num.back() == 'i' || num.back() == 'j') {
      imaginary = true;
      num.remove_suffix(1);
    }
    double value = 1.0;
    if (!num.empty()) {
      std::string buf(num);
      std::size_t used = 0;
      try {
        value = std::stod(buf, &used);
      } catch (const std::exception&) {
        fail("bad coefficient '" + std::string(tok) + "'");
      }
      if (used != buf.size()) fail("bad coefficient '" + std::string(tok) + "'");
    }
    term.coefficient *= imaginary ? cplx(0.0, value) : cplx(value, 0.0);
    seen_coefficient = true;
  }
  if (!seen_coefficient && term.letters.empty()) fail("empty term");
  return term;
}

}  // namespace

std::vector<PauliTerm> parse_pauli_sum(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.empty()) throw InputError("malformed Pauli string: empty");
  std::vector<PauliTerm> terms;
  double sign = 1.0;
  std::size_t start = 0;
  if (text.front() == '+' || text.front() == '-') {
    sign = text.front() == '-' ? -1.0 : 1.0;
    start = 1;
  }
  std::size_t i = start;
  // split on '+'/'-' that follow whitespace (not an exponent like 1e-3)
  for (; i <= text.size(); ++i) {
    const bool at_end = i == text.size();
    const bool separator =
        !at_end && (text[i] == '+' || text[i] == '-') && i > start &&
        std::isspace(static_cast<unsigned char>(text[i - 1]));
    if (at_end || separator) {
      terms.push_back(parse_term(text.substr(start, i - start), sign, whole));
      if (!at_end) {
        sign = text[i] == '-' ? -1.0 : 1.0;
        start = i + 1;
      }
    }
  }
  return terms;
}

}  // namespace qloc
