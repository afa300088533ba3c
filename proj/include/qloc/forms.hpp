#pragma once

// Invariant sesquilinear forms on the chain algebra, and the dyadic
// step-function model of the pairing between L^p(0,1) and L^∞(0,1).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qloc/algebra.hpp"
#include "qloc/states.hpp"

namespace qloc {

/// Ω(a, b) = c_b† Q c_a, with c_a the row-major coordinates of a in the
/// matrix-unit basis.
class SesqForm {
 public:
  SesqForm(NetConfig config, Matrix gram);

  const NetConfig& config() const { return config_; }
  const Matrix& gram() const { return gram_; }
  cplx operator()(const Matrix& a, const Matrix& b) const;

 private:
  NetConfig config_;
  Matrix gram_;
};

Vector coordinates(const Matrix& a);

/// Ω(a, b) = ω(b*a), i.e. Q = I ⊗ Fᵀ.
SesqForm gns_form(const Functional& omega);

struct FormAxiomReport {
  bool positive = false;
  double min_eigenvalue = 0.0;
  bool invariant = false;
  /// max |Ω(xa, b) − Ω(a, x*b)| over matrix units x, a, b
  double invariance_defect = 0.0;
};

FormAxiomReport check_form_axioms(const SesqForm& form, double tol = kDefaultTol);

/// max |Ω(xa, a)| / (‖x‖ Ω(a, a)) over pairs with Ω(a, a) > tol.
double form_bound_check(const SesqForm& form, std::span<const std::pair<Matrix, Matrix>> samples,
                        double tol = kDefaultTol);

/// Ω_b(x, y) = Ω(xb, yb) / Ω(b, b).
SesqForm form_modification(const SesqForm& form, const Matrix& b, double tol = kDefaultTol);

struct FormAcReport {
  bool is_ac = false;
  Region buffer;
  double epsilon = 0.0;
  double worst_defect = 0.0;
  std::vector<std::pair<Region, double>> candidates;

  // preservation under Ω → Ω_c
  Region modified_buffer;
  double modified_epsilon = 0.0;  // measured for c*bc and c*c
  double max_ratio = 0.0;         // defect / (2ε‖c‖²‖a‖‖b‖/Ω(c,c))
  std::size_t samples = 0;
};

/// AC scan for |Ω(a,b) − Ω(a,e)Ω(e,b)| over the same buffers and probes as
/// ac_scan, followed by the modification check for Ω_c using the buffer found
/// (or the largest one tried).
FormAcReport form_ac_check(const SesqForm& form, const Element& b, double eps, const Element& c,
                           std::uint64_t seed, double tol = kDefaultTol);

// L^p model

struct Integrand {
  std::string spec;
  double alpha = 0.0;      // power-law exponent (kind "pow")
  bool power = false;
  double max_p = 0.0;      // f ∈ L^p for p < max_p, or p <= max_p if max_p_inclusive
  bool max_p_inclusive = false;
  std::function<double(double)> f;
};

/// "pow:<alpha>" or "expr:<id>" with id in integrand_catalog().
Integrand parse_integrand(std::string_view spec);
std::vector<std::string> integrand_catalog();
bool in_lp(const Integrand& f, double p);

inline constexpr int kMaxLevel = 24;

/// Means of f over the 2^level dyadic intervals.
std::vector<double> interval_means(const Integrand& f, int level);

struct StepFunction {
  int level = 0;
  std::vector<double> values;
};

struct RefinementLadder {
  Integrand target;
  std::vector<StepFunction> members;
};

/// Level-L conditional averages of f for each requested level (increasing).
RefinementLadder build_ladder(const Integrand& f, std::span<const int> levels);

/// γ_L = (Σ_k 2^{-L} m_k²)^{1/2}. Throws NonIntegrable unless f ∈ L^p.
double lp_gamma_estimate(const Integrand& f, double p, int level);
std::vector<double> lp_gamma_series(const Integrand& f, double p, std::span<const int> levels);

struct GeometricTail {
  bool converges = false;
  double ratio = 0.0;     // largest of the last few increment ratios
  double remainder = 0.0;  // geometric estimate of the sum of later increments
};

/// Increments all ≤ tol, or the last (up to three) consecutive ratios below 0.98.
GeometricTail geometric_tail(std::span<const double> increments, double tol);

struct ClosureReport {
  bool lp_cauchy = false;
  bool omega_cauchy = false;
  bool wt_holds = true;  // real-valued ladder and symmetric Ω
  bool gamma_bounded = false;
  std::optional<double> closure_value;  // Ω̄(x, x)
  std::vector<double> lp_increments;    // ‖x_{n+1} − x_n‖_p
  std::vector<double> omega_increments;  // Ω(x_{n+1} − x_n, x_{n+1} − x_n)
  std::vector<double> gamma;             // ‖x_n‖₂
};

ClosureReport closure_probe(const RefinementLadder& ladder, double p, double tol = kDefaultTol);

}  // namespace qloc
