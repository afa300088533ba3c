#pragma once

// Cyclic shifts, ergodic means, almost clustering and the asymptotic results
// for local modifications.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qloc/algebra.hpp"
#include "qloc/states.hpp"

namespace qloc {

/// τ by multiples of `step` on the periodic chain.
///
/// The sequence g_j is the list of shifts k·step for k = 1, 2, .... Every k in
/// the first lap is used. Later k are used only when they carry `far_field`
/// off itself, which is how translates "move to infinity" on a finite ring.
/// With an empty far field the sequence is plainly cyclic.
struct ShiftAction {
  int step = 1;
  Region far_field;
};

/// g_1, ..., g_count as shift amounts in [0, n_sites).
std::vector<int> shift_sequence(const ShiftAction& action, int n_sites, std::size_t count);

/// Basis-index image of the cyclic site shift: site s goes to s + shift.
std::vector<std::size_t> shift_permutation(const NetConfig& config, int shift);
Matrix translate_matrix(const Matrix& x, const std::vector<std::size_t>& perm);
Element translate(const Element& x, int shift);

bool is_invariant(const Functional& omega, const ShiftAction& action, double tol = kDefaultTol);

/// x_N = (1/N) Σ_{j=1}^N τ_{g_j}(x).
Element ergodic_mean(const Element& x, std::size_t n, const ShiftAction& action);

/// tr(M x_N) for N = 1..n_max, without forming x_N.
std::vector<cplx> mean_values(const Matrix& weight, const Element& x, std::size_t n_max,
                              const ShiftAction& action);

inline constexpr double kCauchyTol = 1e-6;
inline constexpr std::size_t kDefaultNMax = 64;

struct ErgodicSeries {
  std::vector<cplx> values;  // ω(x_N), N = 1..N_max
  std::size_t tail_start = 0;  // first N of the tested tail
  double cauchy_defect = 0.0;
  bool in_domain = false;
  cplx limit{0.0, 0.0};
};

/// Max pairwise difference over the last ⌈len/4⌉ values.
double cauchy_defect(std::span<const cplx> values);

ErgodicSeries omega_x_infinity(const Functional& omega, const Element& x, std::size_t n_max,
                               const ShiftAction& action, double tol = kCauchyTol);

/// |ω(ab) − ω(a)ω(b)|
double clustering_defect(const Functional& omega, const Element& a, const Element& b);

struct Probe {
  std::string label;
  Matrix matrix;  // chain matrix with operator norm 1
};

inline constexpr std::size_t kRandomProbes = 50;

/// Pauli strings (Weyl strings for site_dim > 2) of weight 1 and 2 on γ plus
/// Haar-random unitaries on γ, all of norm one.
std::vector<Probe> probe_set(const NetConfig& config, const Region& gamma, std::uint64_t seed,
                             std::size_t random_count = kRandomProbes);

/// sup over probes a of |ω(ab) − ω(a)ω(b)| / (‖a‖‖b‖).
struct ProbeMax {
  double value = 0.0;
  std::string label;
};
ProbeMax ac_epsilon(const Functional& omega, const Matrix& b, std::span<const Probe> probes);

struct AcCandidate {
  Region buffer;
  double epsilon = 0.0;  // measured over the probes on the complement
  std::string worst_label;
};

struct AcScan {
  bool is_ac = false;
  Region buffer;          // first passing buffer
  double epsilon = 0.0;   // measured at that buffer
  Region worst_region;    // complement of the buffer with the worst violation
  std::string worst_label;
  double worst_defect = 0.0;
  std::vector<AcCandidate> candidates;
};

/// Buffers α ⊇ supp(b), by size and then lexicographically, up to
/// `max_buffer_size` sites (default: all but one site, so the complement is
/// never empty unless supp(b) is already the whole chain).
AcScan ac_scan(const Functional& omega, const Element& b, double eps, std::uint64_t seed,
               int max_buffer_size = -1);

struct ModificationAcReport {
  Region buffer;            // buffer actually used, ⊇ supp(c) ∪ supp(b)
  double epsilon = 0.0;     // measured for c*bc and c*c
  double max_ratio = 0.0;   // defect / (2ε‖c‖²‖a‖‖b‖/ω(c*c))
  double max_defect = 0.0;
  std::size_t samples = 0;
};

/// Prop. 3.2 check. ε is measured on the same probes for the elements the
/// proof needs, c*bc and c*c, so the bound is a theorem on the sample set.
/// Defects below 1e-13 count as rounding and give ratio 0.
ModificationAcReport verify_modification_ac(const Functional& omega, const Element& c,
                                            std::span<const Element> bs, const Region& buffer,
                                            std::uint64_t seed, double tol = kDefaultTol);

struct MeanLimitReport {
  cplx limit{0.0, 0.0};          // ω(x_∞)
  bool omega_in_domain = false;
  std::vector<cplx> values;       // φ(x_N)
  std::vector<double> deviations;  // |φ(x_N) − ω(x_∞)|
  double tail = 0.0;               // deviation at N_max
  double c_estimate = 0.0;         // max N·deviation
  bool tail_ok = false;
};

MeanLimitReport modified_mean_limit(const Functional& omega, const Element& b, const Element& x,
                                    std::size_t n_max, const ShiftAction& action,
                                    double tol = kCauchyTol);

/// φ = Σ λ_j ω_{b_j}. Throws WeightError unless λ_j ≥ 0 and Σλ_j = 1.
MeanLimitReport convex_combination_limit(std::span<const std::pair<Element, double>> terms,
                                         const Functional& omega, const Element& x,
                                         std::size_t n_max, const ShiftAction& action,
                                         double tol = kCauchyTol);

/// |ω(a τ_{g_j}(x)) − ω(a) ω(τ_{g_j}(x))|, j ≥ 1.
double cluster_property_defect(const Functional& omega, const Element& a, const Element& x,
                               std::size_t j, const ShiftAction& action);
std::vector<double> cluster_sweep(const Functional& omega, const Element& a, const Element& x,
                                  std::size_t j_max, const ShiftAction& action);

struct ModifiedClusterSweep {
  std::vector<double> defects;   // for ω_b
  std::vector<double> bounds;    // from the sweep of ω, where it applies
  std::vector<bool> applicable;  // τ_{g_j}(x) commutes with b
  double max_ratio = 0.0;
};

/// With A = b*ab, B = b*b and y = τ_{g_j}(x) commuting with b:
/// defect_b ≤ (cd(A, y) ω(B) + |ω(A)| cd(B, y)) / ω(B)².
ModifiedClusterSweep modified_cluster_sweep(const Functional& omega, const Element& b,
                                            const Element& a, const Element& x,
                                            std::size_t j_max, const ShiftAction& action,
                                            double tol = kDefaultTol);

struct PrimaryReport {
  std::size_t commutant_dim = 0;
  std::size_t center_dim = 0;
  ErgodicSeries series;                         // ω(x_N)
  std::vector<std::vector<double>> deviations;  // per a: |ω(a x_N) − ω(a)ω(x_∞)|
  std::vector<double> tails;                    // per a, at N_max
  double max_tail = 0.0;
  bool ok = false;
};

/// Throws NotPrimary when the GNS commutant has a nontrivial center.
PrimaryReport primary_asymptotic_check(const Functional& omega, std::span<const Element> as,
                                       const Element& x, std::size_t n_max,
                                       const ShiftAction& action, double tol = 1e-3);

}  // namespace qloc
