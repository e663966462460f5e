#pragma once

#include <vector>

#include "gfchan/correlation.hpp"
#include "gfchan/linalg.hpp"

namespace gfchan {

// Brute-force exact-state machinery for cross-checking the correlation-matrix
// code paths at tiny sizes. Dense dimensions are hard-capped at construction;
// nothing here is meant to scale.

inline constexpr long kDenseDimCap = 59049;  // 3^10

/// Dense Jordan-Wigner Majorana operator c_j on n_qubits qubits,
/// j = 0..2*n_qubits-1: c_{2m} = Z^m X I..., c_{2m+1} = Z^m Y I...
CMat jw_majorana(int n_qubits, int j);

/// Pfaffian of a small antisymmetric matrix by recursive expansion along the
/// first row. Intended for dimensions <= 8.
double pfaffian_small(const Mat& a);

/// Dense Gaussian density matrix reconstructed from a correlation matrix via
/// the even-subset expansion rho = 2^{-n} sum_S i^{|S|/2} Pf(Gamma_S) c_S.
CMat gaussian_density_matrix(const Mat& gamma);

/// Unitary exp(K) of an anti-hermitian K through the eigendecomposition of iK.
CMat unitary_exp(const CMat& k);

/// Dense Gaussian unitary U = exp((1/4) sum h_jl c_j c_l) together with the
/// induced rotation on correlation matrices, Gamma -> R Gamma R^T, R = e^h.
struct GaussianGate {
  CMat u;
  Mat r;
};
GaussianGate gaussian_gate(const Mat& h);

/// Dense pure state over an ordered list of qudit factors. Factor 0 is the
/// most significant index.
class DenseState {
 public:
  explicit DenseState(std::vector<int> dims);
  DenseState(std::vector<int> dims, CVec amplitudes);

  long dim() const { return static_cast<long>(amp_.size()); }
  int n_factors() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  const CVec& amplitudes() const { return amp_; }

  /// Appends a fresh factor in |0>.
  void attach_factor(int d);
  /// Applies a unitary on the listed factors (first index most significant).
  void apply_unitary(const CMat& u, const std::vector<int>& targets);
  /// Density matrix of the listed factors (ascending order).
  CMat reduced_density_matrix(const std::vector<int>& keep) const;
  /// Eigenvalues of the reduced density matrix, descending, via the SVD of
  /// the keep x rest amplitude matrix; cheap even when `keep` is large.
  std::vector<double> reduction_spectrum(const std::vector<int>& keep) const;

 private:
  std::vector<int> dims_;
  CVec amp_;
};

/// One purified channel: a unitary on two adjacent ring sites plus one fresh
/// environment qudit.
struct TinyGate {
  int x = 0;  // acts on sites (x, x+1 mod L) and its own environment
  CMat u;     // d^3 x d^3, index order (site x, site x+1, environment)
};

/// A small sequential circuit on an L-site ring of d-dimensional qudits.
/// Gates within one step must commute; every gate is unitary to 1e-12.
struct TinyCircuit {
  int L = 2;
  int d = 2;
  std::vector<std::vector<TinyGate>> steps;

  int T() const { return static_cast<int>(steps.size()); }
};

/// Validates gate unitarity, same-step commutation, and the dense dimension
/// cap d^(L + #gates) <= 3^10. Throws std::invalid_argument on violation.
void validate_circuit(const TinyCircuit& c);

struct SequentialRun {
  DenseState state;             // final state: sites then environments, in order
  std::vector<CMat> rho_v;      // virtual density matrix after each step
  std::vector<std::vector<int>> env_factors;  // factor indices added per step

  SequentialRun() : state(std::vector<int>{1}) {}
};

/// Runs the circuit on `input` (a pure state of the L ring qudits), attaching
/// one environment per gate.
SequentialRun simulate_sequential(const TinyCircuit& c, const CVec& input);

/// Max absolute difference between the sorted spectra of rho_A (environments
/// of steps <= t0, reduced from the final state) and rho_V(t0).
double isospectral_check(const TinyCircuit& c, const CVec& input, int t0);

}  // namespace gfchan
