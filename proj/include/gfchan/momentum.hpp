#pragma once

#include <string>
#include <vector>

#include "gfchan/channel.hpp"
#include "gfchan/correlation.hpp"

namespace gfchan {

/// Translationally invariant channel sampled on a uniform momentum grid:
/// Gamma_k -> A_k + B_k Gamma_k B_k^dag per k, with per-k CPTP structure
/// A_k^dag A_k + B_k B_k^dag <= I, B_k^dag B_k <= I and the reality
/// constraint A_{-k} = conj(A_k), B_{-k} = conj(B_k).
class MomentumChannel {
 public:
  MomentumChannel(std::vector<double> k_grid, std::vector<CMat> a_k,
                  std::vector<CMat> b_k);

  int n_k() const { return static_cast<int>(k_grid_.size()); }
  int cell_modes() const {
    return a_k_.empty() ? 0 : static_cast<int>(a_k_[0].rows());
  }
  const std::vector<double>& k_grid() const { return k_grid_; }
  const CMat& a(int i) const { return a_k_[static_cast<std::size_t>(i)]; }
  const CMat& b(int i) const { return b_k_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<double> k_grid_;
  std::vector<CMat> a_k_;
  std::vector<CMat> b_k_;
};

/// One period of the brick-wall circuit built from a single two-site channel
/// acting on pairs of sites with n Majoranas each. The odd layer acts inside
/// the unit cell, the even layer is the same channel conjugated by the
/// half-cell translation U_k = [[0, I_n], [e^{-ik} I_n, 0]]:
///   A_k = U_k A U_k^dag + (U_k B U_k^dag) A (U_k B U_k^dag)^dag
///   B_k = U_k B U_k^dag B.
/// L must be even so the grid contains k and -k pairs.
MomentumChannel build_brickwall(const GaussianChannel& two_site, int L);

/// Per-momentum preserved/dissipative split with band tracking.
struct BandClassification {
  std::vector<double> k_grid;
  std::vector<int> preserved_dim;
  int generic_preserved_dim = 0;
  std::vector<bool> exceptional;  // preserved dimension differs from generic
  std::vector<CMat> q_u;          // per-k orthonormal preserved basis
  std::vector<CMat> q_d;          // per-k orthonormal dissipative basis
  std::vector<double> r_k;        // dissipative spectral radius per k
  double r = 0.0;                 // max r_k away from exceptions
  /// Unit-norm eigenvalue of each tracked band, NaN-filled at exceptions.
  std::vector<std::vector<Cplx>> bands;
  std::vector<std::string> warnings;  // overlap-matching ambiguities

  int n_exceptional() const;
};

/// Classifies per-k eigenvalues of B_k with |b| >= 1 - tol_unit as preserved
/// and matches preserved eigenvectors across adjacent momenta by overlap
/// (threshold 0.7; ambiguities are reported, not resolved). Throws if two
/// adjacent momenta are exceptional or if more than sqrt(L) momenta are
/// (classification unstable).
BandClassification classify_bands(const MomentumChannel& mc,
                                  double tol_unit = kUnitEigTol);

/// Per-k steady state of the dissipative block, solving
/// Gamma = P_d A_k + P_d B_k Gamma B_k^dag P_d on the dissipative subspace.
struct MomentumSteadyState {
  std::vector<double> k_grid;
  std::vector<CMat> gamma_d;  // full-size blocks supported on the dissipative subspace
  std::vector<bool> skip;     // exceptional momenta are skipped
};

MomentumSteadyState steady_state_k(const MomentumChannel& mc,
                                   const BandClassification& bands);

struct BranchReport {
  double max_jump = 0.0;   // largest |d eps| between adjacent valid momenta
  double jump_tol = 0.0;   // 10 x median inter-point variation (floored)
  bool chiral = false;     // sign-crossing jump above jump_tol
  int n_clamped = 0;       // momenta where |lambda| -> 1 clamps to +-inf
};

/// Eigenvalues of h_k = log((I - i Gamma_k)(I + i Gamma_k)^{-1}) on the
/// dissipative subspace, branch-matched across the grid, with a continuity
/// report per branch. The grid is treated as periodic.
struct BulkSpectrum {
  std::vector<double> k_grid;
  std::vector<bool> excluded;  // skipped or clamped momenta
  /// branches[b][ik]; NaN at excluded momenta, +-inf at clamps.
  std::vector<std::vector<double>> branches;
  std::vector<std::vector<double>> lambdas;  // |eigenvalue of Gamma| per branch
  std::vector<BranchReport> reports;
  std::vector<std::string> warnings;

  bool any_chiral() const;
};

BulkSpectrum bulk_spectrum(const MomentumSteadyState& st,
                           const BandClassification& bands,
                           double jump_tol_factor = 10.0,
                           double jump_tol_floor = 1e-9);

/// Real-space correlation decay from momentum blocks: inverse transform,
/// then a log-linear fit of the largest matrix element against distance over
/// [2, L/4]. Distances with all entries below 1e-14 end the window; if none
/// survive, the state is flagged ultra-local with xi = 0.
struct DecayAnalysis {
  std::vector<double> distance;
  std::vector<double> max_abs;
  double xi_fit = 0.0;
  bool ultra_local = false;
  LineFit fit;
};

DecayAnalysis realspace_decay(const std::vector<double>& k_grid,
                              const std::vector<CMat>& blocks);
DecayAnalysis realspace_decay(const MomentumCorrelation& mc);
/// Skipped momenta are replaced by the average of their grid neighbors
/// (removable singularities contribute O(1/L) in real space).
DecayAnalysis realspace_decay(const MomentumSteadyState& st);

/// Correlation-length bound xi <= 1/ln(1/r) from the dissipative spectral
/// radius; infinite when r is 0 or 1 away from the open interval.
double correlation_length_bound(double r);

}  // namespace gfchan
