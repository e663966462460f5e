#pragma once

#include <complex>
#include <vector>

#include "gfchan/correlation.hpp"
#include "gfchan/linalg.hpp"

namespace gfchan {

inline constexpr double kCptpTol = 1e-10;
inline constexpr double kIsometryTol = 1e-10;
inline constexpr double kUnitEigTol = 1e-9;
inline constexpr double kLemmaResidTol = 1e-8;
inline constexpr double kPreservedKernelTol = 1e-6;

/// Gaussian fermion channel acting affinely on correlation matrices,
/// Gamma -> A + B Gamma B^T. Complete positivity and trace preservation are
/// equivalent to Lambda^T Lambda <= I for Lambda = [[A, B], [-B^T, 0]].
/// B may be rectangular (2n_out x 2n_in).
struct GaussianChannel {
  Mat A;
  Mat B;

  int out_modes() const { return static_cast<int>(A.rows()); }
  int in_modes() const { return static_cast<int>(B.cols()); }
};

struct ChannelReport {
  double antisym_defect = 0.0;  // of A
  double cptp_excess = 0.0;     // max eig of Lambda^T Lambda minus 1
  bool pass = false;
  bool isometric = false;  // Lambda^T Lambda = I to 1e-10
};

/// Validation report for a candidate (A, B) pair; throws only on dimension
/// mismatch, everything else is reported.
ChannelReport validate_channel(const Mat& A, const Mat& B);

/// Validated channel; throws std::invalid_argument if the report fails.
GaussianChannel make_channel(Mat A, Mat B);

/// N^t[Gamma]; t = 0 is the identity.
CorrelationMatrix apply(const GaussianChannel& ch, const CorrelationMatrix& g,
                        int t = 1);

/// Composite channel acting as `second` after `first`:
/// (A' + B' A B'^T, B' B).
GaussianChannel compose(const GaussianChannel& second,
                        const GaussianChannel& first);

/// Extension of a channel on V to a joint state on (W, V): W rows are kept,
/// cross blocks pick up one factor of B.
CorrelationMatrix apply_on_subsystem(const GaussianChannel& ch,
                                     const CorrelationMatrix& joint,
                                     int w_modes);

/// Splitting of the single-particle space into preserved modes (unit-norm
/// eigenvalues of B, evolving orthogonally) and dissipative modes (spectral
/// radius r < 1, relaxing to a unique fixed point).
struct ModeDecomposition {
  Mat q_u;  // orthonormal basis of the preserved subspace (2n x m)
  Mat q_d;  // orthonormal basis of the dissipative subspace
  Mat p_u;  // projector q_u q_u^T
  Mat p_d;
  Mat u;    // B restricted to the preserved subspace, orthogonal
  Mat a_d;  // A restricted to the dissipative subspace
  Mat b_d;  // B restricted to the dissipative subspace
  double r = 0.0;
  std::vector<std::complex<double>> unit_eigenvalues;

  int preserved_dim() const { return static_cast<int>(q_u.cols()); }
  int dissipative_dim() const { return static_cast<int>(q_d.cols()); }
};

/// Classifies eigenvalues of B with |b| >= 1 - tol_unit as preserved and
/// checks the consequences A v = 0, B^T B v = v on each preserved vector.
/// Throws if a classified-preserved vector violates A v = 0 beyond 1e-6
/// (tol_unit too loose).
ModeDecomposition decompose_modes(const GaussianChannel& ch,
                                  double tol_unit = kUnitEigTol);

/// Fixed point of the dissipative block solved exactly through the
/// vectorized linear system (I - B_d (x) B_d) vec(Gamma_d) = vec(A_d);
/// the preserved block is frozen at its t = 0 value.
CorrelationMatrix steady_state(const GaussianChannel& ch,
                               const ModeDecomposition& dec,
                               const CorrelationMatrix& gamma0);

struct ConvergenceFit {
  double slope = 0.0;    // d log||N^t[G0] - G^(s)(t)|| / dt
  int n_points = 0;      // residuals above the noise floor
  bool instant = false;  // residual at or below noise for all t >= 1
};

/// Least-squares decay rate of the distance to the steady state over t in
/// [0, T], fitted on the tail of the residuals above 1e-13. The preserved
/// block of the reference rotates with U^t.
ConvergenceFit convergence_rate(const GaussianChannel& ch,
                                const CorrelationMatrix& gamma0, int T);

/// Random CPTP channel: B = O1 diag(s) O2^T with singular values below
/// s_max, A antisymmetric rescaled until the CPTP inequality holds.
GaussianChannel random_cptp_channel(Rng& rng, int n_modes, double s_max);

/// Random physical correlation matrix (rejection-free: antisymmetric matrix
/// scaled inside the unit ball).
CorrelationMatrix random_state(Rng& rng, int n_modes, double fill = 0.9);

}  // namespace gfchan
