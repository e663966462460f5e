#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "gfchan/linalg.hpp"

namespace gfchan {

// Construction tolerances for Majorana correlation matrices.
inline constexpr double kAntisymTol = 1e-12;
inline constexpr double kPhysicalTol = 1e-10;
inline constexpr double kPurityTol = 1e-8;
inline constexpr double kRealityTol = 1e-10;
inline constexpr double kClampTol = 1e-12;

/// Two-point correlation matrix of a Gaussian state on 2n Majorana modes:
/// Gamma_jl = (i/2) Tr(rho [c_j, c_l]). Real antisymmetric, all singular
/// values <= 1; equality everywhere for pure states.
class CorrelationMatrix {
 public:
  /// Validates antisymmetry and physicality; throws std::invalid_argument
  /// naming the violated invariant and its magnitude.
  explicit CorrelationMatrix(Mat gamma);

  int n_modes() const { return static_cast<int>(data_.rows()); }
  const Mat& mat() const { return data_; }
  /// True iff ||Gamma Gamma^T - I|| <= 1e-8 in spectral norm.
  bool pure() const { return pure_; }

 private:
  Mat data_;
  bool pure_;
};

/// Momentum-resolved correlation blocks on a uniform grid k = 2 pi m / L.
/// Each block is anti-hermitian with ||Gamma_k|| <= 1, and on grids that
/// contain both k and -k the blocks satisfy conj(Gamma_k) = Gamma_{-k}.
class MomentumCorrelation {
 public:
  MomentumCorrelation(std::vector<double> k_grid, std::vector<CMat> blocks);

  int n_k() const { return static_cast<int>(k_grid_.size()); }
  int cell_modes() const {
    return blocks_.empty() ? 0 : static_cast<int>(blocks_[0].rows());
  }
  const std::vector<double>& k_grid() const { return k_grid_; }
  const CMat& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }
  const std::vector<CMat>& blocks() const { return blocks_; }

 private:
  std::vector<double> k_grid_;
  std::vector<CMat> blocks_;
};

/// Single-particle entanglement spectrum: lambda_alpha in [0, 1] descending,
/// epsilon_alpha = log((1 + lambda)/(1 - lambda)), with lambda ~ 1 clamped to
/// an infinite sentinel energy.
struct EntanglementSpectrum {
  std::vector<double> lambda;
  std::vector<double> epsilon;
  std::optional<double> k;  // momentum label when sector-resolved

  static constexpr double kInfinite = std::numeric_limits<double>::infinity();
};

/// Mode occupations epsilon = log((1+lambda)/(1-lambda)) from the canonical
/// antisymmetric pairing (eigenvalues +- i lambda), lambda sorted descending.
EntanglementSpectrum entanglement_spectrum(const CorrelationMatrix& gamma);

/// Top `top_m` eigenvalues of the Gaussian density matrix: products of
/// (1 +- lambda_alpha)/2 over modes, sorted descending. `top_m` larger than
/// the full set clamps to 2^n values.
std::vector<double> many_body_spectrum(const EntanglementSpectrum& spec,
                                       std::size_t top_m);

/// Block Fourier transform of a translation-invariant correlation matrix;
/// cells of `cell_modes` Majoranas, Gamma_k = sum_d e^{ikd} G(d) with
/// G(d) the block coupling cell x to cell x+d. Rejects inputs that are not
/// block-circulant to 1e-10.
MomentumCorrelation fourier_blocks(const CorrelationMatrix& real_space,
                                   int cell_modes);

/// Inverse of fourier_blocks; reconstructs the real-space matrix.
CorrelationMatrix inverse_fourier_blocks(const MomentumCorrelation& mc);

/// Displacement blocks G(d), d = 0..L-1, without assembling the full matrix.
std::vector<CMat> momentum_to_displacement_blocks(const MomentumCorrelation& mc);

}  // namespace gfchan
