#pragma once

#include <vector>

#include "gfchan/channel.hpp"
#include "gfchan/correlation.hpp"
#include "gfchan/isotns.hpp"

namespace gfchan {

/// p+ip mean-field superconductor on a cylinder: hopping -1 along x and y,
/// pairing amplitudes (-1, -i) on the two bond directions, on-site term
/// mu a^dag a. Periodic in x, open in y. mu = 2 sits in the chiral phase,
/// mu = 6 in the trivial one.
struct PipLattice {
  int lx = 24;
  int ly = 24;
  double mu = 2.0;
};

struct PipGroundState {
  PipLattice lattice;
  std::vector<double> q_grid;
  std::vector<CMat> gamma_q;        // per-q_x blocks, cell = one column
  std::vector<double> min_energy;   // smallest |Bogoliubov energy| per q_x
  bool degenerate_filling = false;  // a zero mode within 1e-10 was filled
  std::vector<double> degenerate_q;
  CorrelationMatrix gamma;          // full real-space correlation matrix

  PipGroundState() : gamma(Mat::Zero(2, 2)) {}
};

/// Fills all negative-energy Bogoliubov modes sector by sector (Fourier in
/// x, dense diagonalization in y). Exact zero modes are filled in a fixed
/// deterministic direction and flagged.
PipGroundState pip_ground_state(const PipLattice& lat);

/// Single-particle Majorana Hamiltonian of one momentum sector on the
/// cylinder (2 Ly x 2 Ly, anti-hermitian), H = (i/4) sum h_jl c_j c_l.
CMat pip_cylinder_hamiltonian(const PipLattice& lat, double q);

/// Bulk Bloch Hamiltonian on the torus (2 x 2 Majorana block at (qx, qy)).
CMat pip_bloch_hamiltonian(double qx, double qy, double mu);

/// Momentum-resolved entanglement spectrum of the rows y < y_cut.
struct CutSpectrum {
  int y_cut = 0;
  std::vector<double> q_grid;
  /// epsilon[iq] sorted ascending, 2*y_cut entries (+-inf at clamps).
  std::vector<std::vector<double>> epsilon;
  std::vector<std::vector<double>> lambda;
};

CutSpectrum cut_spectrum(const CorrelationMatrix& gamma, int lx, int ly,
                         int y_cut);

/// Majorana swap channel: B = diag(1, 0), A = 0. Preserves one Majorana
/// mode and resets the other.
GaussianChannel kitaev_channel();

/// Isometric dilation of the swap channel; contracting copies of it
/// prepares the fixed-point Majorana chain.
IsoTensor kitaev_tensor();

/// Reset analogue (B = 0): prepares a product chain.
IsoTensor trivial_chain_tensor();

struct ParitySpectra {
  std::vector<double> even;
  std::vector<double> odd;
};

/// Dense reduced-density-matrix spectra of the first floor(L/2) sites of an
/// L-site chain contracted from `tensor`, resolved by the fermion parity of
/// the subsystem. L is capped at 8 (the construction is a brute-force
/// oracle, not a production path).
ParitySpectra parity_spectra(int chain_length, const IsoTensor& tensor);
ParitySpectra parity_spectra(int chain_length);  // kitaev_tensor()

}  // namespace gfchan
