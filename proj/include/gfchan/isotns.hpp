#pragma once

#include <string>
#include <vector>

#include "gfchan/channel.hpp"
#include "gfchan/momentum.hpp"

namespace gfchan {

struct Leg {
  std::string name;  // one of P, V_r, V_t, V_l, V_b
  int modes = 0;
};

/// Correlation matrix of a pure Gaussian tensor over its physical and
/// virtual Majorana legs, in the fixed leg order (P, V_r, V_t, V_l, V_b)
/// restricted to the legs present. Isometric tensors have vanishing blocks
/// on the incoming legs (V_b, and V_l when present).
class IsoTensor {
 public:
  IsoTensor(std::vector<Leg> legs, Mat lambda);

  const std::vector<Leg>& legs() const { return legs_; }
  const Mat& lambda() const { return lambda_; }
  int total_modes() const { return static_cast<int>(lambda_.rows()); }

  bool has_leg(const std::string& name) const;
  int leg_modes(const std::string& name) const;  // 0 when absent
  int leg_offset(const std::string& name) const;
  /// Sub-block of Lambda between two legs (rows a, columns b).
  Mat block(const std::string& a, const std::string& b) const;

 private:
  std::vector<Leg> legs_;
  Mat lambda_;
};

struct TensorReport {
  double purity_resid = 0.0;   // ||Lambda^T Lambda - I||
  double vb_resid = 0.0;       // ||Lambda_{V_b}||
  double vl_resid = 0.0;       // ||Lambda_{V_l}||
  double cross_resid = 0.0;    // ||Lambda_{V_l V_b}||
  bool pure = false;
  bool isometric_form = false;
  bool pass = false;
};

TensorReport validate_tensor(const IsoTensor& t);

/// Channel extracted from an MPS-layout tensor (P, V_t, V_b): the full
/// isometric map V_b -> (P, V_t) and its restriction to the virtual legs.
struct TensorChannel {
  GaussianChannel full;  // A over (P, V_t), B rectangular (P,V_t) x V_b
  GaussianChannel virt;  // A = Lambda_{V_t}, B = Lambda_{V_t V_b}
  Mat a_p;               // Lambda_P
  Mat a_pv;              // Lambda_{P V_t}
  Mat b_p;               // Lambda_{P V_b}
};

/// Throws if the tensor is not in isometric MPS form.
TensorChannel channel_from_tensor(const IsoTensor& t);

/// Rebuilds the tensor from the extracted channel blocks.
IsoTensor tensor_from_channel(const TensorChannel& ch, int n_p, int n_v);

/// One-momentum channel of the light-like contraction of a 4-virtual-leg
/// tensor: the left/right legs are contracted along the cut through the
/// resolvent Q_k = (e^{-ik} - Lambda_{V_r V_l}^T)^{-1} and
/// W_k = (e^{ik} - Lambda_{V_r V_l})^{-1} Lambda_{V_r} Q_k, giving
///   A_k = Lambda_{V_t} + Lambda_{V_t V_l} W_k Lambda_{V_t V_l}^T
///       + Lambda_{V_t V_r} Q_k Lambda_{V_t V_l}^T
///       - Lambda_{V_t V_l} Q_k^dag Lambda_{V_t V_r}^T
///   B_k = Lambda_{V_t V_b} - Lambda_{V_t V_l} Q_k^dag Lambda_{V_b V_r}^T.
/// A resolvent with condition number above 1e12 is treated as a removable
/// singularity: the value is recomputed at k +- 1e-6 and averaged.
struct LightlikeChannel {
  CMat a_k;
  CMat b_k;
  CMat q_k;
  bool detoured = false;
};

LightlikeChannel lightlike_channel(const IsoTensor& t, double k);

/// Samples the light-like channel on a uniform grid of even size L.
MomentumChannel lightlike_channel_grid(const IsoTensor& t, int L);

/// Brute-force reference for the light-like contraction: N copies of the
/// tensor on a ring, left/right legs projected onto the bond reference
/// state (each bond pairs V_r of one cell with V_l of the next), top/bottom
/// correlation blocks read off per discrete momentum via a single Schur
/// complement.
struct RingReference {
  std::vector<double> k_grid;
  std::vector<CMat> a_k;
  std::vector<CMat> b_k;
};

RingReference ring_channel_reference(const IsoTensor& t, int n_cells);

/// Physical-leg correlations at depth y under two bottom boundary states,
/// and the decay of their difference.
struct BoundaryComparison {
  std::vector<double> y;
  std::vector<double> diff_norm;
  double slope = 0.0;       // log-linear fit over the points above noise
  bool fit_valid = false;
  bool plateau = false;     // preserved modes keep boundary information
  double r = 0.0;           // dissipative spectral radius of the tensor channel
};

BoundaryComparison boundary_independence(const IsoTensor& t,
                                         const CorrelationMatrix& boundary1,
                                         const CorrelationMatrix& boundary2,
                                         int y_max);

/// Physical-leg correlation block at depth y for one boundary.
Mat physical_block_at_depth(const TensorChannel& tc,
                            const CorrelationMatrix& boundary, int y);

/// Bulk physical correlation block from the dissipative steady state.
Mat physical_block_bulk(const TensorChannel& tc, const ModeDecomposition& dec);

/// Random isometric tensor: outgoing legs (P, V_r, V_t), incoming legs
/// (V_l, V_b); legs with zero modes are omitted from the layout.
/// Requires n_p + n_r + n_t >= n_l + n_b with an even difference.
IsoTensor random_iso_tensor(Rng& rng, int n_p, int n_r, int n_t, int n_l,
                            int n_b);

}  // namespace gfchan
