#include "gfchan/isotns.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gfchan {

namespace {

const std::vector<std::string> kLegOrder = {"P", "V_r", "V_t", "V_l", "V_b"};

int leg_rank(const std::string& name) {
  const auto it = std::find(kLegOrder.begin(), kLegOrder.end(), name);
  if (it == kLegOrder.end())
    throw std::invalid_argument("IsoTensor: unknown leg name '" + name + "'");
  return static_cast<int>(it - kLegOrder.begin());
}

}  // namespace

IsoTensor::IsoTensor(std::vector<Leg> legs, Mat lambda)
    : legs_(std::move(legs)), lambda_(std::move(lambda)) {
  int total = 0;
  int rank = -1;
  for (const Leg& leg : legs_) {
    const int r = leg_rank(leg.name);
    if (r <= rank)
      throw std::invalid_argument(
          "IsoTensor: legs must follow the order (P, V_r, V_t, V_l, V_b)");
    rank = r;
    if (leg.modes < 0) throw std::invalid_argument("IsoTensor: negative leg size");
    total += leg.modes;
  }
  if (lambda_.rows() != total || lambda_.cols() != total)
    throw std::invalid_argument(
        "IsoTensor: leg sizes do not sum to the matrix dimension");
  const double asym = antisymmetry_defect(lambda_);
  if (asym > kAntisymTol * std::max(1.0, lambda_.cwiseAbs().maxCoeff()) * 10)
    throw std::invalid_argument("IsoTensor: Lambda not antisymmetric, defect " +
                                std::to_string(asym));
}

bool IsoTensor::has_leg(const std::string& name) const {
  for (const Leg& leg : legs_)
    if (leg.name == name) return leg.modes > 0;
  return false;
}

int IsoTensor::leg_modes(const std::string& name) const {
  for (const Leg& leg : legs_)
    if (leg.name == name) return leg.modes;
  return 0;
}

int IsoTensor::leg_offset(const std::string& name) const {
  int off = 0;
  for (const Leg& leg : legs_) {
    if (leg.name == name) return off;
    off += leg.modes;
  }
  throw std::invalid_argument("IsoTensor: leg '" + name + "' not present");
}

Mat IsoTensor::block(const std::string& a, const std::string& b) const {
  const int na = leg_modes(a);
  const int nb = leg_modes(b);
  if (na == 0 || nb == 0) return Mat::Zero(na, nb);
  return lambda_.block(leg_offset(a), leg_offset(b), na, nb);
}

TensorReport validate_tensor(const IsoTensor& t) {
  TensorReport rep;
  const Mat& lam = t.lambda();
  rep.purity_resid = spectral_norm(
      Mat(lam.transpose() * lam - Mat::Identity(lam.rows(), lam.cols())));
  rep.pure = rep.purity_resid <= kIsometryTol;
  if (t.has_leg("V_b")) rep.vb_resid = t.block("V_b", "V_b").cwiseAbs().maxCoeff();
  if (t.has_leg("V_l")) rep.vl_resid = t.block("V_l", "V_l").cwiseAbs().maxCoeff();
  if (t.has_leg("V_l") && t.has_leg("V_b"))
    rep.cross_resid = t.block("V_l", "V_b").cwiseAbs().maxCoeff();
  rep.isometric_form = rep.vb_resid <= kIsometryTol &&
                       rep.vl_resid <= kIsometryTol &&
                       rep.cross_resid <= kIsometryTol;
  rep.pass = rep.pure && rep.isometric_form;
  return rep;
}

TensorChannel channel_from_tensor(const IsoTensor& t) {
  if (t.has_leg("V_r") || t.has_leg("V_l"))
    throw std::invalid_argument(
        "channel_from_tensor: expected MPS layout (P, V_t, V_b)");
  const TensorReport rep = validate_tensor(t);
  if (!rep.pass) {
    std::ostringstream msg;
    msg << "channel_from_tensor: tensor is not isometric (purity residual "
        << rep.purity_resid << ", incoming-leg residual " << rep.vb_resid << ")";
    throw std::invalid_argument(msg.str());
  }
  const int n_p = t.leg_modes("P");
  const int n_v = t.leg_modes("V_t");
  if (n_v != t.leg_modes("V_b"))
    throw std::invalid_argument(
        "channel_from_tensor: top and bottom virtual legs differ in size");

  TensorChannel tc;
  tc.a_p = t.block("P", "P");
  tc.a_pv = t.block("P", "V_t");
  tc.b_p = t.block("P", "V_b");
  Mat a = t.block("V_t", "V_t");
  Mat b = t.block("V_t", "V_b");

  Mat a_full = Mat::Zero(n_p + n_v, n_p + n_v);
  a_full.topLeftCorner(n_p, n_p) = tc.a_p;
  a_full.topRightCorner(n_p, n_v) = tc.a_pv;
  a_full.bottomLeftCorner(n_v, n_p) = -tc.a_pv.transpose();
  a_full.bottomRightCorner(n_v, n_v) = a;
  Mat b_full(n_p + n_v, n_v);
  b_full.topRows(n_p) = tc.b_p;
  b_full.bottomRows(n_v) = b;

  tc.full = make_channel(a_full, b_full);
  tc.virt = make_channel(std::move(a), std::move(b));
  return tc;
}

IsoTensor tensor_from_channel(const TensorChannel& ch, int n_p, int n_v) {
  const int total = n_p + 2 * n_v;
  Mat lam = Mat::Zero(total, total);
  lam.topLeftCorner(n_p + n_v, n_p + n_v) = ch.full.A;
  lam.block(0, n_p + n_v, n_p + n_v, n_v) = ch.full.B;
  lam.block(n_p + n_v, 0, n_v, n_p + n_v) = -ch.full.B.transpose();
  std::vector<Leg> legs;
  if (n_p > 0) legs.push_back({"P", n_p});
  legs.push_back({"V_t", n_v});
  legs.push_back({"V_b", n_v});
  return IsoTensor(std::move(legs), std::move(lam));
}

namespace {

struct Resolvent {
  CMat q;  // (e^{-ik} - Lambda_rl^T)^{-1}
  double cond = 0.0;
};

Resolvent resolvent_at(const Mat& lam_rl, double k) {
  const int n = static_cast<int>(lam_rl.rows());
  const CMat m = std::polar(1.0, -k) * CMat::Identity(n, n) -
                 lam_rl.transpose().cast<Cplx>();
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Resolvent res;
  const double smin = svd.singularValues()(n - 1);
  res.cond = smin > 0 ? svd.singularValues()(0) / smin : 1e300;
  res.q = svd.solve(CMat::Identity(n, n));
  return res;
}

LightlikeChannel lightlike_at(const IsoTensor& t, double k) {
  const Mat lam_rl = t.block("V_r", "V_l");
  const Resolvent res = resolvent_at(lam_rl, k);

  const CMat vt = t.block("V_t", "V_t").cast<Cplx>();
  const CMat vtvl = t.block("V_t", "V_l").cast<Cplx>();
  const CMat vtvr = t.block("V_t", "V_r").cast<Cplx>();
  const CMat vtvb = t.block("V_t", "V_b").cast<Cplx>();
  const CMat vbvr = t.block("V_b", "V_r").cast<Cplx>();
  const CMat vr = t.block("V_r", "V_r").cast<Cplx>();

  // W_k = (e^{ik} - Lambda_rl)^{-1} Lambda_{V_r} Q_k; the first factor is
  // -Q_k^dag up to the sign convention (e^{ik} - L) = (e^{-ik} - L^T)^dag.
  const CMat w = res.q.adjoint() * vr * res.q;

  LightlikeChannel out;
  out.q_k = res.q;
  out.a_k = vt + vtvl * w * vtvl.transpose() + vtvr * res.q * vtvl.transpose() -
            vtvl * res.q.adjoint() * vtvr.transpose();
  out.a_k = 0.5 * (out.a_k - CMat(out.a_k.adjoint()));
  out.b_k = vtvb - vtvl * res.q.adjoint() * vbvr.transpose();
  out.detoured = false;
  return out;
}

}  // namespace

LightlikeChannel lightlike_channel(const IsoTensor& t, double k) {
  if (!t.has_leg("V_r") || !t.has_leg("V_l"))
    throw std::invalid_argument("lightlike_channel: tensor has no left/right legs");
  if (t.leg_modes("V_r") != t.leg_modes("V_l"))
    throw std::invalid_argument(
        "lightlike_channel: left and right legs differ in size");
  const Mat lam_rl = t.block("V_r", "V_l");
  const Resolvent probe = resolvent_at(lam_rl, k);
  if (probe.cond < 1e12) return lightlike_at(t, k);

  // Removable singularity: approach from both sides.
  constexpr double kDelta = 1e-6;
  const LightlikeChannel lo = lightlike_at(t, k - kDelta);
  const LightlikeChannel hi = lightlike_at(t, k + kDelta);
  LightlikeChannel out;
  out.a_k = 0.5 * (lo.a_k + hi.a_k);
  out.b_k = 0.5 * (lo.b_k + hi.b_k);
  out.q_k = 0.5 * (lo.q_k + hi.q_k);
  out.detoured = true;
  return out;
}

MomentumChannel lightlike_channel_grid(const IsoTensor& t, int L) {
  if (L < 2 || L % 2 != 0)
    throw std::invalid_argument("lightlike_channel_grid: L must be even");
  std::vector<double> ks(static_cast<std::size_t>(L));
  std::vector<CMat> ak(static_cast<std::size_t>(L)), bk(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    ks[static_cast<std::size_t>(m)] = k;
    const LightlikeChannel lc = lightlike_channel(t, k);
    ak[static_cast<std::size_t>(m)] = lc.a_k;
    bk[static_cast<std::size_t>(m)] = lc.b_k;
  }
  return MomentumChannel(std::move(ks), std::move(ak), std::move(bk));
}

RingReference ring_channel_reference(const IsoTensor& t, int n_cells) {
  if (n_cells < 2)
    throw std::invalid_argument("ring_channel_reference: need at least 2 cells");
  const int n_r = t.leg_modes("V_r");
  if (n_r == 0 || n_r != t.leg_modes("V_l"))
    throw std::invalid_argument("ring_channel_reference: bad left/right legs");
  const int n_x = t.leg_modes("P") + t.leg_modes("V_t") + t.leg_modes("V_b");
  const int n_y = 2 * n_r;
  const int cell = t.total_modes();

  // Per-cell index maps into the (kept, projected) split.
  std::vector<int> kept, proj;
  for (const Leg& leg : t.legs()) {
    const int off = t.leg_offset(leg.name);
    const bool is_bond = leg.name == "V_r" || leg.name == "V_l";
    for (int i = 0; i < leg.modes; ++i)
      (is_bond ? proj : kept).push_back(off + i);
  }

  const int nx_tot = n_cells * n_x;
  const int ny_tot = n_cells * n_y;
  Mat gxx = Mat::Zero(nx_tot, nx_tot);
  Mat gxy = Mat::Zero(nx_tot, ny_tot);
  Mat gyy = Mat::Zero(ny_tot, ny_tot);
  const Mat& lam = t.lambda();
  for (int c = 0; c < n_cells; ++c) {
    for (int i = 0; i < n_x; ++i)
      for (int j = 0; j < n_x; ++j)
        gxx(c * n_x + i, c * n_x + j) = lam(kept[static_cast<std::size_t>(i)],
                                            kept[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n_x; ++i)
      for (int j = 0; j < n_y; ++j)
        gxy(c * n_x + i, c * n_y + j) = lam(kept[static_cast<std::size_t>(i)],
                                            proj[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n_y; ++i)
      for (int j = 0; j < n_y; ++j)
        gyy(c * n_y + i, c * n_y + j) = lam(proj[static_cast<std::size_t>(i)],
                                            proj[static_cast<std::size_t>(j)]);
  }

  // Bond reference state: V_r of cell c maximally correlated with V_l of
  // cell c+1. Within a cell the projected modes are ordered (V_r, V_l).
  Mat ref = Mat::Zero(ny_tot, ny_tot);
  for (int c = 0; c < n_cells; ++c) {
    const int cp = (c + 1) % n_cells;
    for (int i = 0; i < n_r; ++i) {
      const int vr = c * n_y + i;
      const int vl = cp * n_y + n_r + i;
      ref(vr, vl) = 1.0;
      ref(vl, vr) = -1.0;
    }
  }

  const Mat denom = gyy - ref;
  Eigen::PartialPivLU<Mat> lu(denom);
  const Mat inv = lu.solve(Mat::Identity(ny_tot, ny_tot));
  Mat gout = gxx - gxy * inv * (-gxy.transpose());
  gout = antisymmetrize(gout);

  // Extract the (V_t, V_b) blocks and Fourier transform over cells.
  const int n_t = t.leg_modes("V_t");
  const int n_b = t.leg_modes("V_b");
  const int n_p = t.leg_modes("P");
  const int tb = n_t + n_b;
  auto tb_block = [&](int c0, int c1) {
    Mat blk(tb, tb);
    for (int i = 0; i < tb; ++i)
      for (int j = 0; j < tb; ++j)
        blk(i, j) = gout(c0 * n_x + n_p + i, c1 * n_x + n_p + j);
    return blk;
  };

  RingReference out;
  for (int m = 0; m < n_cells; ++m) {
    const double k = 2.0 * M_PI * m / n_cells;
    out.k_grid.push_back(k);
    CMat gk = CMat::Zero(tb, tb);
    for (int d = 0; d < n_cells; ++d)
      gk += std::polar(1.0, k * d) * tb_block(0, d).cast<Cplx>();
    out.a_k.push_back(gk.topLeftCorner(n_t, n_t));
    out.b_k.push_back(gk.topRightCorner(n_t, n_b));
  }
  return out;
}

Mat physical_block_at_depth(const TensorChannel& tc,
                            const CorrelationMatrix& boundary, int y) {
  if (y < 1) throw std::invalid_argument("physical_block_at_depth: y >= 1");
  const CorrelationMatrix v = apply(tc.virt, boundary, y - 1);
  Mat g = tc.a_p + tc.b_p * v.mat() * tc.b_p.transpose();
  return antisymmetrize(g);
}

Mat physical_block_bulk(const TensorChannel& tc, const ModeDecomposition& dec) {
  const int n_v = tc.virt.in_modes();
  const CorrelationMatrix gs = steady_state(
      tc.virt, dec, CorrelationMatrix(Mat::Zero(n_v, n_v)));
  Mat g = tc.a_p + tc.b_p * gs.mat() * tc.b_p.transpose();
  return antisymmetrize(g);
}

BoundaryComparison boundary_independence(const IsoTensor& t,
                                         const CorrelationMatrix& boundary1,
                                         const CorrelationMatrix& boundary2,
                                         int y_max) {
  const TensorChannel tc = channel_from_tensor(t);
  const ModeDecomposition dec = decompose_modes(tc.virt);
  BoundaryComparison out;
  out.r = dec.r;

  Mat v1 = boundary1.mat(), v2 = boundary2.mat();
  std::vector<double> xs, ys;
  for (int y = 1; y <= y_max; ++y) {
    const Mat p1 = antisymmetrize(Mat(tc.a_p + tc.b_p * v1 * tc.b_p.transpose()));
    const Mat p2 = antisymmetrize(Mat(tc.a_p + tc.b_p * v2 * tc.b_p.transpose()));
    const double diff = spectral_norm(Mat(p1 - p2));
    out.y.push_back(static_cast<double>(y));
    out.diff_norm.push_back(diff);
    if (diff > 1e-14) {
      xs.push_back(static_cast<double>(y));
      ys.push_back(std::log(diff));
    }
    v1 = tc.virt.A + tc.virt.B * v1 * tc.virt.B.transpose();
    v2 = tc.virt.A + tc.virt.B * v2 * tc.virt.B.transpose();
  }

  if (xs.size() >= 3) {
    // Tail fit; the early points carry the polynomial prefactor.
    const std::size_t skip = xs.size() / 5;
    std::vector<double> tx(xs.begin() + static_cast<long>(skip), xs.end());
    std::vector<double> ty(ys.begin() + static_cast<long>(skip), ys.end());
    out.fit_valid = true;
    out.slope = fit_line(tx, ty).slope;
  }

  // Preserved modes legitimately carry boundary information to every depth.
  if (dec.preserved_dim() > 0 && !out.diff_norm.empty()) {
    const double tail = out.diff_norm.back();
    const Mat du = dec.q_u.transpose() * (boundary1.mat() - boundary2.mat()) *
                   dec.q_u;
    if (tail > 1e-10 && du.size() > 0 && du.cwiseAbs().maxCoeff() > 1e-10)
      out.plateau = true;
  }
  return out;
}

IsoTensor random_iso_tensor(Rng& rng, int n_p, int n_r, int n_t, int n_l,
                            int n_b) {
  const int m_out = n_p + n_r + n_t;
  const int m_in = n_l + n_b;
  if (m_out < m_in || (m_out - m_in) % 2 != 0)
    throw std::invalid_argument(
        "random_iso_tensor: outgoing minus incoming modes must be even and "
        "non-negative");
  const Mat o = random_orthogonal(rng, m_out);
  Mat b_big = o.leftCols(m_in);
  if (m_in > 0) b_big = b_big * random_orthogonal(rng, m_in).transpose();
  const Mat w = o.rightCols(m_out - m_in);
  Mat j = Mat::Zero(m_out - m_in, m_out - m_in);
  for (int i = 0; i + 1 < m_out - m_in; i += 2) {
    j(i, i + 1) = 1.0;
    j(i + 1, i) = -1.0;
  }
  const Mat lam_out = w * j * w.transpose();

  // Out rows are ordered (P, V_r, V_t); in columns (V_l, V_b). These slot
  // directly into the canonical leg order (P, V_r, V_t, V_l, V_b).
  const int total = m_out + m_in;
  Mat lam = Mat::Zero(total, total);
  lam.topLeftCorner(m_out, m_out) = lam_out;
  lam.topRightCorner(m_out, m_in) = b_big;
  lam.bottomLeftCorner(m_in, m_out) = -b_big.transpose();

  std::vector<Leg> legs;
  if (n_p > 0) legs.push_back({"P", n_p});
  if (n_r > 0) legs.push_back({"V_r", n_r});
  if (n_t > 0) legs.push_back({"V_t", n_t});
  if (n_l > 0) legs.push_back({"V_l", n_l});
  if (n_b > 0) legs.push_back({"V_b", n_b});
  return IsoTensor(std::move(legs), std::move(lam));
}

}  // namespace gfchan
