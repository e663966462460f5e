#include "gfchan/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gfchan {

namespace {

Mat stacked_lambda(const Mat& A, const Mat& B) {
  const Eigen::Index no = A.rows();
  const Eigen::Index ni = B.cols();
  Mat lam = Mat::Zero(no + ni, no + ni);
  lam.topLeftCorner(no, no) = A;
  lam.topRightCorner(no, ni) = B;
  lam.bottomLeftCorner(ni, no) = -B.transpose();
  return lam;
}

}  // namespace

ChannelReport validate_channel(const Mat& A, const Mat& B) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("validate_channel: A must be square");
  if (B.rows() != A.rows())
    throw std::invalid_argument("validate_channel: A and B row counts differ");
  ChannelReport rep;
  rep.antisym_defect = antisymmetry_defect(A);
  const Mat lam = stacked_lambda(A, B);
  const Mat gram = lam.transpose() * lam;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  rep.cptp_excess = es.eigenvalues().maxCoeff() - 1.0;
  rep.isometric =
      spectral_norm(gram - Mat::Identity(gram.rows(), gram.cols())) <=
      kIsometryTol;
  rep.pass = rep.antisym_defect <= kAntisymTol && rep.cptp_excess <= kCptpTol;
  return rep;
}

GaussianChannel make_channel(Mat A, Mat B) {
  const ChannelReport rep = validate_channel(A, B);
  if (!rep.pass) {
    std::ostringstream msg;
    msg << "make_channel: invalid channel, antisymmetry defect "
        << rep.antisym_defect << ", CPTP excess " << rep.cptp_excess;
    throw std::invalid_argument(msg.str());
  }
  return GaussianChannel{std::move(A), std::move(B)};
}

CorrelationMatrix apply(const GaussianChannel& ch, const CorrelationMatrix& g,
                        int t) {
  if (t < 0) throw std::invalid_argument("apply: t must be non-negative");
  if (ch.in_modes() != g.n_modes())
    throw std::invalid_argument("apply: channel/state dimension mismatch");
  if (t > 1 && ch.out_modes() != ch.in_modes())
    throw std::invalid_argument("apply: iterating a rectangular channel");
  Mat cur = g.mat();
  for (int s = 0; s < t; ++s) cur = ch.A + ch.B * cur * ch.B.transpose();
  cur = antisymmetrize(cur);
  return CorrelationMatrix(cur);
}

GaussianChannel compose(const GaussianChannel& second,
                        const GaussianChannel& first) {
  if (second.in_modes() != first.out_modes())
    throw std::invalid_argument("compose: channel dimensions do not chain");
  Mat a = second.A + second.B * first.A * second.B.transpose();
  a = antisymmetrize(a);
  return make_channel(a, second.B * first.B);
}

CorrelationMatrix apply_on_subsystem(const GaussianChannel& ch,
                                     const CorrelationMatrix& joint,
                                     int w_modes) {
  const int nv = joint.n_modes() - w_modes;
  if (nv != ch.in_modes())
    throw std::invalid_argument("apply_on_subsystem: dimension mismatch");
  const Mat& g = joint.mat();
  const Mat gw = g.topLeftCorner(w_modes, w_modes);
  const Mat gwv = g.topRightCorner(w_modes, nv);
  const Mat gv = g.bottomRightCorner(nv, nv);
  const int no = ch.out_modes();
  Mat out = Mat::Zero(w_modes + no, w_modes + no);
  out.topLeftCorner(w_modes, w_modes) = gw;
  out.topRightCorner(w_modes, no) = gwv * ch.B.transpose();
  out.bottomLeftCorner(no, w_modes) = -out.topRightCorner(w_modes, no).transpose();
  out.bottomRightCorner(no, no) = ch.A + ch.B * gv * ch.B.transpose();
  out = antisymmetrize(out);
  return CorrelationMatrix(out);
}

ModeDecomposition decompose_modes(const GaussianChannel& ch, double tol_unit) {
  if (ch.out_modes() != ch.in_modes())
    throw std::invalid_argument("decompose_modes: B must be square");
  const int n = ch.out_modes();
  ModeDecomposition dec;

  Eigen::EigenSolver<Mat> es(ch.B);
  const CVec evals = es.eigenvalues();
  const CMat evecs = es.eigenvectors();

  std::vector<int> preserved;
  for (int i = 0; i < n; ++i)
    if (std::abs(evals(i)) >= 1.0 - tol_unit) preserved.push_back(i);

  Mat spanning(n, 2 * static_cast<int>(preserved.size()));
  int cols = 0;
  for (int idx : preserved) {
    dec.unit_eigenvalues.push_back(evals(idx));
    const CVec v = evecs.col(idx);
    const Vec re = v.real();
    const Vec im = v.imag();
    if (re.norm() > 1e-12) spanning.col(cols++) = re.normalized();
    if (im.norm() > 1e-12) spanning.col(cols++) = im.normalized();
  }
  dec.q_u = orthonormal_span(spanning.leftCols(cols));
  if (dec.q_u.cols() != static_cast<Eigen::Index>(preserved.size()))
    throw std::runtime_error(
        "decompose_modes: preserved span rank does not match eigenvalue count");

  // Consequences of the CPTP condition for every unit-norm eigenvector.
  for (int idx : preserved) {
    const CVec v = evecs.col(idx);
    const double a_resid = (ch.A * v).norm();
    if (a_resid > kPreservedKernelTol) {
      std::ostringstream msg;
      msg << "decompose_modes: preserved eigenvector has A v residual "
          << a_resid << "; tol_unit likely too loose";
      throw std::runtime_error(msg.str());
    }
    const double btb_resid = (ch.B.transpose() * (ch.B * v) - v).norm();
    if (btb_resid > kLemmaResidTol * 10) {
      std::ostringstream msg;
      msg << "decompose_modes: preserved eigenvector has B^T B v - v residual "
          << btb_resid;
      throw std::runtime_error(msg.str());
    }
  }

  dec.q_d = orthonormal_complement(dec.q_u);
  dec.p_u = dec.q_u * dec.q_u.transpose();
  dec.p_d = dec.q_d * dec.q_d.transpose();
  dec.u = dec.q_u.transpose() * ch.B * dec.q_u;
  dec.a_d = dec.q_d.transpose() * ch.A * dec.q_d;
  dec.b_d = dec.q_d.transpose() * ch.B * dec.q_d;
  dec.r = dec.b_d.size() == 0 ? 0.0 : spectral_radius(dec.b_d);

  if (dec.preserved_dim() > 0) {
    const double orth =
        spectral_norm(dec.u.transpose() * dec.u -
                      Mat::Identity(dec.u.rows(), dec.u.cols()));
    if (orth > kLemmaResidTol)
      throw std::runtime_error(
          "decompose_modes: preserved-block evolution is not orthogonal");
  }
  return dec;
}

namespace {

// Gamma_d = A_d + B_d Gamma_d B_d^T via the vectorized linear system.
Mat solve_dissipative_fixed_point(const Mat& a_d, const Mat& b_d) {
  const Eigen::Index m = a_d.rows();
  if (m == 0) return Mat(0, 0);
  const Mat lhs = Mat::Identity(m * m, m * m) - kron(b_d, b_d);
  const Eigen::Map<const Vec> rhs(a_d.data(), m * m);
  Eigen::PartialPivLU<Mat> lu(lhs);
  const Vec x = lu.solve(rhs);
  if ((lhs * x - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm()))
    throw std::runtime_error(
        "steady_state: singular fixed-point solve; preserved mode "
        "misclassified as dissipative (r >= 1)");
  Mat g = Eigen::Map<const Mat>(x.data(), m, m);
  return antisymmetrize(g);
}

}  // namespace

CorrelationMatrix steady_state(const GaussianChannel& ch,
                               const ModeDecomposition& dec,
                               const CorrelationMatrix& gamma0) {
  if (ch.in_modes() != gamma0.n_modes())
    throw std::invalid_argument("steady_state: dimension mismatch");
  const Mat gamma_u0 = dec.q_u.transpose() * gamma0.mat() * dec.q_u;
  const Mat gamma_d = solve_dissipative_fixed_point(dec.a_d, dec.b_d);

  if (gamma_d.size() > 0) {
    const double resid =
        (gamma_d - (dec.a_d + dec.b_d * gamma_d * dec.b_d.transpose()))
            .cwiseAbs()
            .maxCoeff();
    if (resid > 1e-10)
      throw std::runtime_error("steady_state: fixed-point residual above 1e-10");
  }

  Mat full = dec.q_u * gamma_u0 * dec.q_u.transpose();
  if (gamma_d.size() > 0) full += dec.q_d * gamma_d * dec.q_d.transpose();
  full = antisymmetrize(full);
  return CorrelationMatrix(full);
}

ConvergenceFit convergence_rate(const GaussianChannel& ch,
                                const CorrelationMatrix& gamma0, int T) {
  const ModeDecomposition dec = decompose_modes(ch);
  const CorrelationMatrix gs = steady_state(ch, dec, gamma0);
  const Mat gamma_d_part =
      dec.q_d * (dec.q_d.transpose() * gs.mat() * dec.q_d) * dec.q_d.transpose();
  const Mat gamma_u0 = dec.q_u.transpose() * gamma0.mat() * dec.q_u;

  constexpr double kNoiseFloor = 1e-13;
  std::vector<double> ts, logs;
  Mat cur = gamma0.mat();
  Mat ut = Mat::Identity(dec.preserved_dim(), dec.preserved_dim());
  for (int t = 0; t <= T; ++t) {
    // Reference steady state at time t: the preserved block keeps rotating.
    Mat ref = gamma_d_part;
    if (dec.preserved_dim() > 0)
      ref += dec.q_u * (ut * gamma_u0 * ut.transpose()) * dec.q_u.transpose();
    const Mat diff = cur - ref;
    const double resid = spectral_norm(diff);
    if (resid > kNoiseFloor) {
      ts.push_back(static_cast<double>(t));
      logs.push_back(std::log(resid));
    }
    cur = ch.A + ch.B * cur * ch.B.transpose();
    if (dec.preserved_dim() > 0) ut = dec.u * ut;
  }

  ConvergenceFit fit;
  if (ts.size() < 2 || (ts.size() == 1 && ts[0] == 0.0)) {
    fit.instant = true;
    return fit;
  }
  if (ts.size() < 10)
    throw std::invalid_argument(
        "convergence_rate: fewer than 10 residuals above the noise floor; "
        "increase T");
  // Drop the early transient (polynomial prefactor); fit the tail.
  const std::size_t skip = ts.size() / 5;
  std::vector<double> tx(ts.begin() + static_cast<long>(skip), ts.end());
  std::vector<double> ty(logs.begin() + static_cast<long>(skip), logs.end());
  const LineFit lf = fit_line(tx, ty);
  fit.slope = lf.slope;
  fit.n_points = lf.n_points;
  return fit;
}

GaussianChannel random_cptp_channel(Rng& rng, int n_modes, double s_max) {
  if (n_modes <= 0 || n_modes % 2 != 0)
    throw std::invalid_argument("random_cptp_channel: even n_modes required");
  std::uniform_real_distribution<double> unif(0.0, s_max);
  const Mat o1 = random_orthogonal(rng, n_modes);
  const Mat o2 = random_orthogonal(rng, n_modes);
  Vec s(n_modes);
  for (int i = 0; i < n_modes; ++i) s(i) = unif(rng);
  const Mat b = o1 * s.asDiagonal() * o2.transpose();

  Mat a = random_antisymmetric(rng, n_modes);
  if (spectral_norm(a) > 0) a /= spectral_norm(a);
  // Shrink A until the joint CPTP inequality holds with margin.
  for (int iter = 0; iter < 200; ++iter) {
    if (validate_channel(a, b).cptp_excess <= 0.0) break;
    a *= 0.8;
  }
  return make_channel(a, b);
}

CorrelationMatrix random_state(Rng& rng, int n_modes, double fill) {
  Mat g = random_antisymmetric(rng, n_modes);
  const double norm = spectral_norm(g);
  if (norm > 0) g *= fill / norm;
  return CorrelationMatrix(g);
}

}  // namespace gfchan
