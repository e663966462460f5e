#include "gfchan/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gfchan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double max_eig_excess(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() - 1.0;
}

}  // namespace

MomentumChannel::MomentumChannel(std::vector<double> k_grid,
                                 std::vector<CMat> a_k, std::vector<CMat> b_k)
    : k_grid_(std::move(k_grid)), a_k_(std::move(a_k)), b_k_(std::move(b_k)) {
  const std::size_t L = k_grid_.size();
  if (a_k_.size() != L || b_k_.size() != L || L == 0)
    throw std::invalid_argument("MomentumChannel: grid/block count mismatch");
  for (std::size_t i = 0; i < L; ++i) {
    const CMat& a = a_k_[i];
    const CMat& b = b_k_[i];
    const double ah = antihermiticity_defect(a);
    if (ah > kCptpTol)
      throw std::invalid_argument(
          "MomentumChannel: A_k not anti-hermitian, defect " +
          std::to_string(ah));
    const double ex1 = max_eig_excess(a.adjoint() * a + b * b.adjoint());
    const double ex2 = max_eig_excess(b.adjoint() * b);
    if (ex1 > kCptpTol || ex2 > kCptpTol)
      throw std::invalid_argument("MomentumChannel: per-k CPTP violated, excess " +
                                  std::to_string(std::max(ex1, ex2)));
  }
  const int L_int = static_cast<int>(L);
  for (int i = 0; i < L_int; ++i) {
    const int j = (L_int - i) % L_int;
    const double da = (a_k_[static_cast<std::size_t>(i)].conjugate() -
                       a_k_[static_cast<std::size_t>(j)])
                          .cwiseAbs()
                          .maxCoeff();
    const double db = (b_k_[static_cast<std::size_t>(i)].conjugate() -
                       b_k_[static_cast<std::size_t>(j)])
                          .cwiseAbs()
                          .maxCoeff();
    if (std::max(da, db) > kRealityTol)
      throw std::invalid_argument(
          "MomentumChannel: reality constraint violated, defect " +
          std::to_string(std::max(da, db)));
  }
}

MomentumChannel build_brickwall(const GaussianChannel& two_site, int L) {
  if (L < 2 || L % 2 != 0)
    throw std::invalid_argument(
        "build_brickwall: L must be even (reality constraint untestable)");
  const int dim = two_site.out_modes();
  if (two_site.in_modes() != dim || dim % 2 != 0)
    throw std::invalid_argument(
        "build_brickwall: two-site channel must be square with an even "
        "number of modes");
  if (!validate_channel(two_site.A, two_site.B).pass)
    throw std::invalid_argument("build_brickwall: two-site channel is not CPTP");
  const int n = dim / 2;  // Majoranas per site

  const CMat a0 = two_site.A.cast<Cplx>();
  const CMat b0 = two_site.B.cast<Cplx>();

  std::vector<double> ks(static_cast<std::size_t>(L));
  std::vector<CMat> ak(static_cast<std::size_t>(L)), bk(static_cast<std::size_t>(L));
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    ks[static_cast<std::size_t>(m)] = k;
    CMat uk = CMat::Zero(dim, dim);
    uk.topRightCorner(n, n) = CMat::Identity(n, n);
    uk.bottomLeftCorner(n, n) = std::polar(1.0, -k) * CMat::Identity(n, n);
    const CMat shifted_b = uk * b0 * uk.adjoint();
    CMat a = uk * a0 * uk.adjoint() + shifted_b * a0 * shifted_b.adjoint();
    a = 0.5 * (a - CMat(a.adjoint()));  // scrub roundoff
    ak[static_cast<std::size_t>(m)] = a;
    bk[static_cast<std::size_t>(m)] = shifted_b * b0;
  }
  return MomentumChannel(std::move(ks), std::move(ak), std::move(bk));
}

int BandClassification::n_exceptional() const {
  int n = 0;
  for (bool e : exceptional)
    if (e) ++n;
  return n;
}

BandClassification classify_bands(const MomentumChannel& mc, double tol_unit) {
  const int L = mc.n_k();
  const int dim = mc.cell_modes();
  BandClassification out;
  out.k_grid = mc.k_grid();
  out.preserved_dim.resize(static_cast<std::size_t>(L));
  out.exceptional.assign(static_cast<std::size_t>(L), false);
  out.q_u.resize(static_cast<std::size_t>(L));
  out.q_d.resize(static_cast<std::size_t>(L));
  out.r_k.resize(static_cast<std::size_t>(L));

  // Preserved eigenvectors per momentum, kept for band matching.
  std::vector<std::vector<CVec>> pvecs(static_cast<std::size_t>(L));
  std::vector<std::vector<Cplx>> pvals(static_cast<std::size_t>(L));

  for (int i = 0; i < L; ++i) {
    Eigen::ComplexEigenSolver<CMat> es(mc.b(i));
    std::vector<int> pres;
    for (int j = 0; j < dim; ++j)
      if (std::abs(es.eigenvalues()(j)) >= 1.0 - tol_unit) pres.push_back(j);

    CMat span(dim, static_cast<int>(pres.size()));
    int col = 0;
    for (int j : pres) {
      const CVec v = es.eigenvectors().col(j);
      span.col(col++) = v;
      pvecs[static_cast<std::size_t>(i)].push_back(v);
      pvals[static_cast<std::size_t>(i)].push_back(es.eigenvalues()(j));
      const double a_resid = (mc.a(i) * v).norm();
      if (a_resid > kPreservedKernelTol) {
        std::ostringstream msg;
        msg << "classify_bands: preserved eigenvector at k index " << i
            << " has A_k v residual " << a_resid
            << "; tol_unit likely too loose";
        throw std::runtime_error(msg.str());
      }
    }
    out.q_u[static_cast<std::size_t>(i)] = orthonormal_span(span);
    if (out.q_u[static_cast<std::size_t>(i)].cols() !=
        static_cast<Eigen::Index>(pres.size()))
      throw std::runtime_error(
          "classify_bands: preserved span rank does not match count");
    out.q_d[static_cast<std::size_t>(i)] =
        orthonormal_complement(out.q_u[static_cast<std::size_t>(i)]);
    out.preserved_dim[static_cast<std::size_t>(i)] = static_cast<int>(pres.size());
    const CMat bd = out.q_d[static_cast<std::size_t>(i)].adjoint() * mc.b(i) *
                    out.q_d[static_cast<std::size_t>(i)];
    out.r_k[static_cast<std::size_t>(i)] = spectral_radius(bd);
  }

  // Generic preserved dimension by majority vote.
  std::vector<int> counts(static_cast<std::size_t>(dim + 1), 0);
  for (int d : out.preserved_dim) ++counts[static_cast<std::size_t>(d)];
  out.generic_preserved_dim = static_cast<int>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());

  int n_exc = 0;
  for (int i = 0; i < L; ++i) {
    out.exceptional[static_cast<std::size_t>(i)] =
        out.preserved_dim[static_cast<std::size_t>(i)] != out.generic_preserved_dim;
    if (out.exceptional[static_cast<std::size_t>(i)]) ++n_exc;
  }
  if (n_exc > static_cast<int>(std::sqrt(static_cast<double>(L))))
    throw std::runtime_error(
        "classify_bands: classification unstable, more than sqrt(L) "
        "exceptional momenta");
  for (int i = 0; i < L; ++i) {
    const int j = (i + 1) % L;
    if (out.exceptional[static_cast<std::size_t>(i)] &&
        out.exceptional[static_cast<std::size_t>(j)])
      throw std::runtime_error(
          "classify_bands: two adjacent exceptional momenta; refine the grid");
  }

  out.r = 0.0;
  for (int i = 0; i < L; ++i)
    if (!out.exceptional[static_cast<std::size_t>(i)])
      out.r = std::max(out.r, out.r_k[static_cast<std::size_t>(i)]);

  // Thread bands through the grid by maximum eigenvector overlap.
  const int nb = out.generic_preserved_dim;
  if (nb > 0) {
    out.bands.assign(static_cast<std::size_t>(nb),
                     std::vector<Cplx>(static_cast<std::size_t>(L),
                                       Cplx(kNaN, kNaN)));
    int start = 0;
    while (start < L && out.exceptional[static_cast<std::size_t>(start)]) ++start;
    std::vector<CVec> prev = pvecs[static_cast<std::size_t>(start)];
    for (int b = 0; b < nb; ++b)
      out.bands[static_cast<std::size_t>(b)][static_cast<std::size_t>(start)] =
          pvals[static_cast<std::size_t>(start)][static_cast<std::size_t>(b)];
    std::vector<int> order(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) order[static_cast<std::size_t>(b)] = b;

    for (int step = 1; step <= L; ++step) {
      const int i = (start + step) % L;
      if (out.exceptional[static_cast<std::size_t>(i)]) continue;
      const auto& vecs = pvecs[static_cast<std::size_t>(i)];
      std::vector<int> assign(static_cast<std::size_t>(nb), -1);
      std::vector<bool> used(static_cast<std::size_t>(nb), false);
      for (int b = 0; b < nb; ++b) {
        double best = -1.0;
        int best_j = -1;
        int n_candidates = 0;
        for (int j = 0; j < nb; ++j) {
          if (used[static_cast<std::size_t>(j)]) continue;
          const double ov = std::abs(
              prev[static_cast<std::size_t>(order[static_cast<std::size_t>(b)])]
                  .dot(vecs[static_cast<std::size_t>(j)]));
          if (ov > 0.7) ++n_candidates;
          if (ov > best) {
            best = ov;
            best_j = j;
          }
        }
        if (n_candidates > 1) {
          std::ostringstream msg;
          msg << "band overlap ambiguity at k index " << i << ": " << n_candidates
              << " candidates above 0.7 for band " << b;
          out.warnings.push_back(msg.str());
        }
        if (best < 0.7) {
          std::ostringstream msg;
          msg << "band overlap below 0.7 at k index " << i << " for band " << b;
          out.warnings.push_back(msg.str());
        }
        assign[static_cast<std::size_t>(b)] = best_j;
        used[static_cast<std::size_t>(best_j)] = true;
      }
      std::vector<int> next_order(static_cast<std::size_t>(nb));
      for (int b = 0; b < nb; ++b) {
        next_order[static_cast<std::size_t>(b)] = assign[static_cast<std::size_t>(b)];
        if (step < L)
          out.bands[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] =
              pvals[static_cast<std::size_t>(i)]
                   [static_cast<std::size_t>(assign[static_cast<std::size_t>(b)])];
      }
      order = next_order;
      prev = vecs;
    }
  }
  return out;
}

MomentumSteadyState steady_state_k(const MomentumChannel& mc,
                                   const BandClassification& bands) {
  const int L = mc.n_k();
  const int dim = mc.cell_modes();
  MomentumSteadyState st;
  st.k_grid = mc.k_grid();
  st.gamma_d.assign(static_cast<std::size_t>(L), CMat::Zero(dim, dim));
  st.skip.assign(static_cast<std::size_t>(L), false);

  for (int i = 0; i < L; ++i) {
    if (bands.exceptional[static_cast<std::size_t>(i)]) {
      st.skip[static_cast<std::size_t>(i)] = true;
      continue;
    }
    const CMat& qd = bands.q_d[static_cast<std::size_t>(i)];
    const Eigen::Index m = qd.cols();
    if (m == 0) continue;
    const CMat a_dd = qd.adjoint() * mc.a(i) * qd;
    const CMat b_dd = qd.adjoint() * mc.b(i) * qd;
    const CMat lhs =
        CMat::Identity(m * m, m * m) - kron(b_dd.conjugate(), b_dd);
    const Eigen::Map<const CVec> rhs(a_dd.data(), m * m);
    Eigen::PartialPivLU<CMat> lu(lhs);
    const CVec x = lu.solve(rhs);
    if ((lhs * x - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm()))
      throw std::runtime_error(
          "steady_state_k: singular solve at a non-exceptional momentum; "
          "classification error");
    CMat g = Eigen::Map<const CMat>(x.data(), m, m);
    g = 0.5 * (g - CMat(g.adjoint()));
    const double resid =
        (g - (a_dd + b_dd * g * b_dd.adjoint())).cwiseAbs().maxCoeff();
    if (resid > 1e-10)
      throw std::runtime_error("steady_state_k: fixed-point residual above 1e-10");
    st.gamma_d[static_cast<std::size_t>(i)] = qd * g * qd.adjoint();
  }
  return st;
}

bool BulkSpectrum::any_chiral() const {
  for (const auto& r : reports)
    if (r.chiral) return true;
  return false;
}

BulkSpectrum bulk_spectrum(const MomentumSteadyState& st,
                           const BandClassification& bands,
                           double jump_tol_factor, double jump_tol_floor) {
  const int L = static_cast<int>(st.k_grid.size());
  BulkSpectrum out;
  out.k_grid = st.k_grid;
  out.excluded.assign(static_cast<std::size_t>(L), false);

  const int dim =
      st.gamma_d.empty() ? 0 : static_cast<int>(st.gamma_d[0].rows());
  const int nb = dim - bands.generic_preserved_dim;
  if (nb <= 0) return out;
  out.branches.assign(static_cast<std::size_t>(nb),
                      std::vector<double>(static_cast<std::size_t>(L), kNaN));
  out.lambdas.assign(static_cast<std::size_t>(nb),
                     std::vector<double>(static_cast<std::size_t>(L), kNaN));
  out.reports.assign(static_cast<std::size_t>(nb), BranchReport{});

  // Per-k eigenpairs of i Gamma on the dissipative subspace, embedded back
  // into the full cell space for overlap matching.
  std::vector<std::vector<double>> mu(static_cast<std::size_t>(L));
  std::vector<std::vector<CVec>> vecs(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) {
    if (st.skip[static_cast<std::size_t>(i)]) {
      out.excluded[static_cast<std::size_t>(i)] = true;
      continue;
    }
    const CMat& qd = bands.q_d[static_cast<std::size_t>(i)];
    const CMat herm = Cplx(0, 1) * (qd.adjoint() *
                                    st.gamma_d[static_cast<std::size_t>(i)] * qd);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (herm + CMat(herm.adjoint())));
    for (int j = 0; j < nb; ++j) {
      mu[static_cast<std::size_t>(i)].push_back(es.eigenvalues()(j));
      vecs[static_cast<std::size_t>(i)].push_back(qd * es.eigenvectors().col(j));
    }
  }

  auto eps_of_mu = [](double m) {
    if (m >= 1.0 - kClampTol) return -kInf;
    if (m <= -1.0 + kClampTol) return kInf;
    return std::log1p(-m) - std::log1p(m);
  };

  int start = 0;
  while (start < L && st.skip[static_cast<std::size_t>(start)]) ++start;
  if (start == L) throw std::runtime_error("bulk_spectrum: all momenta skipped");

  std::vector<int> order(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) order[static_cast<std::size_t>(b)] = b;
  auto emit = [&](int i, const std::vector<int>& ord) {
    for (int b = 0; b < nb; ++b) {
      const double m =
          mu[static_cast<std::size_t>(i)]
            [static_cast<std::size_t>(ord[static_cast<std::size_t>(b)])];
      out.branches[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] =
          eps_of_mu(m);
      out.lambdas[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] =
          std::abs(m);
      if (std::abs(m) >= 1.0 - kClampTol) {
        out.excluded[static_cast<std::size_t>(i)] = true;  // removable clamp
        ++out.reports[static_cast<std::size_t>(b)].n_clamped;
      }
    }
  };
  emit(start, order);

  std::vector<CVec> prev = vecs[static_cast<std::size_t>(start)];
  std::vector<int> prev_order = order;
  for (int step = 1; step < L; ++step) {
    const int i = (start + step) % L;
    if (st.skip[static_cast<std::size_t>(i)]) continue;
    const auto& cur = vecs[static_cast<std::size_t>(i)];
    std::vector<int> assign(static_cast<std::size_t>(nb), -1);
    std::vector<bool> used(static_cast<std::size_t>(nb), false);
    for (int b = 0; b < nb; ++b) {
      const int src = prev_order[static_cast<std::size_t>(b)];
      double best = -1.0;
      int best_j = -1;
      int n_candidates = 0;
      for (int j = 0; j < nb; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double ov = std::abs(
            prev[static_cast<std::size_t>(src)].dot(cur[static_cast<std::size_t>(j)]));
        if (ov > 0.7) ++n_candidates;
        if (ov > best) {
          best = ov;
          best_j = j;
        }
      }
      if (n_candidates > 1) {
        std::ostringstream msg;
        msg << "branch matching ambiguity near k = " << out.k_grid[static_cast<std::size_t>(i)]
            << ": " << n_candidates << " overlaps above 0.7 for branch " << b;
        out.warnings.push_back(msg.str());
      }
      assign[static_cast<std::size_t>(b)] = best_j;
      used[static_cast<std::size_t>(best_j)] = true;
    }
    emit(i, assign);
    prev = cur;
    prev_order = assign;
  }

  // Continuity statistics over adjacent non-excluded momenta, periodic.
  for (int b = 0; b < nb; ++b) {
    auto& rep = out.reports[static_cast<std::size_t>(b)];
    const auto& eps = out.branches[static_cast<std::size_t>(b)];
    std::vector<double> jumps;
    std::vector<std::pair<double, double>> crossings;
    for (int i = 0; i < L; ++i) {
      const int j = (i + 1) % L;
      if (out.excluded[static_cast<std::size_t>(i)] ||
          out.excluded[static_cast<std::size_t>(j)])
        continue;
      const double e0 = eps[static_cast<std::size_t>(i)];
      const double e1 = eps[static_cast<std::size_t>(j)];
      if (!std::isfinite(e0) || !std::isfinite(e1)) continue;
      const double jump = std::abs(e1 - e0);
      jumps.push_back(jump);
      if (e0 * e1 < 0.0) crossings.emplace_back(jump, 0.0);
    }
    if (jumps.empty()) continue;
    rep.max_jump = *std::max_element(jumps.begin(), jumps.end());
    std::vector<double> sorted = jumps;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    rep.jump_tol = std::max(jump_tol_factor * median, jump_tol_floor);
    for (const auto& c : crossings)
      if (c.first > rep.jump_tol) rep.chiral = true;
  }
  return out;
}

DecayAnalysis realspace_decay(const std::vector<double>& k_grid,
                              const std::vector<CMat>& blocks) {
  const int L = static_cast<int>(k_grid.size());
  if (L < 8) throw std::invalid_argument("realspace_decay: grid too small");
  DecayAnalysis out;

  // Inverse transform, one displacement at a time.
  const int cm = static_cast<int>(blocks[0].rows());
  const int d_max = L / 2;
  for (int d = 1; d <= d_max; ++d) {
    CMat g = CMat::Zero(cm, cm);
    for (int m = 0; m < L; ++m)
      g += std::polar(1.0, -k_grid[static_cast<std::size_t>(m)] * d) *
           blocks[static_cast<std::size_t>(m)];
    g /= static_cast<double>(L);
    out.distance.push_back(static_cast<double>(d));
    out.max_abs.push_back(g.cwiseAbs().maxCoeff());
  }

  // Fit window [2, L/4], only distances with signal.
  std::vector<double> xs, ys;
  for (int d = 2; d <= std::max(3, L / 4); ++d) {
    const double c = out.max_abs[static_cast<std::size_t>(d - 1)];
    if (c < 1e-14) break;
    xs.push_back(static_cast<double>(d));
    ys.push_back(std::log(c));
  }
  if (xs.size() < 2) {
    out.ultra_local = true;
    out.xi_fit = 0.0;
    return out;
  }
  out.fit = fit_line(xs, ys);
  out.xi_fit = out.fit.slope < 0 ? -1.0 / out.fit.slope : kInf;
  return out;
}

DecayAnalysis realspace_decay(const MomentumCorrelation& mc) {
  return realspace_decay(mc.k_grid(), mc.blocks());
}

DecayAnalysis realspace_decay(const MomentumSteadyState& st) {
  const int L = static_cast<int>(st.k_grid.size());
  std::vector<CMat> blocks = st.gamma_d;
  for (int i = 0; i < L; ++i) {
    if (!st.skip[static_cast<std::size_t>(i)]) continue;
    // A removable singularity: take the two-sided limit from the neighbors.
    int lo = (i + L - 1) % L, hi = (i + 1) % L;
    blocks[static_cast<std::size_t>(i)] =
        0.5 * (st.gamma_d[static_cast<std::size_t>(lo)] +
               st.gamma_d[static_cast<std::size_t>(hi)]);
  }
  return realspace_decay(st.k_grid, blocks);
}

double correlation_length_bound(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return kInf;
  return 1.0 / std::log(1.0 / r);
}

}  // namespace gfchan
