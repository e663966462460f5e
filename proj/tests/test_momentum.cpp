#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "gfchan/momentum.hpp"

using namespace gfchan;

namespace {

Mat pair_block(double a) {
  Mat m(2, 2);
  m << 0, a, -a, 0;
  return m;
}

// Two-site right-translation swap channel, one Majorana per site.
GaussianChannel translation_channel() {
  Mat b(2, 2);
  b << 0, 1, 1, 0;
  return make_channel(Mat::Zero(2, 2), b);
}

// Real-space brick-wall period on an L-cell ring, built layer by layer:
// the odd layer acts inside cells, the even layer on the bonds between
// them. Serves as an independent cross-check of the momentum formulas.
GaussianChannel realspace_brickwall(const GaussianChannel& two_site, int L) {
  const int dim = two_site.out_modes();
  const int n = dim / 2;
  const int total = L * dim;
  Mat a_odd = Mat::Zero(total, total), b_odd = Mat::Zero(total, total);
  Mat a_even = Mat::Zero(total, total), b_even = Mat::Zero(total, total);
  for (int x = 0; x < L; ++x) {
    a_odd.block(x * dim, x * dim, dim, dim) = two_site.A;
    b_odd.block(x * dim, x * dim, dim, dim) = two_site.B;
  }
  // Even bonds couple site b of cell x with site a of cell x+1.
  for (int x = 0; x < L; ++x) {
    const int xp = (x + 1) % L;
    std::vector<int> idx(static_cast<std::size_t>(dim));
    for (int i = 0; i < n; ++i) {
      idx[static_cast<std::size_t>(i)] = x * dim + n + i;       // site b of cell x
      idx[static_cast<std::size_t>(n + i)] = xp * dim + i;      // site a of cell x+1
    }
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        a_even(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) =
            two_site.A(i, j);
        b_even(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) =
            two_site.B(i, j);
      }
  }
  return compose(make_channel(a_even, b_even), make_channel(a_odd, b_odd));
}

MomentumChannel synthetic_discrete_exception(int L) {
  // |b_k| = 1 - (1 - cos k)/2 touches 1 only at k = 0.
  std::vector<double> ks;
  std::vector<CMat> ak, bk;
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    const double b = 1.0 - 0.5 * (1.0 - std::cos(k));
    const double a = 0.3 * std::sqrt(std::max(0.0, 1.0 - b * b));
    ks.push_back(k);
    bk.push_back(b * CMat::Identity(2, 2));
    CMat aj(2, 2);
    aj << 0, a, -a, 0;
    ak.push_back(aj);
  }
  return MomentumChannel(ks, ak, bk);
}

}  // namespace

TEST_CASE("brick-wall channel of the identity two-site channel is identity") {
  const GaussianChannel id{Mat::Zero(2, 2), Mat::Identity(2, 2)};
  const MomentumChannel mc = build_brickwall(id, 8);
  for (int i = 0; i < mc.n_k(); ++i) {
    CHECK(mc.a(i).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((mc.b(i) - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("brick-wall of a reset channel resets every momentum") {
  const GaussianChannel reset = make_channel(
      (Mat(4, 4) << 0, 0.4, 0, 0, -0.4, 0, 0, 0, 0, 0, 0, 0.2, 0, 0, -0.2, 0)
          .finished(),
      Mat::Zero(4, 4));
  const MomentumChannel mc = build_brickwall(reset, 8);
  for (int i = 0; i < mc.n_k(); ++i)
    CHECK(mc.b(i).cwiseAbs().maxCoeff() < 1e-14);
  // One period already lands on the steady state.
  const BandClassification bands = classify_bands(mc);
  CHECK(bands.generic_preserved_dim == 0);
}

TEST_CASE("translation channel winds a unit-modulus band") {
  const MomentumChannel mc = build_brickwall(translation_channel(), 16);
  const BandClassification bands = classify_bands(mc);
  CHECK(bands.generic_preserved_dim == 2);
  CHECK(bands.n_exceptional() == 0);
  REQUIRE(bands.bands.size() == 2);
  // The two bands carry phases e^{+ik} and e^{-ik}.
  for (int i = 0; i < mc.n_k(); ++i) {
    const double k = mc.k_grid()[static_cast<std::size_t>(i)];
    for (const auto& band : bands.bands) {
      const Cplx b = band[static_cast<std::size_t>(i)];
      CHECK(std::abs(b) == doctest::Approx(1.0).epsilon(1e-10));
      const bool winds_up = std::abs(b - std::polar(1.0, k)) < 1e-9;
      const bool winds_down = std::abs(b - std::polar(1.0, -k)) < 1e-9;
      CHECK((winds_up || winds_down));
    }
  }
}

TEST_CASE("synthetic channel with a discrete preserved momentum") {
  const MomentumChannel mc = synthetic_discrete_exception(64);
  const BandClassification bands = classify_bands(mc);
  CHECK(bands.generic_preserved_dim == 0);
  CHECK(bands.n_exceptional() == 1);
  CHECK(bands.exceptional[0]);  // k = 0

  const MomentumSteadyState st = steady_state_k(mc, bands);
  CHECK(st.skip[0]);
  for (int i = 1; i < mc.n_k(); ++i) CHECK_FALSE(st.skip[static_cast<std::size_t>(i)]);
}

TEST_CASE("steady state per momentum: reset and scalar relaxation") {
  // B_k = 0 gives Gamma_k = A_k.
  std::vector<double> ks;
  std::vector<CMat> ak, bk;
  const int L = 16;
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    ks.push_back(k);
    CMat a(2, 2);
    const double v = 0.5 + 0.2 * std::cos(k);
    a << 0, v, -v, 0;
    ak.push_back(a);
    bk.push_back(CMat::Zero(2, 2));
  }
  const MomentumChannel mc(ks, ak, bk);
  const BandClassification bands = classify_bands(mc);
  const MomentumSteadyState st = steady_state_k(mc, bands);
  for (int i = 0; i < L; ++i)
    CHECK((st.gamma_d[static_cast<std::size_t>(i)] - ak[static_cast<std::size_t>(i)])
              .cwiseAbs()
              .maxCoeff() < 1e-12);

  // Scalar dissipative mode b_k = 0.5 e^{-ik}: |Gamma_k| = a/(1 - 0.25).
  std::vector<CMat> ak2, bk2;
  const double a0 = 0.3;
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    const CMat b = 0.5 * std::polar(1.0, -k) * CMat::Identity(2, 2);
    CMat a(2, 2);
    a << 0, a0, -a0, 0;
    ak2.push_back(a);
    bk2.push_back(b);
  }
  const MomentumChannel mc2(ks, ak2, bk2);
  const BandClassification bands2 = classify_bands(mc2);
  const MomentumSteadyState st2 = steady_state_k(mc2, bands2);
  for (int i = 0; i < L; ++i) {
    // B_k is 0.5 x rotation, so B Gamma B^dag = 0.25 Gamma for the
    // rotation-invariant fixed point: Gamma = a/(1 - 0.25) J.
    const CMat& g = st2.gamma_d[static_cast<std::size_t>(i)];
    CHECK(std::abs(g(0, 1)) == doctest::Approx(a0 / 0.75).epsilon(1e-10));
  }
}

TEST_CASE("per-k steady state agrees with the real-space construction") {
  Rng rng(41);
  for (int trial = 0; trial < 4; ++trial) {
    const GaussianChannel two_site = random_cptp_channel(rng, 4, 0.85);
    const int L = 8;
    const MomentumChannel mc = build_brickwall(two_site, L);
    const BandClassification bands = classify_bands(mc);
    REQUIRE(bands.generic_preserved_dim == 0);
    const MomentumSteadyState st = steady_state_k(mc, bands);

    // Real-space route: one brick-wall period on the ring, steady state from
    // the maximally mixed initial state, then Fourier blocks.
    const GaussianChannel rs = realspace_brickwall(two_site, L);
    const CorrelationMatrix gs = steady_state(
        rs, decompose_modes(rs), CorrelationMatrix(Mat::Zero(4 * L, 4 * L)));
    const MomentumCorrelation gk = fourier_blocks(gs, 4);

    // The two routes label momenta with opposite orientation.
    for (int i = 0; i < L; ++i) {
      const int j = (L - i) % L;
      const double dev = (st.gamma_d[static_cast<std::size_t>(i)] -
                          gk.block(j))
                             .cwiseAbs()
                             .maxCoeff();
      CHECK(dev < 1e-8);
    }
  }
}

TEST_CASE("bulk spectrum of the zero steady state is flat") {
  std::vector<double> ks;
  std::vector<CMat> ak, bk;
  const int L = 16;
  for (int m = 0; m < L; ++m) {
    ks.push_back(2.0 * M_PI * m / L);
    ak.push_back(CMat::Zero(2, 2));
    bk.push_back(CMat::Zero(2, 2));
  }
  const MomentumChannel mc(ks, ak, bk);
  const BandClassification bands = classify_bands(mc);
  const BulkSpectrum spec = bulk_spectrum(steady_state_k(mc, bands), bands);
  REQUIRE(spec.branches.size() == 2);
  for (const auto& branch : spec.branches)
    for (double e : branch) CHECK(e == doctest::Approx(0.0));
  for (const auto& rep : spec.reports) {
    CHECK(rep.max_jump == doctest::Approx(0.0));
    CHECK_FALSE(rep.chiral);
  }
}

TEST_CASE("synthetic sign discontinuity is flagged as chiral") {
  // Gamma_k = i tanh(s(k)) diag(1, -1) with s an odd sawtooth jumping at
  // k = +-pi/2; with L not a multiple of 4 the jumps fall between grid
  // points. Detector check only; no local channel generates this.
  const int L = 62;
  std::vector<double> ks;
  std::vector<CMat> ak, bk;
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    ks.push_back(k);
    double kappa = k > M_PI ? k - 2.0 * M_PI : k;  // fold to (-pi, pi]
    double s = kappa;
    if (kappa > M_PI / 2) s = kappa - M_PI;
    if (kappa < -M_PI / 2) s = kappa + M_PI;
    const double t = std::tanh(s);
    CMat a = CMat::Zero(2, 2);
    a(0, 0) = Cplx(0, t);
    a(1, 1) = Cplx(0, -t);
    ak.push_back(a);
    bk.push_back(CMat::Zero(2, 2));
  }
  const MomentumChannel mc(ks, ak, bk);
  const BandClassification bands = classify_bands(mc);
  const BulkSpectrum spec = bulk_spectrum(steady_state_k(mc, bands), bands);
  CHECK(spec.any_chiral());
}

TEST_CASE("random brick-wall channels have continuous non-chiral spectra") {
  Rng rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    const GaussianChannel two_site = random_cptp_channel(rng, 4, 0.9);
    const MomentumChannel mc = build_brickwall(two_site, 128);
    const BandClassification bands = classify_bands(mc);
    const BulkSpectrum spec = bulk_spectrum(steady_state_k(mc, bands), bands);
    CHECK_FALSE(spec.any_chiral());

    // Antisymmetry under k -> -k: the eigenvalue sets negate.
    const int L = 128;
    for (int i = 1; i < L / 2; ++i) {
      std::vector<double> here, mirror;
      for (const auto& branch : spec.branches) {
        here.push_back(branch[static_cast<std::size_t>(i)]);
        mirror.push_back(-branch[static_cast<std::size_t>(L - i)]);
      }
      std::sort(here.begin(), here.end());
      std::sort(mirror.begin(), mirror.end());
      for (std::size_t b = 0; b < here.size(); ++b)
        CHECK(here[b] == doctest::Approx(mirror[b]).epsilon(1e-8));
    }
  }
}

TEST_CASE("grid refinement leaves shared momenta unchanged") {
  Rng rng(53);
  const GaussianChannel two_site = random_cptp_channel(rng, 4, 0.9);
  const MomentumChannel coarse = build_brickwall(two_site, 64);
  const MomentumChannel fine = build_brickwall(two_site, 128);
  const BandClassification cb = classify_bands(coarse);
  const BandClassification fb = classify_bands(fine);
  const BulkSpectrum cs = bulk_spectrum(steady_state_k(coarse, cb), cb);
  const BulkSpectrum fs = bulk_spectrum(steady_state_k(fine, fb), fb);
  for (int i = 0; i < 64; ++i) {
    std::vector<double> a, b;
    for (const auto& branch : cs.branches) a.push_back(branch[static_cast<std::size_t>(i)]);
    for (const auto& branch : fs.branches) b.push_back(branch[static_cast<std::size_t>(2 * i)]);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t j = 0; j < a.size(); ++j)
      CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-9));
  }
}

TEST_CASE("real-space decay: analytic geometric tail") {
  // Gamma_k with off-diagonal 0.05/(1 - 0.9 e^{ik}) decays as 0.9^d, so
  // xi = -1/log(0.9).
  const int L = 512;
  std::vector<double> ks;
  std::vector<CMat> blocks;
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    ks.push_back(k);
    const Cplx g = 0.05 / (1.0 - 0.9 * std::polar(1.0, k));
    CMat blk = CMat::Zero(2, 2);
    blk(0, 1) = g;
    blk(1, 0) = -std::conj(g);
    blocks.push_back(blk);
  }
  const DecayAnalysis decay = realspace_decay(ks, blocks);
  const double xi_exact = -1.0 / std::log(0.9);
  CHECK(decay.xi_fit == doctest::Approx(xi_exact).epsilon(0.05));
}

TEST_CASE("support at distance one only is ultra-local") {
  const int L = 64;
  std::vector<double> ks;
  std::vector<CMat> blocks;
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * M_PI * m / L;
    ks.push_back(k);
    CMat blk = CMat::Zero(2, 2);
    blk(0, 1) = 0.3 * std::polar(1.0, k);
    blk(1, 0) = -std::conj(blk(0, 1));
    blocks.push_back(blk);
  }
  const DecayAnalysis decay = realspace_decay(ks, blocks);
  CHECK(decay.ultra_local);
  CHECK(decay.xi_fit == doctest::Approx(0.0));
}

TEST_CASE("random brick-wall decay respects the spectral-radius bound") {
  Rng rng(59);
  int tested = 0;
  while (tested < 5) {
    const GaussianChannel two_site = random_cptp_channel(rng, 4, 0.9);
    const MomentumChannel mc = build_brickwall(two_site, 256);
    const BandClassification bands = classify_bands(mc);
    if (bands.generic_preserved_dim != 0) continue;
    const DecayAnalysis decay = realspace_decay(steady_state_k(mc, bands));
    if (decay.ultra_local) {
      ++tested;
      continue;
    }
    const double bound = correlation_length_bound(bands.r);
    CHECK(decay.xi_fit <= 1.05 * bound + 1e-9);
    ++tested;
  }
}
