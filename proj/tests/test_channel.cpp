#include <cmath>
#include <random>

#include "doctest.h"
#include "gfchan/channel.hpp"

using namespace gfchan;

namespace {

Mat pair_block(double a) {
  Mat m(2, 2);
  m << 0, a, -a, 0;
  return m;
}

// Channel with a planted preserved sector: B restricted to it is a rotation,
// the complement carries a generic dissipative CPTP pair.
GaussianChannel planted_channel(Rng& rng, int n_pres_pairs, int n_diss,
                                double theta, double s_max) {
  const int np = 2 * n_pres_pairs;
  const int n = np + n_diss;
  Mat b = Mat::Zero(n, n);
  for (int p = 0; p < n_pres_pairs; ++p) {
    b(2 * p, 2 * p) = std::cos(theta);
    b(2 * p, 2 * p + 1) = -std::sin(theta);
    b(2 * p + 1, 2 * p) = std::sin(theta);
    b(2 * p + 1, 2 * p + 1) = std::cos(theta);
  }
  GaussianChannel diss = random_cptp_channel(rng, n_diss, s_max);
  b.bottomRightCorner(n_diss, n_diss) = diss.B;
  Mat a = Mat::Zero(n, n);
  a.bottomRightCorner(n_diss, n_diss) = diss.A;
  const Mat q = random_orthogonal(rng, n);
  return make_channel(q * a * q.transpose(), q * b * q.transpose());
}

}  // namespace

TEST_CASE("validate_channel classifies the basic cases") {
  // Isometric embedding.
  auto iso = validate_channel(Mat::Zero(2, 2), Mat::Identity(2, 2));
  CHECK(iso.pass);
  CHECK(iso.isometric);

  // Reset channel: valid but not isometric.
  auto reset = validate_channel(pair_block(1.0), Mat::Zero(2, 2));
  CHECK(reset.pass);
  CHECK_FALSE(reset.isometric);

  // B = 2I violates the inequality with excess 3.
  auto bad = validate_channel(Mat::Zero(2, 2), 2.0 * Mat::Identity(2, 2));
  CHECK_FALSE(bad.pass);
  CHECK(bad.cptp_excess == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(validate_channel(Mat::Zero(2, 2), Mat::Zero(4, 4)),
                  std::invalid_argument);
}

TEST_CASE("apply iterates the affine map") {
  Rng rng(3);
  const GaussianChannel identity{Mat::Zero(4, 4), Mat::Identity(4, 4)};
  const CorrelationMatrix g = random_state(rng, 4);
  CHECK((apply(identity, g, 5).mat() - g.mat()).cwiseAbs().maxCoeff() < 1e-14);

  const GaussianChannel reset = make_channel(pair_block(0.7), Mat::Zero(2, 2));
  const CorrelationMatrix g2 = random_state(rng, 2);
  CHECK((apply(reset, g2, 1).mat() - pair_block(0.7)).cwiseAbs().maxCoeff() <
        1e-14);

  // Geometric relaxation: off-diagonal converges to a / (1 - b^2).
  const double a = 0.3, b = 0.5;
  const GaussianChannel geo =
      make_channel(pair_block(a), b * Mat::Identity(2, 2));
  const CorrelationMatrix out = apply(geo, CorrelationMatrix(Mat::Zero(2, 2)), 64);
  CHECK(out.mat()(0, 1) == doctest::Approx(a / (1.0 - b * b)).epsilon(1e-12));
  // Cross-check against the truncated geometric series.
  double series = 0.0;
  for (int s = 0; s < 64; ++s) series += std::pow(b, 2 * s) * a;
  CHECK(out.mat()(0, 1) == doctest::Approx(series).epsilon(1e-12));
}

TEST_CASE("CPTP closure on random channels and states") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + 2 * static_cast<int>(rng() % 3);
    const GaussianChannel ch = random_cptp_channel(rng, n, 0.95);
    const CorrelationMatrix g = random_state(rng, n, 0.99);
    // Output constructor re-validates antisymmetry and physicality.
    CHECK_NOTHROW(apply(ch, g, 3));
  }
}

TEST_CASE("composition of valid channels is valid and matches apply-twice") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianChannel c1 = random_cptp_channel(rng, 6, 0.9);
    const GaussianChannel c2 = random_cptp_channel(rng, 6, 0.9);
    const GaussianChannel both = compose(c2, c1);
    CHECK(validate_channel(both.A, both.B).pass);
    const CorrelationMatrix g = random_state(rng, 6);
    const Mat direct = apply(c2, apply(c1, g), 1).mat();
    CHECK((apply(both, g).mat() - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("decompose_modes splits preserved and dissipative sectors") {
  // Identity channel: everything is preserved.
  const GaussianChannel id{Mat::Zero(4, 4), Mat::Identity(4, 4)};
  const ModeDecomposition dec = decompose_modes(id);
  CHECK(dec.preserved_dim() == 4);
  CHECK(dec.dissipative_dim() == 0);
  CHECK(dec.r == doctest::Approx(0.0));

  // Majorana swap channel: one preserved and one dissipative mode.
  Mat b_swap = Mat::Zero(2, 2);
  b_swap(0, 0) = 1.0;
  const ModeDecomposition swap_dec =
      decompose_modes(make_channel(Mat::Zero(2, 2), b_swap));
  CHECK(swap_dec.preserved_dim() == 1);
  CHECK(swap_dec.dissipative_dim() == 1);
  CHECK(swap_dec.r == doctest::Approx(0.0));
}

TEST_CASE("random contractive channels have no preserved modes") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + 2 * static_cast<int>(rng() % 3);
    const GaussianChannel ch = random_cptp_channel(rng, n, 0.9);
    const ModeDecomposition dec = decompose_modes(ch);
    CHECK(dec.preserved_dim() == 0);
    CHECK(dec.r <= 0.9 + 1e-12);
  }
}

TEST_CASE("unit-norm eigenvectors satisfy the preserved-mode identities") {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const double theta = 0.1 + 0.02 * trial;
    const GaussianChannel ch = planted_channel(rng, 1, 4, theta, 0.8);
    const ModeDecomposition dec = decompose_modes(ch);
    REQUIRE(dec.preserved_dim() == 2);
    CHECK(dec.unit_eigenvalues.size() == 2);
    for (const auto& b : dec.unit_eigenvalues)
      CHECK(std::abs(b) == doctest::Approx(1.0).epsilon(1e-10));
    // A P_u = 0 and the off-diagonal blocks of B vanish.
    CHECK((ch.A * dec.q_u).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((dec.q_d.transpose() * ch.B * dec.q_u).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((dec.q_u.transpose() * ch.B * dec.q_d).cwiseAbs().maxCoeff() < 1e-8);
    // Projector algebra.
    CHECK((dec.p_u + dec.p_d - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK((dec.p_u * dec.p_d).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((dec.p_u * dec.p_u - dec.p_u).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("loose tol_unit is caught by the preserved-mode residual") {
  // Eigenvalue 0.95 with noise on that mode: classifying it as preserved
  // must fail the A v = 0 check.
  Mat b = 0.95 * Mat::Identity(2, 2);
  Mat a = pair_block(0.02);
  const GaussianChannel ch = make_channel(a, b);
  CHECK_THROWS_WITH_AS(decompose_modes(ch, 0.06),
                       doctest::Contains("tol_unit"), std::runtime_error);
}

TEST_CASE("steady state solves the dissipative fixed point") {
  Rng rng(21);

  // Reset channel: steady state is A.
  const GaussianChannel reset = make_channel(pair_block(0.7), Mat::Zero(2, 2));
  const CorrelationMatrix g0 = random_state(rng, 2);
  const CorrelationMatrix gs =
      steady_state(reset, decompose_modes(reset), g0);
  CHECK((gs.mat() - pair_block(0.7)).cwiseAbs().maxCoeff() < 1e-12);

  // Geometric pair.
  const GaussianChannel geo =
      make_channel(pair_block(0.3), 0.5 * Mat::Identity(2, 2));
  const CorrelationMatrix gs2 =
      steady_state(geo, decompose_modes(geo), CorrelationMatrix(Mat::Zero(2, 2)));
  CHECK(gs2.mat()(0, 1) == doctest::Approx(0.4).epsilon(1e-12));

  // Majorana swap with a pure input: iteration collapses to zero.
  Mat b_swap = Mat::Zero(2, 2);
  b_swap(0, 0) = 1.0;
  const GaussianChannel swap = make_channel(Mat::Zero(2, 2), b_swap);
  const CorrelationMatrix pure0(pair_block(1.0));
  const CorrelationMatrix gs3 = steady_state(swap, decompose_modes(swap), pure0);
  // Direct iteration oracle.
  CorrelationMatrix iter = pure0;
  for (int t = 0; t < 8; ++t) iter = apply(swap, iter);
  CHECK((gs3.mat() - iter.mat()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("steady state is a fixed point on the dissipative block") {
  Rng rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 4 + 2 * static_cast<int>(rng() % 3);
    const GaussianChannel ch = random_cptp_channel(rng, n, 0.9);
    const ModeDecomposition dec = decompose_modes(ch);
    const CorrelationMatrix g0 = random_state(rng, n);
    const CorrelationMatrix gs = steady_state(ch, dec, g0);
    const Mat resid = dec.p_d * (apply(ch, gs).mat() - gs.mat()) * dec.p_d;
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("convergence rate of the relaxation") {
  Rng rng(31);

  // Reset channel converges in one step.
  const GaussianChannel reset = make_channel(pair_block(0.7), Mat::Zero(2, 2));
  const ConvergenceFit instant =
      convergence_rate(reset, random_state(rng, 2), 10);
  CHECK(instant.instant);

  // b = 0.5 pair: the distance decays as b^{2t}.
  const GaussianChannel geo =
      make_channel(pair_block(0.3), 0.5 * Mat::Identity(2, 2));
  const ConvergenceFit fit = convergence_rate(geo, random_state(rng, 2), 22);
  CHECK(fit.slope == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-6));

  // Random channels obey the spectral-radius bound up to the slack.
  int tested = 0;
  while (tested < 10) {
    const GaussianChannel ch = random_cptp_channel(rng, 6, 0.9);
    const ModeDecomposition dec = decompose_modes(ch);
    if (dec.r < 0.3 || dec.r > 0.92) continue;
    const int T = static_cast<int>(std::ceil(30.0 / std::log(1.0 / dec.r))) + 5;
    const ConvergenceFit f =
        convergence_rate(ch, random_state(rng, 6), std::min(T, 4000));
    if (f.instant) continue;
    CHECK(f.slope <= -std::log(1.0 / dec.r) + 0.1);
    ++tested;
  }
}
