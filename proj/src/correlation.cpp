#include "gfchan/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace gfchan {

namespace {

[[noreturn]] void reject(const std::string& what, double magnitude) {
  std::ostringstream msg;
  msg << what << " (magnitude " << magnitude << ")";
  throw std::invalid_argument(msg.str());
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(Mat gamma) : data_(std::move(gamma)) {
  if (data_.rows() != data_.cols())
    throw std::invalid_argument("CorrelationMatrix: matrix must be square");
  if (data_.rows() % 2 != 0)
    throw std::invalid_argument("CorrelationMatrix: mode count must be even");
  const double asym = antisymmetry_defect(data_);
  if (asym > kAntisymTol) reject("CorrelationMatrix: antisymmetry violated", asym);
  const double norm = spectral_norm(data_);
  if (norm > 1.0 + kPhysicalTol)
    reject("CorrelationMatrix: unphysical, largest singular value exceeds 1",
           norm - 1.0);
  const Mat gram = data_ * data_.transpose();
  pure_ = spectral_norm(gram - Mat::Identity(data_.rows(), data_.cols())) <=
          kPurityTol;
}

MomentumCorrelation::MomentumCorrelation(std::vector<double> k_grid,
                                         std::vector<CMat> blocks)
    : k_grid_(std::move(k_grid)), blocks_(std::move(blocks)) {
  if (k_grid_.size() != blocks_.size())
    throw std::invalid_argument("MomentumCorrelation: grid/block count mismatch");
  if (k_grid_.empty())
    throw std::invalid_argument("MomentumCorrelation: empty grid");
  const Eigen::Index dim = blocks_[0].rows();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const CMat& g = blocks_[i];
    if (g.rows() != dim || g.cols() != dim)
      throw std::invalid_argument("MomentumCorrelation: inconsistent block size");
    const double ah = antihermiticity_defect(g);
    if (ah > kAntisymTol)
      reject("MomentumCorrelation: anti-hermiticity violated", ah);
    const double norm = spectral_norm(g);
    if (norm > 1.0 + kPhysicalTol)
      reject("MomentumCorrelation: unphysical block", norm - 1.0);
  }
  // Reality constraint on symmetric grids: conj(Gamma_k) = Gamma_{-k}.
  const int L = static_cast<int>(k_grid_.size());
  for (int i = 0; i < L; ++i) {
    const int j = (L - i) % L;
    const double d = (blocks_[static_cast<std::size_t>(i)].conjugate() -
                      blocks_[static_cast<std::size_t>(j)])
                         .cwiseAbs()
                         .maxCoeff();
    if (d > kRealityTol)
      reject("MomentumCorrelation: reality constraint violated", d);
  }
}

EntanglementSpectrum entanglement_spectrum(const CorrelationMatrix& gamma) {
  const Mat& g = gamma.mat();
  const int n2 = gamma.n_modes();
  EntanglementSpectrum spec;
  if (n2 == 0) return spec;

  // Real Schur form of an antisymmetric matrix is block diagonal with
  // 2x2 blocks [[0, l], [-l, 0]]; zero eigenvalues show up as 1x1 blocks.
  Eigen::RealSchur<Mat> schur(g);
  const Mat& t = schur.matrixT();
  constexpr double kPairTol = 1e-10;

  std::vector<double> lams;
  int singles = 0;
  for (int i = 0; i < n2;) {
    if (i + 1 < n2 && std::abs(t(i + 1, i)) > kPairTol) {
      const double l = 0.5 * (std::abs(t(i, i + 1)) + std::abs(t(i + 1, i)));
      lams.push_back(std::min(l, 1.0));
      i += 2;
    } else {
      ++singles;
      ++i;
    }
  }
  if (singles % 2 != 0)
    throw std::runtime_error("entanglement_spectrum: unpaired Schur block");
  for (int s = 0; s < singles / 2; ++s) lams.push_back(0.0);

  std::sort(lams.begin(), lams.end(), std::greater<double>());
  spec.lambda = lams;
  spec.epsilon.reserve(lams.size());
  for (double l : lams) {
    if (l >= 1.0 - kClampTol)
      spec.epsilon.push_back(EntanglementSpectrum::kInfinite);
    else
      spec.epsilon.push_back(std::log1p(l) - std::log1p(-l));
  }
  return spec;
}

std::vector<double> many_body_spectrum(const EntanglementSpectrum& spec,
                                       std::size_t top_m) {
  if (top_m < 1)
    throw std::invalid_argument("many_body_spectrum: top_m must be >= 1");
  const std::size_t n = spec.lambda.size();
  if (n == 0) return {1.0};

  // Per-mode occupation probabilities, larger first.
  std::vector<double> p_hi(n), p_lo(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = std::min(std::max(spec.lambda[i], 0.0), 1.0);
    p_hi[i] = 0.5 * (1.0 + l);
    p_lo[i] = 0.5 * (1.0 - l);
  }

  std::size_t full = top_m;
  if (n < 63) full = std::min<std::size_t>(top_m, std::size_t{1} << n);

  // Best-first enumeration over flip sets: a configuration is the set of
  // modes demoted to p_lo; children flip modes strictly beyond the last
  // flipped index, so each configuration is generated exactly once.
  struct Node {
    double value;
    std::vector<std::size_t> flips;
    bool operator<(const Node& o) const { return value < o.value; }
  };
  double base = 1.0;
  for (double p : p_hi) base *= p;
  std::priority_queue<Node> heap;
  heap.push({base, {}});
  std::vector<double> out;
  out.reserve(full);
  while (!heap.empty() && out.size() < full) {
    Node cur = heap.top();
    heap.pop();
    out.push_back(cur.value);
    const std::size_t start = cur.flips.empty() ? 0 : cur.flips.back() + 1;
    for (std::size_t j = start; j < n; ++j) {
      if (p_hi[j] == 0.0) continue;
      Node child;
      child.value = cur.value / p_hi[j] * p_lo[j];
      child.flips = cur.flips;
      child.flips.push_back(j);
      heap.push(std::move(child));
    }
  }
  while (out.size() < full) out.push_back(0.0);
  return out;
}

namespace {

// Displacement blocks of a block-circulant matrix, verifying circulance.
std::vector<Mat> circulant_blocks(const Mat& g, int cell_modes) {
  const int total = static_cast<int>(g.rows());
  const int L = total / cell_modes;
  std::vector<Mat> blocks(static_cast<std::size_t>(L));
  for (int d = 0; d < L; ++d)
    blocks[static_cast<std::size_t>(d)] =
        g.block(0, d * cell_modes, cell_modes, cell_modes);
  double worst = 0.0;
  int worst_d = 0;
  for (int x = 1; x < L; ++x)
    for (int d = 0; d < L; ++d) {
      const int xp = (x + d) % L;
      const double dev = (g.block(x * cell_modes, xp * cell_modes, cell_modes,
                                  cell_modes) -
                          blocks[static_cast<std::size_t>(d)])
                             .cwiseAbs()
                             .maxCoeff();
      if (dev > worst) {
        worst = dev;
        worst_d = d;
      }
    }
  if (worst > 1e-10) {
    std::ostringstream msg;
    msg << "fourier_blocks: input not translation invariant, block distance "
        << worst_d << " deviates by " << worst;
    throw std::invalid_argument(msg.str());
  }
  return blocks;
}

}  // namespace

MomentumCorrelation fourier_blocks(const CorrelationMatrix& real_space,
                                   int cell_modes) {
  if (cell_modes <= 0 || real_space.n_modes() % cell_modes != 0)
    throw std::invalid_argument(
        "fourier_blocks: n_modes must be divisible by cell_modes");
  const int L = real_space.n_modes() / cell_modes;
  const std::vector<Mat> disp = circulant_blocks(real_space.mat(), cell_modes);

  std::vector<double> ks(static_cast<std::size_t>(L));
  std::vector<CMat> blocks(static_cast<std::size_t>(L));
  const double step = 2.0 * M_PI / L;
  for (int m = 0; m < L; ++m) {
    const double k = step * m;
    ks[static_cast<std::size_t>(m)] = k;
    CMat gk = CMat::Zero(cell_modes, cell_modes);
    for (int d = 0; d < L; ++d)
      gk += std::polar(1.0, k * d) * disp[static_cast<std::size_t>(d)];
    blocks[static_cast<std::size_t>(m)] = gk;
  }
  return MomentumCorrelation(std::move(ks), std::move(blocks));
}

std::vector<CMat> momentum_to_displacement_blocks(const MomentumCorrelation& mc) {
  const int L = mc.n_k();
  const int cm = mc.cell_modes();
  std::vector<CMat> disp(static_cast<std::size_t>(L));
  for (int d = 0; d < L; ++d) {
    CMat g = CMat::Zero(cm, cm);
    for (int m = 0; m < L; ++m)
      g += std::polar(1.0, -mc.k_grid()[static_cast<std::size_t>(m)] * d) *
           mc.block(m);
    disp[static_cast<std::size_t>(d)] = g / static_cast<double>(L);
  }
  return disp;
}

CorrelationMatrix inverse_fourier_blocks(const MomentumCorrelation& mc) {
  const int L = mc.n_k();
  const int cm = mc.cell_modes();
  const std::vector<CMat> disp = momentum_to_displacement_blocks(mc);
  double imag_max = 0.0;
  for (const CMat& g : disp)
    imag_max = std::max(imag_max, g.imag().cwiseAbs().maxCoeff());
  if (imag_max > 1e-9)
    reject("inverse_fourier_blocks: non-real reconstruction", imag_max);

  Mat full = Mat::Zero(L * cm, L * cm);
  for (int x = 0; x < L; ++x)
    for (int d = 0; d < L; ++d)
      full.block(x * cm, ((x + d) % L) * cm, cm, cm) =
          disp[static_cast<std::size_t>(d)].real();
  full = antisymmetrize(full);  // scrub roundoff
  return CorrelationMatrix(full);
}

}  // namespace gfchan
