#include "gfchan/dense_oracle.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gfchan {

CMat jw_majorana(int n_qubits, int j) {
  if (j < 0 || j >= 2 * n_qubits)
    throw std::invalid_argument("jw_majorana: index out of range");
  const int site = j / 2;
  const bool odd = j % 2 != 0;
  CMat x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Cplx(0, -1), Cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  CMat op = CMat::Identity(1, 1);
  for (int s = 0; s < n_qubits; ++s) {
    if (s < site)
      op = kron(op, z);
    else if (s == site)
      op = kron(op, odd ? y : x);
    else
      op = kron(op, CMat::Identity(2, 2));
  }
  return op;
}

double pfaffian_small(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  if (n % 2 != 0) return 0.0;
  if (n == 0) return 1.0;
  if (n == 2) return a(0, 1);
  // Expansion along the first row.
  double pf = 0.0;
  double sign = 1.0;
  for (int j = 1; j < n; ++j) {
    std::vector<int> rest;
    for (int m = 1; m < n; ++m)
      if (m != j) rest.push_back(m);
    Mat minor(n - 2, n - 2);
    for (int r = 0; r < n - 2; ++r)
      for (int c = 0; c < n - 2; ++c) minor(r, c) = a(rest[r], rest[c]);
    pf += sign * a(0, j) * pfaffian_small(minor);
    sign = -sign;
  }
  return pf;
}

CMat gaussian_density_matrix(const Mat& gamma) {
  const int n2 = static_cast<int>(gamma.rows());
  if (n2 % 2 != 0 || gamma.cols() != n2)
    throw std::invalid_argument("gaussian_density_matrix: bad dimensions");
  const int nq = n2 / 2;
  if (nq > 6)
    throw std::invalid_argument("gaussian_density_matrix: more than 12 modes");
  const long dim = 1L << nq;

  std::vector<CMat> c(static_cast<std::size_t>(n2));
  for (int j = 0; j < n2; ++j) c[static_cast<std::size_t>(j)] = jw_majorana(nq, j);

  CMat rho = CMat::Zero(dim, dim);
  for (unsigned long mask = 0; mask < (1UL << n2); ++mask) {
    const int bits = __builtin_popcountl(mask);
    if (bits % 2 != 0) continue;
    std::vector<int> subset;
    for (int j = 0; j < n2; ++j)
      if (mask & (1UL << j)) subset.push_back(j);
    Mat sub(bits, bits);
    for (int r = 0; r < bits; ++r)
      for (int s = 0; s < bits; ++s) sub(r, s) = gamma(subset[r], subset[s]);
    const double pf = pfaffian_small(sub);
    if (pf == 0.0) continue;
    CMat prod = CMat::Identity(dim, dim);
    for (int j : subset) prod = prod * c[static_cast<std::size_t>(j)];
    rho += std::pow(Cplx(0, 1), bits / 2) * pf * prod;
  }
  return rho / static_cast<double>(dim);
}

CMat unitary_exp(const CMat& k) {
  const CMat herm = Cplx(0, 1) * k;
  Eigen::SelfAdjointEigenSolver<CMat> es(herm);
  const CVec phases =
      (Cplx(0, -1) * es.eigenvalues().cast<Cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

GaussianGate gaussian_gate(const Mat& h) {
  const int n2 = static_cast<int>(h.rows());
  if (antisymmetry_defect(h) > 1e-12)
    throw std::invalid_argument("gaussian_gate: generator must be antisymmetric");
  const int nq = n2 / 2;
  const long dim = 1L << nq;
  CMat k = CMat::Zero(dim, dim);
  for (int j = 0; j < n2; ++j) {
    const CMat cj = jw_majorana(nq, j);
    for (int l = 0; l < n2; ++l) {
      if (h(j, l) == 0.0) continue;
      k += 0.25 * h(j, l) * (cj * jw_majorana(nq, l));
    }
  }
  GaussianGate gate;
  gate.u = unitary_exp(k);
  gate.r = h.exp();
  return gate;
}

DenseState::DenseState(std::vector<int> dims) : dims_(std::move(dims)) {
  long dim = 1;
  for (int d : dims_) dim *= d;
  if (dim > kDenseDimCap)
    throw std::invalid_argument("DenseState: dimension cap exceeded");
  amp_ = CVec::Zero(dim);
  amp_(0) = 1.0;
}

DenseState::DenseState(std::vector<int> dims, CVec amplitudes)
    : dims_(std::move(dims)), amp_(std::move(amplitudes)) {
  long dim = 1;
  for (int d : dims_) dim *= d;
  if (dim > kDenseDimCap)
    throw std::invalid_argument("DenseState: dimension cap exceeded");
  if (amp_.size() != dim)
    throw std::invalid_argument("DenseState: amplitude length mismatch");
}

void DenseState::attach_factor(int d) {
  long dim = amp_.size() * d;
  if (dim > kDenseDimCap)
    throw std::invalid_argument("DenseState: dimension cap exceeded");
  CVec next = CVec::Zero(dim);
  for (long i = 0; i < amp_.size(); ++i) next(i * d) = amp_(i);
  amp_ = std::move(next);
  dims_.push_back(d);
}

namespace {

// Strides for mixed-radix indices, factor 0 most significant.
std::vector<long> strides_of(const std::vector<int>& dims) {
  std::vector<long> st(dims.size());
  long acc = 1;
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    st[static_cast<std::size_t>(i)] = acc;
    acc *= dims[static_cast<std::size_t>(i)];
  }
  return st;
}

}  // namespace

void DenseState::apply_unitary(const CMat& u, const std::vector<int>& targets) {
  long block = 1;
  for (int t : targets) block *= dims_[static_cast<std::size_t>(t)];
  if (u.rows() != block || u.cols() != block)
    throw std::invalid_argument("apply_unitary: operator/target dim mismatch");

  const std::vector<long> st = strides_of(dims_);
  std::vector<long> tstride(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i)
    tstride[i] = st[static_cast<std::size_t>(targets[i])];

  // Enumerate base indices with all target digits zero.
  std::vector<int> rest;
  for (int f = 0; f < n_factors(); ++f)
    if (std::find(targets.begin(), targets.end(), f) == targets.end())
      rest.push_back(f);
  long rest_dim = 1;
  for (int f : rest) rest_dim *= dims_[static_cast<std::size_t>(f)];

  // Offsets of every target configuration relative to a base index.
  std::vector<long> offsets(static_cast<std::size_t>(block));
  for (long b = 0; b < block; ++b) {
    long rem = b, off = 0;
    for (int i = static_cast<int>(targets.size()) - 1; i >= 0; --i) {
      const int d = dims_[static_cast<std::size_t>(targets[static_cast<std::size_t>(i)])];
      off += (rem % d) * tstride[static_cast<std::size_t>(i)];
      rem /= d;
    }
    offsets[static_cast<std::size_t>(b)] = off;
  }

  CVec buf(block);
  for (long rb = 0; rb < rest_dim; ++rb) {
    long rem = rb, base = 0;
    for (int i = static_cast<int>(rest.size()) - 1; i >= 0; --i) {
      const int f = rest[static_cast<std::size_t>(i)];
      const int d = dims_[static_cast<std::size_t>(f)];
      base += (rem % d) * st[static_cast<std::size_t>(f)];
      rem /= d;
    }
    for (long b = 0; b < block; ++b) buf(b) = amp_(base + offsets[static_cast<std::size_t>(b)]);
    buf = u * buf;
    for (long b = 0; b < block; ++b) amp_(base + offsets[static_cast<std::size_t>(b)]) = buf(b);
  }
}

namespace {

// Splits amplitudes into a (keep x rest) matrix.
CMat reshape_keep(const CVec& amp, const std::vector<int>& dims,
                  const std::vector<int>& keep) {
  const std::vector<long> st = strides_of(dims);
  long keep_dim = 1, rest_dim = 1;
  std::vector<int> rest;
  for (int f = 0; f < static_cast<int>(dims.size()); ++f) {
    if (std::find(keep.begin(), keep.end(), f) != keep.end())
      keep_dim *= dims[static_cast<std::size_t>(f)];
    else {
      rest.push_back(f);
      rest_dim *= dims[static_cast<std::size_t>(f)];
    }
  }
  CMat m = CMat::Zero(keep_dim, rest_dim);
  for (long i = 0; i < amp.size(); ++i) {
    long ki = 0, ri = 0;
    for (int f = 0; f < static_cast<int>(dims.size()); ++f) {
      const long digit = (i / st[static_cast<std::size_t>(f)]) %
                         dims[static_cast<std::size_t>(f)];
      if (std::find(keep.begin(), keep.end(), f) != keep.end())
        ki = ki * dims[static_cast<std::size_t>(f)] + digit;
      else
        ri = ri * dims[static_cast<std::size_t>(f)] + digit;
    }
    m(ki, ri) = amp(i);
  }
  return m;
}

}  // namespace

CMat DenseState::reduced_density_matrix(const std::vector<int>& keep) const {
  const CMat m = reshape_keep(amp_, dims_, keep);
  return m * m.adjoint();
}

std::vector<double> DenseState::reduction_spectrum(
    const std::vector<int>& keep) const {
  const CMat m = reshape_keep(amp_, dims_, keep);
  Eigen::JacobiSVD<CMat> svd(m);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    out.push_back(s * s);
  }
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

namespace {

long ipow(int b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

void validate_circuit(const TinyCircuit& c) {
  if (c.L < 2 || c.L > 6) throw std::invalid_argument("TinyCircuit: L out of range");
  if (c.d < 2 || c.d > 3) throw std::invalid_argument("TinyCircuit: d out of range");
  if (c.T() > 4) throw std::invalid_argument("TinyCircuit: too many steps");
  int gates = 0;
  const long gd = ipow(c.d, 3);
  for (const auto& step : c.steps) {
    for (const auto& g : step) {
      ++gates;
      if (g.x < 0 || g.x >= c.L)
        throw std::invalid_argument("TinyCircuit: gate position out of range");
      if (g.u.rows() != gd || g.u.cols() != gd)
        throw std::invalid_argument("TinyCircuit: gate has wrong dimension");
      const double udef = (g.u.adjoint() * g.u - CMat::Identity(gd, gd))
                              .cwiseAbs()
                              .maxCoeff();
      if (udef > 1e-12) {
        std::ostringstream msg;
        msg << "TinyCircuit: gate not unitary, defect " << udef;
        throw std::invalid_argument(msg.str());
      }
    }
  }
  long dim = ipow(c.d, c.L);
  for (int g = 0; g < gates; ++g) {
    dim *= c.d;
    if (dim > kDenseDimCap)
      throw std::invalid_argument("TinyCircuit: dense dimension cap exceeded");
  }

  // Same-step gates must commute; compare both orders on the union support.
  for (const auto& step : c.steps) {
    for (std::size_t i = 0; i < step.size(); ++i)
      for (std::size_t j = i + 1; j < step.size(); ++j) {
        std::vector<int> sites;
        auto add = [&](int s) {
          s = ((s % c.L) + c.L) % c.L;
          if (std::find(sites.begin(), sites.end(), s) == sites.end())
            sites.push_back(s);
        };
        add(step[i].x);
        add(step[i].x + 1);
        add(step[j].x);
        add(step[j].x + 1);
        std::sort(sites.begin(), sites.end());
        // Factors: shared sites, then env_i, then env_j.
        std::vector<int> dims(sites.size() + 2, c.d);
        auto site_pos = [&](int s) {
          s = ((s % c.L) + c.L) % c.L;
          return static_cast<int>(std::find(sites.begin(), sites.end(), s) -
                                  sites.begin());
        };
        const int ei = static_cast<int>(sites.size());
        const int ej = ei + 1;
        long dim = 1;
        for (int d : dims) dim *= d;
        // Fixed dense reference vector keeps the check honest on all blocks.
        CVec ref(dim);
        for (long n = 0; n < ref.size(); ++n)
          ref(n) = Cplx(std::cos(0.37 * static_cast<double>(n) + 0.2),
                        std::sin(0.59 * static_cast<double>(n)));
        ref /= ref.norm();
        DenseState ab(dims, ref);
        DenseState ba(dims, ref);
        const std::vector<int> ti = {site_pos(step[i].x), site_pos(step[i].x + 1), ei};
        const std::vector<int> tj = {site_pos(step[j].x), site_pos(step[j].x + 1), ej};
        ab.apply_unitary(step[i].u, ti);
        ab.apply_unitary(step[j].u, tj);
        ba.apply_unitary(step[j].u, tj);
        ba.apply_unitary(step[i].u, ti);
        const double dev = (ab.amplitudes() - ba.amplitudes()).cwiseAbs().maxCoeff();
        if (dev > 1e-10) {
          std::ostringstream msg;
          msg << "TinyCircuit: same-step gates at x=" << step[i].x << " and x="
              << step[j].x << " do not commute (deviation " << dev << ")";
          throw std::invalid_argument(msg.str());
        }
      }
  }
}

SequentialRun simulate_sequential(const TinyCircuit& c, const CVec& input) {
  validate_circuit(c);
  if (input.size() != ipow(c.d, c.L))
    throw std::invalid_argument("simulate_sequential: input dimension mismatch");

  SequentialRun run;
  run.state = DenseState(std::vector<int>(static_cast<std::size_t>(c.L), c.d),
                         input / input.norm());
  std::vector<int> virt(static_cast<std::size_t>(c.L));
  for (int i = 0; i < c.L; ++i) virt[static_cast<std::size_t>(i)] = i;

  for (const auto& step : c.steps) {
    std::vector<int> envs;
    for (const auto& g : step) {
      run.state.attach_factor(c.d);
      const int env = run.state.n_factors() - 1;
      envs.push_back(env);
      run.state.apply_unitary(g.u, {g.x, (g.x + 1) % c.L, env});
    }
    run.env_factors.push_back(envs);
    run.rho_v.push_back(run.state.reduced_density_matrix(virt));
  }
  return run;
}

double isospectral_check(const TinyCircuit& c, const CVec& input, int t0) {
  if (t0 < 1 || t0 > c.T())
    throw std::invalid_argument("isospectral_check: t0 out of range");
  const SequentialRun run = simulate_sequential(c, input);

  std::vector<int> env_below;
  for (int t = 0; t < t0; ++t)
    for (int f : run.env_factors[static_cast<std::size_t>(t)])
      env_below.push_back(f);
  std::vector<double> spec_a = run.state.reduction_spectrum(env_below);

  Eigen::SelfAdjointEigenSolver<CMat> es(
      run.rho_v[static_cast<std::size_t>(t0 - 1)], Eigen::EigenvaluesOnly);
  std::vector<double> spec_v;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    spec_v.push_back(es.eigenvalues()(i));
  std::sort(spec_v.begin(), spec_v.end(), std::greater<double>());

  const std::size_t len = std::max(spec_a.size(), spec_v.size());
  spec_a.resize(len, 0.0);
  spec_v.resize(len, 0.0);
  double mismatch = 0.0;
  for (std::size_t i = 0; i < len; ++i)
    mismatch = std::max(mismatch, std::abs(spec_a[i] - spec_v[i]));
  return mismatch;
}

}  // namespace gfchan
