#include <maser/evolve.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>

#include <Eigen/Dense>

#include <maser/errors.hpp>
#include <maser/fock.hpp>
#include <maser/linalg.hpp>

namespace maser {

namespace {

DensityMatrix cleaned(const Eigen::VectorXcd& v, int dim) {
  DensityMatrix rho = unvec(v, dim);
  rho = 0.5 * (rho + rho.adjoint().eval());
  const double tr = rho.trace().real();
  if (std::abs(tr) < 1e-300) throw NumericalError("trajectory trace collapsed to zero");
  return rho / tr;
}

constexpr int kDenseLimit = 4096;  // superoperator rows handled densely

}  // namespace

std::vector<TrajectoryPoint> evolve_discrete(const Superoperator& map,
                                             const DensityMatrix& rho0,
                                             long steps, long stride) {
  if (steps < 0) throw DegenerateError("negative step count");
  if (stride < 1) stride = 1;
  const int dim = static_cast<int>(rho0.rows());
  if (map.rows() != dim * dim || map.cols() != dim * dim)
    throw DegenerateError("map dimension does not match the state");

  Eigen::VectorXcd v = vec(rho0);
  std::vector<TrajectoryPoint> traj;
  traj.push_back({0.0, cleaned(v, dim)});
  for (long k = 1; k <= steps; ++k) {
    v = map * v;
    if (k % stride == 0 || k == steps)
      traj.push_back({static_cast<double>(k), cleaned(v, dim)});
  }
  return traj;
}

std::vector<TrajectoryPoint> evolve_continuous(const Superoperator& gen,
                                               const DensityMatrix& rho0,
                                               const std::vector<double>& times) {
  const int dim = static_cast<int>(rho0.rows());
  if (gen.rows() != dim * dim || gen.cols() != dim * dim)
    throw DegenerateError("generator dimension does not match the state");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw DegenerateError("times must be ascending and nonnegative");
  }

  std::vector<TrajectoryPoint> traj;
  const Eigen::VectorXcd v0 = vec(rho0);

  if (gen.rows() <= kDenseLimit) {
    Eigen::ComplexEigenSolver<Superoperator> es(gen);
    if (es.info() != Eigen::Success) throw EigensolverError("generator eigendecomposition failed");
    bool spectral_ok = false;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(es.eigenvectors());
    Eigen::VectorXcd c;
    // The spectral route is only trusted if V diagonalizes gen to near
    // roundoff; defective or ill-conditioned generators fall back to stepping.
    Eigen::MatrixXcd recon = es.eigenvectors() * es.eigenvalues().asDiagonal() *
                             lu.solve(Eigen::MatrixXcd::Identity(gen.rows(), gen.cols()));
    const double rel = (recon - gen).norm() / std::max(gen.norm(), 1e-300);
    if (rel < 1e-10) {
      spectral_ok = true;
      c = lu.solve(v0);
    }
    if (spectral_ok) {
      for (double t : times) {
        Eigen::VectorXcd phases = (es.eigenvalues().array() * t).exp();
        Eigen::VectorXcd v = es.eigenvectors() * (phases.cwiseProduct(c));
        traj.push_back({t, cleaned(v, dim)});
      }
      return traj;
    }
    Eigen::VectorXcd v = v0;
    double prev = 0.0;
    for (double t : times) {
      const double dt = t - prev;
      if (dt > 0.0) v = expm(gen * dt) * v;
      prev = t;
      traj.push_back({t, cleaned(v, dim)});
    }
    return traj;
  }

  Eigen::VectorXcd v = v0;
  double prev = 0.0;
  for (double t : times) {
    const double dt = t - prev;
    if (dt > 0.0) v = expm_multiply(gen, v, dt, 1e-9);
    prev = t;
    traj.push_back({t, cleaned(v, dim)});
  }
  return traj;
}

SpectrumReport spectrum(const Superoperator& gen, int count) {
  const int n = static_cast<int>(gen.rows());
  const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (dim * dim != n) throw DegenerateError("generator is not a square superoperator");
  Eigen::ComplexEigenSolver<Superoperator> es(gen);
  if (es.info() != Eigen::Success) throw EigensolverError("generator eigendecomposition failed");

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Complex la = es.eigenvalues()(a), lb = es.eigenvalues()(b);
    if (la.real() != lb.real()) return la.real() > lb.real();
    return la.imag() > lb.imag();
  });

  int kept = (count <= 0 || count > n) ? n : count;
  SpectrumReport report;
  report.modes.reserve(kept);
  for (int i = 0; i < kept; ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(order[i]);
    Operator mode = unvec(v, dim);
    mode /= mode.norm();
    // deterministic phase: largest-magnitude entry made real positive
    Eigen::Index r = 0, cidx = 0;
    mode.cwiseAbs().maxCoeff(&r, &cidx);
    const Complex pivot = mode(r, cidx);
    if (std::abs(pivot) > 0) mode *= std::conj(pivot) / std::abs(pivot);
    report.modes.push_back({es.eigenvalues()(order[i]), std::move(mode)});
  }
  for (int i = 0; i + 1 < kept; ++i) {
    const double num = std::abs(report.modes[i].eigenvalue.real());
    const double den = std::abs(report.modes[i + 1].eigenvalue.real());
    const double ratio = num / std::max(den, 1e-300);
    report.gap_ratios.push_back(ratio);
    report.metastable.push_back(ratio < 0.1);
  }
  return report;
}

KrausSet full_model_map(const ModelParams& p, const AtomState& atom, int dim) {
  if (dim < 1) throw DegenerateError("dimension must be positive");
  if (p.tau < 0.0) throw DegenerateError("negative interaction time");

  // level energies in the rotating frame; index 5 is the auxiliary level
  const double e0 = 0.0;
  const double e1 = p.Delta1;
  const double e2 = p.Delta1 + p.Delta2;
  const double e3 = p.Delta1 + p.Delta2 + p.Delta3;
  const double e4 = p.Delta1 + p.Delta2 + p.Delta3 + p.Delta4;
  const double ea = p.delta + p.Delta1 + p.Delta2 + p.Delta3;
  const double energy[6] = {e0, e1, e2, e3, e4, ea};
  const Complex g[4] = {p.g1, p.g2, p.g3, p.g4};

  // Excitation number N = a^dag a + sum_j j|j><j| + 3|a><a| is conserved, so
  // U(tau) decomposes into blocks over {|j, N-j>, |a, N-3>} with all photon
  // indices clipped to the truncated space.
  const int n_blocks = dim + 3;  // initial components reach N = n+3 <= dim+2
  std::vector<Eigen::MatrixXcd> U(n_blocks);
  std::vector<std::array<int, 6>> pos(n_blocks);  // level -> index in block, -1 absent
  for (int N = 0; N < n_blocks; ++N) {
    auto& idx = pos[N];
    idx.fill(-1);
    int sz = 0;
    for (int j = 0; j <= 4; ++j) {
      const int photon = N - j;
      if (photon >= 0 && photon < dim) idx[j] = sz++;
    }
    if (N - 3 >= 0 && N - 3 < dim) idx[5] = sz++;
    if (sz == 0) continue;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(sz, sz);
    for (int j = 0; j <= 4; ++j)
      if (idx[j] >= 0) h(idx[j], idx[j]) = energy[j];
    if (idx[5] >= 0) h(idx[5], idx[5]) = energy[5];
    for (int j = 1; j <= 4; ++j) {
      if (idx[j] < 0 || idx[j - 1] < 0) continue;
      const int photon_src = N - (j - 1);  // |j-1, N-j+1> -> |j, N-j>
      const Complex amp = g[j - 1] * std::sqrt(static_cast<double>(photon_src));
      h(idx[j], idx[j - 1]) = amp;
      h(idx[j - 1], idx[j]) = std::conj(amp);
    }
    if (idx[5] >= 0 && idx[3] >= 0) {
      h(idx[5], idx[3]) = p.G;
      h(idx[3], idx[5]) = std::conj(p.G);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw EigensolverError("block Hamiltonian eigensolve failed");
    Eigen::VectorXcd phases(sz);
    for (int i = 0; i < sz; ++i)
      phases(i) = std::exp(Complex(0.0, -p.tau * es.eigenvalues()(i)));
    U[N] = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  }

  KrausSet set;
  const char* names[6] = {"M_0", "M_1", "M_2", "M_3", "M_4", "M_a"};
  for (int out = 0; out < 6; ++out) {
    Operator m = Operator::Zero(dim, dim);
    const int weight = (out == 5) ? 3 : out;  // excitation carried by the level
    for (int n = 0; n < dim; ++n) {
      if (std::abs(atom.c_g) > 0) {
        const int N = n + 1;
        const int photon = N - weight;
        if (N < n_blocks && pos[N][out] >= 0 && pos[N][1] >= 0 && photon >= 0 &&
            photon < dim)
          m(photon, n) += atom.c_g * U[N](pos[N][out], pos[N][1]);
      }
      if (std::abs(atom.c_e) > 0) {
        const int N = n + 3;
        const int photon = N - weight;
        if (N < n_blocks && pos[N][out] >= 0 && pos[N][3] >= 0 && photon >= 0 &&
            photon < dim)
          m(photon, n) += atom.c_e * U[N](pos[N][out], pos[N][3]);
      }
    }
    set.ops.push_back(std::move(m));
    set.labels.push_back(names[out]);
  }
  return set;
}

std::vector<std::pair<double, double>> fidelity_trace(
    const std::vector<TrajectoryPoint>& traj, const DensityMatrix& target) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.size());
  for (const auto& pt : traj) out.emplace_back(pt.time, fidelity(pt.state, target));
  return out;
}

std::vector<std::pair<double, double>> find_plateaus(
    const std::vector<std::pair<double, double>>& trace, double slope_threshold,
    double min_decades) {
  std::vector<std::pair<double, double>> points;
  for (const auto& [t, f] : trace)
    if (t > 0.0) points.emplace_back(std::log10(t), f);
  std::vector<std::pair<double, double>> plateaus;
  std::size_t i = 0;
  while (i + 1 < points.size()) {
    std::size_t j = i;
    while (j + 1 < points.size()) {
      const double dlog = points[j + 1].first - points[j].first;
      const double slope = dlog > 0.0 ? (points[j + 1].second - points[j].second) / dlog
                                      : 0.0;
      if (std::abs(slope) >= slope_threshold) break;
      ++j;
    }
    if (j > i && points[j].first - points[i].first >= min_decades)
      plateaus.emplace_back(std::pow(10.0, points[i].first),
                            std::pow(10.0, points[j].first));
    i = (j > i) ? j : i + 1;
  }
  return plateaus;
}

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj,
                          const DensityMatrix& target, const std::string& path,
                          const std::string& time_label,
                          const std::string& preamble) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open trajectory output", path);
  out << preamble;
  out << std::setprecision(17);
  out << time_label << ",trace,purity,mean_n,parity,fidelity\n";
  const Operator par = parity_op(static_cast<int>(target.rows()));
  for (const auto& pt : traj) {
    out << pt.time << ',' << pt.state.trace().real() << ',' << purity(pt.state)
        << ',' << photon_mean(pt.state) << ',' << expval(pt.state, par)
        << ',' << fidelity(pt.state, target) << '\n';
  }
  if (!out) throw IOError("failed writing trajectory", path);
}

}  // namespace maser
