#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maser/channels.hpp"
#include "maser/config.hpp"
#include "maser/errors.hpp"
#include "maser/evolve.hpp"
#include "maser/fock.hpp"
#include "maser/linalg.hpp"
#include "maser/meta.hpp"
#include "maser/metrology.hpp"
#include "maser/steady.hpp"
#include "maser/sweep.hpp"
#include "maser/walls.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  int jobs = 0;
  std::uint64_t seed = 0;
  int n_max = 0;
  bool has_jobs = false;
  bool has_seed = false;
  bool has_n_max = false;
};

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json complex_json(maser::Complex z) { return json::array({z.real(), z.imag()}); }

json header_json(const maser::RunConfig& cfg, const std::string& tool) {
  json j;
  j["tool"] = tool;
  j["version"] = maser::kVersion;
  j["config_hash"] = hash_hex(maser::config_hash(cfg));
  if (cfg.noise.seed)
    j["seed"] = *cfg.noise.seed;
  else
    j["seed"] = nullptr;
  return j;
}

std::string preamble(const maser::RunConfig& cfg, const std::string& tool) {
  std::ostringstream os;
  os << "# " << tool << ' ' << maser::kVersion << '\n';
  os << "# config_hash=" << hash_hex(maser::config_hash(cfg)) << '\n';
  os << "# seed=";
  if (cfg.noise.seed)
    os << *cfg.noise.seed;
  else
    os << '-';
  os << '\n';
  return os.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  const std::string tmp = out_path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw maser::IOError("cannot open output", tmp);
    os << text;
    if (text.empty() || text.back() != '\n') os << '\n';
    if (!os) throw maser::IOError("write failed", tmp);
  }
  if (std::rename(tmp.c_str(), out_path.c_str()) != 0)
    throw maser::IOError("cannot replace output", out_path);
}

maser::RunConfig load_config(const Flags& flags, const std::string& command) {
  if (flags.config.empty())
    throw maser::ValidationError("a config file is required", "config");
  std::ifstream in(flags.config);
  if (!in) throw maser::IOError("cannot open config", flags.config);
  std::ostringstream buf;
  buf << in.rdbuf();
  maser::RunConfig cfg = maser::parse_config_raw(buf.str());
  cfg.run.command = command;
  if (flags.has_seed) cfg.noise.seed = flags.seed;
  if (flags.has_n_max) cfg.model.n_max = flags.n_max;
  if (flags.has_jobs) cfg.run.jobs = flags.jobs;
  if (!flags.out.empty()) cfg.run.out = flags.out;
  if (!flags.format.empty()) cfg.run.format = flags.format;
  maser::validate_config(cfg);
  return cfg;
}

json branch_json(const maser::Ket& psi, int support_bound, bool stationary) {
  const maser::DensityMatrix rho = maser::projector(psi);
  json coeffs = json::array();
  for (Eigen::Index n = 0; n < psi.size(); ++n)
    coeffs.push_back(complex_json(psi[n]));
  json j;
  j["coefficients"] = coeffs;
  j["mean_n"] = maser::photon_mean(rho);
  j["var_n"] = maser::photon_variance(rho);
  j["purity"] = maser::purity(rho);
  j["support_bound"] = support_bound;
  j["stationary"] = stationary;
  return j;
}

int cmd_steady(const Flags& flags) {
  const maser::RunConfig cfg = load_config(flags, "steady");
  const int dim = cfg.model.n_max + 1;
  const maser::AtomState atom = cfg.atom();
  const double phi = cfg.resolved_phi();
  const maser::StationaryPair pair = maser::pure_stationary(atom, phi, dim);
  const maser::KrausSet kraus = maser::kraus_two_photon(atom, phi, dim);
  const maser::BoundaryEigenvalues bounds = maser::verify_eigenstate(pair, kraus);

  json j = header_json(cfg, "maser steady");
  j["phi"] = phi;
  j["plus"] = branch_json(pair.psi_plus, pair.support_bound_plus,
                          pair.plus_stationary);
  j["minus"] = branch_json(pair.psi_minus, pair.support_bound_minus,
                           pair.minus_stationary);
  j["boundary"] = {{"alpha", complex_json(bounds.alpha)},
                   {"beta", complex_json(bounds.beta)}};
  if (cfg.model.m) {
    j["wall"] = {{"m", *cfg.model.m},
                 {"K", *cfg.model.K},
                 {"cos_sign", (*cfg.model.K % 2 != 0) ? -1 : 1},
                 {"phi", phi}};
  } else {
    json soft = json::array();
    for (const maser::SoftWall& w : maser::soft_wall_scan(phi, cfg.model.n_max))
      soft.push_back({{"m", w.m},
                      {"strength", w.strength},
                      {"cos_value", w.cos_value}});
    j["soft_walls"] = soft;
  }
  emit(j.dump(2), cfg.run.out);
  return 0;
}

struct Row {
  double time;
  double trace;
  double purity;
  double mean_n;
  double parity;
  double fidelity;
};

int cmd_evolve(const Flags& flags) {
  const maser::RunConfig cfg = load_config(flags, "evolve");
  const int dim = cfg.model.n_max + 1;
  const maser::AtomState atom = cfg.atom();
  const double phi = cfg.resolved_phi();
  const maser::KrausSet kraus = maser::kraus_two_photon(atom, phi, dim);
  const maser::DensityMatrix rho0 = maser::projector(maser::fock_state(dim, 0));
  const maser::StationaryPair pair = maser::pure_stationary(atom, phi, dim);
  const maser::Superoperator L0 = maser::generator_L0(kraus, cfg.model.nu);

  // Fidelity target: the asymptotic state of the configured dynamics. The
  // vacuum is even, so without loss it converges to the even branch alone.
  maser::DensityMatrix target;
  if (cfg.noise.kappa > 0.0 && pair.minus_stationary) {
    const double np =
        pair.psi_plus.dot(maser::number_op(dim) * pair.psi_plus).real();
    const double nm =
        pair.psi_minus.dot(maser::number_op(dim) * pair.psi_minus).real();
    target = maser::combined_steady(pair, np, nm, 0.0, 0.0, cfg.noise.kappa,
                                    cfg.model.nu)
                 .assembled;
  } else {
    target = maser::projector(pair.psi_plus);
  }

  std::vector<maser::TrajectoryPoint> traj;
  std::string label;
  if (!cfg.run.times.empty()) {
    label = "t";
    maser::Superoperator gen = L0;
    if (cfg.noise.kappa > 0.0)
      gen += maser::loss_dissipator(cfg.noise.kappa, cfg.noise.n_th, dim);
    traj = maser::evolve_continuous(gen, rho0, cfg.run.times);
  } else {
    if (cfg.run.atoms.empty())
      throw maser::ValidationError("evolve needs times or atoms", "times");
    label = "k";
    maser::Superoperator map;
    if (cfg.noise.sigma > 0.0) {
      maser::BeamScheme scheme;
      if (cfg.run.beam == "mc") {
        scheme.kind = maser::BeamScheme::MonteCarlo;
        scheme.samples = cfg.run.mc_samples;
        scheme.seed = cfg.noise.seed.value();
      }
      map = maser::beam_averaged_map(atom, phi, cfg.noise.sigma, cfg.model.nu,
                                     dim, scheme);
    } else {
      map = maser::discrete_map(kraus);
    }
    std::vector<std::int64_t> checkpoints = cfg.run.atoms;
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                      checkpoints.end());
    Eigen::VectorXcd state = maser::vec(rho0);
    std::int64_t step = 0;
    for (std::int64_t k : checkpoints) {
      for (; step < k; ++step) state = map * state;
      traj.push_back({double(k), maser::unvec(state, dim)});
    }
  }

  const maser::Operator par = maser::parity_op(dim);
  std::vector<Row> rows;
  rows.reserve(traj.size());
  for (const auto& pt : traj) {
    rows.push_back({pt.time, pt.state.trace().real(), maser::purity(pt.state),
                    maser::photon_mean(pt.state), maser::expval(pt.state, par),
                    maser::fidelity(pt.state, target)});
  }

  if (cfg.run.format == "csv") {
    std::ostringstream os;
    os << preamble(cfg, "maser evolve");
    os << std::setprecision(17);
    os << label << ",trace,purity,mean_n,parity,fidelity\n";
    for (const Row& r : rows)
      os << r.time << ',' << r.trace << ',' << r.purity << ',' << r.mean_n
         << ',' << r.parity << ',' << r.fidelity << '\n';
    emit(os.str(), cfg.run.out);
  } else {
    json j = header_json(cfg, "maser evolve");
    j["time_label"] = label;
    j["rows"] = json::array();
    for (const Row& r : rows)
      j["rows"].push_back({{"time", r.time},
                           {"trace", r.trace},
                           {"purity", r.purity},
                           {"mean_n", r.mean_n},
                           {"parity", r.parity},
                           {"fidelity", r.fidelity}});
    emit(j.dump(2), cfg.run.out);
  }
  return 0;
}

int cmd_spectrum(const Flags& flags) {
  const maser::RunConfig cfg = load_config(flags, "spectrum");
  const int dim = cfg.model.n_max + 1;
  const maser::KrausSet kraus =
      maser::kraus_two_photon(cfg.atom(), cfg.resolved_phi(), dim);
  maser::Superoperator gen = maser::generator_L0(kraus, cfg.model.nu);
  if (cfg.noise.kappa > 0.0)
    gen += maser::loss_dissipator(cfg.noise.kappa, cfg.noise.n_th, dim);
  const maser::SpectrumReport rep = maser::spectrum(gen, cfg.run.modes);

  json j = header_json(cfg, "maser spectrum");
  j["eigenvalues"] = json::array();
  for (const auto& mode : rep.modes)
    j["eigenvalues"].push_back(complex_json(mode.eigenvalue));
  j["gap_ratios"] = rep.gap_ratios;
  j["metastable"] = json::array();
  for (bool flag : rep.metastable) j["metastable"].push_back(flag);
  emit(j.dump(2), cfg.run.out);
  return 0;
}

int cmd_walls(const Flags& flags, std::int64_t m1, std::int64_t k1, int count) {
  if (m1 < 0) throw maser::ValidationError("m1 must be nonnegative", "m1");
  if (k1 < 1) throw maser::ValidationError("k1 must be positive", "k1");
  if (count < 1) throw maser::ValidationError("count must be positive", "count");

  maser::RunConfig cfg;  // effective defaults; walls needs no config file
  cfg.run.command = "walls";
  cfg.model.n_max = 2;
  if (flags.has_seed) cfg.noise.seed = flags.seed;

  const maser::WallSequence seq = maser::wall_sequence(m1, k1, count);
  json j = header_json(cfg, "maser walls");
  j["D"] = seq.D;
  j["walls"] = json::array();
  for (const maser::HardWall& w : seq.walls)
    j["walls"].push_back({{"m", w.m},
                          {"K", w.K},
                          {"parity", (w.m % 2 == 0) ? "even" : "odd"},
                          {"cos_sign", w.cos_sign},
                          {"phi", w.phi}});
  emit(j.dump(2), flags.out);
  return 0;
}

int cmd_wigner(const Flags& flags, const std::string& state) {
  const maser::RunConfig cfg = load_config(flags, "wigner");
  const int dim = cfg.model.n_max + 1;
  const maser::StationaryPair pair =
      maser::pure_stationary(cfg.atom(), cfg.resolved_phi(), dim);
  maser::DensityMatrix rho;
  if (state == "plus")
    rho = maser::projector(pair.psi_plus);
  else if (state == "minus")
    rho = maser::projector(pair.psi_minus);
  else
    rho = 0.5 * (maser::projector(pair.psi_plus) +
                 maser::projector(pair.psi_minus));

  maser::WignerGrid spec;
  spec.re_min = -cfg.run.wigner_range;
  spec.re_max = cfg.run.wigner_range;
  spec.im_min = -cfg.run.wigner_range;
  spec.im_max = cfg.run.wigner_range;
  spec.resolution = cfg.run.wigner_resolution;
  const maser::WignerGrid grid = maser::wigner(rho, spec);

  if (cfg.run.format == "csv") {
    std::ostringstream os;
    os << preamble(cfg, "maser wigner");
    maser::write_csv(grid, os);
    emit(os.str(), cfg.run.out);
  } else {
    json j = header_json(cfg, "maser wigner");
    j["state"] = state;
    j["norm"] = maser::wigner_norm(grid);
    j["grid"] = json::parse(maser::to_json(grid));
    emit(j.dump(2), cfg.run.out);
  }
  return 0;
}

int cmd_metastable(const Flags& flags) {
  const maser::RunConfig cfg = load_config(flags, "metastable");
  const int dim = cfg.model.n_max + 1;
  const maser::AtomState atom = cfg.atom();
  const double phi = cfg.resolved_phi();
  const maser::StationaryPair pair = maser::pure_stationary(atom, phi, dim);
  const maser::KrausSet kraus = maser::kraus_two_photon(atom, phi, dim);
  const maser::Superoperator L0 = maser::generator_L0(kraus, cfg.model.nu);
  const maser::ConservedCoherence coh = maser::conserved_coherence(L0, pair);

  maser::DfsGenerator gen =
      maser::eff_loss_generator(pair, coh, cfg.noise.kappa);
  if (cfg.noise.sigma > 0.0) {
    const double gamma = maser::beam_dephasing_bound(
        pair, cfg.noise.sigma * cfg.noise.sigma, cfg.model.nu);
    gen.matrix(2, 2) -= gamma;
    gen.matrix(3, 3) -= gamma;
    gen.gamma_deph += gamma;
  }
  const maser::DfsClassification cls = maser::dfs_eigen_and_classical(gen, pair);

  json j = header_json(cfg, "maser metastable");
  j["n_plus"] = gen.n_plus;
  j["n_minus"] = gen.n_minus;
  j["eta"] = complex_json(gen.eta);
  j["Omega"] = gen.Omega;
  j["gamma_deph"] = gen.gamma_deph;
  j["eigenvalues"] = json::array();
  for (const maser::Complex& lam : cls.eigenvalues)
    j["eigenvalues"].push_back(complex_json(lam));
  if (cfg.noise.kappa > 0.0) {
    j["p_plus"] = maser::combined_steady(pair, gen.n_plus, gen.n_minus, 0.0,
                                         0.0, cfg.noise.kappa, cfg.model.nu)
                      .p_plus;
  } else {
    j["p_plus"] = nullptr;  // no relaxation channel selects a weight
  }
  j["classical_flag"] = cls.classical_flag;
  j["gamma_loss"] = cls.gamma_loss;
  emit(j.dump(2), cfg.run.out);
  return 0;
}

int cmd_sweep(const Flags& flags) {
  const maser::RunConfig cfg = load_config(flags, "sweep");
  const maser::SweepResult result = maser::run_sweep(cfg);
  if (cfg.run.out.empty()) {
    if (cfg.run.format == "csv") {
      std::ostringstream os;
      maser::write_sweep_csv(result, cfg, os);
      std::cout << os.str();
    } else {
      std::cout << maser::sweep_json(result, cfg) << '\n';
    }
    return 0;
  }
  maser::write_sweep_artifact(result, cfg, cfg.run.out);
  std::cerr << "sweep: " << result.rows.size() << " rows ("
            << result.computed << " computed, " << result.reused
            << " reused) -> " << cfg.run.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-photon micromaser simulation toolkit"};
  app.require_subcommand(1);

  Flags flags;
  auto* opt_config = app.add_option("--config", flags.config, "config file");
  auto* opt_out = app.add_option("--out", flags.out, "output path (default stdout)");
  auto* opt_jobs = app.add_option("--jobs", flags.jobs, "worker pool size");
  auto* opt_seed = app.add_option("--seed", flags.seed, "RNG seed override");
  auto* opt_nmax = app.add_option("--n-max", flags.n_max, "Fock truncation override");
  auto* opt_format =
      app.add_option("--format", flags.format, "output format")
          ->check(CLI::IsMember({"csv", "json"}));
  (void)opt_config;
  (void)opt_out;

  auto* steady = app.add_subcommand("steady", "pure stationary pair");
  auto* evolve = app.add_subcommand("evolve", "trajectory from vacuum");
  auto* spectrum = app.add_subcommand("spectrum", "generator eigenvalues");
  auto* walls = app.add_subcommand("walls", "hard-wall ladder positions");
  auto* wigner = app.add_subcommand("wigner", "phase-space grid");
  auto* metastable = app.add_subcommand("metastable", "effective DFS generator");
  auto* sweep = app.add_subcommand("sweep", "grid sweep with metrology rows");

  std::int64_t m1 = 0, k1 = 1;
  int count = 4;
  walls->add_option("--m1", m1, "seed wall position")->required();
  walls->add_option("--k1", k1, "seed wall index")->required();
  walls->add_option("--count", count, "number of walls");

  std::string wigner_state = "plus";
  wigner->add_option("--state", wigner_state, "which stationary state")
      ->check(CLI::IsMember({"plus", "minus", "mix"}));

  for (CLI::App* sub : {steady, evolve, spectrum, walls, wigner, metastable, sweep})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  flags.has_jobs = opt_jobs->count() > 0;
  flags.has_seed = opt_seed->count() > 0;
  flags.has_n_max = opt_nmax->count() > 0;
  if (opt_format->count() == 0) flags.format.clear();

  try {
    if (steady->parsed()) return cmd_steady(flags);
    if (evolve->parsed()) return cmd_evolve(flags);
    if (spectrum->parsed()) return cmd_spectrum(flags);
    if (walls->parsed()) return cmd_walls(flags, m1, k1, count);
    if (wigner->parsed()) return cmd_wigner(flags, wigner_state);
    if (metastable->parsed()) return cmd_metastable(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
  } catch (const maser::ParseError& e) {
    std::cerr << "config error: " << e.what() << " (line " << e.line
              << ", column " << e.column << ")\n";
    return 2;
  } catch (const maser::ValidationError& e) {
    std::cerr << "config error: " << e.what() << " [" << e.field << "]\n";
    return 2;
  } catch (const maser::IOError& e) {
    std::cerr << "io error: " << e.what() << " [" << e.path << "]\n";
    return 1;
  } catch (const maser::Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
