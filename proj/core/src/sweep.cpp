#include "maser/sweep.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "maser/channels.hpp"
#include "maser/errors.hpp"
#include "maser/fock.hpp"
#include "maser/linalg.hpp"
#include "maser/metrology.hpp"
#include "maser/walls.hpp"

namespace maser {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

using RowKey = std::tuple<double, std::int64_t, std::int64_t>;

RowKey key_of(const SweepRow& row) { return {row.c_e, row.K, row.k_atoms}; }

// One evolution covering every checkpoint of a (c_e, K) trajectory.
std::vector<SweepRow> run_pair(const RunConfig& cfg, double c_e,
                               std::int64_t K,
                               const std::vector<std::int64_t>& checkpoints) {
  const int dim = cfg.model.n_max + 1;
  const AtomState atom{Complex(std::sqrt(std::max(0.0, 1.0 - c_e * c_e)), 0.0),
                       Complex(c_e, 0.0)};
  const double phi = phi_for_wall(cfg.model.m.value(), K);

  Superoperator map;
  if (cfg.noise.sigma > 0.0) {
    BeamScheme scheme;
    if (cfg.run.beam == "mc") {
      scheme.kind = BeamScheme::MonteCarlo;
      scheme.samples = cfg.run.mc_samples;
      scheme.seed = cfg.noise.seed.value();
    }
    map = beam_averaged_map(atom, phi, cfg.noise.sigma, cfg.model.nu, dim,
                            scheme);
  } else {
    map = discrete_map(kraus_two_photon(atom, phi, dim));
  }

  std::vector<std::int64_t> sorted = checkpoints;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::map<std::int64_t, MetrologyReport> reports;
  Eigen::VectorXcd state = vec(projector(fock_state(dim, 0)));
  std::int64_t step = 0;
  for (std::int64_t target : sorted) {
    for (; step < target; ++step) state = map * state;
    reports[target] = metrology_report(unvec(state, dim));
  }

  std::vector<SweepRow> rows;
  rows.reserve(checkpoints.size());
  for (std::int64_t k : checkpoints) {
    const MetrologyReport& r = reports.at(k);
    rows.push_back(
        {c_e, K, phi, k, r.mean_n, r.var_n, r.qfi, r.enhancement, r.purity});
  }
  return rows;
}

std::vector<SweepRow> parse_csv_rows(const std::string& text,
                                     std::uint64_t hash) {
  std::vector<SweepRow> rows;
  bool hash_ok = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("config_hash=");
      if (pos != std::string::npos)
        hash_ok = line.substr(pos + 12) == hash_hex(hash);
      continue;
    }
    if (line.rfind("c_e,", 0) == 0) continue;
    std::array<std::string, 9> fields;
    std::size_t start = 0;
    bool ok = true;
    for (int i = 0; i < 9; ++i) {
      const auto comma = line.find(',', start);
      if (i < 8 && comma == std::string::npos) {
        ok = false;
        break;
      }
      fields[i] = line.substr(start, comma == std::string::npos
                                         ? std::string::npos
                                         : comma - start);
      start = comma + 1;
    }
    if (!ok) return {};
    try {
      SweepRow row;
      row.c_e = std::stod(fields[0]);
      row.K = std::stoll(fields[1]);
      row.phi = std::stod(fields[2]);
      row.k_atoms = std::stoll(fields[3]);
      row.mean_n = std::stod(fields[4]);
      row.var_n = std::stod(fields[5]);
      row.qfi = std::stod(fields[6]);
      row.enhancement = std::stod(fields[7]);
      row.purity = std::stod(fields[8]);
      rows.push_back(row);
    } catch (const std::exception&) {
      return {};
    }
  }
  return hash_ok ? rows : std::vector<SweepRow>{};
}

std::vector<SweepRow> parse_json_rows(const std::string& text,
                                      std::uint64_t hash) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return {};
  if (j.value("config_hash", std::string()) != hash_hex(hash)) return {};
  if (!j.contains("rows") || !j["rows"].is_array()) return {};
  auto num = [](const nlohmann::json& item, const char* name) {
    const auto& v = item.at(name);
    // NaN serializes as null
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : v.get<double>();
  };
  std::vector<SweepRow> rows;
  for (const auto& item : j["rows"]) {
    SweepRow row;
    row.c_e = num(item, "c_e");
    row.K = item.at("K").get<std::int64_t>();
    row.phi = num(item, "phi");
    row.k_atoms = item.at("k_atoms").get<std::int64_t>();
    row.mean_n = num(item, "mean_n");
    row.var_n = num(item, "var_n");
    row.qfi = num(item, "qfi");
    row.enhancement = num(item, "enhancement");
    row.purity = num(item, "purity");
    rows.push_back(row);
  }
  return rows;
}

void write_header(const RunConfig& cfg, std::ostream& os) {
  os << "# maser sweep " << kVersion << '\n';
  os << "# config_hash=" << hash_hex(config_hash(cfg)) << '\n';
  os << "# seed=";
  if (cfg.noise.seed)
    os << *cfg.noise.seed;
  else
    os << '-';
  os << '\n';
}

}  // namespace

std::vector<SweepRow> read_sweep_rows(const std::string& path,
                                      std::uint64_t hash) {
  std::ifstream in(path);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  try {
    if (text[first] == '{') return parse_json_rows(text, hash);
    return parse_csv_rows(text, hash);
  } catch (const std::exception&) {
    return {};
  }
}

SweepResult run_sweep(const RunConfig& cfg) {
  std::map<RowKey, SweepRow> existing;
  if (!cfg.run.out.empty()) {
    for (const SweepRow& row : read_sweep_rows(cfg.run.out, config_hash(cfg)))
      existing.emplace(key_of(row), row);
  }

  struct Job {
    double c_e;
    std::int64_t K;
    std::vector<std::int64_t> missing;
  };
  std::vector<Job> jobs;
  for (double c_e : cfg.run.c_e_values) {
    for (std::int64_t K : cfg.run.K_values) {
      Job job{c_e, K, {}};
      for (std::int64_t k : cfg.run.atoms)
        if (existing.find({c_e, K, k}) == existing.end())
          job.missing.push_back(k);
      if (!job.missing.empty()) jobs.push_back(std::move(job));
    }
  }

  std::vector<std::vector<SweepRow>> outputs(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        outputs[i] = run_pair(cfg, jobs[i].c_e, jobs[i].K, jobs[i].missing);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const int pool = std::max(1, std::min<int>(cfg.run.jobs, int(jobs.size())));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    for (const SweepRow& row : outputs[i]) existing[key_of(row)] = row;

  for (double c_e : cfg.run.c_e_values) {
    for (std::int64_t K : cfg.run.K_values) {
      for (std::int64_t k : cfg.run.atoms) {
        const auto it = existing.find({c_e, K, k});
        if (it == existing.end())
          throw NumericalError("run_sweep: grid point missing after merge");
        result.rows.push_back(it->second);
      }
    }
  }
  std::size_t fresh = 0;
  for (const auto& out : outputs) fresh += out.size();
  result.computed = fresh;
  result.reused = result.rows.size() - fresh;
  return result;
}

void write_sweep_csv(const SweepResult& result, const RunConfig& cfg,
                     std::ostream& os) {
  write_header(cfg, os);
  os << "c_e,K,phi,k_atoms,mean_n,var_n,qfi,enhancement,purity\n";
  for (const SweepRow& r : result.rows) {
    os << fmt17(r.c_e) << ',' << r.K << ',' << fmt17(r.phi) << ','
       << r.k_atoms << ',' << fmt17(r.mean_n) << ',' << fmt17(r.var_n) << ','
       << fmt17(r.qfi) << ',' << fmt17(r.enhancement) << ','
       << fmt17(r.purity) << '\n';
  }
}

std::string sweep_json(const SweepResult& result, const RunConfig& cfg) {
  nlohmann::json j;
  j["tool"] = "maser sweep";
  j["version"] = kVersion;
  j["config_hash"] = hash_hex(config_hash(cfg));
  if (cfg.noise.seed)
    j["seed"] = *cfg.noise.seed;
  else
    j["seed"] = nullptr;
  j["rows"] = nlohmann::json::array();
  for (const SweepRow& r : result.rows) {
    j["rows"].push_back({{"c_e", r.c_e},
                         {"K", r.K},
                         {"phi", r.phi},
                         {"k_atoms", r.k_atoms},
                         {"mean_n", r.mean_n},
                         {"var_n", r.var_n},
                         {"qfi", r.qfi},
                         {"enhancement", r.enhancement},
                         {"purity", r.purity}});
  }
  return j.dump(2);
}

void write_sweep_artifact(const SweepResult& result, const RunConfig& cfg,
                          const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw IOError("cannot open output", tmp);
    if (cfg.run.format == "csv") {
      write_sweep_csv(result, cfg, os);
    } else {
      os << sweep_json(result, cfg) << '\n';
    }
    if (!os) throw IOError("write failed", tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IOError("cannot replace output", path);
}

}  // namespace maser
