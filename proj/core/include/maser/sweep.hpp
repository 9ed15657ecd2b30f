#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "maser/config.hpp"

namespace maser {

struct SweepRow {
  double c_e = 0.0;
  std::int64_t K = 0;
  double phi = 0.0;
  std::int64_t k_atoms = 0;
  double mean_n = 0.0;
  double var_n = 0.0;
  double qfi = 0.0;
  double enhancement = 0.0;
  double purity = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order: c_e, then K, then k_atoms
  std::size_t computed = 0;
  std::size_t reused = 0;  // rows carried over from an existing artifact
};

// One trajectory per (c_e, K) pair, dispatched to a pool of run.jobs
// workers and merged in grid order. When run.out names an existing
// artifact with a matching config hash, rows already present are reused.
SweepResult run_sweep(const RunConfig& config);

void write_sweep_csv(const SweepResult& result, const RunConfig& config,
                     std::ostream& os);
std::string sweep_json(const SweepResult& result, const RunConfig& config);

// Writes via a temp file and rename so partial output never replaces a
// complete artifact.
void write_sweep_artifact(const SweepResult& result, const RunConfig& config,
                          const std::string& path);

// Rows recovered from a previous artifact (CSV or JSON, detected from the
// content); empty when the file is absent or its config hash differs.
std::vector<SweepRow> read_sweep_rows(const std::string& path,
                                      std::uint64_t hash);

}  // namespace maser
