#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "byzsgd/config.hpp"

namespace byzsgd {

/// One `run` invocation: the base config, the optional grid, and the
/// replication/output policy.
struct RunManifest {
    ConfigDocument doc;
    int replicates = 1;
    std::uint64_t seed_base = 0;
    std::string out_dir;
    bool include_timing = false;  // timings in CSVs break byte-level determinism
};

struct CellSummary {
    std::string name;
    double final_metric_mean = 0.0;
    double final_metric_stddev = 0.0;
    std::vector<std::string> files;
};

/// Runs every grid cell x replicate (replicate r uses seed_base + r), writes
/// one CSV per replicate plus an averaged CSV per cell, and prints one
/// summary line per cell. Cells and replicates run in parallel, capped by
/// the BYZSGD_MAX_PARALLEL environment variable.
std::vector<CellSummary> run_manifest(const RunManifest& manifest, std::ostream& log);

/// Table of eta_0..eta_3 and the resilience condition for (n, q, d, sigma,
/// ||g||), followed by the two theorem counterexample checks. Out-of-domain
/// rows are marked N/A. Returns false if a counterexample check fails.
bool verify_report(int n, int q, int d, double sigma, double gnorm, std::uint64_t seed,
                   std::ostream& out);

/// Stable listing of aggregator, attack, and problem kinds with their
/// parameter schemas.
std::string list_kinds();

}  // namespace byzsgd
