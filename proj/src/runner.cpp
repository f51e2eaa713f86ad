#include "byzsgd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "byzsgd/csv.hpp"
#include "byzsgd/resilience.hpp"
#include "byzsgd/rng.hpp"

namespace byzsgd {

namespace {

unsigned max_parallel() {
    if (const char* env = std::getenv("BYZSGD_MAX_PARALLEL")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

struct Cell {
    std::string name;
    ExperimentConfig config;
};

std::vector<Cell> expand_grid(const ConfigDocument& doc) {
    std::vector<AggregatorSpec> aggs = doc.grid.aggregators;
    if (aggs.empty()) aggs.push_back(doc.base.aggregator);
    std::vector<AttackSpec> attacks = doc.grid.attacks;
    if (attacks.empty()) attacks.push_back(doc.base.attack);

    std::vector<Cell> cells;
    for (const AggregatorSpec& agg : aggs) {
        for (const AttackSpec& attack : attacks) {
            Cell cell;
            cell.config = doc.base;
            cell.config.aggregator = agg;
            cell.config.attack = attack;
            cell.name = std::string(to_string(agg.kind)) + "__" + to_string(attack.kind);
            cells.push_back(std::move(cell));
        }
    }
    // disambiguate repeated kind pairs
    for (std::size_t i = 0; i < cells.size(); ++i) {
        int dup = 0;
        for (std::size_t j = 0; j < i; ++j)
            if (cells[j].name == cells[i].name || cells[j].name.starts_with(cells[i].name + "_v"))
                ++dup;
        if (dup > 0) cells[i].name += "_v" + std::to_string(dup + 1);
    }
    return cells;
}

}  // namespace

std::vector<CellSummary> run_manifest(const RunManifest& manifest, std::ostream& log) {
    require_param(manifest.replicates >= 1, "run: replicates must be >= 1");
    require_param(!manifest.out_dir.empty(), "run: output directory required");
    std::filesystem::create_directories(manifest.out_dir);

    const std::vector<Cell> cells = expand_grid(manifest.doc);
    const int reps = manifest.replicates;

    struct Job {
        std::size_t cell;
        int rep;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (int r = 0; r < reps; ++r) jobs.push_back({c, r});

    std::vector<std::vector<std::vector<MetricsRecord>>> results(cells.size());
    for (auto& per_cell : results)
        per_cell.resize(static_cast<std::size_t>(reps));
    std::vector<std::exception_ptr> errors(jobs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) return;
            const Job job = jobs[idx];
            try {
                ExperimentConfig config = cells[job.cell].config;
                config.seed = manifest.seed_base + static_cast<std::uint64_t>(job.rep);
                results[job.cell][static_cast<std::size_t>(job.rep)] =
                    run_experiment(config).records;
            } catch (...) {
                errors[idx] = std::current_exception();
            }
        }
    };

    const unsigned threads = std::min<std::size_t>(max_parallel(), jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // flush whatever completed before surfacing the first error
    std::exception_ptr first_error;
    for (const auto& err : errors)
        if (err && !first_error) first_error = err;

    std::vector<CellSummary> summaries;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellSummary summary;
        summary.name = cells[c].name;
        std::vector<std::vector<MetricsRecord>> complete;
        for (int r = 0; r < reps; ++r) {
            const auto& records = results[c][static_cast<std::size_t>(r)];
            if (records.empty()) continue;
            const std::string path = manifest.out_dir + "/" + summary.name + "_rep" +
                                     std::to_string(r) + ".csv";
            write_file_atomic(path, metrics_to_csv(records, manifest.include_timing));
            summary.files.push_back(path);
            complete.push_back(records);
        }
        if (!complete.empty()) {
            const std::string avg_path = manifest.out_dir + "/" + summary.name + "_avg.csv";
            write_file_atomic(avg_path,
                              averaged_metrics_to_csv(complete, manifest.include_timing));
            summary.files.push_back(avg_path);

            double sum = 0.0, sum_sq = 0.0;
            for (const auto& records : complete) {
                const double v = records.back().eval_metric;
                sum += v;
                sum_sq += v * v;
            }
            const double k = static_cast<double>(complete.size());
            summary.final_metric_mean = sum / k;
            summary.final_metric_stddev =
                k > 1.0 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / k) / (k - 1.0))) : 0.0;
            log << summary.name << ": final eval metric = " << summary.final_metric_mean
                << " +/- " << summary.final_metric_stddev << " (" << complete.size()
                << " replicates)\n";
        }
        summaries.push_back(std::move(summary));
    }

    if (first_error) std::rethrow_exception(first_error);
    return summaries;
}

bool verify_report(int n, int q, int d, double sigma, double gnorm, std::uint64_t seed,
                   std::ostream& out) {
    struct Row {
        const char* rule;
        double (*eta)(int, int);
    };
    const Row rows[] = {{"krum", eta_krum},
                        {"geomed", eta_geomed},
                        {"marmed", eta_marmed},
                        {"meamed", eta_meamed}};

    out << "resilience condition eta(n,q) * sqrt(d) * sigma < ||g||  with n=" << n << " q=" << q
        << " d=" << d << " sigma=" << sigma << " ||g||=" << gnorm << "\n";
    out << std::left << std::setw(10) << "rule" << std::setw(16) << "eta" << std::setw(16)
        << "sin_alpha" << "condition\n";
    for (const Row& row : rows) {
        out << std::left << std::setw(10) << row.rule;
        try {
            const double eta = row.eta(n, q);
            const ResilienceBound bound = resilience_bound(eta, d, sigma, gnorm);
            out << std::setw(16) << eta << std::setw(16) << bound.sin_alpha
                << (bound.satisfiable ? "SATISFIED" : "VIOLATED") << "\n";
        } catch (const ParameterError&) {
            out << std::setw(16) << "N/A" << std::setw(16) << "N/A" << "N/A\n";
        }
    }

    // Theorem counterexamples on a random gradient of the requested dimension
    Rng rng = Rng::stream(seed, 0xCE);
    GradVector g(static_cast<std::size_t>(d));
    for (double& v : g) {
        const double mag = 0.1 + 1.9 * rng.uniform();  // bounded away from zero
        v = rng.uniform() < 0.5 ? -mag : mag;
    }

    bool ok = true;
    {
        const GradMatrix m = build_mean_counterexample(g, std::max(n, 2));
        const double ip = dot(agg_mean(m), g);
        const bool pass = ip < 0.0;
        ok = ok && pass;
        out << "counterexample (averaging): <Mean, g> = " << ip << "  "
            << (pass ? "CONFIRMED NEGATIVE" : "FAILED") << "\n";
    }
    if (n <= d) {
        const GradMatrix m = build_selection_counterexample(g, n, d);
        for (const char* rule : {"medoid", "krum"}) {
            double ip;
            if (std::string(rule) == "medoid") {
                ip = dot(agg_medoid(m), g);
            } else {
                try {
                    ip = dot(agg_krum(m, q), g);
                } catch (const ParameterError&) {
                    out << "counterexample (selection, krum): N/A (2q+2 >= n)\n";
                    continue;
                }
            }
            const bool pass = ip < 0.0;
            ok = ok && pass;
            out << "counterexample (selection, " << rule << "): <Aggr, g> = " << ip << "  "
                << (pass ? "CONFIRMED NEGATIVE" : "FAILED") << "\n";
        }
    } else {
        out << "counterexample (selection): N/A (requires n <= d)\n";
    }
    return ok;
}

std::string list_kinds() {
    std::ostringstream out;
    out << "aggregators:\n"
        << "  mean       (no parameters)\n"
        << "  medoid     (no parameters)\n"
        << "  krum       q: estimated Byzantine count, requires 2q+2 < n\n"
        << "  multikrum  q, multikrum_m: vectors averaged (0 = n-q)\n"
        << "  geomed     geomed_tolerance, geomed_max_iters\n"
        << "  marmed     (no parameters; q only checked against ceil(n/2)-1)\n"
        << "  meamed     q: estimated Byzantine count, 0 <= q <= n-1\n"
        << "attacks:\n"
        << "  none       (identity)\n"
        << "  gaussian   q, sigma, selection: fixed|resampled\n"
        << "  omniscient q, scale, selection: fixed|resampled\n"
        << "  bitflip    num_dims (0 = min(1000,d)), bit_positions (1-based LSB), "
           "bitflip_same_worker\n"
        << "  gambler    num_servers, target_server, prob, factor\n"
        << "problems:\n"
        << "  quadratic  d, data_seed, noise_sigma\n"
        << "  logistic   d, n_samples, data_seed, l2, planted_norm\n"
        << "  mnist      images_path, labels_path, max_per_class, l2 (IDX format)\n";
    return out.str();
}

}  // namespace byzsgd
