#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "byzsgd/aggregators.hpp"
#include "byzsgd/attacks.hpp"
#include "byzsgd/problem.hpp"

namespace byzsgd {

enum class LrSchedule { Constant, InverseT };

struct LearningRate {
    LrSchedule schedule = LrSchedule::Constant;
    double gamma = 0.1;

    double at(int round) const {
        return schedule == LrSchedule::Constant ? gamma : gamma / (1.0 + round);
    }
};

enum class ProblemKind { Quadratic, Logistic, MnistSubset };

/// Declarative description of a TrainingProblem; built deterministically
/// from its own fields so configs stay serializable.
struct ProblemConfig {
    ProblemKind kind = ProblemKind::Quadratic;
    std::size_t d = 20;
    std::uint64_t data_seed = 1;
    double l2 = 0.0;
    // quadratic
    double noise_sigma = 0.1;
    // synthetic logistic
    std::size_t n_samples = 2000;
    double planted_norm = 3.0;
    // mnist subset
    std::string images_path;
    std::string labels_path;
    int max_per_class = 50;

    std::unique_ptr<TrainingProblem> build() const;
};

struct ExperimentConfig {
    int n_workers = 20;
    int rounds = 500;
    int batch_size = 32;
    int eval_every = 10;
    LearningRate lr;
    AggregatorSpec aggregator;
    AttackSpec attack;
    ProblemConfig problem;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MetricsRecord {
    int round = 0;  // 1-based round just completed
    double train_loss = 0.0;
    double eval_metric = 0.0;
    double grad_norm = 0.0;      // norm of the aggregated gradient this round
    double agg_wall_time = 0.0;  // seconds spent inside the aggregator
};

struct ExperimentResult {
    std::vector<MetricsRecord> records;
    GradVector final_x;
};

/// One worker's stochastic gradient (thin wrapper kept for symmetry with the
/// round loop; all randomness comes from the provided stream).
GradVector worker_gradient(const TrainingProblem& problem, const GradVector& x, Rng& rng,
                           int batch_size);

struct RoundOutcome {
    double grad_norm = 0.0;
    double agg_seconds = 0.0;
};

/// Executes one synchronous round: collect n gradients, corrupt, aggregate,
/// step. `round` is the 0-based round index.
RoundOutcome run_round(GradVector& x, int round, const TrainingProblem& problem,
                       const ExperimentConfig& config);

/// Runs one replicate and returns the metrics trajectory plus the final
/// parameters. (config, seed) determines every metric bit-exactly, except
/// agg_wall_time which is measured.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const TrainingProblem& problem);

}  // namespace byzsgd
