#include "byzsgd/simulator.hpp"

#include <chrono>
#include <cmath>

namespace byzsgd {

namespace {
constexpr std::uint64_t kTagWorker = 0x1;
}

std::unique_ptr<TrainingProblem> ProblemConfig::build() const {
    switch (kind) {
        case ProblemKind::Quadratic: return make_random_quadratic(d, data_seed, noise_sigma);
        case ProblemKind::Logistic:
            return make_synthetic_logistic(n_samples, d, data_seed, l2, planted_norm);
        case ProblemKind::MnistSubset:
            return load_mnist_subset(images_path, labels_path, max_per_class, l2);
    }
    throw ParameterError("problem: unknown kind");
}

void ExperimentConfig::validate() const {
    require_param(rounds >= 1, "config: rounds must be >= 1");
    require_param(n_workers >= 1, "config: n_workers must be >= 1");
    require_param(batch_size >= 1, "config: batch_size must be >= 1");
    require_param(eval_every >= 1, "config: eval_every must be >= 1");
    require_param(lr.gamma > 0.0, "config: learning rate must be positive");
}

GradVector worker_gradient(const TrainingProblem& problem, const GradVector& x, Rng& rng,
                           int batch_size) {
    return problem.stochastic_gradient(x, rng, batch_size);
}

RoundOutcome run_round(GradVector& x, int round, const TrainingProblem& problem,
                       const ExperimentConfig& config) {
    const std::size_t n = static_cast<std::size_t>(config.n_workers);
    GradMatrix matrix(n, problem.dim());
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(round), i, kTagWorker);
        const GradVector g = worker_gradient(problem, x, rng, config.batch_size);
        for (std::size_t j = 0; j < problem.dim(); ++j) matrix(i, j) = g[j];
    }

    const AttackContext ctx{config.seed, static_cast<std::uint64_t>(round)};
    const GradMatrix corrupted = apply_attack(config.attack, ctx, matrix);

    const auto t0 = std::chrono::steady_clock::now();
    GradVector aggregated;
    try {
        aggregated = aggregate(config.aggregator, corrupted);
    } catch (const std::invalid_argument& err) {
        throw ParameterError("round " + std::to_string(round) + ": " + err.what());
    }
    const auto t1 = std::chrono::steady_clock::now();

    const double gamma = config.lr.at(round);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] -= gamma * aggregated[j];

    RoundOutcome out;
    out.grad_norm = norm2(aggregated);
    out.agg_seconds = std::chrono::duration<double>(t1 - t0).count();
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const TrainingProblem& problem) {
    config.validate();
    ExperimentResult result;
    result.final_x.assign(problem.dim(), 0.0);
    GradVector& x = result.final_x;

    double agg_seconds_acc = 0.0;
    double grad_norm_last = 0.0;
    for (int t = 0; t < config.rounds; ++t) {
        const RoundOutcome outcome = run_round(x, t, problem, config);
        agg_seconds_acc += outcome.agg_seconds;
        grad_norm_last = outcome.grad_norm;
        if ((t + 1) % config.eval_every == 0 || t + 1 == config.rounds) {
            MetricsRecord rec;
            rec.round = t + 1;
            rec.train_loss = problem.loss(x);
            rec.eval_metric = problem.eval_metric(x);
            rec.grad_norm = grad_norm_last;
            rec.agg_wall_time = agg_seconds_acc;
            agg_seconds_acc = 0.0;
            result.records.push_back(rec);
        }
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const std::unique_ptr<TrainingProblem> problem = config.problem.build();
    return run_experiment(config, *problem);
}

}  // namespace byzsgd
