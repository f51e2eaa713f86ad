#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "byzsgd/grad.hpp"
#include "byzsgd/rng.hpp"

namespace byzsgd {

/// Raised by the IDX parser on malformed files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A training objective min_x E[f(x, xi)] with a stochastic gradient oracle.
class TrainingProblem {
public:
    virtual ~TrainingProblem() = default;

    virtual std::size_t dim() const = 0;

    /// Unbiased mini-batch gradient estimate at x.
    virtual GradVector stochastic_gradient(const GradVector& x, Rng& rng,
                                           int batch_size) const = 0;

    /// Exact gradient of the full training objective.
    virtual GradVector full_gradient(const GradVector& x) const = 0;

    /// Full training loss.
    virtual double loss(const GradVector& x) const = 0;

    /// Accuracy for classification, ||x - x*|| for the quadratic.
    virtual double eval_metric(const GradVector& x) const = 0;

    virtual const char* metric_name() const = 0;
};

/// Strongly convex quadratic 0.5 ||x - x*||^2 with additive gradient noise.
class QuadraticProblem final : public TrainingProblem {
public:
    QuadraticProblem(GradVector optimum, double noise_sigma);

    std::size_t dim() const override { return optimum_.size(); }
    GradVector stochastic_gradient(const GradVector& x, Rng& rng, int batch_size) const override;
    GradVector full_gradient(const GradVector& x) const override;
    double loss(const GradVector& x) const override;
    double eval_metric(const GradVector& x) const override;  // ||x - x*||
    const char* metric_name() const override { return "distance_to_optimum"; }

    const GradVector& optimum() const { return optimum_; }

private:
    GradVector optimum_;
    double noise_sigma_;
};

/// Binary logistic regression (labels in {0, 1}) with optional L2 term.
class LogisticProblem final : public TrainingProblem {
public:
    LogisticProblem(std::vector<double> features, std::vector<int> labels, std::size_t d,
                    double l2, std::vector<double> eval_features = {},
                    std::vector<int> eval_labels = {});

    std::size_t dim() const override { return d_; }
    GradVector stochastic_gradient(const GradVector& x, Rng& rng, int batch_size) const override;
    GradVector full_gradient(const GradVector& x) const override;
    double loss(const GradVector& x) const override;
    double eval_metric(const GradVector& x) const override;  // accuracy
    const char* metric_name() const override { return "accuracy"; }

    std::size_t n_samples() const { return labels_.size(); }

private:
    void accumulate_sample(const GradVector& x, std::size_t row, GradVector& grad) const;

    std::vector<double> features_;  // row-major n_samples x d
    std::vector<int> labels_;
    std::size_t d_;
    double l2_;
    std::vector<double> eval_features_;
    std::vector<int> eval_labels_;
};

/// Multinomial linear classifier (softmax over K classes); parameters are
/// the d_in x K weight matrix followed by K biases.
class MultinomialProblem final : public TrainingProblem {
public:
    MultinomialProblem(std::vector<double> features, std::vector<int> labels,
                       std::size_t d_in, int n_classes, double l2);

    std::size_t dim() const override { return d_in_ * classes_ + classes_; }
    GradVector stochastic_gradient(const GradVector& x, Rng& rng, int batch_size) const override;
    GradVector full_gradient(const GradVector& x) const override;
    double loss(const GradVector& x) const override;
    double eval_metric(const GradVector& x) const override;  // top-1 accuracy
    const char* metric_name() const override { return "accuracy"; }

    std::size_t n_samples() const { return labels_.size(); }
    std::size_t input_dim() const { return d_in_; }
    int n_classes() const { return classes_; }

private:
    void sample_loss_grad(const GradVector& x, std::size_t row, double* loss_out,
                          GradVector* grad_out) const;

    std::vector<double> features_;  // row-major n_samples x d_in
    std::vector<int> labels_;
    std::size_t d_in_;
    std::size_t classes_;
    double l2_;
};

/// Synthetic binary logistic data: features N(0, I), labels drawn from a
/// planted weight vector of the given norm. A disjoint test set of the same
/// size is generated for evaluation.
std::unique_ptr<LogisticProblem> make_synthetic_logistic(std::size_t n_samples, std::size_t d,
                                                         std::uint64_t data_seed, double l2,
                                                         double planted_norm);

/// Quadratic with x* drawn N(0, I) from data_seed.
std::unique_ptr<QuadraticProblem> make_random_quadratic(std::size_t d, std::uint64_t data_seed,
                                                        double noise_sigma);

/// Parses the IDX image/label pair (big-endian, magics 0x803 / 0x801),
/// normalizes pixels to [0, 1], keeps at most max_per_class samples per
/// digit, and returns a multinomial linear problem over 10 classes.
std::unique_ptr<MultinomialProblem> load_mnist_subset(const std::string& images_path,
                                                      const std::string& labels_path,
                                                      int max_per_class, double l2 = 0.0);

}  // namespace byzsgd
