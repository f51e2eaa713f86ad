#include "byzsgd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace byzsgd {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

// ---- QuadraticProblem ----

QuadraticProblem::QuadraticProblem(GradVector optimum, double noise_sigma)
    : optimum_(std::move(optimum)), noise_sigma_(noise_sigma) {
    require(!optimum_.empty(), "quadratic: dimension must be positive");
    require_param(noise_sigma >= 0.0, "quadratic: noise sigma must be nonnegative");
}

GradVector QuadraticProblem::stochastic_gradient(const GradVector& x, Rng& rng,
                                                 int /*batch_size*/) const {
    require(x.size() == dim(), "quadratic: parameter length mismatch");
    GradVector g(dim());
    for (std::size_t j = 0; j < dim(); ++j)
        g[j] = (x[j] - optimum_[j]) + noise_sigma_ * rng.normal();
    return g;
}

GradVector QuadraticProblem::full_gradient(const GradVector& x) const {
    require(x.size() == dim(), "quadratic: parameter length mismatch");
    GradVector g(dim());
    for (std::size_t j = 0; j < dim(); ++j) g[j] = x[j] - optimum_[j];
    return g;
}

double QuadraticProblem::loss(const GradVector& x) const {
    return 0.5 * squared_distance(x, optimum_);
}

double QuadraticProblem::eval_metric(const GradVector& x) const {
    return std::sqrt(squared_distance(x, optimum_));
}

// ---- LogisticProblem ----

LogisticProblem::LogisticProblem(std::vector<double> features, std::vector<int> labels,
                                 std::size_t d, double l2, std::vector<double> eval_features,
                                 std::vector<int> eval_labels)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      d_(d),
      l2_(l2),
      eval_features_(std::move(eval_features)),
      eval_labels_(std::move(eval_labels)) {
    require(d_ >= 1, "logistic: dimension must be positive");
    require(features_.size() == labels_.size() * d_, "logistic: feature/label size mismatch");
    require(!labels_.empty(), "logistic: need at least one sample");
    for (int y : labels_) require(y == 0 || y == 1, "logistic: labels must be 0 or 1");
    if (eval_features_.empty()) {
        eval_features_ = features_;
        eval_labels_ = labels_;
    }
    require(eval_features_.size() == eval_labels_.size() * d_,
            "logistic: eval feature/label size mismatch");
}

void LogisticProblem::accumulate_sample(const GradVector& x, std::size_t row,
                                        GradVector& grad) const {
    const double* f = features_.data() + row * d_;
    double z = 0.0;
    for (std::size_t j = 0; j < d_; ++j) z += x[j] * f[j];
    const double residual = sigmoid(z) - static_cast<double>(labels_[row]);
    for (std::size_t j = 0; j < d_; ++j) grad[j] += residual * f[j];
}

GradVector LogisticProblem::stochastic_gradient(const GradVector& x, Rng& rng,
                                                int batch_size) const {
    require(x.size() == d_, "logistic: parameter length mismatch");
    require_param(batch_size >= 1, "logistic: batch size must be positive");
    GradVector grad(d_, 0.0);
    for (int b = 0; b < batch_size; ++b)
        accumulate_sample(x, rng.uniform_index(labels_.size()), grad);
    const double inv = 1.0 / batch_size;
    for (std::size_t j = 0; j < d_; ++j) grad[j] = grad[j] * inv + l2_ * x[j];
    return grad;
}

GradVector LogisticProblem::full_gradient(const GradVector& x) const {
    require(x.size() == d_, "logistic: parameter length mismatch");
    GradVector grad(d_, 0.0);
    for (std::size_t i = 0; i < labels_.size(); ++i) accumulate_sample(x, i, grad);
    const double inv = 1.0 / static_cast<double>(labels_.size());
    for (std::size_t j = 0; j < d_; ++j) grad[j] = grad[j] * inv + l2_ * x[j];
    return grad;
}

double LogisticProblem::loss(const GradVector& x) const {
    require(x.size() == d_, "logistic: parameter length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const double* f = features_.data() + i * d_;
        double z = 0.0;
        for (std::size_t j = 0; j < d_; ++j) z += x[j] * f[j];
        total += softplus(z) - static_cast<double>(labels_[i]) * z;
    }
    return total / static_cast<double>(labels_.size()) + 0.5 * l2_ * dot(x, x);
}

double LogisticProblem::eval_metric(const GradVector& x) const {
    require(x.size() == d_, "logistic: parameter length mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < eval_labels_.size(); ++i) {
        const double* f = eval_features_.data() + i * d_;
        double z = 0.0;
        for (std::size_t j = 0; j < d_; ++j) z += x[j] * f[j];
        if ((z > 0.0 ? 1 : 0) == eval_labels_[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval_labels_.size());
}

// ---- MultinomialProblem ----

MultinomialProblem::MultinomialProblem(std::vector<double> features, std::vector<int> labels,
                                       std::size_t d_in, int n_classes, double l2)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      d_in_(d_in),
      classes_(static_cast<std::size_t>(n_classes)),
      l2_(l2) {
    require(d_in_ >= 1 && n_classes >= 2, "multinomial: need d_in >= 1 and >= 2 classes");
    require(features_.size() == labels_.size() * d_in_,
            "multinomial: feature/label size mismatch");
    require(!labels_.empty(), "multinomial: need at least one sample");
    for (int y : labels_)
        require(y >= 0 && y < n_classes, "multinomial: label out of class range");
}

void MultinomialProblem::sample_loss_grad(const GradVector& x, std::size_t row,
                                          double* loss_out, GradVector* grad_out) const {
    const double* f = features_.data() + row * d_in_;
    const double* bias = x.data() + d_in_ * classes_;
    std::vector<double> logits(classes_);
    for (std::size_t k = 0; k < classes_; ++k) {
        double z = bias[k];
        // weights are stored feature-major: w[j * K + k]
        for (std::size_t j = 0; j < d_in_; ++j) z += x[j * classes_ + k] * f[j];
        logits[k] = z;
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - zmax);
    const int y = labels_[row];
    if (loss_out) *loss_out += std::log(denom) + zmax - logits[static_cast<std::size_t>(y)];
    if (grad_out) {
        GradVector& g = *grad_out;
        for (std::size_t k = 0; k < classes_; ++k) {
            const double p = std::exp(logits[k] - zmax) / denom;
            const double residual = p - (static_cast<std::size_t>(y) == k ? 1.0 : 0.0);
            for (std::size_t j = 0; j < d_in_; ++j) g[j * classes_ + k] += residual * f[j];
            g[d_in_ * classes_ + k] += residual;
        }
    }
}

GradVector MultinomialProblem::stochastic_gradient(const GradVector& x, Rng& rng,
                                                   int batch_size) const {
    require(x.size() == dim(), "multinomial: parameter length mismatch");
    require_param(batch_size >= 1, "multinomial: batch size must be positive");
    GradVector grad(dim(), 0.0);
    for (int b = 0; b < batch_size; ++b)
        sample_loss_grad(x, rng.uniform_index(labels_.size()), nullptr, &grad);
    const double inv = 1.0 / batch_size;
    for (std::size_t j = 0; j < dim(); ++j) grad[j] = grad[j] * inv + l2_ * x[j];
    return grad;
}

GradVector MultinomialProblem::full_gradient(const GradVector& x) const {
    require(x.size() == dim(), "multinomial: parameter length mismatch");
    GradVector grad(dim(), 0.0);
    for (std::size_t i = 0; i < labels_.size(); ++i) sample_loss_grad(x, i, nullptr, &grad);
    const double inv = 1.0 / static_cast<double>(labels_.size());
    for (std::size_t j = 0; j < dim(); ++j) grad[j] = grad[j] * inv + l2_ * x[j];
    return grad;
}

double MultinomialProblem::loss(const GradVector& x) const {
    require(x.size() == dim(), "multinomial: parameter length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < labels_.size(); ++i) sample_loss_grad(x, i, &total, nullptr);
    return total / static_cast<double>(labels_.size()) + 0.5 * l2_ * dot(x, x);
}

double MultinomialProblem::eval_metric(const GradVector& x) const {
    require(x.size() == dim(), "multinomial: parameter length mismatch");
    const double* bias = x.data() + d_in_ * classes_;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const double* f = features_.data() + i * d_in_;
        std::size_t best = 0;
        double best_z = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < classes_; ++k) {
            double z = bias[k];
            for (std::size_t j = 0; j < d_in_; ++j) z += x[j * classes_ + k] * f[j];
            if (z > best_z) {
                best_z = z;
                best = k;
            }
        }
        if (best == static_cast<std::size_t>(labels_[i])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels_.size());
}

// ---- factories ----

std::unique_ptr<LogisticProblem> make_synthetic_logistic(std::size_t n_samples, std::size_t d,
                                                         std::uint64_t data_seed, double l2,
                                                         double planted_norm) {
    require_param(n_samples >= 1 && d >= 1, "synthetic logistic: need samples and dims");
    Rng rng = Rng::stream(data_seed, 0x10617);
    GradVector w(d);
    for (double& v : w) v = rng.normal();
    const double scale = planted_norm / std::max(norm2(w), 1e-300);
    for (double& v : w) v *= scale;

    auto draw_set = [&](Rng& r, std::vector<double>& feats, std::vector<int>& labels) {
        feats.resize(n_samples * d);
        labels.resize(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) {
            double z = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double v = r.normal();
                feats[i * d + j] = v;
                z += w[j] * v;
            }
            labels[i] = r.uniform() < sigmoid(z) ? 1 : 0;
        }
    };

    std::vector<double> train_x, test_x;
    std::vector<int> train_y, test_y;
    Rng train_rng = Rng::stream(data_seed, 0x10617, 1);
    Rng test_rng = Rng::stream(data_seed, 0x10617, 2);
    draw_set(train_rng, train_x, train_y);
    draw_set(test_rng, test_x, test_y);
    return std::make_unique<LogisticProblem>(std::move(train_x), std::move(train_y), d, l2,
                                             std::move(test_x), std::move(test_y));
}

std::unique_ptr<QuadraticProblem> make_random_quadratic(std::size_t d, std::uint64_t data_seed,
                                                        double noise_sigma) {
    Rng rng = Rng::stream(data_seed, 0x90AD);
    GradVector x_star(d);
    for (double& v : x_star) v = rng.normal();
    return std::make_unique<QuadraticProblem>(std::move(x_star), noise_sigma);
}

// ---- IDX parsing ----

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path, const char* field) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        throw FormatError(path + ": truncated file while reading " + field);
    return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
           (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

}  // namespace

std::unique_ptr<MultinomialProblem> load_mnist_subset(const std::string& images_path,
                                                      const std::string& labels_path,
                                                      int max_per_class, double l2) {
    require_param(max_per_class >= 1, "load_mnist_subset: max_per_class must be positive");

    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError(images_path + ": cannot open image file");
    const std::uint32_t img_magic = read_be32(img, images_path, "magic");
    if (img_magic != 0x00000803u)
        throw FormatError(images_path + ": bad magic in image file (expected 0x00000803)");
    const std::uint32_t n_images = read_be32(img, images_path, "image count");
    const std::uint32_t rows = read_be32(img, images_path, "row count");
    const std::uint32_t cols = read_be32(img, images_path, "column count");

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError(labels_path + ": cannot open label file");
    const std::uint32_t lab_magic = read_be32(lab, labels_path, "magic");
    if (lab_magic != 0x00000801u)
        throw FormatError(labels_path + ": bad magic in label file (expected 0x00000801)");
    const std::uint32_t n_labels = read_be32(lab, labels_path, "label count");

    if (n_images != n_labels)
        throw FormatError(images_path + ": count mismatch (" + std::to_string(n_images) +
                          " images vs " + std::to_string(n_labels) + " labels)");

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> img_buf(pixels);
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<int> per_class(10, 0);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        if (!img.read(reinterpret_cast<char*>(img_buf.data()),
                      static_cast<std::streamsize>(pixels)))
            throw FormatError(images_path + ": truncated file while reading pixel data");
        char y = 0;
        if (!lab.read(&y, 1))
            throw FormatError(labels_path + ": truncated file while reading label data");
        const int label = static_cast<unsigned char>(y);
        if (label > 9) throw FormatError(labels_path + ": label out of range 0..9");
        if (per_class[static_cast<std::size_t>(label)] >= max_per_class) continue;
        ++per_class[static_cast<std::size_t>(label)];
        labels.push_back(label);
        for (unsigned char px : img_buf) features.push_back(px / 255.0);
    }
    if (labels.empty()) throw FormatError(images_path + ": no usable samples");
    return std::make_unique<MultinomialProblem>(std::move(features), std::move(labels), pixels,
                                                10, l2);
}

}  // namespace byzsgd
