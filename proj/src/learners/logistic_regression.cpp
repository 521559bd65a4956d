#include "dsl/learners/logistic_regression.hpp"

#include <algorithm>
#include <cmath>

#include "dsl/archive.hpp"
#include "dsl/error.hpp"
#include "dsl/learners/softmax.hpp"
#include "dsl/simd/kernels.hpp"

namespace dsl {

void standardization_parameters(const FeatureMatrix& features, std::vector<double>& mean,
                                std::vector<double>& scale) {
    const std::size_t n = features.rows();
    const std::size_t l = features.cols();
    mean.assign(l, 0.0);
    scale.assign(l, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features.row(i);
        for (std::size_t f = 0; f < l; ++f) mean[f] += row[f];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = features.row(i);
        for (std::size_t f = 0; f < l; ++f) {
            const double d = row[f] - mean[f];
            scale[f] += d * d;
        }
    }
    for (double& s : scale) {
        s = std::sqrt(s / static_cast<double>(n));
        if (!(s > 1e-12)) s = 1.0;
    }
}

namespace {

Matrix standardize(const FeatureMatrix& features, const std::vector<double>& mean,
                   const std::vector<double>& scale) {
    Matrix out(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto src = features.row(i);
        auto dst = out.row(i);
        for (std::size_t f = 0; f < src.size(); ++f) dst[f] = (src[f] - mean[f]) / scale[f];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

SoftmaxObjective::SoftmaxObjective(const Matrix& features, const LabelVector& labels,
                                   double l2_penalty)
    : x_(features), y_(labels), l2_(l2_penalty),
      classes_(static_cast<std::size_t>(labels.num_classes())) {
    if (features.rows() != labels.size()) throw DimensionError("objective: rows vs labels");
}

double SoftmaxObjective::evaluate(const Matrix& coef, std::span<const double> intercept,
                                  Matrix& grad_coef, std::span<double> grad_intercept) const {
    const auto& k = simd::kernels();
    const std::size_t n = x_.rows();
    const std::size_t l = x_.cols();
    const std::size_t j = classes_;
    const double inv_n = 1.0 / static_cast<double>(n);

    std::fill(grad_coef.values().begin(), grad_coef.values().end(), 0.0);
    std::fill(grad_intercept.begin(), grad_intercept.end(), 0.0);

    std::vector<double> p(j);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x_.row(i).data();
        k.dot_rows(xi, coef.values().data(), j, l, p.data());
        for (std::size_t c = 0; c < j; ++c) p[c] += intercept[c];

        const double top = *std::max_element(p.begin(), p.end());
        double sum = 0.0;
        for (double v : p) sum += std::exp(v - top);
        const double log_norm = top + std::log(sum);
        const auto yi = static_cast<std::size_t>(y_[i]);
        loss += log_norm - p[yi];

        for (std::size_t c = 0; c < j; ++c) {
            p[c] = (std::exp(p[c] - log_norm) - (c == yi ? 1.0 : 0.0)) * inv_n;
            grad_intercept[c] += p[c];
        }
        k.rank1_update(p.data(), xi, grad_coef.values().data(), j, l);
    }
    loss *= inv_n;

    double penalty = 0.0;
    const auto w = coef.values();
    auto g = grad_coef.values();
    for (std::size_t t = 0; t < w.size(); ++t) {
        penalty += w[t] * w[t];
        g[t] += l2_ * w[t];
    }
    return loss + 0.5 * l2_ * penalty;
}

// ---------------------------------------------------------------------------

LogisticRegression::LogisticRegression(std::vector<double> mean, std::vector<double> scale,
                                       Matrix coef, std::vector<double> intercept)
    : mean_(std::move(mean)), scale_(std::move(scale)), coef_(std::move(coef)),
      intercept_(std::move(intercept)) {
    if (mean_.size() != coef_.cols() || scale_.size() != coef_.cols() ||
        intercept_.size() != coef_.rows()) {
        throw DimensionError("logistic regression parameter shapes disagree");
    }
}

std::shared_ptr<const LogisticRegression> LogisticRegression::train(
    const LogisticRegressionParams& params, const FeatureMatrix& features,
    const LabelVector& labels) {
    std::vector<double> mean, scale;
    standardization_parameters(features, mean, scale);
    const Matrix x = standardize(features, mean, scale);

    const auto j = static_cast<std::size_t>(labels.num_classes());
    const std::size_t l = features.cols();
    SoftmaxObjective objective(x, labels, params.l2_penalty);

    Matrix coef(j, l, 0.0);
    std::vector<double> intercept(j, 0.0);
    Matrix grad_coef(j, l);
    std::vector<double> grad_intercept(j);

    const auto& k = simd::kernels();
    std::size_t epoch = 0;
    for (; epoch < params.max_epochs; ++epoch) {
        objective.evaluate(coef, intercept, grad_coef, grad_intercept);
        double max_abs = 0.0;
        for (double g : grad_coef.values()) max_abs = std::max(max_abs, std::abs(g));
        for (double g : grad_intercept) max_abs = std::max(max_abs, std::abs(g));
        if (max_abs < params.gradient_tolerance) break;
        k.axpy(-params.learning_rate, grad_coef.values().data(), coef.values().data(),
               coef.values().size());
        k.axpy(-params.learning_rate, grad_intercept.data(), intercept.data(), j);
    }

    auto model = std::make_shared<LogisticRegression>(std::move(mean), std::move(scale),
                                                      std::move(coef), std::move(intercept));
    model->epochs_ = epoch;
    return model;
}

void LogisticRegression::predict_into(const FeatureMatrix& features, Matrix& out) const {
    const auto& k = simd::kernels();
    const std::size_t l = coef_.cols();
    const std::size_t j = coef_.rows();
    std::vector<double> x(l);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto src = features.row(i);
        for (std::size_t f = 0; f < l; ++f) x[f] = (src[f] - mean_[f]) / scale_[f];
        auto dst = out.row(i);
        k.dot_rows(x.data(), coef_.values().data(), j, l, dst.data());
        for (std::size_t c = 0; c < j; ++c) dst[c] += intercept_[c];
        softmax_inplace(dst);
    }
}

void LogisticRegression::write(ArchiveWriter& out) const {
    out.u64(coef_.rows());
    out.u64(coef_.cols());
    out.f64s(mean_);
    out.f64s(scale_);
    out.f64s(coef_.values());
    out.f64s(intercept_);
}

std::shared_ptr<const LogisticRegression> LogisticRegression::read(ArchiveReader& in) {
    const std::size_t j = in.u64();
    const std::size_t l = in.u64();
    auto mean = in.f64s();
    auto scale = in.f64s();
    auto coef = in.f64s();
    auto intercept = in.f64s();
    if (coef.size() != j * l) throw ArchiveError("logistic regression: coefficient block length");
    return std::make_shared<LogisticRegression>(std::move(mean), std::move(scale),
                                                Matrix(j, l, std::move(coef)), std::move(intercept));
}

}  // namespace dsl
