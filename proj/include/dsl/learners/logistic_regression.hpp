#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dsl/learners.hpp"

namespace dsl {

class ArchiveReader;

/// Penalized multinomial cross entropy over standardized features:
///   J(W, b) = -(1/n) sum_i log softmax(W x_i + b)[y_i] + (l2 / 2) ||W||^2
/// The intercept is not penalized.
class SoftmaxObjective {
public:
    SoftmaxObjective(const Matrix& features, const LabelVector& labels, double l2_penalty);

    /// Returns J and writes dJ/dW (classes x features) and dJ/db.
    double evaluate(const Matrix& coef, std::span<const double> intercept, Matrix& grad_coef,
                    std::span<double> grad_intercept) const;

    std::size_t classes() const noexcept { return classes_; }
    std::size_t features() const noexcept { return x_.cols(); }

private:
    const Matrix& x_;
    const LabelVector& y_;
    double l2_;
    std::size_t classes_;
};

class LogisticRegression final : public Classifier {
public:
    LogisticRegression(std::vector<double> mean, std::vector<double> scale, Matrix coef,
                       std::vector<double> intercept);

    static std::shared_ptr<const LogisticRegression> train(const LogisticRegressionParams& params,
                                                           const FeatureMatrix& features,
                                                           const LabelVector& labels);

    void predict_into(const FeatureMatrix& features, Matrix& out) const override;
    void write(ArchiveWriter& out) const override;
    static std::shared_ptr<const LogisticRegression> read(ArchiveReader& in);

    const Matrix& coefficients() const noexcept { return coef_; }
    const std::vector<double>& intercept() const noexcept { return intercept_; }
    std::size_t epochs_run() const noexcept { return epochs_; }

private:
    std::vector<double> mean_;
    std::vector<double> scale_;
    Matrix coef_;
    std::vector<double> intercept_;
    std::size_t epochs_ = 0;
};

/// Column means and standard deviations; zero-variance columns get scale 1
/// so they are centered only.
void standardization_parameters(const FeatureMatrix& features, std::vector<double>& mean,
                                std::vector<double>& scale);

}  // namespace dsl
