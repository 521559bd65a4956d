#pragma once

#include <memory>
#include <vector>

#include "dsl/learners.hpp"

namespace dsl {

class ArchiveReader;

/// Predicts one fixed distribution for every record: uniform, or the
/// training class prior.
class ConstantClassifier final : public Classifier {
public:
    explicit ConstantClassifier(std::vector<double> distribution);

    static std::shared_ptr<const ConstantClassifier> uniform(int num_classes);
    static std::shared_ptr<const ConstantClassifier> prior(const LabelVector& labels);

    void predict_into(const FeatureMatrix& features, Matrix& out) const override;
    void write(ArchiveWriter& out) const override;
    static std::shared_ptr<const ConstantClassifier> read(ArchiveReader& in);

    const std::vector<double>& distribution() const noexcept { return distribution_; }

private:
    std::vector<double> distribution_;
};

}  // namespace dsl
