#include "dsl/learners/dummy.hpp"

#include <algorithm>

#include "dsl/archive.hpp"
#include "dsl/error.hpp"

namespace dsl {

ConstantClassifier::ConstantClassifier(std::vector<double> distribution)
    : distribution_(std::move(distribution)) {
    if (distribution_.empty()) throw InvalidArgument("constant classifier needs a distribution");
}

std::shared_ptr<const ConstantClassifier> ConstantClassifier::uniform(int num_classes) {
    return std::make_shared<ConstantClassifier>(
        std::vector<double>(static_cast<std::size_t>(num_classes), 1.0 / num_classes));
}

std::shared_ptr<const ConstantClassifier> ConstantClassifier::prior(const LabelVector& labels) {
    const auto counts = labels.class_counts();
    std::vector<double> dist(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
        dist[c] = static_cast<double>(counts[c]) / static_cast<double>(labels.size());
    }
    return std::make_shared<ConstantClassifier>(std::move(dist));
}

void ConstantClassifier::predict_into(const FeatureMatrix& features, Matrix& out) const {
    for (std::size_t i = 0; i < features.rows(); ++i) {
        std::copy(distribution_.begin(), distribution_.end(), out.row(i).begin());
    }
}

void ConstantClassifier::write(ArchiveWriter& out) const { out.f64s(distribution_); }

std::shared_ptr<const ConstantClassifier> ConstantClassifier::read(ArchiveReader& in) {
    return std::make_shared<ConstantClassifier>(in.f64s());
}

}  // namespace dsl
