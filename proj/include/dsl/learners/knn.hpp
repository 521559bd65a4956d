#pragma once

#include <memory>
#include <vector>

#include "dsl/learners.hpp"

namespace dsl {

class ArchiveReader;

/// Unweighted vote over the `neighbors` nearest training records by
/// Euclidean distance on raw features. Equal distances go to the lower
/// training index.
class KNearestNeighbors final : public Classifier {
public:
    KNearestNeighbors(Matrix training_features, std::vector<int> training_labels, int num_classes,
                      std::size_t neighbors);

    static std::shared_ptr<const KNearestNeighbors> train(const KnnParams& params,
                                                          const FeatureMatrix& features,
                                                          const LabelVector& labels);

    void predict_into(const FeatureMatrix& features, Matrix& out) const override;
    void write(ArchiveWriter& out) const override;
    static std::shared_ptr<const KNearestNeighbors> read(ArchiveReader& in);

    const Matrix& training_features() const noexcept { return x_; }
    const std::vector<int>& training_labels() const noexcept { return y_; }

private:
    Matrix x_;
    std::vector<int> y_;
    int num_classes_;
    std::size_t neighbors_;
};

}  // namespace dsl
