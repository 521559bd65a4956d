#pragma once

#include <memory>
#include <vector>

#include "dsl/learners.hpp"
#include "dsl/learners/tree.hpp"

namespace dsl {

class ArchiveReader;

/// Multiclass gradient boosting on the softmax cross entropy. Every round
/// fits one depth-limited regression tree per class to the gradients at the
/// current margins; leaf values are a single Newton step
/// -G / (H + l2_leaf), scaled by the learning rate. Rows and columns are
/// never subsampled.
class GradientBoostedTrees final : public Classifier {
public:
    /// `trees` holds rounds x classes trees, round-major.
    GradientBoostedTrees(std::vector<DecisionTree> trees, int num_classes);

    static std::shared_ptr<const GradientBoostedTrees> train(const BoostingParams& params,
                                                             const FeatureMatrix& features,
                                                             const LabelVector& labels);

    void predict_into(const FeatureMatrix& features, Matrix& out) const override;
    void write(ArchiveWriter& out) const override;
    static std::shared_ptr<const GradientBoostedTrees> read(ArchiveReader& in);

    std::size_t rounds() const noexcept { return trees_.size() / static_cast<std::size_t>(num_classes_); }
    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

private:
    std::vector<DecisionTree> trees_;
    int num_classes_;
};

}  // namespace dsl
