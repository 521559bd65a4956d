#pragma once

#include <memory>
#include <vector>

#include "dsl/learners.hpp"
#include "dsl/learners/tree.hpp"

namespace dsl {

class ArchiveReader;

/// Random forest or extremely randomized trees: the prediction is the
/// unweighted mean of the per-tree leaf class proportions.
///
/// Both variants grow trees on the training records sorted into a canonical
/// order (lexicographic by feature values, then label), and every random
/// draw is keyed to that order, so a permutation of the training records
/// yields the same forest.
class ForestClassifier final : public Classifier {
public:
    ForestClassifier(std::vector<DecisionTree> trees, int num_classes);

    /// Bootstrap per tree, Gini impurity, ceil(sqrt(l)) candidate features per
    /// split. Split points are searched over at most max_bins quantile bins.
    static std::shared_ptr<const ForestClassifier> train_random_forest(
        const ForestParams& params, std::uint64_t seed, const FeatureMatrix& features,
        const LabelVector& labels);

    /// Full training set per tree; each candidate feature gets one uniform
    /// threshold between its node-local minimum and maximum.
    static std::shared_ptr<const ForestClassifier> train_extra_trees(
        const ForestParams& params, std::uint64_t seed, const FeatureMatrix& features,
        const LabelVector& labels);

    void predict_into(const FeatureMatrix& features, Matrix& out) const override;
    void write(ArchiveWriter& out) const override;
    static std::shared_ptr<const ForestClassifier> read(ArchiveReader& in);

    const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

private:
    std::vector<DecisionTree> trees_;
    int num_classes_;
};

/// Canonical record order used by the forests.
std::vector<std::size_t> canonical_order(const FeatureMatrix& features, const LabelVector& labels);

}  // namespace dsl
