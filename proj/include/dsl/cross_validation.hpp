#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dsl/core_data.hpp"
#include "dsl/learners.hpp"

namespace dsl {

/// Partition of record indices into k folds.
class FoldAssignment {
public:
    FoldAssignment() = default;
    /// Throws InvalidArgument unless every value is in [0, k) and every fold
    /// is nonempty.
    FoldAssignment(std::vector<int> fold_of, std::size_t k);

    std::size_t folds() const noexcept { return k_; }
    std::size_t size() const noexcept { return fold_of_.size(); }
    int operator[](std::size_t i) const noexcept { return fold_of_[i]; }
    std::span<const int> values() const noexcept { return fold_of_; }

    /// Records in fold f, ascending.
    std::vector<std::size_t> validation_indices(std::size_t f) const;
    /// Records outside fold f, ascending.
    std::vector<std::size_t> training_indices(std::size_t f) const;
    std::vector<std::size_t> fold_sizes() const;

    bool operator==(const FoldAssignment&) const = default;

private:
    std::vector<int> fold_of_;
    std::size_t k_ = 0;
};

/// Shuffles each class's records with a seeded generator, then deals them
/// round-robin into k folds. The deal continues across classes, so fold sizes
/// differ by at most one overall and by at most one within every class.
/// Throws InvalidArgument when k < 2, k > n, or a class has fewer than k
/// records.
FoldAssignment stratified_folds(const LabelVector& labels, std::size_t k, std::uint64_t seed);

struct TrainTestSplit {
    std::vector<std::size_t> train;  ///< ascending record indices
    std::vector<std::size_t> test;
};

/// Seeded stratified subsample: `train_count` records for training and
/// `test_count` disjoint records for testing, each with class proportions
/// as close to the full set's as the counts allow. Throws InvalidArgument
/// when the counts exceed the record count.
TrainTestSplit stratified_split(const LabelVector& labels, std::size_t train_count,
                                std::size_t test_count, std::uint64_t seed);

/// One learner fit on every record outside fold `fold`, with its predictions
/// for the records inside it.
struct FoldFit {
    TrainedModel model;
    std::vector<std::size_t> validation_rows;
    ProbabilityMatrix validation_probs;
};

FoldFit fit_fold(const LearnerSpec& spec, const Dataset& dataset, const FoldAssignment& folds,
                 std::size_t fold);

/// Scatters per-fold validation predictions back into record order.
ProbabilityMatrix assemble_out_of_fold(std::span<const FoldFit> fits, std::size_t rows,
                                       std::size_t classes);

struct OutOfFoldResult {
    ProbabilityMatrix oof;
    std::vector<TrainedModel> fold_models;
};

/// Out-of-fold predictions of one learner. Fold f's model is fit with seed
/// fold_seeds[f] when given, otherwise derive_seed({spec.seed, f}).
OutOfFoldResult out_of_fold_predictions(const LearnerSpec& spec, const Dataset& dataset,
                                        const FoldAssignment& folds,
                                        std::span<const std::uint64_t> fold_seeds = {},
                                        std::size_t workers = 1);

}  // namespace dsl
