#include "dsl/cross_validation.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "dsl/error.hpp"
#include "dsl/parallel.hpp"
#include "dsl/random.hpp"

namespace dsl {

FoldAssignment::FoldAssignment(std::vector<int> fold_of, std::size_t k)
    : fold_of_(std::move(fold_of)), k_(k) {
    if (k_ < 2) throw InvalidArgument("fold count must be >= 2");
    std::vector<std::size_t> sizes(k_, 0);
    for (int f : fold_of_) {
        if (f < 0 || static_cast<std::size_t>(f) >= k_) {
            throw InvalidArgument("fold index " + std::to_string(f) + " outside [0, " +
                                  std::to_string(k_) + ")");
        }
        ++sizes[static_cast<std::size_t>(f)];
    }
    for (std::size_t f = 0; f < k_; ++f) {
        if (sizes[f] == 0) throw InvalidArgument("fold " + std::to_string(f) + " is empty");
    }
}

std::vector<std::size_t> FoldAssignment::validation_indices(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_.size(); ++i) {
        if (static_cast<std::size_t>(fold_of_[i]) == f) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::training_indices(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_.size(); ++i) {
        if (static_cast<std::size_t>(fold_of_[i]) != f) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
    std::vector<std::size_t> sizes(k_, 0);
    for (int f : fold_of_) ++sizes[static_cast<std::size_t>(f)];
    return sizes;
}

FoldAssignment stratified_folds(const LabelVector& labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgument("stratified_folds: k must be >= 2");
    if (k > labels.size()) {
        throw InvalidArgument("stratified_folds: k = " + std::to_string(k) + " exceeds " +
                              std::to_string(labels.size()) + " records");
    }
    const auto j = static_cast<std::size_t>(labels.num_classes());
    std::vector<std::vector<std::size_t>> members(j);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < j; ++c) {
        if (members[c].size() < k) {
            throw InvalidArgument("stratified_folds: class " + std::to_string(c) + " has " +
                                  std::to_string(members[c].size()) + " records, fewer than k = " +
                                  std::to_string(k));
        }
    }

    Rng rng(seed);
    std::vector<int> fold_of(labels.size(), 0);
    std::size_t dealt = 0;
    for (auto& group : members) {
        rng.shuffle(group.begin(), group.end());
        for (std::size_t i : group) fold_of[i] = static_cast<int>(dealt++ % k);
    }
    return FoldAssignment(std::move(fold_of), k);
}

TrainTestSplit stratified_split(const LabelVector& labels, std::size_t train_count,
                                std::size_t test_count, std::uint64_t seed) {
    if (train_count + test_count > labels.size()) {
        throw InvalidArgument("stratified_split: " + std::to_string(train_count + test_count) +
                              " records requested, " + std::to_string(labels.size()) + " available");
    }
    const auto j = static_cast<std::size_t>(labels.num_classes());
    std::vector<std::vector<std::size_t>> members(j);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }

    // Every record gets a quantile key (rank + 0.5) / class size within its
    // shuffled class; any prefix of the key order is then near-proportional.
    Rng rng(seed);
    struct Keyed {
        double key;
        std::size_t cls;
        std::size_t index;
    };
    std::vector<Keyed> order;
    order.reserve(labels.size());
    for (std::size_t c = 0; c < j; ++c) {
        rng.shuffle(members[c].begin(), members[c].end());
        const double size = static_cast<double>(members[c].size());
        for (std::size_t r = 0; r < members[c].size(); ++r) {
            order.push_back({(static_cast<double>(r) + 0.5) / size, c, members[c][r]});
        }
    }
    std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
        if (a.key != b.key) return a.key < b.key;
        return a.cls < b.cls;
    });

    TrainTestSplit split;
    for (std::size_t t = 0; t < train_count; ++t) split.train.push_back(order[t].index);
    for (std::size_t t = train_count; t < train_count + test_count; ++t) split.test.push_back(order[t].index);
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

FoldFit fit_fold(const LearnerSpec& spec, const Dataset& dataset, const FoldAssignment& folds,
                 std::size_t fold) {
    const LabelVector& labels = dataset.require_labels();
    if (folds.size() != dataset.size()) {
        throw DimensionError("fold assignment covers " + std::to_string(folds.size()) +
                             " records, dataset has " + std::to_string(dataset.size()));
    }
    const auto train_rows = folds.training_indices(fold);
    auto validation_rows = folds.validation_indices(fold);
    TrainedModel model =
        fit(spec, dataset.features.select_rows(train_rows), labels.select(train_rows));
    ProbabilityMatrix probs = model.predict_proba(dataset.features.select_rows(validation_rows));
    return {std::move(model), std::move(validation_rows), std::move(probs)};
}

ProbabilityMatrix assemble_out_of_fold(std::span<const FoldFit> fits, std::size_t rows,
                                       std::size_t classes) {
    Matrix out(rows, classes, 0.0);
    std::vector<bool> filled(rows, false);
    for (const FoldFit& fit : fits) {
        for (std::size_t r = 0; r < fit.validation_rows.size(); ++r) {
            const std::size_t i = fit.validation_rows[r];
            if (i >= rows || filled[i]) throw InvalidArgument("fold validation rows overlap");
            filled[i] = true;
            std::copy(fit.validation_probs.row(r).begin(), fit.validation_probs.row(r).end(),
                      out.row(i).begin());
        }
    }
    if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
        throw InvalidArgument("fold validation rows do not cover every record");
    }
    return ProbabilityMatrix(std::move(out));
}

OutOfFoldResult out_of_fold_predictions(const LearnerSpec& spec, const Dataset& dataset,
                                        const FoldAssignment& folds,
                                        std::span<const std::uint64_t> fold_seeds,
                                        std::size_t workers) {
    const std::size_t k = folds.folds();
    if (!fold_seeds.empty() && fold_seeds.size() != k) {
        throw InvalidArgument("out_of_fold_predictions: one seed per fold required");
    }
    std::vector<std::optional<FoldFit>> slots(k);
    parallel_for(k, workers, [&](std::size_t f) {
        LearnerSpec fold_spec = spec;
        fold_spec.seed = fold_seeds.empty() ? derive_seed({spec.seed, f}) : fold_seeds[f];
        slots[f] = fit_fold(fold_spec, dataset, folds, f);
    });

    std::vector<FoldFit> fits;
    fits.reserve(k);
    for (auto& s : slots) fits.push_back(std::move(*s));
    OutOfFoldResult result{
        assemble_out_of_fold(fits, dataset.size(),
                             static_cast<std::size_t>(dataset.require_labels().num_classes())),
        {}};
    for (auto& fit : fits) result.fold_models.push_back(std::move(fit.model));
    return result;
}

}  // namespace dsl
