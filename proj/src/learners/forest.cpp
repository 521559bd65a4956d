#include "dsl/learners/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "dsl/archive.hpp"
#include "dsl/error.hpp"
#include "dsl/random.hpp"

namespace dsl {

std::vector<std::size_t> canonical_order(const FeatureMatrix& features, const LabelVector& labels) {
    std::vector<std::size_t> order(features.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = features.row(a);
        const auto rb = features.row(b);
        const auto [ia, ib] = std::mismatch(ra.begin(), ra.end(), rb.begin());
        if (ia != ra.end()) return *ia < *ib;
        return labels[a] < labels[b];
    });
    return order;
}

namespace {

// Shared growth machinery. The splitter supplies the split search and the
// partition predicate; this class owns node bookkeeping and leaf payloads.
class TreeGrower {
public:
    explicit TreeGrower(std::size_t num_classes) : j_(num_classes) {
        // Pure leaves share the one-hot blocks at the front of the payload.
        payload_.assign(j_ * j_, 0.0);
        for (std::size_t c = 0; c < j_; ++c) payload_[c * j_ + c] = 1.0;
        nodes_.push_back({-1, 0, 0.0});
    }

    // Leaf payload from weighted class counts.
    void make_leaf(std::size_t node, const std::vector<std::int64_t>& counts, std::int64_t total) {
        for (std::size_t c = 0; c < j_; ++c) {
            if (counts[c] == total) {
                nodes_[node] = {-1, static_cast<std::int32_t>(c * j_), 0.0};
                return;
            }
        }
        nodes_[node] = {-1, static_cast<std::int32_t>(payload_.size()), 0.0};
        for (std::size_t c = 0; c < j_; ++c) {
            payload_.push_back(static_cast<double>(counts[c]) / static_cast<double>(total));
        }
    }

    std::size_t make_split(std::size_t node, std::size_t feature, double threshold) {
        const std::size_t left = nodes_.size();
        nodes_[node] = {static_cast<std::int32_t>(feature), static_cast<std::int32_t>(left), threshold};
        nodes_.push_back({-1, 0, 0.0});
        nodes_.push_back({-1, 0, 0.0});
        return left;
    }

    DecisionTree finish() { return DecisionTree(std::move(nodes_), std::move(payload_), j_); }

private:
    std::size_t j_;
    std::vector<DecisionTree::Node> nodes_;
    std::vector<double> payload_;
};

struct NodeTask {
    std::size_t node;
    std::size_t begin;
    std::size_t end;
    std::size_t depth;
};

bool is_pure(const std::vector<std::int64_t>& counts, std::int64_t total) {
    return std::any_of(counts.begin(), counts.end(), [&](std::int64_t c) { return c == total; });
}

// sum_c counts[c]^2 / total: the Gini proxy of one child (larger is purer).
double gini_proxy(std::int64_t sq, std::int64_t total) {
    return static_cast<double>(sq) / static_cast<double>(total);
}

std::size_t resolve_max_features(const ForestParams& params, std::size_t l) {
    if (params.max_features != 0) return std::min(params.max_features, l);
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(l))));
}

// Training set in canonical order, column-major.
struct CanonicalData {
    std::size_t n = 0;
    std::size_t l = 0;
    std::size_t j = 0;
    std::vector<int> y;
    std::vector<double> columns;  // columns[f * n + i]

    CanonicalData(const FeatureMatrix& features, const LabelVector& labels)
        : n(features.rows()), l(features.cols()), j(static_cast<std::size_t>(labels.num_classes())) {
        const auto order = canonical_order(features, labels);
        y.resize(n);
        columns.resize(n * l);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = labels[order[i]];
            const auto row = features.row(order[i]);
            for (std::size_t f = 0; f < l; ++f) columns[f * n + i] = row[f];
        }
    }
};

// ---------------------------------------------------------------------------
// Random forest on binned features.

class BinnedGiniSplitter {
public:
    BinnedGiniSplitter(const CanonicalData& data, const FeatureBinner& binner,
                       const std::vector<std::uint8_t>& codes, std::size_t max_features)
        : data_(data), binner_(binner), codes_(codes), max_features_(max_features),
          hist_(256 * data.j, 0), bin_weight_(256, 0), left_(data.j), features_(data.l) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        touched_.reserve(256);
    }

    DecisionTree grow(Rng& rng, const ForestParams& params) {
        const std::size_t n = data_.n;
        weight_.assign(n, 0);
        for (std::size_t d = 0; d < n; ++d) ++weight_[rng.uniform_index(n)];
        rows_.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (weight_[i] > 0) rows_.push_back(static_cast<std::uint32_t>(i));
        }

        TreeGrower grower(data_.j);
        std::vector<NodeTask> stack{{0, 0, rows_.size(), 0}};
        std::vector<std::int64_t> counts(data_.j);
        while (!stack.empty()) {
            const NodeTask task = stack.back();
            stack.pop_back();

            std::fill(counts.begin(), counts.end(), 0);
            std::int64_t total = 0;
            for (std::size_t r = task.begin; r < task.end; ++r) {
                const std::uint32_t i = rows_[r];
                counts[static_cast<std::size_t>(data_.y[i])] += weight_[i];
                total += weight_[i];
            }
            const bool depth_capped = params.max_depth != 0 && task.depth >= params.max_depth;
            if (total < static_cast<std::int64_t>(params.min_samples_split) || depth_capped ||
                is_pure(counts, total)) {
                grower.make_leaf(task.node, counts, total);
                continue;
            }

            const auto split = best_split(rng, task, counts, total);
            if (!split) {
                grower.make_leaf(task.node, counts, total);
                continue;
            }
            const auto [feature, bin] = *split;
            const std::uint8_t* col = codes_.data() + feature * n;
            const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                            rows_.begin() + static_cast<std::ptrdiff_t>(task.end),
                                            [&](std::uint32_t i) { return col[i] <= bin; });
            const auto split_at = static_cast<std::size_t>(mid - rows_.begin());
            const std::size_t left = grower.make_split(task.node, feature, binner_.cut(feature, bin));
            stack.push_back({left + 1, split_at, task.end, task.depth + 1});
            stack.push_back({left, task.begin, split_at, task.depth + 1});
        }
        return grower.finish();
    }

private:
    std::optional<std::pair<std::size_t, std::uint8_t>> best_split(
        Rng& rng, const NodeTask& task, const std::vector<std::int64_t>& counts,
        std::int64_t total) {
        const std::size_t n = data_.n;
        const std::size_t j = data_.j;
        std::int64_t total_sq = 0;
        for (std::int64_t c : counts) total_sq += c * c;

        std::optional<std::pair<std::size_t, std::uint8_t>> best;
        double best_score = -1.0;
        std::size_t evaluated = 0;
        for (std::size_t d = 0; d < data_.l && evaluated < max_features_; ++d) {
            std::swap(features_[d], features_[d + rng.uniform_index(data_.l - d)]);
            const std::size_t f = features_[d];
            const std::uint8_t* col = codes_.data() + f * n;

            touched_.clear();
            for (std::size_t r = task.begin; r < task.end; ++r) {
                const std::uint32_t i = rows_[r];
                const std::uint8_t b = col[i];
                if (bin_weight_[b] == 0) touched_.push_back(b);
                bin_weight_[b] += weight_[i];
                hist_[b * j + static_cast<std::size_t>(data_.y[i])] += weight_[i];
            }
            if (touched_.size() > 1) {
                ++evaluated;
                std::sort(touched_.begin(), touched_.end());
                std::fill(left_.begin(), left_.end(), 0);
                std::int64_t sq_left = 0;
                std::int64_t sq_right = total_sq;
                std::int64_t n_left = 0;
                for (std::size_t t = 0; t + 1 < touched_.size(); ++t) {
                    const std::uint8_t b = touched_[t];
                    const std::int32_t* h = hist_.data() + b * j;
                    for (std::size_t c = 0; c < j; ++c) {
                        if (h[c] == 0) continue;
                        const std::int64_t add = h[c];
                        const std::int64_t right_c = counts[c] - left_[c];
                        sq_left += add * (2 * left_[c] + add);
                        sq_right += add * (add - 2 * right_c);
                        left_[c] += add;
                    }
                    n_left += bin_weight_[b];
                    const double score = gini_proxy(sq_left, n_left) + gini_proxy(sq_right, total - n_left);
                    if (score > best_score) {
                        best_score = score;
                        best = std::make_pair(f, b);
                    }
                }
            }
            for (std::uint8_t b : touched_) {
                bin_weight_[b] = 0;
                std::fill_n(hist_.data() + b * j, j, 0);
            }
        }
        return best;
    }

    const CanonicalData& data_;
    const FeatureBinner& binner_;
    const std::vector<std::uint8_t>& codes_;
    std::size_t max_features_;
    std::vector<std::int32_t> hist_;
    std::vector<std::int64_t> bin_weight_;
    std::vector<std::int64_t> left_;
    std::vector<std::size_t> features_;
    std::vector<std::uint8_t> touched_;
    std::vector<std::int32_t> weight_;
    std::vector<std::uint32_t> rows_;
};

// ---------------------------------------------------------------------------
// Extremely randomized trees on raw values.

class RandomThresholdSplitter {
public:
    RandomThresholdSplitter(const CanonicalData& data, std::size_t max_features)
        : data_(data), max_features_(max_features), features_(data.l) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
    }

    DecisionTree grow(Rng& rng, const ForestParams& params) {
        rows_.resize(data_.n);
        std::iota(rows_.begin(), rows_.end(), std::uint32_t{0});

        TreeGrower grower(data_.j);
        std::vector<NodeTask> stack{{0, 0, rows_.size(), 0}};
        std::vector<std::int64_t> counts(data_.j);
        while (!stack.empty()) {
            const NodeTask task = stack.back();
            stack.pop_back();

            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t r = task.begin; r < task.end; ++r) {
                ++counts[static_cast<std::size_t>(data_.y[rows_[r]])];
            }
            const auto total = static_cast<std::int64_t>(task.end - task.begin);
            const bool depth_capped = params.max_depth != 0 && task.depth >= params.max_depth;
            if (total < static_cast<std::int64_t>(params.min_samples_split) || depth_capped ||
                is_pure(counts, total)) {
                grower.make_leaf(task.node, counts, total);
                continue;
            }

            const auto split = best_split(rng, task, counts, total);
            if (!split) {
                grower.make_leaf(task.node, counts, total);
                continue;
            }
            const auto [feature, threshold] = *split;
            const double* col = data_.columns.data() + feature * data_.n;
            const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(task.begin),
                                            rows_.begin() + static_cast<std::ptrdiff_t>(task.end),
                                            [&](std::uint32_t i) { return col[i] <= threshold; });
            const auto split_at = static_cast<std::size_t>(mid - rows_.begin());
            const std::size_t left = grower.make_split(task.node, feature, threshold);
            stack.push_back({left + 1, split_at, task.end, task.depth + 1});
            stack.push_back({left, task.begin, split_at, task.depth + 1});
        }
        return grower.finish();
    }

private:
    std::optional<std::pair<std::size_t, double>> best_split(Rng& rng, const NodeTask& task,
                                                             const std::vector<std::int64_t>& counts,
                                                             std::int64_t total) {
        const std::size_t j = data_.j;
        std::optional<std::pair<std::size_t, double>> best;
        double best_score = -1.0;
        std::size_t evaluated = 0;
        std::vector<std::int64_t> left(j);
        for (std::size_t d = 0; d < data_.l && evaluated < max_features_; ++d) {
            std::swap(features_[d], features_[d + rng.uniform_index(data_.l - d)]);
            const std::size_t f = features_[d];
            const double* col = data_.columns.data() + f * data_.n;

            double lo = col[rows_[task.begin]];
            double hi = lo;
            for (std::size_t r = task.begin + 1; r < task.end; ++r) {
                lo = std::min(lo, col[rows_[r]]);
                hi = std::max(hi, col[rows_[r]]);
            }
            if (!(lo < hi)) continue;
            ++evaluated;

            double threshold = lo + rng.uniform01() * (hi - lo);
            if (threshold >= hi) threshold = lo;

            std::fill(left.begin(), left.end(), 0);
            std::int64_t n_left = 0;
            for (std::size_t r = task.begin; r < task.end; ++r) {
                const std::uint32_t i = rows_[r];
                if (col[i] <= threshold) {
                    ++left[static_cast<std::size_t>(data_.y[i])];
                    ++n_left;
                }
            }
            std::int64_t sq_left = 0;
            std::int64_t sq_right = 0;
            for (std::size_t c = 0; c < j; ++c) {
                sq_left += left[c] * left[c];
                sq_right += (counts[c] - left[c]) * (counts[c] - left[c]);
            }
            const double score = gini_proxy(sq_left, n_left) + gini_proxy(sq_right, total - n_left);
            if (score > best_score) {
                best_score = score;
                best = std::make_pair(f, threshold);
            }
        }
        return best;
    }

    const CanonicalData& data_;
    std::size_t max_features_;
    std::vector<std::size_t> features_;
    std::vector<std::uint32_t> rows_;
};

void check_forest_params(const ForestParams& params) {
    if (params.trees == 0) throw InvalidArgument("forest needs at least one tree");
    if (params.min_samples_split < 2) throw InvalidArgument("min_samples_split must be >= 2");
}

}  // namespace

// ---------------------------------------------------------------------------

ForestClassifier::ForestClassifier(std::vector<DecisionTree> trees, int num_classes)
    : trees_(std::move(trees)), num_classes_(num_classes) {
    if (trees_.empty()) throw InvalidArgument("forest has no trees");
    for (const auto& t : trees_) {
        if (t.width() != static_cast<std::size_t>(num_classes_)) {
            throw InvalidArgument("forest tree payload width differs from class count");
        }
    }
}

std::shared_ptr<const ForestClassifier> ForestClassifier::train_random_forest(
    const ForestParams& params, std::uint64_t seed, const FeatureMatrix& features,
    const LabelVector& labels) {
    check_forest_params(params);
    const CanonicalData data(features, labels);
    // Cut points depend only on the multiset of values, not on record order.
    const FeatureBinner binner = FeatureBinner::fit(features, params.max_bins);
    std::vector<std::uint8_t> codes(data.n * data.l);
    for (std::size_t f = 0; f < data.l; ++f) {
        for (std::size_t i = 0; i < data.n; ++i) {
            codes[f * data.n + i] = binner.bin(f, data.columns[f * data.n + i]);
        }
    }

    BinnedGiniSplitter splitter(data, binner, codes, resolve_max_features(params, data.l));
    std::vector<DecisionTree> trees;
    trees.reserve(params.trees);
    for (std::size_t t = 0; t < params.trees; ++t) {
        Rng rng(derive_seed({seed, t}));
        trees.push_back(splitter.grow(rng, params));
    }
    return std::make_shared<ForestClassifier>(std::move(trees), labels.num_classes());
}

std::shared_ptr<const ForestClassifier> ForestClassifier::train_extra_trees(
    const ForestParams& params, std::uint64_t seed, const FeatureMatrix& features,
    const LabelVector& labels) {
    check_forest_params(params);
    const CanonicalData data(features, labels);
    const std::size_t max_features = params.max_features == 0 ? 1 : std::min(params.max_features, data.l);
    RandomThresholdSplitter splitter(data, max_features);
    std::vector<DecisionTree> trees;
    trees.reserve(params.trees);
    for (std::size_t t = 0; t < params.trees; ++t) {
        Rng rng(derive_seed({seed, t}));
        trees.push_back(splitter.grow(rng, params));
    }
    return std::make_shared<ForestClassifier>(std::move(trees), labels.num_classes());
}

void ForestClassifier::predict_into(const FeatureMatrix& features, Matrix& out) const {
    const auto j = static_cast<std::size_t>(num_classes_);
    const double inv = 1.0 / static_cast<double>(trees_.size());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto row = features.row(i);
        auto dst = out.row(i);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (const auto& tree : trees_) {
            const auto leaf = tree.leaf(row);
            for (std::size_t c = 0; c < j; ++c) dst[c] += leaf[c];
        }
        for (double& v : dst) v *= inv;
    }
}

void ForestClassifier::write(ArchiveWriter& out) const {
    out.u32(static_cast<std::uint32_t>(num_classes_));
    out.u64(trees_.size());
    for (const auto& t : trees_) t.write(out);
}

std::shared_ptr<const ForestClassifier> ForestClassifier::read(ArchiveReader& in) {
    const int classes = static_cast<int>(in.u32());
    const std::size_t count = in.length(16);
    std::vector<DecisionTree> trees;
    trees.reserve(count);
    for (std::size_t t = 0; t < count; ++t) trees.push_back(DecisionTree::read(in));
    try {
        return std::make_shared<ForestClassifier>(std::move(trees), classes);
    } catch (const InvalidArgument& e) {
        throw ArchiveError(e.what());
    }
}

}  // namespace dsl
