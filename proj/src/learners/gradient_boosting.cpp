#include "dsl/learners/gradient_boosting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "dsl/archive.hpp"
#include "dsl/error.hpp"
#include "dsl/learners/softmax.hpp"

namespace dsl {
namespace {

constexpr double kMinHessian = 1e-16;
constexpr double kMinGain = 1e-6;
constexpr std::size_t kBinStride = 256;

struct GradPair {
    double g = 0.0;
    double h = 0.0;
};

class RegressionTreeGrower {
public:
    RegressionTreeGrower(const BoostingParams& params, const FeatureBinner& binner,
                         const std::vector<std::uint8_t>& codes, std::size_t n)
        : params_(params), binner_(binner), codes_(codes), n_(n), rows_(n) {
        for (std::size_t f = 0; f < binner.features(); ++f) {
            if (binner.bins(f) > 1) active_.push_back(f);
        }
        const std::size_t size = active_.size() * kBinStride;
        hist_.resize(params.max_depth + 1);
        for (auto& level : hist_) {
            level[0].resize(size);
            level[1].resize(size);
        }
    }

    // Grows one tree on (grad, hess); adds the leaf value of every row to
    // margin_out[i * stride].
    DecisionTree grow(const std::vector<double>& grad, const std::vector<double>& hess,
                      double* margin_out, std::size_t stride) {
        grad_ = &grad;
        hess_ = &hess;
        margin_out_ = margin_out;
        margin_stride_ = stride;
        std::iota(rows_.begin(), rows_.end(), std::uint32_t{0});
        nodes_.assign(1, {-1, 0, 0.0});
        payload_.clear();
        build(0, 0, n_, 0, nullptr);
        return DecisionTree(std::move(nodes_), std::move(payload_), 1);
    }

private:
    void build_histogram(std::size_t begin, std::size_t end, std::vector<GradPair>& hist) {
        std::fill(hist.begin(), hist.end(), GradPair{});
        const double* g = grad_->data();
        const double* h = hess_->data();
        for (std::size_t a = 0; a < active_.size(); ++a) {
            const std::uint8_t* col = codes_.data() + active_[a] * n_;
            GradPair* hf = hist.data() + a * kBinStride;
            for (std::size_t r = begin; r < end; ++r) {
                const std::uint32_t i = rows_[r];
                GradPair& cell = hf[col[i]];
                cell.g += g[i];
                cell.h += h[i];
            }
        }
    }

    void make_leaf(std::size_t node, std::size_t begin, std::size_t end, double g_sum, double h_sum) {
        const double value = -g_sum / (h_sum + params_.l2_leaf) * params_.learning_rate;
        nodes_[node] = {-1, static_cast<std::int32_t>(payload_.size()), 0.0};
        payload_.push_back(value);
        for (std::size_t r = begin; r < end; ++r) margin_out_[rows_[r] * margin_stride_] += value;
    }

    // `hist` is this node's histogram when already known (sibling subtraction).
    void build(std::size_t node, std::size_t begin, std::size_t end, std::size_t depth,
               const std::vector<GradPair>* hist) {
        double g_sum = 0.0;
        double h_sum = 0.0;
        for (std::size_t r = begin; r < end; ++r) {
            g_sum += (*grad_)[rows_[r]];
            h_sum += (*hess_)[rows_[r]];
        }
        const double mcw = params_.min_child_weight;
        if (depth >= params_.max_depth || h_sum < 2.0 * mcw || active_.empty()) {
            make_leaf(node, begin, end, g_sum, h_sum);
            return;
        }
        if (hist == nullptr) {
            build_histogram(begin, end, hist_[depth][0]);
            hist = &hist_[depth][0];
        }

        const double lambda = params_.l2_leaf;
        const double parent_score = g_sum * g_sum / (h_sum + lambda);
        double best_gain = kMinGain;
        std::size_t best_feature = active_.size();
        std::size_t best_bin = 0;
        for (std::size_t a = 0; a < active_.size(); ++a) {
            const GradPair* hf = hist->data() + a * kBinStride;
            const std::size_t bins = binner_.bins(active_[a]);
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t b = 0; b + 1 < bins; ++b) {
                gl += hf[b].g;
                hl += hf[b].h;
                if (hl < mcw) continue;
                const double hr = h_sum - hl;
                if (hr < mcw) break;
                const double gr = g_sum - gl;
                const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_score;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = a;
                    best_bin = b;
                }
            }
        }
        if (best_feature == active_.size()) {
            make_leaf(node, begin, end, g_sum, h_sum);
            return;
        }

        const std::size_t f = active_[best_feature];
        const std::uint8_t* col = codes_.data() + f * n_;
        const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                        rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                        [&](std::uint32_t i) { return col[i] <= best_bin; });
        const auto split_at = static_cast<std::size_t>(mid - rows_.begin());

        const std::size_t left = nodes_.size();
        nodes_[node] = {static_cast<std::int32_t>(f), static_cast<std::int32_t>(left),
                        binner_.cut(f, best_bin)};
        nodes_.push_back({-1, 0, 0.0});
        nodes_.push_back({-1, 0, 0.0});

        const std::vector<GradPair>* left_hist = nullptr;
        const std::vector<GradPair>* right_hist = nullptr;
        if (depth + 1 < params_.max_depth) {
            // Histogram the smaller child, derive the larger from the parent.
            const bool left_smaller = split_at - begin <= end - split_at;
            auto& small = hist_[depth + 1][left_smaller ? 0 : 1];
            auto& large = hist_[depth + 1][left_smaller ? 1 : 0];
            if (left_smaller) {
                build_histogram(begin, split_at, small);
            } else {
                build_histogram(split_at, end, small);
            }
            for (std::size_t t = 0; t < large.size(); ++t) {
                large[t].g = (*hist)[t].g - small[t].g;
                large[t].h = (*hist)[t].h - small[t].h;
            }
            left_hist = &hist_[depth + 1][0];
            right_hist = &hist_[depth + 1][1];
        }
        build(left, begin, split_at, depth + 1, left_hist);
        build(left + 1, split_at, end, depth + 1, right_hist);
    }

    const BoostingParams& params_;
    const FeatureBinner& binner_;
    const std::vector<std::uint8_t>& codes_;
    std::size_t n_;
    std::vector<std::size_t> active_;
    std::vector<std::array<std::vector<GradPair>, 2>> hist_;
    std::vector<std::uint32_t> rows_;
    std::vector<DecisionTree::Node> nodes_;
    std::vector<double> payload_;
    const std::vector<double>* grad_ = nullptr;
    const std::vector<double>* hess_ = nullptr;
    double* margin_out_ = nullptr;
    std::size_t margin_stride_ = 1;
};

}  // namespace

GradientBoostedTrees::GradientBoostedTrees(std::vector<DecisionTree> trees, int num_classes)
    : trees_(std::move(trees)), num_classes_(num_classes) {
    if (num_classes_ < 2) throw InvalidArgument("boosting needs at least two classes");
    if (trees_.empty() || trees_.size() % static_cast<std::size_t>(num_classes_) != 0) {
        throw InvalidArgument("boosting tree count is not a positive multiple of the class count");
    }
    for (const auto& t : trees_) {
        if (t.width() != 1) throw InvalidArgument("boosting trees must have scalar leaves");
    }
}

std::shared_ptr<const GradientBoostedTrees> GradientBoostedTrees::train(
    const BoostingParams& params, const FeatureMatrix& features, const LabelVector& labels) {
    if (params.rounds == 0) throw InvalidArgument("boosting needs at least one round");
    const std::size_t n = features.rows();
    const auto j = static_cast<std::size_t>(labels.num_classes());

    const FeatureBinner binner = FeatureBinner::fit(features, params.max_bins);
    const std::vector<std::uint8_t> codes = binner.encode(features);
    RegressionTreeGrower grower(params, binner, codes, n);

    Matrix margins(n, j, 0.0);
    Matrix probs(n, j);
    std::vector<double> grad(n), hess(n);
    std::vector<DecisionTree> trees;
    trees.reserve(params.rounds * j);

    for (std::size_t round = 0; round < params.rounds; ++round) {
        std::copy(margins.values().begin(), margins.values().end(), probs.values().begin());
        for (std::size_t i = 0; i < n; ++i) softmax_inplace(probs.row(i));
        for (std::size_t c = 0; c < j; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs(i, c);
                grad[i] = p - (labels[i] == static_cast<int>(c) ? 1.0 : 0.0);
                // Twice the diagonal Hessian: a bound that keeps the j per-class
                // Newton steps, taken together, from overshooting.
                hess[i] = std::max(2.0 * p * (1.0 - p), kMinHessian);
            }
            trees.push_back(grower.grow(grad, hess, margins.values().data() + c, j));
        }
    }
    return std::make_shared<GradientBoostedTrees>(std::move(trees), labels.num_classes());
}

void GradientBoostedTrees::predict_into(const FeatureMatrix& features, Matrix& out) const {
    const auto j = static_cast<std::size_t>(num_classes_);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto row = features.row(i);
        auto dst = out.row(i);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (std::size_t t = 0; t < trees_.size(); ++t) dst[t % j] += trees_[t].leaf(row)[0];
        softmax_inplace(dst);
    }
}

void GradientBoostedTrees::write(ArchiveWriter& out) const {
    out.u32(static_cast<std::uint32_t>(num_classes_));
    out.u64(trees_.size());
    for (const auto& t : trees_) t.write(out);
}

std::shared_ptr<const GradientBoostedTrees> GradientBoostedTrees::read(ArchiveReader& in) {
    const int classes = static_cast<int>(in.u32());
    const std::size_t count = in.length(16);
    std::vector<DecisionTree> trees;
    trees.reserve(count);
    for (std::size_t t = 0; t < count; ++t) trees.push_back(DecisionTree::read(in));
    try {
        return std::make_shared<GradientBoostedTrees>(std::move(trees), classes);
    } catch (const InvalidArgument& e) {
        throw ArchiveError(e.what());
    }
}

}  // namespace dsl
