#include "dsl/learners/tree.hpp"

#include <algorithm>
#include <string>

#include "dsl/archive.hpp"
#include "dsl/error.hpp"

namespace dsl {

namespace {

// Largest a <= cut < b.
double cut_between(double a, double b) {
    const double mid = a + (b - a) * 0.5;
    return (mid >= b || mid < a) ? a : mid;
}

}  // namespace

FeatureBinner FeatureBinner::fit(const FeatureMatrix& features, std::size_t max_bins) {
    if (max_bins < 2 || max_bins > 256) throw InvalidArgument("max_bins must be in [2, 256]");
    const std::size_t n = features.rows();
    FeatureBinner binner;
    binner.cuts_.resize(features.cols());
    std::vector<double> column(n);
    for (std::size_t f = 0; f < features.cols(); ++f) {
        for (std::size_t i = 0; i < n; ++i) column[i] = features(i, f);
        std::sort(column.begin(), column.end());

        // Distinct values with their multiplicities.
        std::vector<double> values;
        std::vector<std::size_t> counts;
        for (std::size_t i = 0; i < n; ++i) {
            if (values.empty() || column[i] != values.back()) {
                values.push_back(column[i]);
                counts.push_back(1);
            } else {
                ++counts.back();
            }
        }

        auto& cuts = binner.cuts_[f];
        if (values.size() <= max_bins) {
            for (std::size_t u = 0; u + 1 < values.size(); ++u) {
                cuts.push_back(cut_between(values[u], values[u + 1]));
            }
            continue;
        }
        // Quantile cuts: close a bin once it holds about n / max_bins records.
        std::size_t cumulative = 0;
        std::size_t next_bin = 1;
        for (std::size_t u = 0; u + 1 < values.size() && cuts.size() + 1 < max_bins; ++u) {
            cumulative += counts[u];
            if (cumulative * max_bins >= next_bin * n) {
                cuts.push_back(cut_between(values[u], values[u + 1]));
                while (next_bin * n <= cumulative * max_bins) ++next_bin;
            }
        }
    }
    return binner;
}

std::uint8_t FeatureBinner::bin(std::size_t f, double x) const noexcept {
    const auto& cuts = cuts_[f];
    return static_cast<std::uint8_t>(std::lower_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

std::vector<std::uint8_t> FeatureBinner::encode(const FeatureMatrix& features) const {
    const std::size_t n = features.rows();
    std::vector<std::uint8_t> codes(n * cuts_.size());
    for (std::size_t f = 0; f < cuts_.size(); ++f) {
        for (std::size_t i = 0; i < n; ++i) codes[f * n + i] = bin(f, features(i, f));
    }
    return codes;
}

// ---------------------------------------------------------------------------

DecisionTree::DecisionTree(std::vector<Node> nodes, std::vector<double> payload, std::size_t width)
    : nodes_(std::move(nodes)), payload_(std::move(payload)), width_(width) {
    if (nodes_.empty() || width_ == 0) throw InvalidArgument("decision tree is empty");
    const auto n = static_cast<std::int64_t>(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& node = nodes_[i];
        if (node.feature >= 0) {
            // Children come after their parent, so traversal always terminates.
            if (node.link <= static_cast<std::int64_t>(i) || node.link + 1 >= n) {
                throw InvalidArgument("decision tree: bad child link at node " + std::to_string(i));
            }
        } else if (node.link < 0 ||
                   static_cast<std::size_t>(node.link) + width_ > payload_.size()) {
            throw InvalidArgument("decision tree: bad leaf payload at node " + std::to_string(i));
        }
    }
}

std::size_t DecisionTree::leaf_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

std::size_t DecisionTree::depth() const noexcept {
    std::vector<std::size_t> level(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (nodes_[i].feature >= 0) {
            level[static_cast<std::size_t>(nodes_[i].link)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes_[i].link) + 1] = level[i] + 1;
        }
    }
    return deepest;
}

std::int32_t DecisionTree::max_feature() const noexcept {
    std::int32_t m = -1;
    for (const Node& n : nodes_) m = std::max(m, n.feature);
    return m;
}

void DecisionTree::write(ArchiveWriter& out) const {
    out.u64(width_);
    out.u64(nodes_.size());
    for (const Node& n : nodes_) {
        out.i32(n.feature);
        out.i32(n.link);
        out.f64(n.threshold);
    }
    out.f64s(payload_);
}

DecisionTree DecisionTree::read(ArchiveReader& in) {
    const std::size_t width = in.u64();
    const std::size_t count = in.length(16);
    std::vector<Node> nodes(count);
    for (Node& n : nodes) {
        n.feature = in.i32();
        n.link = in.i32();
        n.threshold = in.f64();
    }
    auto payload = in.f64s();
    try {
        return DecisionTree(std::move(nodes), std::move(payload), width);
    } catch (const InvalidArgument& e) {
        throw ArchiveError(e.what());
    }
}

}  // namespace dsl
