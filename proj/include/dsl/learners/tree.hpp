#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dsl/core_data.hpp"

namespace dsl {

class ArchiveReader;
class ArchiveWriter;

/// Per-feature cut points learned from training data. A value x falls in
/// bin b when cut(b - 1) < x <= cut(b); bin codes fit in one byte.
class FeatureBinner {
public:
    static FeatureBinner fit(const FeatureMatrix& features, std::size_t max_bins);

    std::size_t features() const noexcept { return cuts_.size(); }
    std::size_t bins(std::size_t f) const noexcept { return cuts_[f].size() + 1; }
    /// Values <= cut(f, b) fall in bins [0, b].
    double cut(std::size_t f, std::size_t b) const noexcept { return cuts_[f][b]; }
    std::uint8_t bin(std::size_t f, double x) const noexcept;

    /// Column-major codes: result[f * rows + i].
    std::vector<std::uint8_t> encode(const FeatureMatrix& features) const;

private:
    std::vector<std::vector<double>> cuts_;
};

/// Binary decision tree with fixed-width leaf payloads. Internal nodes send
/// x[feature] <= threshold to child `left`, otherwise to `left + 1`.
class DecisionTree {
public:
    struct Node {
        std::int32_t feature;  ///< -1 for leaves
        std::int32_t link;     ///< left child index, or leaf payload offset
        double threshold;
    };

    DecisionTree() = default;
    DecisionTree(std::vector<Node> nodes, std::vector<double> payload, std::size_t width);

    std::size_t width() const noexcept { return width_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t leaf_count() const noexcept;
    std::size_t depth() const noexcept;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& payload() const noexcept { return payload_; }

    /// Payload of the leaf reached by `row`.
    std::span<const double> leaf(std::span<const double> row) const noexcept {
        std::size_t i = 0;
        while (nodes_[i].feature >= 0) {
            const Node& n = nodes_[i];
            i = static_cast<std::size_t>(n.link) +
                (row[static_cast<std::size_t>(n.feature)] <= n.threshold ? 0 : 1);
        }
        return {payload_.data() + nodes_[i].link, width_};
    }

    /// Largest feature index used by a split, or -1.
    std::int32_t max_feature() const noexcept;

    void write(ArchiveWriter& out) const;
    static DecisionTree read(ArchiveReader& in);

private:
    std::vector<Node> nodes_;
    std::vector<double> payload_;
    std::size_t width_ = 0;
};

}  // namespace dsl
