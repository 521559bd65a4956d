#include "dsl/learners/knn.hpp"

#include <algorithm>
#include <utility>

#include "dsl/archive.hpp"
#include "dsl/error.hpp"
#include "dsl/simd/kernels.hpp"

namespace dsl {

KNearestNeighbors::KNearestNeighbors(Matrix training_features, std::vector<int> training_labels,
                                     int num_classes, std::size_t neighbors)
    : x_(std::move(training_features)), y_(std::move(training_labels)), num_classes_(num_classes),
      neighbors_(neighbors) {
    if (x_.rows() != y_.size()) throw DimensionError("k-NN: training rows vs labels");
    if (neighbors_ == 0 || neighbors_ > y_.size()) {
        throw InvalidArgument("k-NN: neighbors must be in [1, training records]");
    }
}

std::shared_ptr<const KNearestNeighbors> KNearestNeighbors::train(const KnnParams& params,
                                                                  const FeatureMatrix& features,
                                                                  const LabelVector& labels) {
    if (features.rows() < params.neighbors) {
        throw TrainingError("k-NN needs at least " + std::to_string(params.neighbors) +
                            " training records, got " + std::to_string(features.rows()));
    }
    return std::make_shared<KNearestNeighbors>(
        features.matrix(), std::vector<int>(labels.values().begin(), labels.values().end()),
        labels.num_classes(), params.neighbors);
}

void KNearestNeighbors::predict_into(const FeatureMatrix& features, Matrix& out) const {
    const auto& k = simd::kernels();
    const std::size_t n = x_.rows();
    const std::size_t l = x_.cols();
    std::vector<double> dist(n);
    std::vector<std::pair<double, std::size_t>> order(n);
    const double vote = 1.0 / static_cast<double>(neighbors_);

    for (std::size_t i = 0; i < features.rows(); ++i) {
        k.squared_distances(features.row(i).data(), x_.values().data(), n, l, dist.data());
        for (std::size_t r = 0; r < n; ++r) order[r] = {dist[r], r};
        // Pair ordering compares distance first, then index.
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(neighbors_ - 1),
                         order.end());
        auto dst = out.row(i);
        std::fill(dst.begin(), dst.end(), 0.0);
        std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
        for (std::size_t t = 0; t < neighbors_; ++t) ++counts[static_cast<std::size_t>(y_[order[t].second])];
        for (std::size_t c = 0; c < counts.size(); ++c) dst[c] = static_cast<double>(counts[c]) * vote;
    }
}

void KNearestNeighbors::write(ArchiveWriter& out) const {
    out.u64(neighbors_);
    out.u32(static_cast<std::uint32_t>(num_classes_));
    out.u64(x_.rows());
    out.u64(x_.cols());
    out.f64s(x_.values());
    out.i32s(y_);
}

std::shared_ptr<const KNearestNeighbors> KNearestNeighbors::read(ArchiveReader& in) {
    const std::size_t neighbors = in.u64();
    const int classes = static_cast<int>(in.u32());
    const std::size_t n = in.u64();
    const std::size_t l = in.u64();
    auto values = in.f64s();
    auto labels = in.i32s();
    if (values.size() != n * l || labels.size() != n) throw ArchiveError("k-NN: block lengths");
    for (int y : labels) {
        if (y < 0 || y >= classes) throw ArchiveError("k-NN: stored label out of range");
    }
    if (neighbors == 0 || neighbors > n) throw ArchiveError("k-NN: neighbor count");
    return std::make_shared<KNearestNeighbors>(Matrix(n, l, std::move(values)),
                                               std::vector<int>(labels.begin(), labels.end()),
                                               classes, neighbors);
}

}  // namespace dsl
