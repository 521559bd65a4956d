#include <cstring>
#include <fstream>
#include <iterator>

#include "dsl/archive.hpp"
#include "dsl/data_io.hpp"
#include "dsl/deep_ensemble.hpp"
#include "dsl/error.hpp"
#include "dsl/learners/dummy.hpp"
#include "dsl/learners/forest.hpp"
#include "dsl/learners/gradient_boosting.hpp"
#include "dsl/learners/knn.hpp"
#include "dsl/learners/logistic_regression.hpp"

namespace dsl {
namespace {

constexpr char kMagic[8] = {'D', 'S', 'L', 'M', 'O', 'D', 'E', 'L'};

void write_spec(ArchiveWriter& out, const LearnerSpec& spec) {
    out.u8(static_cast<std::uint8_t>(spec.kind));
    out.u64(spec.seed);
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, LogisticRegressionParams>) {
                out.u8(1);
                out.f64(p.learning_rate);
                out.f64(p.l2_penalty);
                out.u64(p.max_epochs);
                out.f64(p.gradient_tolerance);
            } else if constexpr (std::is_same_v<P, KnnParams>) {
                out.u8(2);
                out.u64(p.neighbors);
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                out.u8(3);
                out.u64(p.trees);
                out.u64(p.max_depth);
                out.u64(p.max_features);
                out.u64(p.min_samples_split);
                out.u64(p.max_bins);
            } else if constexpr (std::is_same_v<P, BoostingParams>) {
                out.u8(4);
                out.u64(p.rounds);
                out.u64(p.max_depth);
                out.f64(p.learning_rate);
                out.f64(p.l2_leaf);
                out.f64(p.min_child_weight);
                out.u64(p.max_bins);
            } else {
                out.u8(0);
            }
        },
        spec.params);
}

LearnerKind read_kind(ArchiveReader& in) {
    const std::uint8_t kind = in.u8();
    if (kind > static_cast<std::uint8_t>(LearnerKind::dummy_prior)) {
        throw ArchiveError("unsupported learner kind " + std::to_string(kind));
    }
    return static_cast<LearnerKind>(kind);
}

LearnerSpec read_spec(ArchiveReader& in) {
    LearnerSpec spec;
    spec.kind = read_kind(in);
    spec.seed = in.u64();
    switch (in.u8()) {
        case 0: spec.params = NoParams{}; break;
        case 1: {
            LogisticRegressionParams p;
            p.learning_rate = in.f64();
            p.l2_penalty = in.f64();
            p.max_epochs = in.u64();
            p.gradient_tolerance = in.f64();
            spec.params = p;
            break;
        }
        case 2: spec.params = KnnParams{in.u64()}; break;
        case 3: {
            ForestParams p;
            p.trees = in.u64();
            p.max_depth = in.u64();
            p.max_features = in.u64();
            p.min_samples_split = in.u64();
            p.max_bins = in.u64();
            spec.params = p;
            break;
        }
        case 4: {
            BoostingParams p;
            p.rounds = in.u64();
            p.max_depth = in.u64();
            p.learning_rate = in.f64();
            p.l2_leaf = in.f64();
            p.min_child_weight = in.f64();
            p.max_bins = in.u64();
            spec.params = p;
            break;
        }
        default: throw ArchiveError("unknown hyperparameter block");
    }
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        throw ArchiveError(std::string("invalid learner spec: ") + e.what());
    }
    return spec;
}

void write_model(ArchiveWriter& out, const TrainedModel& model) {
    write_spec(out, model.spec());
    out.u32(static_cast<std::uint32_t>(model.num_classes()));
    out.u64(model.feature_count());
    ArchiveWriter block;
    model.impl().write(block);
    out.u64(block.size());
    out.raw(block.bytes());
}

std::shared_ptr<const Classifier> read_impl(LearnerKind kind, ArchiveReader& in) {
    switch (kind) {
        case LearnerKind::logistic_regression: return LogisticRegression::read(in);
        case LearnerKind::knn: return KNearestNeighbors::read(in);
        case LearnerKind::random_forest:
        case LearnerKind::extra_trees: return ForestClassifier::read(in);
        case LearnerKind::gradient_boosted_trees: return GradientBoostedTrees::read(in);
        case LearnerKind::dummy_uniform:
        case LearnerKind::dummy_prior: return ConstantClassifier::read(in);
    }
    throw ArchiveError("unsupported learner kind");
}

TrainedModel read_model(ArchiveReader& in) {
    LearnerSpec spec = read_spec(in);
    const auto classes = static_cast<int>(in.u32());
    const std::size_t features = in.u64();
    const std::size_t length = in.length(1);
    ArchiveReader block(in.raw(length));
    auto impl = read_impl(spec.kind, block);
    if (block.remaining() != 0) throw ArchiveError("trailing bytes in learner block");
    return TrainedModel(std::move(spec), std::move(impl), classes, features);
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const DslModel& model) {
    ArchiveWriter payload;
    const TrainConfig& config = model.config();
    payload.u64(config.folds);
    payload.u64(config.max_iterations);
    payload.u8(config.retrain_full ? 1 : 0);
    payload.u64(config.seed);
    payload.u8(static_cast<std::uint8_t>(config.mode));
    payload.u64(config.roster.size());
    for (const auto& spec : config.roster) write_spec(payload, spec);

    payload.u32(static_cast<std::uint32_t>(model.num_classes()));
    payload.u64(model.feature_count());
    payload.u64(model.class_names().size());
    for (const auto& name : model.class_names()) payload.str(name);

    payload.u64(model.depth());
    for (const auto& layer : model.layers()) {
        payload.u64(layer.fold_assignment_seed);
        payload.f64(layer.train_loss);
        payload.f64s(layer.weights.values());
        payload.u64(layer.models.size());
        for (const auto& per_learner : layer.models) {
            payload.u64(per_learner.size());
            for (const auto& m : per_learner) write_model(payload, m);
        }
    }

    ArchiveWriter out;
    out.raw({reinterpret_cast<const std::uint8_t*>(kMagic), sizeof kMagic});
    out.u32(kArchiveVersion);
    out.u64(payload.size());
    out.raw(payload.bytes());
    out.u64(fnv1a64(payload.bytes()));
    return out.release();
}

DslModel deserialize_model(std::span<const std::uint8_t> bytes) {
    ArchiveReader in(bytes);
    const auto magic = in.raw(sizeof kMagic);
    if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) throw ArchiveError("not a model archive");
    const std::uint32_t version = in.u32();
    if (version != kArchiveVersion) {
        throw ArchiveError("unknown archive version " + std::to_string(version) + " (expected " +
                           std::to_string(kArchiveVersion) + ")");
    }
    const std::size_t length = in.length(1);
    const auto payload_bytes = in.raw(length);
    if (in.remaining() != 8) throw ArchiveError("archive length mismatch");
    if (in.u64() != fnv1a64(payload_bytes)) throw ArchiveError("archive checksum mismatch");

    ArchiveReader p(payload_bytes);
    TrainConfig config;
    config.folds = p.u64();
    config.max_iterations = p.u64();
    config.retrain_full = p.u8() != 0;
    config.seed = p.u64();
    const std::uint8_t mode = p.u8();
    if (mode > static_cast<std::uint8_t>(EnsembleMode::simple_average)) throw ArchiveError("unknown mode");
    config.mode = static_cast<EnsembleMode>(mode);
    const std::size_t roster_size = p.length(1);
    config.roster.clear();
    for (std::size_t q = 0; q < roster_size; ++q) config.roster.push_back(read_spec(p));

    const auto classes = static_cast<int>(p.u32());
    const std::size_t features = p.u64();
    std::vector<std::string> names(p.length(8));
    for (auto& name : names) name = p.str();

    std::vector<LayerModel> layers(p.length(1));
    for (auto& layer : layers) {
        layer.fold_assignment_seed = p.u64();
        layer.train_loss = p.f64();
        try {
            layer.weights = WeightVector(p.f64s());
        } catch (const InvalidArgument& e) {
            throw ArchiveError(std::string("invalid layer weights: ") + e.what());
        }
        layer.models.resize(p.length(1));
        for (auto& per_learner : layer.models) {
            const std::size_t count = p.length(1);
            per_learner.reserve(count);
            for (std::size_t f = 0; f < count; ++f) per_learner.push_back(read_model(p));
        }
    }
    if (p.remaining() != 0) throw ArchiveError("trailing bytes in archive payload");
    try {
        return DslModel(std::move(layers), classes, features, std::move(config), std::move(names));
    } catch (const InvalidArgument& e) {
        throw ArchiveError(std::string("inconsistent model: ") + e.what());
    } catch (const DimensionError& e) {
        throw ArchiveError(std::string("inconsistent model: ") + e.what());
    }
}

void save_model(const DslModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

DslModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace dsl
