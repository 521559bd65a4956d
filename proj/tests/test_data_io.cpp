#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "dsl/archive.hpp"
#include "dsl/data_io.hpp"
#include "dsl/deep_ensemble.hpp"
#include "dsl/error.hpp"
#include "dsl/learners/knn.hpp"
#include "support.hpp"

using namespace dsl;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string error_message(const auto& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("csv basic load") {
    testing::TempDir dir("csv");
    write_file(dir / "a.csv", "x,y,label\n0,1,a\n1,0,b\n");
    const Dataset d = load_csv(dir / "a.csv");
    CHECK(d.size() == 2);
    CHECK(d.features.cols() == 2);
    CHECK(d.labels->values()[0] == 0);
    CHECK(d.labels->values()[1] == 1);
    CHECK(d.features(0, 1) == 1.0);
    CHECK(d.class_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("csv classes map by first appearance") {
    testing::TempDir dir("csv_order");
    write_file(dir / "a.csv", "x,label\n1,b\n2,a\n3,a\n");
    const Dataset d = load_csv(dir / "a.csv");
    CHECK(d.class_names == std::vector<std::string>{"b", "a"});
    CHECK(d.labels->values()[0] == 0);
    CHECK(d.labels->values()[1] == 1);
    CHECK(d.labels->values()[2] == 1);
}

TEST_CASE("csv parse error names row and column") {
    testing::TempDir dir("csv_bad");
    write_file(dir / "a.csv", "x,y,z,label\n1,2,oops,a\n1,2,3,b\n");
    const std::string message = error_message([&] { load_csv(dir / "a.csv"); });
    CHECK(message.find("row 2, column 3") != std::string::npos);
    CHECK_THROWS_AS(load_csv(dir / "a.csv"), DataError);
}

TEST_CASE("csv errors") {
    testing::TempDir dir("csv_err");
    write_file(dir / "empty.csv", "");
    CHECK_THROWS_AS(load_csv(dir / "empty.csv"), DataError);
    write_file(dir / "header_only.csv", "x,label\n");
    CHECK_THROWS_AS(load_csv(dir / "header_only.csv"), DataError);
    write_file(dir / "nolabel.csv", "x,y\n1,2\n3,4\n");
    CHECK_THROWS_AS(load_csv(dir / "nolabel.csv"), DataError);
    write_file(dir / "ragged.csv", "x,label\n1,a\n2\n");
    CHECK_THROWS_AS(load_csv(dir / "ragged.csv"), DataError);
    write_file(dir / "nan.csv", "x,label\nnan,a\n1,b\n");
    CHECK_THROWS_AS(load_csv(dir / "nan.csv"), DataError);
    CHECK_THROWS_AS(load_csv(dir / "missing.csv"), DataError);
}

TEST_CASE("csv options: index label column, no header, delimiter, unlabeled, known classes") {
    testing::TempDir dir("csv_opts");
    write_file(dir / "a.csv", "b;1.5;2\na;2.5;3\n");
    CsvOptions options;
    options.label_column = "0";
    options.has_header = false;
    options.delimiter = ';';
    const Dataset d = load_csv(dir / "a.csv", options);
    CHECK(d.features.cols() == 2);
    CHECK(d.features(1, 0) == 2.5);
    CHECK(d.class_names == std::vector<std::string>{"b", "a"});

    options.known_classes = std::vector<std::string>{"a", "b", "c"};
    const Dataset known = load_csv(dir / "a.csv", options);
    CHECK(known.labels->values()[0] == 1);
    CHECK(known.labels->num_classes() == 3);

    options.known_classes = std::vector<std::string>{"a", "c"};
    CHECK_THROWS_AS(load_csv(dir / "a.csv", options), DataError);

    write_file(dir / "u.csv", "x,y\n1,2\n3,4\n");
    CsvOptions unlabeled;
    unlabeled.label_column.clear();
    const Dataset u = load_csv(dir / "u.csv", unlabeled);
    CHECK_FALSE(u.labeled());
    CHECK(u.features.cols() == 2);
}

TEST_CASE("idx round trip and scaling") {
    testing::TempDir dir("idx");
    IdxTensor images;
    images.dims = {3, 2, 2};
    images.data = {0, 255, 128, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    IdxTensor labels;
    labels.dims = {3};
    labels.data = {0, 2, 1};
    for (const std::string ext : {"", ".gz"}) {
        const auto img_path = dir / ("img" + ext);
        const auto lbl_path = dir / ("lbl" + ext);
        write_idx(img_path, images);
        write_idx(lbl_path, labels);
        const IdxTensor back = read_idx(img_path);
        CHECK(back.dims == images.dims);
        CHECK(back.data == images.data);

        const Dataset d = load_idx(img_path, lbl_path);
        CHECK(d.size() == 3);
        CHECK(d.features.cols() == 4);
        CHECK(d.labels->num_classes() == 3);
        CHECK(d.features(0, 0) == 0.0);
        CHECK(d.features(0, 1) == 1.0);
        CHECK(d.features(0, 2) == 128.0 / 255.0);
        CHECK(d.labels->values()[1] == 2);
    }
    const auto raw = read_bytes(dir / "img");
    CHECK(raw[2] == 0x08);
    CHECK(raw[3] == 0x03);
    CHECK(raw[7] == 3);
}

TEST_CASE("idx errors") {
    testing::TempDir dir("idx_err");
    IdxTensor images;
    images.dims = {10, 2, 2};
    images.data.assign(40, 7);
    IdxTensor labels;
    labels.dims = {9};
    labels.data.assign(9, 1);
    labels.data[0] = 0;
    write_idx(dir / "img", images);
    write_idx(dir / "lbl", labels);
    const std::string message = error_message([&] { load_idx(dir / "img", dir / "lbl"); });
    CHECK(message.find("mismatch") != std::string::npos);
    CHECK_THROWS_AS(load_idx(dir / "img", dir / "lbl"), DataError);

    auto bytes = read_bytes(dir / "img");
    auto bad_magic = bytes;
    bad_magic[2] = 0x09;
    write_bytes(dir / "bad_magic", bad_magic);
    CHECK_THROWS_AS(read_idx(dir / "bad_magic"), DataError);

    auto truncated = bytes;
    truncated.resize(truncated.size() - 3);
    write_bytes(dir / "truncated", truncated);
    CHECK(error_message([&] { read_idx(dir / "truncated"); }).find("truncated") != std::string::npos);

    auto trailing = bytes;
    trailing.push_back(0);
    write_bytes(dir / "trailing", trailing);
    CHECK_THROWS_AS(read_idx(dir / "trailing"), DataError);

    // Swapped roles: labels file passed as images.
    CHECK_THROWS_AS(load_idx(dir / "lbl", dir / "img"), DataError);
}

TEST_CASE("idx round trip on generated fixtures") {
    testing::TempDir dir("idx_gen");
    Rng rng(71);
    for (int trial = 0; trial < 5; ++trial) {
        IdxTensor t;
        t.dims = {static_cast<std::uint32_t>(1 + rng.uniform_index(20)), static_cast<std::uint32_t>(1 + rng.uniform_index(9)),
                  static_cast<std::uint32_t>(1 + rng.uniform_index(9))};
        t.data.resize(std::size_t{t.dims[0]} * t.dims[1] * t.dims[2]);
        for (auto& b : t.data) b = static_cast<std::uint8_t>(rng.uniform_index(256));
        write_idx(dir / "t.gz", t);
        const IdxTensor back = read_idx(dir / "t.gz");
        CHECK(back.dims == t.dims);
        CHECK(back.data == t.data);
    }
}

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Hello, World! it's 42nd") ==
          std::vector<std::string>{"hello", "world", "it", "s", "42nd"});
    CHECK(tokenize("  ").empty());
}

TEST_CASE("tf-idf worked example") {
    const auto result = build_tfidf({{"a", "a", "b"}}, 2);
    REQUIRE(result.vocabulary.terms == std::vector<std::string>{"a", "b"});
    CHECK(result.vocabulary.document_frequency == std::vector<std::size_t>{1, 1});
    CHECK(result.features(0, 0) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(result.features(0, 1) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("tf-idf vocabulary ordering, cap and zero rows") {
    const std::vector<std::vector<std::string>> docs{{"b", "c", "c"}, {"a", "b"}, {"z"}};
    const auto result = build_tfidf(docs, 100);
    // counts: b 2, c 2, a 1, z 1 -> ties lexicographic
    CHECK(result.vocabulary.terms == std::vector<std::string>{"b", "c", "a", "z"});
    CHECK(result.vocabulary.document_count == 3);
    CHECK(result.features(0, 2) == 0.0);

    const auto capped = build_tfidf(docs, 2);
    CHECK(capped.vocabulary.terms == std::vector<std::string>{"b", "c"});
    // Third document has no vocabulary term: stays zero.
    CHECK(capped.features(2, 0) == 0.0);
    CHECK(capped.features(2, 1) == 0.0);

    // idf for b: ln(4/3) + 1
    const double idf_b = std::log(4.0 / 3.0) + 1.0;
    const double idf_c = std::log(4.0 / 2.0) + 1.0;
    const double norm = std::sqrt(idf_b * idf_b + 4.0 * idf_c * idf_c);
    CHECK(capped.features(0, 0) == doctest::Approx(idf_b / norm).epsilon(1e-14));
    CHECK(capped.features(0, 1) == doctest::Approx(2.0 * idf_c / norm).epsilon(1e-14));

    CHECK_THROWS_AS(build_tfidf({}, 10), InvalidArgument);
}

TEST_CASE("tf-idf is permutation equivariant") {
    const std::vector<std::vector<std::string>> docs{
        {"the", "cat", "sat"}, {"the", "dog"}, {"a", "cat", "and", "a", "dog"}, {"the", "the", "end"}};
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<std::vector<std::string>> shuffled;
    for (std::size_t i : perm) shuffled.push_back(docs[i]);
    const auto a = build_tfidf(docs, 5);
    const auto b = build_tfidf(shuffled, 5);
    CHECK(a.vocabulary.terms == b.vocabulary.terms);
    CHECK(a.vocabulary.document_frequency == b.vocabulary.document_frequency);
    for (std::size_t r = 0; r < perm.size(); ++r) {
        for (std::size_t t = 0; t < a.features.cols(); ++t) CHECK(b.features(r, t) == a.features(perm[r], t));
    }
    // transform reproduces the training matrix
    CHECK(transform_tfidf(docs, a.vocabulary) == a.features);
}

TEST_CASE("text loader") {
    testing::TempDir dir("text");
    write_file(dir / "t.txt", "pos\tGreat movie!\nneg\tAwful, boring.\n\npos\tgreat fun\n");
    const TextCorpus corpus = load_text(dir / "t.txt");
    CHECK(corpus.labels == std::vector<std::string>{"pos", "neg", "pos"});
    CHECK(corpus.documents[0] == std::vector<std::string>{"great", "movie"});
    write_file(dir / "bad.txt", "no tab here\n");
    CHECK_THROWS_AS(load_text(dir / "bad.txt"), DataError);
}

// ---------------------------------------------------------------------------

namespace {

TrainConfig archive_config(bool retrain_full) {
    TrainConfig config;
    config.seed = 31;
    config.retrain_full = retrain_full;
    config.max_iterations = 3;
    config.roster.clear();
    for (LearnerKind kind : {LearnerKind::logistic_regression, LearnerKind::knn, LearnerKind::random_forest,
                             LearnerKind::extra_trees, LearnerKind::gradient_boosted_trees, LearnerKind::dummy_prior}) {
        LearnerSpec spec = LearnerSpec::defaults(kind);
        if (auto* f = std::get_if<ForestParams>(&spec.params)) f->trees = 6;
        if (auto* b = std::get_if<BoostingParams>(&spec.params)) b->rounds = 4;
        if (auto* k = std::get_if<KnnParams>(&spec.params)) k->neighbors = 3;
        if (auto* l = std::get_if<LogisticRegressionParams>(&spec.params)) l->max_epochs = 30;
        config.roster.push_back(spec);
    }
    return config;
}

}  // namespace

TEST_CASE("model archive round trip reproduces predictions bitwise") {
    testing::TempDir dir("archive");
    const Dataset train_set = testing::make_blobs(90, 5, 3, 61, 1.0, 1.0);
    const Dataset probe = testing::make_blobs(40, 5, 3, 62, 1.0, 1.0);
    for (bool retrain_full : {false, true}) {
        const DslModel model = train(train_set, archive_config(retrain_full));
        save_model(model, dir / "m.dsl");
        const DslModel loaded = load_model(dir / "m.dsl");
        CHECK(loaded.depth() == model.depth());
        CHECK(loaded.config().seed == 31);
        CHECK(loaded.config().retrain_full == retrain_full);
        CHECK(loaded.config().roster == model.config().roster);
        CHECK(loaded.class_names() == model.class_names());
        for (std::size_t t = 0; t < model.depth(); ++t) {
            CHECK(loaded.layers()[t].weights == model.layers()[t].weights);
            CHECK(loaded.layers()[t].train_loss == model.layers()[t].train_loss);
            CHECK(loaded.layers()[t].fold_assignment_seed == model.layers()[t].fold_assignment_seed);
        }
        CHECK(predict(loaded, probe.features) == predict(model, probe.features));
        // Serialization is deterministic.
        CHECK(serialize_model(loaded) == serialize_model(model));
    }
}

TEST_CASE("archive stores the k-NN training matrix exactly") {
    const Dataset train_set = testing::make_blobs(60, 4, 2, 63);
    TrainConfig config;
    LearnerSpec knn = LearnerSpec::defaults(LearnerKind::knn);
    std::get<KnnParams>(knn.params).neighbors = 3;
    config.roster = {knn};
    config.mode = EnsembleMode::single_layer;
    const DslModel model = train(train_set, config);
    const DslModel loaded = deserialize_model(serialize_model(model));
    for (std::size_t f = 0; f < 3; ++f) {
        const auto& a = dynamic_cast<const KNearestNeighbors&>(model.layers()[0].models[0][f].impl());
        const auto& b = dynamic_cast<const KNearestNeighbors&>(loaded.layers()[0].models[0][f].impl());
        CHECK(a.training_features() == b.training_features());
        CHECK(a.training_labels() == b.training_labels());
        // Byte-level: the stored doubles are the training values' bit patterns.
        ArchiveWriter wa, wb;
        a.write(wa);
        b.write(wb);
        CHECK(wa.bytes() == wb.bytes());
    }
}

TEST_CASE("corrupted archives are rejected") {
    const Dataset train_set = testing::make_blobs(60, 3, 2, 64);
    TrainConfig config;
    config.roster = {LearnerSpec::defaults(LearnerKind::dummy_prior), LearnerSpec::defaults(LearnerKind::dummy_uniform)};
    const auto bytes = serialize_model(train(train_set, config));

    auto version = bytes;
    version[8] = 0x7f;  // first byte of the version field
    const std::string message = error_message([&] { deserialize_model(version); });
    CHECK(message.find("version") != std::string::npos);
    CHECK_THROWS_AS(deserialize_model(version), ArchiveError);

    auto magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_model(magic), ArchiveError);

    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x01;
    CHECK(error_message([&] { deserialize_model(flipped); }).find("checksum") != std::string::npos);

    auto short_bytes = bytes;
    short_bytes.resize(bytes.size() - 1);
    CHECK_THROWS_AS(deserialize_model(short_bytes), ArchiveError);

    auto longer = bytes;
    longer.push_back(0);
    CHECK_THROWS_AS(deserialize_model(longer), ArchiveError);

    CHECK_THROWS_AS(deserialize_model(std::vector<std::uint8_t>{}), ArchiveError);
}

TEST_CASE("unsupported learner kind is rejected even with a valid checksum") {
    const Dataset train_set = testing::make_blobs(60, 3, 2, 65);
    TrainConfig config;
    config.roster = {LearnerSpec::defaults(LearnerKind::dummy_prior)};
    auto bytes = serialize_model(train(train_set, config));
    // Payload starts after magic (8) + version (4) + length (8). The config
    // block is folds, max_iterations (u64 each), retrain_full, seed, mode,
    // roster size, then the first spec's kind byte.
    const std::size_t payload = 20;
    const std::size_t kind_at = payload + 8 + 8 + 1 + 8 + 1 + 8;
    REQUIRE(bytes[kind_at] == static_cast<std::uint8_t>(LearnerKind::dummy_prior));
    bytes[kind_at] = 99;
    const std::size_t length = bytes.size() - payload - 8;
    const std::uint64_t sum =
        fnv1a64(std::span<const std::uint8_t>(bytes.data() + payload, length));
    for (int b = 0; b < 8; ++b) bytes[payload + length + b] = static_cast<std::uint8_t>(sum >> (8 * b));
    const std::string message = error_message([&] { deserialize_model(bytes); });
    CHECK(message.find("unsupported learner kind") != std::string::npos);
}
