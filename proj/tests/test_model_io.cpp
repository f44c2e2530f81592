#include <doctest.h>

#include <cstdio>
#include <limits>

#include "helpers.hpp"
#include "nbcoded/model_io.hpp"
#include "nbcoded/pipeline.hpp"

using namespace nbcoded;
using model_io::ErrorKind;
using naive_bayes::Family;

namespace {

pipeline::NBcodedModel small_model(Family family, std::uint64_t seed = 1) {
    auto data = testing::blobs(200, 60, 9, 5);
    pipeline::NBcodedConfig c;
    c.training.epochs = 3;
    c.seed = seed;
    return pipeline::train_nbcoded(data, family, c);
}

ErrorKind kind_of(const model_io::Bytes &bytes) {
    try {
        model_io::deserialize(bytes);
    } catch (const model_io::ModelIoError &e) {
        return e.kind();
    }
    FAIL("expected a ModelIoError");
    return ErrorKind::kIo;
}

} // namespace

TEST_CASE("empty model frame") {
    const auto bytes = model_io::serialize(model_io::EmptyModel{});
    CHECK(bytes.size() == 15);
    CHECK(bytes[0] == 'N');
    CHECK(bytes[3] == 'D');
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(std::holds_alternative<model_io::EmptyModel>(model_io::deserialize(bytes)));
}

TEST_CASE("Gaussian NB section holds 2 + 4d doubles") {
    const auto model = small_model(Family::kGaussian);
    CHECK(model_io::nb_parameter_count(model.nb) == 26);
    const auto b = small_model(Family::kBernoulli);
    CHECK(model_io::nb_parameter_count(b.nb) == 2 + 2 + 4 * 6);
    const auto c = small_model(Family::kComplement);
    CHECK(model_io::nb_parameter_count(c.nb) == 2 + 1 + 2 * 6);
}

TEST_CASE("serialization is deterministic and round-trips every kind") {
    for (auto family : {Family::kGaussian, Family::kBernoulli, Family::kComplement}) {
        const auto model = small_model(family);
        const auto bytes = model_io::serialize(model);
        CHECK(bytes == model_io::serialize(model));
        const auto back = model_io::deserialize_as<pipeline::NBcodedModel>(bytes);
        CHECK(back.normalizer == model.normalizer);
        CHECK(back.encoder == model.encoder);
        CHECK(back.seed == model.seed);
        CHECK(back.family() == family);
        CHECK(back.cnb_offsets.has_value() == model.cnb_offsets.has_value());
        CHECK(model_io::serialize(back) == bytes);
    }
    auto data = testing::blobs(100, 40, 9, 6);
    const auto nb = pipeline::train_naive_bayes(data, Family::kBernoulli);
    const auto nb_bytes = model_io::serialize(nb);
    CHECK(model_io::serialize(model_io::deserialize_as<pipeline::NaiveBayesModel>(nb_bytes)) == nb_bytes);
    CHECK_THROWS_AS(model_io::deserialize_as<pipeline::MlpModel>(nb_bytes), model_io::ModelIoError);

    auto config = pipeline::default_mlp_config();
    config.epochs = 2;
    const auto mlp = pipeline::train_mlp(data, config, {4});
    const auto mlp_bytes = model_io::serialize(mlp);
    CHECK(model_io::serialize(model_io::deserialize_as<pipeline::MlpModel>(mlp_bytes)) == mlp_bytes);
}

TEST_CASE("corrupt files are rejected with the right kind") {
    const auto good = model_io::serialize(small_model(Family::kGaussian));

    auto flipped = good;
    flipped[good.size() / 2] ^= 0x10;
    CHECK(kind_of(flipped) == ErrorKind::kChecksumMismatch);

    // Every single-bit flip inside the payload is caught.
    for (std::size_t i = model_io::kHeaderBytes; i + model_io::kTrailerBytes < good.size(); i += 13) {
        auto b = good;
        b[i] ^= 0x01;
        CHECK(kind_of(b) == ErrorKind::kChecksumMismatch);
    }

    auto magic = good;
    magic[0] = 'X';
    CHECK(kind_of(magic) == ErrorKind::kBadMagic);

    auto version = good;
    version[4] = 2;
    CHECK(kind_of(version) == ErrorKind::kUnsupportedVersion);

    for (std::size_t keep : {0ul, 3ul, 10ul, 40ul, good.size() - 1}) {
        const model_io::Bytes cut(good.begin(), good.begin() + long(keep));
        const auto k = kind_of(cut);
        CHECK((k == ErrorKind::kTruncated || (keep < 4 && k == ErrorKind::kBadMagic)));
    }

    auto trailing = good;
    trailing.push_back(0);
    CHECK(kind_of(trailing) == ErrorKind::kMalformed);

    auto kind = good;
    kind[6] = 9;
    CHECK(kind_of(kind) == ErrorKind::kMalformed);
}

TEST_CASE("non-finite parameters are refused") {
    auto model = small_model(Family::kGaussian);
    model.encoder.network.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        model_io::serialize(model);
        FAIL("expected a ModelIoError");
    } catch (const model_io::ModelIoError &e) {
        CHECK(e.kind() == ErrorKind::kNonFinite);
    }
}

TEST_CASE("files on disk") {
    const std::string path = "/tmp/nbcoded_model_io_test.nbc";
    const auto model = small_model(Family::kComplement);
    model_io::save(path, model);
    const auto back = std::get<pipeline::NBcodedModel>(model_io::load(path));
    CHECK(model_io::serialize(back) == model_io::serialize(model));
    std::remove(path.c_str());
    try {
        model_io::load(path);
        FAIL("expected a ModelIoError");
    } catch (const model_io::ModelIoError &e) {
        CHECK(e.kind() == ErrorKind::kIo);
    }
}
