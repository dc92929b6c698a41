#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mopdil/cli_io.hpp"
#include "support.hpp"

using namespace mopdil;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "mopdil_test_cli_io";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("embedding parsing") {
    CHECK(parse_embeddings("id,domain,class,d0,d1\n").empty());

    const auto s = parse_embeddings("id,domain,class,d0,d1\n7,0,1,0.5,-1.25\n");
    REQUIRE(s.size() == 1);
    CHECK(s[0].id == "7");
    CHECK(s[0].domain_id == 0);
    CHECK(s[0].class_id == 1);
    CHECK(s[0].embedding == Embedding{0.5, -1.25});

    try {
        parse_embeddings("id,domain,class,d0,d1\n1,0,0,1,2\n2,0,1,0.5\n");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    CHECK(code_of([] { parse_embeddings("id,domain,label,d0\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_embeddings("id,domain,class,d0\n1,0,0,abc\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_embeddings("id,domain,class,d0\n1,0,0,nan\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_embeddings("id,domain,class,d0\n1,-2,0,1\n"); }) == ErrorCode::IndexOutOfRange);
    CHECK(code_of([] { parse_embeddings("id,domain,class,d0\n1,0,3,1\n", {std::nullopt, std::nullopt, 3}); }) ==
          ErrorCode::IndexOutOfRange);
    CHECK(code_of([] { parse_embeddings("id,domain,class,d0\n", {2, std::nullopt, std::nullopt}); }) ==
          ErrorCode::DimensionMismatch);

    const auto unknown = parse_embeddings("id,domain,class,d0\r\nx,-1,-1,3\r\n\n");
    REQUIRE(unknown.size() == 1);
    CHECK(unknown[0].domain_id == -1);
}

TEST_CASE("embedding files round-trip exactly") {
    std::mt19937_64 rng(3);
    std::vector<LabeledSample> samples;
    for (int i = 0; i < 40; ++i) {
        samples.push_back({"s" + std::to_string(i), testing::random_vector(rng, 5, 1e3), i % 3, i % 2});
    }
    const auto path = scratch("emb.csv");
    save_embeddings(samples, path);
    const auto back = load_embeddings(path);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) CHECK(back[i].embedding == samples[i].embedding);
}

TEST_CASE("model serialization is canonical and exact") {
    std::mt19937_64 rng(5);
    InferenceConfig cfg;
    cfg.q = 0.9123456789;
    cfg.distance_mode = DistanceMode::MahalanobisDiag;
    const auto mix = testing::random_mixture(rng, 6, 3, 4, cfg);
    const auto path = scratch("model.json");
    save_model(mix, path);
    const auto back = load_model(path);
    CHECK(back.config.q == cfg.q);
    CHECK(back.config.distance_mode == cfg.distance_mode);
    for (std::size_t s = 0; s < mix.size(); ++s) {
        const auto& a = mix.domain(s);
        const auto& b = back.domain(s);
        CHECK(a.prototypes == b.prototypes);
        CHECK(a.class_heads == b.class_heads);
        CHECK(a.diag_variance == b.diag_variance);
        for (std::size_t k = 0; k < a.gaussians.size(); ++k) {
            CHECK(a.gaussians[k].mu == b.gaussians[k].mu);
            CHECK(a.gaussians[k].sigma == b.gaussians[k].sigma);
        }
    }
    CHECK(serialize_model(back) == read_file(path));
}

TEST_CASE("model file errors") {
    std::mt19937_64 rng(6);
    const auto mix = testing::random_mixture(rng, 2, 1, 2);
    auto text = serialize_model(mix);
    const auto pos = text.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 19, "\"schema_version\": 7");
    CHECK(code_of([&] { deserialize_model(text); }) == ErrorCode::SchemaVersionMismatch);
    CHECK(code_of([] { serialize_model(FittedMixture(2, 2, InferenceConfig{})); }) == ErrorCode::EmptyMixture);
    CHECK(code_of([] { deserialize_model("{not json"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_model("/nonexistent/model.json"); }) == ErrorCode::IoError);
}

TEST_CASE("externally supplied heads survive the model file") {
    std::vector<LabeledSample> samples{{"a", {1, 0}, 0, 0}, {"b", {0, 1}, 0, 1}};
    FitOptions opts;
    opts.class_heads = std::vector<Embedding>{{-1, 1}, {1, 1}};
    FittedMixture mix(2, 2, InferenceConfig{});
    mix.append(fit_domain(samples, 2, mix.config, opts));
    const auto back = deserialize_model(serialize_model(mix));
    CHECK(back.domain(0).class_heads == *opts.class_heads);
}

TEST_CASE("synthetic spec parsing") {
    const auto spec = parse_synth_spec(R"({"dimension": 4, "num_classes": 3, "seed": 9, "domain_shift": 0})");
    CHECK(spec.dimension == 4);
    CHECK(spec.num_classes == 3);
    CHECK(spec.seed == 9);
    CHECK(spec.domain_shift == 0.0);
    CHECK(spec.num_domains == SynthSpec{}.num_domains);
    CHECK(parse_synth_spec(serialize_synth_spec(spec)).seed == 9);
    CHECK(parse_synth_spec(R"({"dimension": 8, "domain_rotation": 0.25})").domain_rotation == 0.25);
    CHECK(code_of([] { parse_synth_spec(R"({"dimension": 1, "num_classes": 3})"); }) ==
          ErrorCode::InfeasibleGeometry);
}

TEST_CASE("reals format with round-trip precision") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::ldexp(testing::uniform(rng, -1.0, 1.0), static_cast<int>(testing::uniform_index(rng, 0, 200)) - 100);
        CHECK(parse_real(format_real(x)) == x);
    }
}
