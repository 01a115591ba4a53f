#include <doctest.h>

#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

#include <json.hpp>

#include "biomeval/dataset.hpp"
#include "biomeval/error.hpp"
#include "biomeval/simulator.hpp"
#include "test_support.hpp"

using namespace biomeval;
namespace fs = std::filesystem;

namespace {

SimulationConfig small_config(std::uint32_t identities, std::uint32_t variations,
                              std::uint32_t dimension, std::uint64_t seed) {
    SimulationConfig config;
    config.name = "unit";
    config.identity_count = identities;
    config.variations_per_identity = variations;
    config.dimension = dimension;
    config.intra_spread = 0.2;
    config.seed = seed;
    return config;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

EmbeddingRecord make_record(std::string id, std::uint32_t variation, std::vector<float> v) {
    return {std::move(id), variation, std::move(v)};
}

DatasetManifest two_identity_manifest(std::uint32_t dim, std::uint32_t variations) {
    DatasetManifest manifest;
    manifest.name = "crafted";
    manifest.embedding_dimension = dim;
    manifest.embedding_file = "embeddings.bev";
    manifest.identities.push_back({"alice", {}, variations});
    manifest.identities.push_back({"bob", {}, variations});
    return manifest;
}

} // namespace

TEST_CASE("load: well-formed 2x10 dataset round-trips with 20 records") {
    const auto dir = testsup::make_temp_dir();
    const auto dataset = simulate_dataset(small_config(2, 10, 512, 5));
    write_dataset(dataset, dir / "manifest.json");

    const auto loaded = load_dataset(dir / "manifest.json");
    CHECK(loaded.records().size() == 20);
    CHECK(loaded.manifest().embedding_dimension == 512);
    CHECK(loaded.identity_count() == 2);
    for (std::size_t i = 0; i < loaded.records().size(); ++i) {
        CHECK(loaded.records()[i].identity_id == dataset.records()[i].identity_id);
        CHECK(loaded.records()[i].variation_id == dataset.records()[i].variation_id);
        CHECK(loaded.records()[i].vector == dataset.records()[i].vector);
    }
    fs::remove_all(dir);
}

TEST_CASE("load: truncated record reports DimensionMismatch with identity context") {
    const auto dir = testsup::make_temp_dir();
    const auto dataset = simulate_dataset(small_config(2, 2, 8, 5));
    write_dataset(dataset, dir / "manifest.json");

    // Cut the last record short: keep its header and only half its floats.
    const auto store = dir / "embeddings.bev";
    const auto bytes = testsup::slurp(store);
    const std::size_t record_bytes = 8 + 4 * 8;
    REQUIRE(bytes.size() == 4 + 4 * record_bytes);
    std::ofstream out(store, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 4 * 4));
    out.close();

    try {
        load_dataset(dir / "manifest.json");
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
        const std::string what = e.what();
        CHECK(what.find("id0001") != std::string::npos); // last canonical identity
        CHECK(what.find("variation 1") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("load: 36-identity demographic fixture stratifies into 6 groups of 6") {
    const auto dir = testsup::make_temp_dir();
    const auto dataset = simulate_dataset(testsup::standard_fixture_config(12, 64));
    write_dataset(dataset, dir / "manifest.json");
    const auto loaded = load_dataset(dir / "manifest.json");
    CHECK(loaded.identity_count() == 36);
    CHECK(loaded.records().size() == 36 * 70);

    const auto by_ethnicity = stratify(loaded, GroupKey::Ethnicity);
    CHECK(by_ethnicity.size() == 6);
    for (const auto& [label, ids] : by_ethnicity) {
        CAPTURE(label);
        CHECK(ids.size() == 6);
    }

    const auto by_both = stratify(loaded, GroupKey::EthnicityGender);
    CHECK(by_both.size() == 12);
    for (const auto& [label, ids] : by_both) {
        CAPTURE(label);
        CHECK(ids.size() == 3);
    }

    const auto by_gender = stratify(loaded, GroupKey::Gender);
    CHECK(by_gender.size() == 2);
    CHECK(by_gender.at("Male").size() == 18);
    CHECK(by_gender.at("Female").size() == 18);
    fs::remove_all(dir);
}

TEST_CASE("stratify: single shared ethnicity degenerates to one group") {
    SimulationConfig config = small_config(4, 2, 8, 3);
    config.demographic_plan = {{Ethnicity::Indian, Gender::Male, 2},
                               {Ethnicity::Indian, Gender::Female, 2}};
    const auto dataset = simulate_dataset(config);
    const auto groups = stratify(dataset, GroupKey::Ethnicity);
    REQUIRE(groups.size() == 1);
    CHECK(groups.at("Indian").size() == 4);
}

TEST_CASE("stratify: groups partition the identity set") {
    const auto dataset = simulate_dataset(testsup::standard_fixture_config(4, 16));
    for (const auto key : {GroupKey::Ethnicity, GroupKey::Gender, GroupKey::EthnicityGender}) {
        const auto groups = stratify(dataset, key);
        std::set<std::string> seen;
        std::size_t total = 0;
        for (const auto& [label, ids] : groups) {
            CHECK(!ids.empty());
            total += ids.size();
            seen.insert(ids.begin(), ids.end());
        }
        CHECK(total == dataset.identity_count());
        CHECK(seen.size() == dataset.identity_count());
    }
}

TEST_CASE("load: shuffled record order produces a byte-identical canonical dataset") {
    const auto dir = testsup::make_temp_dir();
    const auto dataset = simulate_dataset(small_config(3, 5, 16, 9));
    write_dataset(dataset, dir / "manifest.json");
    const auto original_bytes = testsup::slurp(dir / "embeddings.bev");

    // Reverse the record order in the store.
    const std::size_t record_bytes = 8 + 4 * 16;
    const std::size_t n = (original_bytes.size() - 4) / record_bytes;
    std::string shuffled = original_bytes.substr(0, 4);
    for (std::size_t i = n; i-- > 0;)
        shuffled += original_bytes.substr(4 + i * record_bytes, record_bytes);
    {
        std::ofstream out(dir / "embeddings.bev", std::ios::binary | std::ios::trunc);
        out << shuffled;
    }
    REQUIRE(testsup::slurp(dir / "embeddings.bev") != original_bytes);

    const auto reloaded = load_dataset(dir / "manifest.json");
    const auto dir2 = testsup::make_temp_dir();
    write_dataset(reloaded, dir2 / "manifest.json");
    CHECK(testsup::slurp(dir2 / "embeddings.bev") == original_bytes);
    CHECK(testsup::slurp(dir2 / "manifest.json") == testsup::slurp(dir / "manifest.json"));

    std::size_t declared = 0;
    for (const auto& identity : reloaded.manifest().identities)
        declared += identity.variation_count;
    CHECK(declared == reloaded.records().size());
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("validation: manifest-level failures carry the right codes") {
    const auto dir = testsup::make_temp_dir();

    SUBCASE("missing manifest") {
        CHECK(code_of([&] { load_dataset(dir / "nope.json"); }) == ErrorCode::MissingFile);
    }

    SUBCASE("missing embedding store") {
        nlohmann::json doc = {{"name", "x"},
                              {"embedding_dimension", 4},
                              {"embedding_file", "absent.bev"},
                              {"identities",
                               {{{"identity_id", "a"},
                                 {"ethnicity", "Indian"},
                                 {"gender", "Male"},
                                 {"variation_count", 1}},
                                {{"identity_id", "b"},
                                 {"ethnicity", "Indian"},
                                 {"gender", "Male"},
                                 {"variation_count", 1}}}}};
        std::ofstream(dir / "manifest.json") << doc.dump();
        CHECK(code_of([&] { load_dataset(dir / "manifest.json"); }) == ErrorCode::MissingFile);
    }

    SUBCASE("unknown attribute label") {
        nlohmann::json doc = {{"name", "x"},
                              {"embedding_dimension", 4},
                              {"embedding_file", "absent.bev"},
                              {"identities",
                               {{{"identity_id", "a"},
                                 {"ethnicity", "Martian"},
                                 {"gender", "Male"},
                                 {"variation_count", 1}},
                                {{"identity_id", "b"},
                                 {"ethnicity", "Indian"},
                                 {"gender", "Male"},
                                 {"variation_count", 1}}}}};
        std::ofstream(dir / "manifest.json") << doc.dump();
        CHECK(code_of([&] { load_dataset(dir / "manifest.json"); }) ==
              ErrorCode::UnknownAttributeLabel);
    }

    SUBCASE("single identity") {
        nlohmann::json doc = {{"name", "x"},
                              {"embedding_dimension", 4},
                              {"embedding_file", "absent.bev"},
                              {"identities",
                               {{{"identity_id", "only"},
                                 {"ethnicity", "Indian"},
                                 {"gender", "Male"},
                                 {"variation_count", 1}}}}};
        std::ofstream(dir / "manifest.json") << doc.dump();
        CHECK(code_of([&] { load_dataset(dir / "manifest.json"); }) ==
              ErrorCode::SingleIdentityDataset);
    }

    SUBCASE("malformed json") {
        std::ofstream(dir / "manifest.json") << "{ not json";
        CHECK(code_of([&] { load_dataset(dir / "manifest.json"); }) == ErrorCode::InvalidManifest);
    }

    fs::remove_all(dir);
}

TEST_CASE("validation: record-level failures carry the right codes") {
    const std::vector<float> unit{1.0F, 0.0F};

    SUBCASE("duplicate identity") {
        auto manifest = two_identity_manifest(2, 1);
        manifest.identities.push_back({"alice", {}, 1});
        CHECK(code_of([&] {
            Dataset(manifest, {make_record("alice", 0, unit), make_record("bob", 0, unit)});
        }) == ErrorCode::DuplicateIdentity);
    }

    SUBCASE("duplicate variation") {
        CHECK(code_of([&] {
            Dataset(two_identity_manifest(2, 2),
                    {make_record("alice", 0, unit), make_record("alice", 0, unit),
                     make_record("bob", 0, unit), make_record("bob", 1, unit)});
        }) == ErrorCode::DuplicateVariation);
    }

    SUBCASE("non-finite component") {
        CHECK(code_of([&] {
            Dataset(two_identity_manifest(2, 1),
                    {make_record("alice", 0, {1.0F, std::numeric_limits<float>::quiet_NaN()}),
                     make_record("bob", 0, unit)});
        }) == ErrorCode::NonFiniteComponent);
    }

    SUBCASE("zero norm vector") {
        CHECK(code_of([&] {
            Dataset(two_identity_manifest(2, 1),
                    {make_record("alice", 0, {0.0F, 0.0F}), make_record("bob", 0, unit)});
        }) == ErrorCode::ZeroNormVector);
    }

    SUBCASE("wrong dimension") {
        CHECK(code_of([&] {
            Dataset(two_identity_manifest(2, 1),
                    {make_record("alice", 0, {1.0F, 0.0F, 0.0F}), make_record("bob", 0, unit)});
        }) == ErrorCode::DimensionMismatch);
    }

    SUBCASE("variation count mismatch") {
        CHECK(code_of([&] {
            Dataset(two_identity_manifest(2, 2),
                    {make_record("alice", 0, unit), make_record("alice", 1, unit),
                     make_record("bob", 0, unit)});
        }) == ErrorCode::VariationCountMismatch);
    }

    SUBCASE("record for undeclared identity") {
        CHECK(code_of([&] {
            Dataset(two_identity_manifest(2, 1),
                    {make_record("alice", 0, unit), make_record("bob", 0, unit),
                     make_record("carol", 0, unit)});
        }) == ErrorCode::UnknownReference);
    }
}

TEST_CASE("load: manifest order and canonical order may differ") {
    // Binary identity indices refer to the manifest's array order, which is
    // not necessarily sorted; loading must remap and canonicalize.
    const auto dir = testsup::make_temp_dir();
    nlohmann::json doc = {{"name", "unsorted"},
                          {"embedding_dimension", 2},
                          {"embedding_file", "embeddings.bev"},
                          {"identities",
                           {{{"identity_id", "zed"},
                             {"ethnicity", "Indian"},
                             {"gender", "Male"},
                             {"variation_count", 1}},
                            {{"identity_id", "amy"},
                             {"ethnicity", "African"},
                             {"gender", "Female"},
                             {"variation_count", 2}}}}};
    std::ofstream(dir / "manifest.json") << doc.dump();

    // magic + records: (index 0 = zed, var 0), (index 1 = amy, var 1),
    // (index 1 = amy, var 0); deliberately unsorted record order too
    auto put_u32 = [](std::string& out, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto put_f32 = [&put_u32](std::string& out, float f) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    };
    std::string bytes = "BEV1";
    const float vecs[3][2] = {{1.0F, 0.0F}, {0.0F, 1.0F}, {0.5F, 0.5F}};
    const std::uint32_t ids[3] = {0, 1, 1};
    const std::uint32_t vars[3] = {0, 1, 0};
    for (int r = 0; r < 3; ++r) {
        put_u32(bytes, ids[r]);
        put_u32(bytes, vars[r]);
        put_f32(bytes, vecs[r][0]);
        put_f32(bytes, vecs[r][1]);
    }
    std::ofstream(dir / "embeddings.bev", std::ios::binary) << bytes;

    const auto loaded = load_dataset(dir / "manifest.json");
    REQUIRE(loaded.records().size() == 3);
    CHECK(loaded.manifest().identities[0].identity_id == "amy");
    CHECK(loaded.manifest().identities[1].identity_id == "zed");
    CHECK(loaded.records()[0].identity_id == "amy");
    CHECK(loaded.records()[0].variation_id == 0);
    CHECK(loaded.records()[0].vector == std::vector<float>{0.5F, 0.5F});
    CHECK(loaded.records()[1].identity_id == "amy");
    CHECK(loaded.records()[1].variation_id == 1);
    CHECK(loaded.records()[2].identity_id == "zed");
    CHECK(loaded.records()[2].vector == std::vector<float>{1.0F, 0.0F});
    fs::remove_all(dir);
}

TEST_CASE("dataset lookups: canonical order and record access") {
    const auto dataset = simulate_dataset(small_config(3, 4, 8, 21));
    const auto& ids = dataset.manifest().identities;
    for (std::size_t i = 1; i < ids.size(); ++i)
        CHECK(ids[i - 1].identity_id < ids[i].identity_id);

    const auto span = dataset.records_of(ids[1].identity_id);
    REQUIRE(span.size() == 4);
    for (std::uint32_t v = 0; v < 4; ++v) CHECK(span[v].variation_id == v);

    const auto& rec = dataset.record(ids[2].identity_id, 3);
    CHECK(rec.identity_id == ids[2].identity_id);
    CHECK(rec.variation_id == 3);
    CHECK_THROWS_AS((void)dataset.record(ids[2].identity_id, 99), Error);
    CHECK_THROWS_AS((void)dataset.records_of("ghost"), Error);
}
