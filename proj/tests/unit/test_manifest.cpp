#include <gtest/gtest.h>

#include <filesystem>

#include "iscs/manifest.hpp"
#include "iscs/synthetic.hpp"
#include "oracles.hpp"

using namespace iscs;

namespace {

IscsManifest planted_manifest(std::uint64_t seed, OrderingStrategy strategy = OrderingStrategy::KnI) {
    Rng rng(seed);
    PlantedConfig cfg;
    cfg.num_groups = 3;
    cfg.group_size = 8;
    cfg.bias_count = 2;
    cfg.residual = 3;
    const auto planted = generate_planted(cfg, rng);
    ManifestSource src{"planted.bin", "encoder.weight", std::string("encoder.bias"),
                       {static_cast<std::int64_t>(cfg.channels()), 2, 3, 3}};
    DiscoveryParams p;
    p.group_size = cfg.group_size;
    return build_manifest(src, planted.kernels, p, 4, strategy);
}

} // namespace

TEST(Manifest, JsonRoundTripIsExact) {
    for (auto strategy : {OrderingStrategy::KnI, OrderingStrategy::TspGreedy}) {
        auto m = planted_manifest(1, strategy);
        m.config = {{"seed", "1"}, {"group-size", "8"}};
        const auto text = manifest_to_json(m);
        const auto back = manifest_from_json(text);
        EXPECT_EQ(manifest_to_json(back), text);
        EXPECT_EQ(back.structure, m.structure);
        EXPECT_EQ(back.plan, m.plan);
        EXPECT_EQ(back.variance, m.variance);
        EXPECT_EQ(back.config, m.config);
        EXPECT_EQ(manifest_hash(back), manifest_hash(m));
    }
}

TEST(Manifest, DefaultedGroupCountIsRecorded) {
    const auto m = planted_manifest(2);
    EXPECT_FALSE(m.params.num_groups.has_value());
    EXPECT_EQ(m.num_groups, 3U);
    EXPECT_EQ(m.version, 1);
    const auto back = manifest_from_json(manifest_to_json(m));
    EXPECT_FALSE(back.params.num_groups.has_value());
}

TEST(Manifest, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "iscs_manifest_test.json";
    const auto m = planted_manifest(3);
    write_manifest(path, m);
    EXPECT_EQ(manifest_to_json(read_manifest(path)), manifest_to_json(m));
    std::filesystem::remove(path);
    EXPECT_THROW(read_manifest(path), InputError);
}

TEST(Manifest, RejectsInconsistentContent) {
    const auto m = planted_manifest(4);
    auto broken = m;
    std::swap(broken.plan.permutation[0], broken.plan.permutation[1]);
    EXPECT_THROW(manifest_from_json(manifest_to_json(broken)), InputError);

    broken = m;
    broken.bias.pop_back();
    EXPECT_THROW(manifest_from_json(manifest_to_json(broken)), InputError);

    broken = m;
    broken.version = 2;
    EXPECT_THROW(manifest_from_json(manifest_to_json(broken)), InputError);

    EXPECT_THROW(manifest_from_json("{"), InputError);
    EXPECT_THROW(manifest_from_json("{}"), InputError);
}

TEST(Manifest, HashChangesWithContent) {
    const auto a = planted_manifest(5);
    auto b = a;
    b.config["note"] = "x";
    EXPECT_NE(manifest_hash(a), manifest_hash(b));
    EXPECT_NE(manifest_hash(a), manifest_hash(planted_manifest(6)));
}

TEST(Manifest, KeyOrderIsStable) {
    const auto text = manifest_to_json(planted_manifest(7));
    const auto pos = [&](const char* key) { return text.find(std::string("\"") + key + "\""); };
    EXPECT_LT(pos("version"), pos("source"));
    EXPECT_LT(pos("source"), pos("params"));
    EXPECT_LT(pos("params"), pos("scores"));
    EXPECT_LT(pos("scores"), pos("structure"));
    EXPECT_LT(pos("structure"), pos("plan"));
}
