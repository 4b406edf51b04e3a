#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iscs/discovery.hpp"
#include "iscs/grouping.hpp"

namespace iscs {

inline constexpr int kManifestVersion = 1;

struct ManifestSource {
    std::string file;
    std::string weight_tensor;
    std::optional<std::string> bias_tensor;
    std::vector<std::int64_t> shape;
};

/// Persisted result of the one-time weight analysis. Serialized as JSON with a fixed key order.
struct IscsManifest {
    int version = kManifestVersion;
    ManifestSource source;
    DiscoveryParams params;
    std::size_t num_groups = 0; // effective M after defaulting
    std::size_t slice_count = 1;
    OrderingStrategy strategy = OrderingStrategy::KnI;
    std::vector<double> variance;
    std::vector<double> bias;
    IscsStructure structure;
    GroupingPlan plan;
    /// Effective run configuration, echoed verbatim.
    std::map<std::string, std::string> config;

    std::size_t channels() const noexcept { return variance.size(); }
    /// Throws InputError when the pieces disagree with each other.
    void validate() const;
};

IscsManifest build_manifest(const ManifestSource& source, const ConvKernelSet& kernels,
                            const DiscoveryParams& params, std::size_t slice_count, OrderingStrategy strategy);

std::string manifest_to_json(const IscsManifest& m);
IscsManifest manifest_from_json(const std::string& text);

void write_manifest(const std::filesystem::path& path, const IscsManifest& m);
IscsManifest read_manifest(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON serialization.
std::uint64_t manifest_hash(const IscsManifest& m);

} // namespace iscs
