#include "iscs/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "iscs/checksum.hpp"
#include "iscs/error.hpp"
#include "iscs/importance.hpp"

namespace iscs {
namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kGroupSizeConvention = "N counts the SC: each group holds 1 SC and N-1 SA channels";
constexpr const char* kLayoutConvention =
    "groups concatenated in order, each slice-major; then bias channels ascending; then residual";

template <typename T>
std::vector<T> get_vec(const ojson& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("manifest missing '") + key + "'");
    return j.at(key).get<std::vector<T>>();
}

} // namespace

void IscsManifest::validate() const {
    if (version != kManifestVersion) throw InputError("unsupported manifest version " + std::to_string(version));
    const std::size_t c = channels();
    if (bias.size() != c) throw InputError("manifest score vectors differ in length");
    if (!source.shape.empty() && static_cast<std::size_t>(source.shape.front()) != c)
        throw InputError("manifest source shape disagrees with score length");
    try {
        structure.check_partition(c);
        plan.check(c);
    } catch (const InvariantError& e) {
        throw InputError(std::string("inconsistent manifest: ") + e.what());
    }
    if (plan.groups.size() != structure.groups.size() || plan.slice_count != slice_count ||
        plan.strategy != strategy || plan.bias_channels != structure.bias_channels ||
        plan.residual != structure.residual)
        throw InputError("inconsistent manifest: plan does not match structure");
    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
        std::vector<std::size_t> a, b{structure.groups[g].sc};
        for (const auto& s : plan.groups[g]) a.insert(a.end(), s.begin(), s.end());
        b.insert(b.end(), structure.groups[g].sa.begin(), structure.groups[g].sa.end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) throw InputError("inconsistent manifest: group " + std::to_string(g) + " channel sets differ");
    }
}

IscsManifest build_manifest(const ManifestSource& source, const ConvKernelSet& kernels,
                            const DiscoveryParams& params, std::size_t slice_count, OrderingStrategy strategy) {
    const auto scores = compute_scores(kernels);
    IscsManifest m;
    m.source = source;
    m.params = params;
    m.structure = discover(scores, params);
    m.num_groups = m.structure.groups.size();
    m.slice_count = slice_count;
    m.strategy = strategy;
    m.variance = scores.variance;
    m.bias = scores.bias_mag;
    m.plan = build_plan(m.structure, scores.similarity, slice_count, strategy, params.similarity_mode);
    m.validate();
    return m;
}

std::string manifest_to_json(const IscsManifest& m) {
    ojson j;
    j["version"] = m.version;
    j["source"] = {{"file", m.source.file},
                   {"tensor", m.source.weight_tensor},
                   {"bias_tensor", m.source.bias_tensor ? ojson(*m.source.bias_tensor) : ojson(nullptr)},
                   {"shape", m.source.shape}};
    j["params"] = {{"group_size", m.params.group_size},
                   {"num_groups", m.num_groups},
                   {"num_groups_defaulted", !m.params.num_groups.has_value()},
                   {"bias_z_threshold", m.params.bias_z_threshold},
                   {"similarity_mode", to_string(m.params.similarity_mode)},
                   {"slice_count", m.slice_count},
                   {"ordering_strategy", to_string(m.strategy)},
                   {"conventions", {{"group_size", kGroupSizeConvention}, {"permutation_layout", kLayoutConvention}}}};
    j["scores"] = {{"variance", m.variance}, {"bias", m.bias}};
    ojson groups = ojson::array();
    for (const auto& g : m.structure.groups) groups.push_back({{"sc", g.sc}, {"sa", g.sa}});
    j["structure"] = {{"groups", groups},
                      {"bias_channels", m.structure.bias_channels},
                      {"residual", m.structure.residual}};
    j["plan"] = {{"permutation", m.plan.permutation},
                 {"groups", m.plan.groups},
                 {"slice_count", m.plan.slice_count},
                 {"ordering_strategy", to_string(m.plan.strategy)},
                 {"bias_channels", m.plan.bias_channels},
                 {"residual", m.plan.residual}};
    ojson cfg = ojson::object();
    for (const auto& [k, v] : m.config) cfg[k] = v;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

IscsManifest manifest_from_json(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw InputError(std::string("manifest is not valid JSON: ") + e.what());
    }
    IscsManifest m;
    try {
        m.version = j.at("version").get<int>();
        if (m.version != kManifestVersion) throw InputError("unsupported manifest version " + std::to_string(m.version));
        const auto& src = j.at("source");
        m.source.file = src.at("file").get<std::string>();
        m.source.weight_tensor = src.at("tensor").get<std::string>();
        if (!src.at("bias_tensor").is_null()) m.source.bias_tensor = src.at("bias_tensor").get<std::string>();
        m.source.shape = get_vec<std::int64_t>(src, "shape");

        const auto& p = j.at("params");
        m.params.group_size = p.at("group_size").get<std::size_t>();
        m.num_groups = p.at("num_groups").get<std::size_t>();
        if (!p.at("num_groups_defaulted").get<bool>()) m.params.num_groups = m.num_groups;
        m.params.bias_z_threshold = p.at("bias_z_threshold").get<double>();
        m.params.similarity_mode = similarity_mode_from_string(p.at("similarity_mode").get<std::string>());
        m.slice_count = p.at("slice_count").get<std::size_t>();
        m.strategy = ordering_strategy_from_string(p.at("ordering_strategy").get<std::string>());

        m.variance = get_vec<double>(j.at("scores"), "variance");
        m.bias = get_vec<double>(j.at("scores"), "bias");

        const auto& st = j.at("structure");
        for (const auto& g : st.at("groups"))
            m.structure.groups.push_back({g.at("sc").get<std::size_t>(), g.at("sa").get<std::vector<std::size_t>>()});
        m.structure.bias_channels = get_vec<std::size_t>(st, "bias_channels");
        m.structure.residual = get_vec<std::size_t>(st, "residual");

        const auto& pl = j.at("plan");
        m.plan.permutation = get_vec<std::size_t>(pl, "permutation");
        m.plan.groups = pl.at("groups").get<std::vector<std::vector<Slice>>>();
        m.plan.slice_count = pl.at("slice_count").get<std::size_t>();
        m.plan.strategy = ordering_strategy_from_string(pl.at("ordering_strategy").get<std::string>());
        m.plan.bias_channels = get_vec<std::size_t>(pl, "bias_channels");
        m.plan.residual = get_vec<std::size_t>(pl, "residual");

        if (j.contains("config"))
            for (const auto& [k, v] : j.at("config").items())
                m.config[k] = v.is_string() ? v.get<std::string>() : v.dump();
    } catch (const ojson::exception& e) {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
    m.validate();
    return m;
}

void write_manifest(const std::filesystem::path& path, const IscsManifest& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write manifest '" + path.string() + "'");
    out << manifest_to_json(m);
}

IscsManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return manifest_from_json(text);
}

std::uint64_t manifest_hash(const IscsManifest& m) {
    Fnv1a64 h;
    h.update(manifest_to_json(m));
    return h.digest();
}

} // namespace iscs
