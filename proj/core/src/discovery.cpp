#include "iscs/discovery.hpp"

#include <algorithm>
#include <cmath>

#include "iscs/error.hpp"

namespace iscs {
namespace {

constexpr double kMadToSigma = 1.4826;

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

const char* to_string(SimilarityMode m) noexcept {
    return m == SimilarityMode::Raw ? "raw" : "abs";
}

SimilarityMode similarity_mode_from_string(const std::string& s) {
    if (s == "raw") return SimilarityMode::Raw;
    if (s == "abs" || s == "absolute") return SimilarityMode::Absolute;
    throw InputError("unknown similarity mode '" + s + "' (expected raw or abs)");
}

void DiscoveryParams::validate() const {
    if (group_size < 2) throw InputError("group size N must be >= 2");
    if (num_groups && *num_groups < 1) throw InputError("number of groups M must be >= 1");
    if (!(bias_z_threshold > 0.0) || !std::isfinite(bias_z_threshold))
        throw InputError("bias z-score threshold must be a positive finite number");
}

std::size_t IscsStructure::channel_count() const noexcept {
    std::size_t n = bias_channels.size() + residual.size();
    for (const auto& g : groups) n += 1 + g.sa.size();
    return n;
}

void IscsStructure::check_partition(std::size_t channels) const {
    std::vector<int> seen(channels, 0);
    auto mark = [&](std::size_t c) {
        if (c >= channels) throw InvariantError("structure references channel out of range");
        if (seen[c]++) throw InvariantError("channel " + std::to_string(c) + " appears twice in structure");
    };
    for (const auto& g : groups) {
        mark(g.sc);
        for (auto c : g.sa) mark(c);
    }
    for (auto c : bias_channels) mark(c);
    for (auto c : residual) mark(c);
    if (channel_count() != channels) throw InvariantError("structure does not cover every channel");
}

double ranking_similarity(const Matrix& similarity, std::size_t a, std::size_t b,
                          SimilarityMode mode) noexcept {
    const double s = similarity(a, b);
    return mode == SimilarityMode::Absolute ? std::fabs(s) : s;
}

std::vector<std::size_t> flag_bias_dominated(const ChannelScores& scores, double z_threshold) {
    const auto& b = scores.bias_mag;
    if (b.size() < 2) return {};
    const double med = median_of(b);
    std::vector<double> dev(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) dev[i] = std::fabs(b[i] - med);
    const double mad = median_of(dev);

    std::vector<std::size_t> flagged;
    for (std::size_t c = 0; c < b.size(); ++c) {
        if (mad == 0.0) {
            if (b[c] > med) flagged.push_back(c);
        } else if ((b[c] - med) / (kMadToSigma * mad) > z_threshold) {
            flagged.push_back(c);
        }
    }
    return flagged;
}

std::vector<std::size_t> select_scs(const ChannelScores& scores, std::span<const std::size_t> bias_channels,
                                    std::size_t num_groups) {
    const std::size_t n = scores.channels();
    std::vector<bool> excluded(n, false);
    for (auto c : bias_channels) excluded.at(c) = true;
    if (num_groups > n - bias_channels.size())
        throw InputError("requested " + std::to_string(num_groups) + " SC channels but only " +
                         std::to_string(n - bias_channels.size()) + " non-bias channels exist");
    std::vector<std::size_t> scs;
    for (auto c : rank_descending(scores.variance)) {
        if (scs.size() == num_groups) break;
        if (!excluded[c]) scs.push_back(c);
    }
    return scs;
}

IscsStructure assign_sas(const ChannelScores& scores, std::span<const std::size_t> scs,
                         std::span<const std::size_t> bias_channels, std::size_t group_size,
                         SimilarityMode mode) {
    const std::size_t n = scores.channels();
    if (group_size < 2) throw InputError("group size N must be >= 2");
    std::vector<bool> taken(n, false);
    for (auto c : bias_channels) taken.at(c) = true;
    for (auto c : scs) {
        if (taken.at(c)) throw InputError("SC channel " + std::to_string(c) + " is also bias-dominated or repeated");
        taken[c] = true;
    }

    IscsStructure out;
    out.bias_channels.assign(bias_channels.begin(), bias_channels.end());
    std::sort(out.bias_channels.begin(), out.bias_channels.end());

    std::vector<bool> grouped(n, false);
    for (auto sc : scs) {
        std::vector<std::size_t> pool;
        for (std::size_t c = 0; c < n; ++c)
            if (!taken[c]) pool.push_back(c);
        if (pool.size() < group_size - 1) continue; // SC lands in the residual
        std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
            return ranking_similarity(scores.similarity, sc, a, mode) >
                   ranking_similarity(scores.similarity, sc, b, mode);
        });
        ChannelGroup g{sc, {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(group_size - 1)}};
        for (auto c : g.sa) taken[c] = true;
        grouped[sc] = true;
        for (auto c : g.sa) grouped[c] = true;
        out.groups.push_back(std::move(g));
    }

    std::vector<bool> is_bias(n, false);
    for (auto c : out.bias_channels) is_bias[c] = true;
    for (auto c : rank_descending(scores.variance))
        if (!grouped[c] && !is_bias[c]) out.residual.push_back(c);

    out.check_partition(n);
    return out;
}

std::size_t default_num_groups(std::size_t channels, std::size_t bias_count, std::size_t group_size) {
    return bias_count >= channels ? 0 : (channels - bias_count) / group_size;
}

IscsStructure discover(const ChannelScores& scores, const DiscoveryParams& params) {
    params.validate();
    const auto bias = flag_bias_dominated(scores, params.bias_z_threshold);
    const std::size_t m = params.num_groups.value_or(
        default_num_groups(scores.channels(), bias.size(), params.group_size));
    if (m == 0)
        throw InputError("no complete group of " + std::to_string(params.group_size) + " channels fits in " +
                         std::to_string(scores.channels() - bias.size()) + " non-bias channels");
    const auto scs = select_scs(scores, bias, m);
    return assign_sas(scores, scs, bias, params.group_size, params.similarity_mode);
}

IscsStructure discover(const ConvKernelSet& k, const DiscoveryParams& params) {
    return discover(compute_scores(k), params);
}

} // namespace iscs
