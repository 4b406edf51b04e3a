#include "iscs/grouping.hpp"

#include <algorithm>

#include "iscs/error.hpp"

namespace iscs {
namespace {

void require_divisible(std::size_t n, std::size_t slice_count) {
    if (slice_count < 1) throw InputError("slice count S must be >= 1");
    if (n % slice_count != 0)
        throw InputError("slice count S=" + std::to_string(slice_count) + " does not divide group size N=" +
                         std::to_string(n));
}

std::vector<std::size_t> by_similarity_to(std::size_t anchor, std::span<const std::size_t> members,
                                          const Matrix& similarity, SimilarityMode mode, bool descending) {
    std::vector<std::size_t> out(members.begin(), members.end());
    std::sort(out.begin(), out.end());
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
        const double sa = ranking_similarity(similarity, anchor, a, mode);
        const double sb = ranking_similarity(similarity, anchor, b, mode);
        return descending ? sa > sb : sa < sb;
    });
    return out;
}

} // namespace

const char* to_string(OrderingStrategy s) noexcept {
    switch (s) {
    case OrderingStrategy::KnI: return "kn_i";
    case OrderingStrategy::CorrAscending: return "corr_ascending";
    case OrderingStrategy::CorrDescending: return "corr_descending";
    case OrderingStrategy::TspGreedy: return "tsp_greedy";
    }
    return "?";
}

OrderingStrategy ordering_strategy_from_string(const std::string& s) {
    if (s == "kn_i") return OrderingStrategy::KnI;
    if (s == "corr_ascending") return OrderingStrategy::CorrAscending;
    if (s == "corr_descending") return OrderingStrategy::CorrDescending;
    if (s == "tsp_greedy") return OrderingStrategy::TspGreedy;
    throw InputError("unknown ordering strategy '" + s +
                     "' (expected kn_i, corr_ascending, corr_descending or tsp_greedy)");
}

std::vector<Slice> slice_group(std::span<const std::size_t> ordered, std::size_t slice_count) {
    require_divisible(ordered.size(), slice_count);
    std::vector<Slice> slices(slice_count);
    for (auto& s : slices) s.reserve(ordered.size() / slice_count);
    for (std::size_t r = 0; r < ordered.size(); ++r) slices[r % slice_count].push_back(ordered[r]);
    return slices;
}

std::vector<Slice> slice_contiguous(std::span<const std::size_t> ordered, std::size_t slice_count) {
    require_divisible(ordered.size(), slice_count);
    const std::size_t width = ordered.size() / slice_count;
    std::vector<Slice> slices(slice_count);
    for (std::size_t i = 0; i < slice_count; ++i)
        slices[i].assign(ordered.begin() + static_cast<std::ptrdiff_t>(i * width),
                         ordered.begin() + static_cast<std::ptrdiff_t>((i + 1) * width));
    return slices;
}

std::vector<std::size_t> order_group(std::size_t sc, std::span<const std::size_t> members,
                                     const Matrix& similarity, OrderingStrategy strategy, SimilarityMode mode) {
    std::vector<std::size_t> out{sc};
    switch (strategy) {
    case OrderingStrategy::KnI:
    case OrderingStrategy::CorrDescending: {
        auto rest = by_similarity_to(sc, members, similarity, mode, true);
        out.insert(out.end(), rest.begin(), rest.end());
        break;
    }
    case OrderingStrategy::CorrAscending: {
        auto rest = by_similarity_to(sc, members, similarity, mode, false);
        out.insert(out.end(), rest.begin(), rest.end());
        break;
    }
    case OrderingStrategy::TspGreedy: {
        std::vector<std::size_t> left(members.begin(), members.end());
        std::sort(left.begin(), left.end());
        std::size_t last = sc;
        while (!left.empty()) {
            auto best = left.begin();
            for (auto it = left.begin(); it != left.end(); ++it)
                if (ranking_similarity(similarity, last, *it, mode) > ranking_similarity(similarity, last, *best, mode))
                    best = it;
            last = *best;
            out.push_back(last);
            left.erase(best);
        }
        break;
    }
    }
    return out;
}

GroupingPlan build_plan(const IscsStructure& structure, const Matrix& similarity, std::size_t slice_count,
                        OrderingStrategy strategy, SimilarityMode mode) {
    GroupingPlan plan;
    plan.slice_count = slice_count;
    plan.strategy = strategy;
    if (slice_count < 1) throw InputError("slice count S must be >= 1");
    for (const auto& g : structure.groups) {
        auto ordered = order_group(g.sc, g.sa, similarity, strategy, mode);
        auto slices = strategy == OrderingStrategy::KnI ? slice_group(ordered, slice_count)
                                                         : slice_contiguous(ordered, slice_count);
        for (const auto& s : slices) plan.permutation.insert(plan.permutation.end(), s.begin(), s.end());
        plan.groups.push_back(std::move(slices));
    }
    plan.bias_channels = structure.bias_channels;
    std::sort(plan.bias_channels.begin(), plan.bias_channels.end());
    plan.residual = structure.residual;
    plan.permutation.insert(plan.permutation.end(), plan.bias_channels.begin(), plan.bias_channels.end());
    plan.permutation.insert(plan.permutation.end(), plan.residual.begin(), plan.residual.end());
    plan.check(structure.channel_count());
    return plan;
}

GroupingPlan build_index_plan(std::size_t channels, std::size_t group_size, std::size_t slice_count) {
    IscsStructure s;
    std::size_t c = 0;
    for (; c + group_size <= channels; c += group_size) {
        ChannelGroup g{c, {}};
        for (std::size_t j = 1; j < group_size; ++j) g.sa.push_back(c + j);
        s.groups.push_back(std::move(g));
    }
    for (; c < channels; ++c) s.residual.push_back(c);
    // Identity similarity keeps members in index order for the contiguous split.
    GroupingPlan plan;
    plan.slice_count = slice_count;
    plan.strategy = OrderingStrategy::CorrDescending;
    for (const auto& g : s.groups) {
        std::vector<std::size_t> ordered{g.sc};
        ordered.insert(ordered.end(), g.sa.begin(), g.sa.end());
        auto slices = slice_contiguous(ordered, slice_count);
        for (const auto& sl : slices) plan.permutation.insert(plan.permutation.end(), sl.begin(), sl.end());
        plan.groups.push_back(std::move(slices));
    }
    plan.residual = s.residual;
    plan.permutation.insert(plan.permutation.end(), s.residual.begin(), s.residual.end());
    plan.check(channels);
    return plan;
}

void GroupingPlan::check(std::size_t channels) const {
    if (permutation.size() != channels) throw InvariantError("permutation length does not match channel count");
    std::vector<bool> seen(channels, false);
    for (auto c : permutation) {
        if (c >= channels || seen[c]) throw InvariantError("permutation is not a bijection");
        seen[c] = true;
    }
    std::vector<std::size_t> concat;
    for (const auto& g : groups) {
        if (g.size() != slice_count) throw InvariantError("group does not have S slices");
        for (const auto& s : g) {
            if (s.size() != g.front().size()) throw InvariantError("slices within a group differ in size");
            concat.insert(concat.end(), s.begin(), s.end());
        }
    }
    concat.insert(concat.end(), bias_channels.begin(), bias_channels.end());
    concat.insert(concat.end(), residual.begin(), residual.end());
    if (concat != permutation) throw InvariantError("slices, bias and residual do not reproduce the permutation");
}

std::vector<std::size_t> invert_permutation(std::span<const std::size_t> permutation) {
    std::vector<std::size_t> inv(permutation.size(), permutation.size());
    for (std::size_t j = 0; j < permutation.size(); ++j) {
        if (permutation[j] >= permutation.size() || inv[permutation[j]] != permutation.size())
            throw InputError("not a permutation");
        inv[permutation[j]] = j;
    }
    return inv;
}

LatentBlock apply_permutation(const LatentBlock& latents, std::span<const std::size_t> permutation) {
    if (permutation.size() != latents.channels)
        throw InputError("permutation has " + std::to_string(permutation.size()) + " entries but latents have " +
                         std::to_string(latents.channels) + " channels");
    LatentBlock out(latents.patches_y, latents.patches_x, latents.channels);
    for (std::size_t p = 0; p < latents.patch_count(); ++p)
        for (std::size_t j = 0; j < latents.channels; ++j) out.at(p, j) = latents.at(p, permutation[j]);
    return out;
}

} // namespace iscs
