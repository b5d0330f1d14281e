#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "automine/dataset.hpp"
#include "automine/profile.hpp"

namespace automine {

struct AttributeRank {
    std::string name;
    double type_score = 0.0;    // in [0, 1]
    double query_weight = 0.0;  // in [0, 1]
    double combined = 0.0;      // w_s * type_score + w_q * query_weight
    std::size_t rank = 0;       // 1-based
};

struct RankedAttributes {
    std::vector<AttributeRank> ranks;    // sorted by rank
    std::vector<std::string> selected;   // first m names
};

struct RankingWeights {
    double type_score = 0.6;
    double query = 0.4;
};

// Categorical attributes whose distinct-value count approaches the row count
// behave as identifiers and are pinned to a near-zero score.
inline constexpr double kIdentifierCardinalityShare = 0.9;
inline constexpr double kIdentifierScoreCap = 0.1;

namespace detail {

inline double numeric_variability(const AttributeMeta& meta) {
    if (meta.stddev <= 0.0) return 0.0;
    const double denom = std::abs(meta.mean) > 0.0
        ? std::abs(meta.mean)
        : std::abs(meta.max - meta.min) + 1e-12;
    return std::min(1.0, meta.stddev / denom);
}

inline double categorical_variability(const AttributeMeta& meta) {
    if (meta.cardinality <= 1) return 0.0;
    const std::size_t total = std::accumulate(meta.category_counts.begin(),
                                              meta.category_counts.end(), std::size_t{0});
    if (total == 0) return 0.0;
    double entropy = 0.0;
    for (std::size_t count : meta.category_counts) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / static_cast<double>(total);
        entropy -= p * std::log(p);
    }
    const double norm = entropy / std::log(static_cast<double>(meta.cardinality));
    return std::clamp(norm, 0.0, 1.0);
}

}  // namespace detail

// Data-driven portion of an attribute's score: the attribute kind sets the
// base, missing cells and low variability shrink it.
inline double score_attribute(const AttributeMeta& meta, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty dataset");
    const double base = meta.kind == AttributeKind::Numeric ? 1.0 : 0.8;
    const double variability = meta.kind == AttributeKind::Numeric
        ? detail::numeric_variability(meta)
        : detail::categorical_variability(meta);
    double score = base * (1.0 - meta.missing_ratio) * variability;
    if (meta.kind == AttributeKind::Categorical &&
        static_cast<double>(meta.cardinality) >= kIdentifierCardinalityShare * static_cast<double>(n)) {
        score = std::min(score, kIdentifierScoreCap);
    }
    return std::clamp(score, 0.0, 1.0);
}

// Query-driven portion: half for a name hit against the objective tokens,
// half for how often past sessions picked the attribute.
inline double query_weight(const std::string& attr_name,
                           const std::vector<std::string>& objective_tokens,
                           const std::vector<SessionRecord>& history) {
    const std::string norm = normalize_name(attr_name);
    double name_match = 0.0;
    for (const auto& token : objective_tokens) {
        if (norm.find(token) != std::string::npos) {
            name_match = 1.0;
            break;
        }
    }
    double usage = 0.0;
    if (!history.empty()) {
        std::size_t used = 0;
        for (const auto& rec : history) {
            for (const auto& sel : rec.selected_attributes) {
                if (sel == attr_name) {
                    ++used;
                    break;
                }
            }
        }
        usage = static_cast<double>(used) / static_cast<double>(history.size());
    }
    return 0.5 * name_match + 0.5 * usage;
}

inline RankedAttributes rank_attributes(const Dataset& ds,
                                        const std::vector<std::string>& objective_tokens,
                                        const std::vector<SessionRecord>& history,
                                        std::size_t m,
                                        RankingWeights weights = {}) {
    if (m < 1 || m > ds.attributes.size()) {
        throw Error(ErrorCode::InvalidSelectionSize,
                    "m=" + std::to_string(m) + " outside 1.." + std::to_string(ds.attributes.size()));
    }
    if (weights.type_score < 0.0 || weights.query < 0.0 ||
        std::abs(weights.type_score + weights.query - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidWeights, "weights must be non-negative and sum to 1");
    }

    RankedAttributes out;
    out.ranks.reserve(ds.attributes.size());
    for (const auto& meta : ds.attributes) {
        AttributeRank r;
        r.name = meta.name;
        r.type_score = score_attribute(meta, ds.n());
        r.query_weight = query_weight(meta.name, objective_tokens, history);
        r.combined = weights.type_score * r.type_score + weights.query * r.query_weight;
        out.ranks.push_back(std::move(r));
    }

    // Descending by combined score; the earlier column wins ties.
    std::vector<std::size_t> order(out.ranks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.ranks[a].combined > out.ranks[b].combined;
    });

    std::vector<AttributeRank> sorted;
    sorted.reserve(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        AttributeRank r = out.ranks[order[pos]];
        r.rank = pos + 1;
        sorted.push_back(std::move(r));
    }
    out.ranks = std::move(sorted);

    out.selected.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.selected.push_back(out.ranks[i].name);
    return out;
}

}  // namespace automine
