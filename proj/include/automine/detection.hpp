#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "automine/clustering.hpp"

namespace automine {

// Undirected mutual k-nearest-neighbour graph: an edge exists only when each
// endpoint ranks the other among its k_nn closest rows.
struct NeighborGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> adjacency;
    std::size_t k_nn = 0;
    Measure measure = Measure::SqEuclidean;
};

inline NeighborGraph build_knn_graph(const ClusterInput& input, Measure measure, std::size_t k_nn,
                                     double gamma = 1.0) {
    const std::size_t n = input.row_count;
    if (n < 2 || k_nn < 1 || k_nn >= n) {
        throw Error(ErrorCode::InvalidKnn,
                    "need 1 <= k_nn < n, got k_nn=" + std::to_string(k_nn) + ", n=" + std::to_string(n));
    }

    // Per-node nearest lists; distance ties prefer the smaller index.
    std::vector<std::vector<std::size_t>> nearest(n);
    std::vector<std::pair<double, std::size_t>> dist_row(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dist_row[w++] = {dissimilarity(input.row(i), input.row(j), measure, gamma), j};
        }
        std::partial_sort(dist_row.begin(), dist_row.begin() + static_cast<std::ptrdiff_t>(k_nn),
                          dist_row.end());
        nearest[i].reserve(k_nn);
        for (std::size_t t = 0; t < k_nn; ++t) nearest[i].push_back(dist_row[t].second);
    }

    NeighborGraph g;
    g.n = n;
    g.k_nn = k_nn;
    g.measure = measure;
    g.adjacency.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : nearest[i]) {
            if (j < i) continue;  // handle each unordered pair once
            const auto& back = nearest[j];
            if (std::find(back.begin(), back.end(), i) != back.end()) {
                g.adjacency[i].push_back(j);
                g.adjacency[j].push_back(i);
            }
        }
    }
    for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
    return g;
}

// Mean shortest-path hop count over all unordered member pairs. Paths may run
// through non-member nodes. Any unreachable pair makes the set Disconnected
// (nullopt).
inline std::optional<double> avg_path_length(const NeighborGraph& g,
                                             const std::vector<std::size_t>& members) {
    if (members.size() < 2) throw Error(ErrorCode::TooFewMembers, "need at least 2 members");

    std::vector<char> is_member(g.n, 0);
    for (std::size_t m : members) is_member[m] = 1;

    double total = 0.0;
    std::size_t pairs = 0;
    std::vector<std::int64_t> dist(g.n);
    std::deque<std::size_t> queue;
    for (std::size_t idx = 0; idx < members.size(); ++idx) {
        const std::size_t src = members[idx];
        std::fill(dist.begin(), dist.end(), -1);
        dist[src] = 0;
        queue.clear();
        queue.push_back(src);
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : g.adjacency[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (std::size_t jdx = idx + 1; jdx < members.size(); ++jdx) {
            const std::size_t dst = members[jdx];
            if (dist[dst] < 0) return std::nullopt;
            total += static_cast<double>(dist[dst]);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// Silhouette

struct SilhouetteResult {
    std::vector<double> per_cluster;
    double overall = 0.0;  // size-weighted mean of per-cluster values
};

inline SilhouetteResult silhouette(const ClusterInput& input,
                                   const std::vector<std::size_t>& assignments, Measure measure,
                                   std::size_t k, double gamma = 1.0) {
    const std::size_t n = input.row_count;
    if (assignments.size() != n) throw Error(ErrorCode::InvalidArgument, "assignment size mismatch");
    if (k < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs at least 2 clusters");

    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t a : assignments) {
        if (a >= k) throw Error(ErrorCode::InvalidArgument, "cluster index out of range");
        ++sizes[a];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) throw Error(ErrorCode::InvalidArgument, "cluster " + std::to_string(c) + " is empty");
    }

    std::vector<double> cluster_sum(k, 0.0);
    std::vector<double> s_sum(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(cluster_sum.begin(), cluster_sum.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cluster_sum[assignments[j]] +=
                dissimilarity(input.row(i), input.row(j), measure, gamma);
        }
        const std::size_t own = assignments[i];
        double s = 0.0;
        if (sizes[own] > 1) {
            const double a = cluster_sum[own] / static_cast<double>(sizes[own] - 1);
            double b = std::numeric_limits<double>::max();
            for (std::size_t c = 0; c < k; ++c) {
                if (c == own) continue;
                b = std::min(b, cluster_sum[c] / static_cast<double>(sizes[c]));
            }
            const double denom = std::max(a, b);
            s = denom > 0.0 ? (b - a) / denom : 0.0;  // coincident points score 0
        }
        s_sum[own] += s;
    }

    SilhouetteResult out;
    out.per_cluster.resize(k, 0.0);
    double weighted = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        out.per_cluster[c] = s_sum[c] / static_cast<double>(sizes[c]);
        weighted += out.per_cluster[c] * static_cast<double>(sizes[c]);
    }
    out.overall = weighted / static_cast<double>(n);
    return out;
}

// ---------------------------------------------------------------------------
// Good/bad verdicts

struct DetectionThresholds {
    double min_silhouette = 0.25;
    double max_apl_ratio = 1.0;      // cluster APL over the random-set baseline
    std::size_t min_size_abs = 3;
    double min_size_frac = 0.01;
    std::size_t baseline_sets = 20;  // random member sets behind the APL baseline
    std::size_t k_nn = 0;            // 0 resolves to max(3, ceil(log2 n))
    std::uint64_t baseline_seed = 9001;
};

struct ClusterQuality {
    std::size_t cluster_id = 0;
    std::size_t size = 0;
    double silhouette = 0.0;
    std::optional<double> avg_path_length;  // nullopt marks Disconnected
    double compactness = 0.0;               // mean within-cluster dissimilarity
    bool good = false;
};

struct QualityReport {
    std::vector<ClusterQuality> per_cluster;
    double overall_silhouette = 0.0;
    std::size_t good_count = 0;
};

// Mutual-kNN graphs need a few multiples of log n neighbours per node before
// healthy point clouds stop shedding fringe singletons, so the default runs
// well above the asymptotic connectivity threshold.
inline std::size_t resolve_knn(std::size_t n, std::size_t requested) {
    if (requested > 0) return std::min(requested, n - 1);
    const double lg = std::ceil(std::log2(static_cast<double>(n)));
    const std::size_t k = std::max<std::size_t>(3, static_cast<std::size_t>(4.0 * lg));
    return std::min(k, n - 1);
}

inline QualityReport detect_good_clusters(const ClusterModel& model, const ClusterInput& input,
                                          const DetectionThresholds& thresholds = {}) {
    const std::size_t n = input.row_count;
    const std::size_t k = model.spec.k;
    if (model.assignments.size() != n) {
        throw Error(ErrorCode::InvalidArgument, "model does not match the data");
    }

    const Measure measure = measure_for(input);
    const double gamma = resolve_gamma(input, model.spec.gamma);
    const SilhouetteResult sil = silhouette(input, model.assignments, measure, k, gamma);
    const NeighborGraph graph = build_knn_graph(input, measure, resolve_knn(n, thresholds.k_nn), gamma);

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t r = 0; r < n; ++r) members[model.assignments[r]].push_back(r);

    const std::size_t min_size = std::max<std::size_t>(
        thresholds.min_size_abs,
        static_cast<std::size_t>(std::ceil(thresholds.min_size_frac * static_cast<double>(n))));

    // Baseline APL: the median over random member sets of the same size;
    // disconnected draws count as infinite.
    Rng rng(thresholds.baseline_seed);
    auto baseline_apl = [&](std::size_t size) {
        std::vector<double> samples;
        samples.reserve(thresholds.baseline_sets);
        for (std::size_t s = 0; s < thresholds.baseline_sets; ++s) {
            const auto rows = rng.sample_indices(n, size);
            const auto apl = avg_path_length(graph, rows);
            samples.push_back(apl ? *apl : std::numeric_limits<double>::infinity());
        }
        std::sort(samples.begin(), samples.end());
        return samples[(samples.size() - 1) / 2];
    };

    QualityReport report;
    report.overall_silhouette = sil.overall;
    for (std::size_t c = 0; c < k; ++c) {
        ClusterQuality q;
        q.cluster_id = c;
        q.size = members[c].size();
        q.silhouette = sil.per_cluster[c];

        double compact = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < members[c].size(); ++a) {
            for (std::size_t b = a + 1; b < members[c].size(); ++b) {
                compact += dissimilarity(input.row(members[c][a]), input.row(members[c][b]),
                                         measure, gamma);
                ++pairs;
            }
        }
        q.compactness = pairs > 0 ? compact / static_cast<double>(pairs) : 0.0;

        bool connected = false;
        bool apl_ok = false;
        if (members[c].size() >= 2) {
            const auto apl = avg_path_length(graph, members[c]);
            if (apl) {
                q.avg_path_length = apl;
                connected = true;
                const double base = baseline_apl(members[c].size());
                apl_ok = std::isinf(base) ? true : (*apl / base) <= thresholds.max_apl_ratio;
            }
        }

        q.good = connected && apl_ok && q.size >= min_size && q.silhouette >= thresholds.min_silhouette;
        if (q.good) ++report.good_count;
        report.per_cluster.push_back(std::move(q));
    }
    return report;
}

// When no cluster count is given, scan 2..min(10, n-1) on a capped subsample
// and keep the count with the best overall silhouette (smaller k on ties).
inline std::size_t choose_k(const ClusterInput& input, const ClusteringSpec& base,
                            std::size_t k_max = 10, std::size_t subsample = 500) {
    const std::size_t n = input.row_count;
    if (n < 3) return std::min<std::size_t>(2, n);

    const ClusterInput* scan_input = &input;
    ClusterInput sub;
    if (n > subsample) {
        Rng rng(base.seed ^ 0x9e3779b97f4a7c15ULL);
        auto rows = rng.sample_indices(n, subsample);
        std::sort(rows.begin(), rows.end());
        sub = subset(input, rows);
        scan_input = &sub;
    }

    const std::size_t limit = std::min(k_max, scan_input->row_count - 1);
    const Measure measure = measure_for(*scan_input);
    double best_score = -2.0;
    std::size_t best_k = 2;
    for (std::size_t k = 2; k <= limit; ++k) {
        ClusteringSpec spec = base;
        spec.k = k;
        try {
            const ClusterModel model = run_clustering(*scan_input, spec);
            const double gamma = resolve_gamma(*scan_input, model.spec.gamma);
            const double score = silhouette(*scan_input, model.assignments, measure, k, gamma).overall;
            if (score > best_score + 1e-12) {
                best_score = score;
                best_k = k;
            }
        } catch (const Error&) {
            // a candidate k that cannot fill its clusters is no candidate
        }
    }
    return best_k;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json quality_to_json(const QualityReport& r) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& q : r.per_cluster) {
        nlohmann::json entry{
            {"cluster_id", q.cluster_id},
            {"size", q.size},
            {"silhouette", q.silhouette},
            {"compactness", q.compactness},
            {"verdict", q.good ? "good" : "bad"},
        };
        if (q.avg_path_length) entry["avg_path_length"] = *q.avg_path_length;
        else entry["avg_path_length"] = "disconnected";
        clusters.push_back(std::move(entry));
    }
    return nlohmann::json{
        {"version", 1},
        {"per_cluster", clusters},
        {"overall_silhouette", r.overall_silhouette},
        {"good_count", r.good_count},
    };
}

inline QualityReport quality_from_json(const nlohmann::json& j) {
    QualityReport r;
    for (const auto& entry : j.at("per_cluster")) {
        ClusterQuality q;
        q.cluster_id = entry.at("cluster_id").get<std::size_t>();
        q.size = entry.at("size").get<std::size_t>();
        q.silhouette = entry.at("silhouette").get<double>();
        q.compactness = entry.at("compactness").get<double>();
        q.good = entry.at("verdict").get<std::string>() == "good";
        if (entry.at("avg_path_length").is_number()) {
            q.avg_path_length = entry.at("avg_path_length").get<double>();
        }
        r.per_cluster.push_back(std::move(q));
    }
    r.overall_silhouette = j.at("overall_silhouette").get<double>();
    r.good_count = j.at("good_count").get<std::size_t>();
    return r;
}

}  // namespace automine
