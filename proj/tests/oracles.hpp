// Test-only reference implementations, kept independent of the library code
// they check: exhaustive clustering objectives, an adjusted Rand index, a
// direct silhouette and small dataset builders.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "automine/automine.hpp"

namespace oracle {

inline automine::Dataset numeric_dataset(const std::vector<std::vector<double>>& rows,
                                         std::vector<std::string> names = {}) {
    automine::Dataset ds;
    const std::size_t width = rows.front().size();
    for (std::size_t c = 0; c < width; ++c) {
        automine::AttributeMeta meta;
        meta.name = c < names.size() ? names[c] : "x" + std::to_string(c);
        meta.kind = automine::AttributeKind::Numeric;
        ds.attributes.push_back(meta);
    }
    for (const auto& row : rows) {
        std::vector<automine::Cell> cells;
        for (double v : row) cells.push_back(automine::number_cell(v));
        ds.rows.push_back(std::move(cells));
    }
    automine::refresh_metadata(ds);
    return ds;
}

inline automine::Dataset categorical_dataset(const std::vector<std::vector<std::string>>& rows,
                                             std::vector<std::string> names = {}) {
    automine::Dataset ds;
    const std::size_t width = rows.front().size();
    for (std::size_t c = 0; c < width; ++c) {
        automine::AttributeMeta meta;
        meta.name = c < names.size() ? names[c] : "c" + std::to_string(c);
        meta.kind = automine::AttributeKind::Categorical;
        ds.attributes.push_back(meta);
    }
    for (const auto& row : rows) {
        std::vector<automine::Cell> cells;
        for (const auto& v : row) cells.push_back(automine::category_cell(v));
        ds.rows.push_back(std::move(cells));
    }
    automine::refresh_metadata(ds);
    return ds;
}

// Gaussian blobs around the given centers, automine::Rng driven.
inline std::pair<automine::Dataset, std::vector<std::size_t>>
make_blobs(const std::vector<std::vector<double>>& centers, const std::vector<std::size_t>& counts,
           double sigma, std::uint64_t seed) {
    automine::Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> labels;
    for (std::size_t b = 0; b < centers.size(); ++b) {
        for (std::size_t i = 0; i < counts[b]; ++i) {
            std::vector<double> row;
            for (double c : centers[b]) row.push_back(rng.normal(c, sigma));
            rows.push_back(std::move(row));
            labels.push_back(b);
        }
    }
    return {numeric_dataset(rows), labels};
}

// Exhaustive k=2 mean-center objective: every 2-partition, squared distances
// to the part means. Points are the standardized rows of the input.
inline double brute_force_kmeans2(const automine::ClusterInput& input) {
    const std::size_t n = input.row_count;
    const std::size_t d = input.numeric_width;
    double best = std::numeric_limits<double>::max();
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
        std::vector<double> mean0(d, 0.0), mean1(d, 0.0);
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool side = (mask >> i) & 1;
            for (std::size_t c = 0; c < d; ++c) {
                (side ? mean1 : mean0)[c] += input.numeric[i * d + c];
            }
            (side ? n1 : n0) += 1;
        }
        if (n0 == 0 || n1 == 0) continue;
        for (std::size_t c = 0; c < d; ++c) {
            mean0[c] /= static_cast<double>(n0);
            mean1[c] /= static_cast<double>(n1);
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& mean = ((mask >> i) & 1) ? mean1 : mean0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = input.numeric[i * d + c] - mean[c];
                cost += diff * diff;
            }
        }
        best = std::min(best, cost);
    }
    return best;
}

// Exhaustive k=2 mode-center objective: every 2-partition, matching distance
// to the part modes (any majority value gives the same cost).
inline double brute_force_kmodes2(const automine::ClusterInput& input) {
    const std::size_t n = input.row_count;
    const std::size_t d = input.categorical_width;
    double best = std::numeric_limits<double>::max();
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
        double cost = 0.0;
        for (int side = 0; side < 2; ++side) {
            for (std::size_t c = 0; c < d; ++c) {
                std::map<std::int32_t, std::size_t> counts;
                std::size_t total = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (static_cast<int>((mask >> i) & 1) != side) continue;
                    ++counts[input.categorical[i * d + c]];
                    ++total;
                }
                std::size_t mode = 0;
                for (const auto& [_, cnt] : counts) mode = std::max(mode, cnt);
                cost += static_cast<double>(total - mode);
            }
        }
        const std::size_t ones = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (ones == 0 || ones == n) continue;
        best = std::min(best, cost);
    }
    return best;
}

// Exhaustive k=2 medoid objective over all medoid pairs.
inline double brute_force_pam2(const automine::ClusterInput& input, automine::Measure measure,
                               double gamma) {
    const std::size_t n = input.row_count;
    double best = std::numeric_limits<double>::max();
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double da = automine::dissimilarity(input.row(i), input.row(a), measure, gamma);
                const double db = automine::dissimilarity(input.row(i), input.row(b), measure, gamma);
                cost += std::min(da, db);
            }
            best = std::min(best, cost);
        }
    }
    return best;
}

inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const std::size_t n = a.size();
    std::map<std::pair<std::size_t, std::size_t>, double> cells;
    std::map<std::size_t, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        cells[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [_, v] : cells) sum_cells += choose2(v);
    for (const auto& [_, v] : rows) sum_rows += choose2(v);
    for (const auto& [_, v] : cols) sum_cols += choose2(v);
    const double total = choose2(static_cast<double>(n));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = (sum_rows + sum_cols) / 2.0;
    if (max_index == expected) return 1.0;
    return (sum_cells - expected) / (max_index - expected);
}

// Direct per-point silhouette, written from the definition.
inline std::vector<double> reference_silhouette_points(const automine::ClusterInput& input,
                                                       const std::vector<std::size_t>& assign,
                                                       automine::Measure measure, std::size_t k,
                                                       double gamma) {
    const std::size_t n = input.row_count;
    std::vector<double> out(n, 0.0);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t x : assign) ++sizes[x];
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] <= 1) {
            out[i] = 0.0;
            continue;
        }
        std::vector<double> sums(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            sums[assign[j]] += automine::dissimilarity(input.row(i), input.row(j), measure, gamma);
        }
        const double a_val = sums[assign[i]] / static_cast<double>(sizes[assign[i]] - 1);
        double b_val = std::numeric_limits<double>::max();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == assign[i] || sizes[c] == 0) continue;
            b_val = std::min(b_val, sums[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a_val, b_val);
        out[i] = denom > 0.0 ? (b_val - a_val) / denom : 0.0;
    }
    return out;
}

}  // namespace oracle
