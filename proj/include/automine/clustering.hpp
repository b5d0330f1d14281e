#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "automine/dataset.hpp"

namespace automine {

enum class Measure { SqEuclidean, Matching, Mixed };

enum class Algorithm { KMeans, PAM, KModes, KPrototypes, CLARA, CLARANS };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::KMeans: return "kmeans";
        case Algorithm::PAM: return "pam";
        case Algorithm::KModes: return "kmodes";
        case Algorithm::KPrototypes: return "kprototypes";
        case Algorithm::CLARA: return "clara";
        case Algorithm::CLARANS: return "clarans";
    }
    return "unknown";
}

inline std::optional<Algorithm> algorithm_from_string(const std::string& raw) {
    const std::string s = to_lower(trim(raw));
    if (s == "kmeans" || s == "k-means") return Algorithm::KMeans;
    if (s == "pam" || s == "kmedoids" || s == "k-medoids") return Algorithm::PAM;
    if (s == "kmodes" || s == "k-modes") return Algorithm::KModes;
    if (s == "kprototypes" || s == "k-prototypes") return Algorithm::KPrototypes;
    if (s == "clara") return Algorithm::CLARA;
    if (s == "clarans") return Algorithm::CLARANS;
    return std::nullopt;
}

struct ClusteringSpec {
    Algorithm algorithm = Algorithm::KMeans;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
    double gamma = -1.0;                  // < 0 resolves from the data
    std::size_t clara_samples = 5;
    std::size_t clara_sample_size = 0;    // 0 resolves to 40 + 2k
    std::size_t clarans_numlocal = 2;
    std::size_t clarans_maxneighbor = 0;  // 0 resolves to max(250, 1.25% * k * (n - k))
};

struct Representatives {
    std::vector<std::vector<double>> numeric_centers;      // original units
    std::vector<std::vector<std::string>> category_modes;  // labels per categorical column
    std::vector<std::size_t> medoid_rows;                  // row indices
};

struct ClusterModel {
    ClusteringSpec spec;  // gamma holds the resolved value
    std::vector<std::string> selected_attributes;
    std::vector<std::size_t> assignments;  // per row, in [0, k)
    Representatives representatives;
    double objective = 0.0;  // total cost in standardized space
    std::size_t iterations_run = 0;
    std::vector<double> objective_trace;  // objective after each assignment pass
};

// ---------------------------------------------------------------------------
// Record projections. Numeric columns are z-scored up front (range-scaled
// when the deviation is zero) so no attribute dominates by unit choice.

struct RecordView {
    std::span<const double> numeric;
    std::span<const std::int32_t> categorical;
};

struct ClusterInput {
    std::vector<std::string> attribute_names;
    std::vector<AttributeKind> kinds;
    std::size_t row_count = 0;
    std::size_t numeric_width = 0;
    std::size_t categorical_width = 0;
    std::vector<double> numeric;             // row-major, standardized
    std::vector<std::int32_t> categorical;   // row-major category codes
    std::vector<std::vector<std::string>> category_labels;
    std::vector<double> numeric_offset;      // per numeric column
    std::vector<double> numeric_scale;

    RecordView row(std::size_t i) const {
        return {std::span<const double>(numeric.data() + i * numeric_width, numeric_width),
                std::span<const std::int32_t>(categorical.data() + i * categorical_width,
                                              categorical_width)};
    }
};

struct DataSummary {
    std::size_t n = 0;
    bool has_numeric = false;
    bool has_categorical = false;
};

inline DataSummary summarize(const ClusterInput& input) {
    return {input.row_count, input.numeric_width > 0, input.categorical_width > 0};
}

inline ClusterInput make_cluster_input(const Dataset& ds, const std::vector<std::string>& attrs) {
    if (attrs.empty()) throw Error(ErrorCode::NoAttributesSelected, "projection is empty");
    if (ds.n() == 0) throw Error(ErrorCode::EmptyInput, "dataset has no rows");

    ClusterInput input;
    input.row_count = ds.n();
    std::vector<std::size_t> columns;
    for (const auto& name : attrs) {
        const std::size_t c = ds.attribute_index(name);
        columns.push_back(c);
        input.attribute_names.push_back(name);
        input.kinds.push_back(ds.attributes[c].kind);
        if (ds.attributes[c].kind == AttributeKind::Numeric) ++input.numeric_width;
        else ++input.categorical_width;
    }

    for (std::size_t ci = 0; ci < columns.size(); ++ci) {
        const AttributeMeta& meta = ds.attributes[columns[ci]];
        if (meta.kind == AttributeKind::Numeric) {
            double scale = meta.stddev;
            if (scale <= 0.0) scale = meta.max - meta.min;
            if (scale <= 0.0) scale = 1.0;
            input.numeric_offset.push_back(meta.mean);
            input.numeric_scale.push_back(scale);
        } else {
            input.category_labels.push_back(meta.categories);
        }
    }

    input.numeric.resize(input.row_count * input.numeric_width);
    input.categorical.resize(input.row_count * input.categorical_width);
    for (std::size_t r = 0; r < input.row_count; ++r) {
        std::size_t nc = 0, cc = 0;
        for (std::size_t ci = 0; ci < columns.size(); ++ci) {
            const Cell& cell = ds.rows[r][columns[ci]];
            if (is_missing(cell)) {
                throw Error(ErrorCode::MissingValues,
                            "attribute '" + attrs[ci] + "' has a missing cell at row " +
                                std::to_string(r + 1) + "; apply a missing-value policy first");
            }
            if (input.kinds[ci] == AttributeKind::Numeric) {
                const double v = cell_number(cell);
                input.numeric[r * input.numeric_width + nc] =
                    (v - input.numeric_offset[nc]) / input.numeric_scale[nc];
                ++nc;
            } else {
                const auto& labels = input.category_labels[cc];
                const auto it = std::lower_bound(labels.begin(), labels.end(), cell_category(cell));
                input.categorical[r * input.categorical_width + cc] =
                    static_cast<std::int32_t>(it - labels.begin());
                ++cc;
            }
        }
    }
    return input;
}

inline ClusterInput subset(const ClusterInput& input, const std::vector<std::size_t>& rows) {
    ClusterInput out;
    out.attribute_names = input.attribute_names;
    out.kinds = input.kinds;
    out.row_count = rows.size();
    out.numeric_width = input.numeric_width;
    out.categorical_width = input.categorical_width;
    out.category_labels = input.category_labels;
    out.numeric_offset = input.numeric_offset;
    out.numeric_scale = input.numeric_scale;
    out.numeric.reserve(rows.size() * input.numeric_width);
    out.categorical.reserve(rows.size() * input.categorical_width);
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < input.numeric_width; ++c) {
            out.numeric.push_back(input.numeric[r * input.numeric_width + c]);
        }
        for (std::size_t c = 0; c < input.categorical_width; ++c) {
            out.categorical.push_back(input.categorical[r * input.categorical_width + c]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dissimilarity

inline double dissimilarity(const RecordView& a, const RecordView& b, Measure measure,
                            double gamma = 1.0) {
    if (a.numeric.size() != b.numeric.size() || a.categorical.size() != b.categorical.size()) {
        throw Error(ErrorCode::LayoutMismatch, "record projections differ in layout");
    }
    double sq = 0.0;
    if (measure != Measure::Matching) {
        for (std::size_t i = 0; i < a.numeric.size(); ++i) {
            const double d = a.numeric[i] - b.numeric[i];
            sq += d * d;
        }
    }
    double mismatches = 0.0;
    if (measure != Measure::SqEuclidean) {
        for (std::size_t i = 0; i < a.categorical.size(); ++i) {
            if (a.categorical[i] != b.categorical[i]) mismatches += 1.0;
        }
    }
    switch (measure) {
        case Measure::SqEuclidean: return sq;
        case Measure::Matching: return mismatches;
        case Measure::Mixed: return sq + gamma * mismatches;
    }
    return 0.0;
}

inline Measure measure_for(const ClusterInput& input) {
    if (input.numeric_width > 0 && input.categorical_width > 0) return Measure::Mixed;
    if (input.categorical_width > 0) return Measure::Matching;
    return Measure::SqEuclidean;
}

// Mixing weight default: half the mean per-column variance of the
// standardized numeric block.
inline double resolve_gamma(const ClusterInput& input, double requested) {
    if (requested >= 0.0) return requested;
    if (input.numeric_width == 0 || input.row_count == 0) return 1.0;
    double total_var = 0.0;
    for (std::size_t c = 0; c < input.numeric_width; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < input.row_count; ++r) {
            mean += input.numeric[r * input.numeric_width + c];
        }
        mean /= static_cast<double>(input.row_count);
        double var = 0.0;
        for (std::size_t r = 0; r < input.row_count; ++r) {
            const double d = input.numeric[r * input.numeric_width + c] - mean;
            var += d * d;
        }
        total_var += var / static_cast<double>(input.row_count);
    }
    return 0.5 * total_var / static_cast<double>(input.numeric_width);
}

namespace detail {

// Pairwise dissimilarities, materialized while the matrix stays modest.
class DistanceOracle {
public:
    DistanceOracle(const ClusterInput& input, Measure measure, double gamma,
                   std::size_t materialize_limit = 2048)
        : input_(&input), measure_(measure), gamma_(gamma) {
        const std::size_t n = input.row_count;
        if (n <= materialize_limit) {
            matrix_.resize(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double d = dissimilarity(input.row(i), input.row(j), measure_, gamma_);
                    matrix_[i * n + j] = d;
                    matrix_[j * n + i] = d;
                }
            }
        }
    }

    double operator()(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        if (!matrix_.empty()) return matrix_[i * input_->row_count + j];
        return dissimilarity(input_->row(i), input_->row(j), measure_, gamma_);
    }

private:
    const ClusterInput* input_;
    Measure measure_;
    double gamma_;
    std::vector<double> matrix_;
};

struct LloydCenters {
    std::vector<std::vector<double>> numeric;       // k x numeric_width
    std::vector<std::vector<std::int32_t>> modes;   // k x categorical_width

    double distance(const ClusterInput& input, std::size_t row, std::size_t c, double gamma) const {
        double sq = 0.0;
        const RecordView v = input.row(row);
        for (std::size_t i = 0; i < v.numeric.size(); ++i) {
            const double d = v.numeric[i] - numeric[c][i];
            sq += d * d;
        }
        double mismatches = 0.0;
        for (std::size_t i = 0; i < v.categorical.size(); ++i) {
            if (v.categorical[i] != modes[c][i]) mismatches += 1.0;
        }
        return sq + gamma * mismatches;
    }
};

inline LloydCenters centers_from_rows(const ClusterInput& input, const std::vector<std::size_t>& rows) {
    LloydCenters centers;
    for (std::size_t r : rows) {
        const RecordView v = input.row(r);
        centers.numeric.emplace_back(v.numeric.begin(), v.numeric.end());
        centers.modes.emplace_back(v.categorical.begin(), v.categorical.end());
    }
    return centers;
}

// Weighted seeding: the first pick is uniform, later picks are drawn with
// probability proportional to the dissimilarity to the nearest chosen seed.
inline std::vector<std::size_t> seed_rows(const ClusterInput& input, std::size_t k, Rng& rng,
                                          Measure measure, double gamma) {
    const std::size_t n = input.row_count;
    std::vector<std::size_t> chosen;
    std::vector<bool> used(n, false);
    std::vector<double> nearest(n, std::numeric_limits<double>::max());

    const std::size_t first = rng.index(n);
    chosen.push_back(first);
    used[first] = true;

    while (chosen.size() < k) {
        const std::size_t last = chosen.back();
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = dissimilarity(input.row(i), input.row(last), measure, gamma);
            nearest[i] = std::min(nearest[i], d);
            if (!used[i]) total += nearest[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                if (used[i]) continue;
                target -= nearest[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // All remaining rows coincide with a seed; fall back to the
            // first unused row for a stable choice.
            std::size_t offset = rng.index(n);
            for (std::size_t step = 0; step < n; ++step) {
                const std::size_t i = (offset + step) % n;
                if (!used[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen.push_back(pick);
        used[pick] = true;
    }
    return chosen;
}

inline ClusterModel lloyd(const ClusterInput& input, std::size_t k, std::uint64_t seed,
                          std::size_t max_iter, double gamma, Algorithm algorithm) {
    const std::size_t n = input.row_count;
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (k > n) throw Error(ErrorCode::KExceedsN, "k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));

    const Measure measure = input.categorical_width == 0 ? Measure::SqEuclidean
                           : input.numeric_width == 0    ? Measure::Matching
                                                         : Measure::Mixed;
    Rng rng(seed);
    LloydCenters centers = centers_from_rows(input, seed_rows(input, k, rng, measure, gamma));

    std::vector<std::size_t> assign(n, 0);
    std::vector<std::size_t> prev;
    std::vector<double> trace;
    std::size_t iterations = 0;

    for (std::size_t iter = 0; iter < std::max<std::size_t>(1, max_iter); ++iter) {
        // Assignment pass. Ties go to the lower cluster index.
        double objective = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double best = centers.distance(input, r, 0, gamma);
            std::size_t best_c = 0;
            for (std::size_t c = 1; c < k; ++c) {
                const double d = centers.distance(input, r, c, gamma);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assign[r] = best_c;
            objective += best;
        }
        trace.push_back(objective);
        if (assign == prev) break;
        prev = assign;
        ++iterations;

        // Update pass: numeric means and categorical modes per cluster.
        std::vector<std::size_t> sizes(k, 0);
        std::vector<std::vector<double>> sums(k, std::vector<double>(input.numeric_width, 0.0));
        std::vector<std::vector<std::vector<std::size_t>>> counts(k);
        for (std::size_t c = 0; c < k; ++c) {
            counts[c].resize(input.categorical_width);
            for (std::size_t cc = 0; cc < input.categorical_width; ++cc) {
                counts[c][cc].resize(input.category_labels.empty() ? 0 : input.category_labels[cc].size(), 0);
            }
        }
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t c = assign[r];
            ++sizes[c];
            const RecordView v = input.row(r);
            for (std::size_t i = 0; i < v.numeric.size(); ++i) sums[c][i] += v.numeric[i];
            for (std::size_t i = 0; i < v.categorical.size(); ++i) {
                ++counts[c][i][static_cast<std::size_t>(v.categorical[i])];
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) continue;
            for (std::size_t i = 0; i < input.numeric_width; ++i) {
                centers.numeric[c][i] = sums[c][i] / static_cast<double>(sizes[c]);
            }
            for (std::size_t i = 0; i < input.categorical_width; ++i) {
                // Mode; the smallest code (lexicographically first label) wins ties.
                std::size_t best_code = 0;
                for (std::size_t code = 1; code < counts[c][i].size(); ++code) {
                    if (counts[c][i][code] > counts[c][i][best_code]) best_code = code;
                }
                centers.modes[c][i] = static_cast<std::int32_t>(best_code);
            }
        }

        // Empty clusters are reseeded with the row farthest from its current
        // representative, keeping k intact.
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            double worst = -1.0;
            std::size_t worst_row = 0;
            for (std::size_t r = 0; r < n; ++r) {
                if (sizes[assign[r]] <= 1) continue;
                const double d = centers.distance(input, r, assign[r], gamma);
                if (d > worst) {
                    worst = d;
                    worst_row = r;
                }
            }
            const RecordView v = input.row(worst_row);
            centers.numeric[c].assign(v.numeric.begin(), v.numeric.end());
            centers.modes[c].assign(v.categorical.begin(), v.categorical.end());
            --sizes[assign[worst_row]];
            assign[worst_row] = c;
            sizes[c] = 1;
        }
    }

    ClusterModel model;
    model.spec.algorithm = algorithm;
    model.spec.k = k;
    model.spec.seed = seed;
    model.spec.max_iter = max_iter;
    model.spec.gamma = gamma;
    model.selected_attributes = input.attribute_names;
    model.assignments = assign;
    model.objective = trace.empty() ? 0.0 : trace.back();
    model.objective_trace = std::move(trace);
    model.iterations_run = iterations;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> center(input.numeric_width, 0.0);
        for (std::size_t i = 0; i < input.numeric_width; ++i) {
            center[i] = centers.numeric[c][i] * input.numeric_scale[i] + input.numeric_offset[i];
        }
        model.representatives.numeric_centers.push_back(std::move(center));
        std::vector<std::string> modes;
        for (std::size_t i = 0; i < input.categorical_width; ++i) {
            const auto code = static_cast<std::size_t>(centers.modes[c][i]);
            modes.push_back(input.category_labels[i].at(code));
        }
        model.representatives.category_modes.push_back(std::move(modes));
    }
    return model;
}

struct MedoidState {
    std::vector<std::size_t> medoids;
    std::vector<std::size_t> nearest;   // index into medoids
    std::vector<double> dnearest;
    std::vector<double> dsecond;
    double cost = 0.0;

    void refresh(const DistanceOracle& dist, std::size_t n) {
        nearest.assign(n, 0);
        dnearest.assign(n, std::numeric_limits<double>::max());
        dsecond.assign(n, std::numeric_limits<double>::max());
        cost = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t m = 0; m < medoids.size(); ++m) {
                const double d = dist(r, medoids[m]);
                if (d < dnearest[r]) {
                    dsecond[r] = dnearest[r];
                    dnearest[r] = d;
                    nearest[r] = m;
                } else if (d < dsecond[r]) {
                    dsecond[r] = d;
                }
            }
            cost += dnearest[r];
        }
    }

    double swap_delta(const DistanceOracle& dist, std::size_t n, std::size_t medoid_pos,
                      std::size_t candidate) const {
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double djx = dist(j, candidate);
            if (nearest[j] == medoid_pos) {
                delta += std::min(djx, dsecond[j]) - dnearest[j];
            } else if (djx < dnearest[j]) {
                delta += djx - dnearest[j];
            }
        }
        return delta;
    }
};

// Greedy seeding: start from the row minimizing total dissimilarity, then
// repeatedly add the row that lowers the total cost the most.
inline std::vector<std::size_t> pam_build(const DistanceOracle& dist, std::size_t n, std::size_t k) {
    std::vector<std::size_t> medoids;
    std::vector<bool> is_medoid(n, false);
    std::vector<double> dnear(n, std::numeric_limits<double>::max());

    std::size_t first = 0;
    double best_total = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += dist(i, j);
        if (total < best_total) {
            best_total = total;
            first = i;
        }
    }
    medoids.push_back(first);
    is_medoid[first] = true;
    for (std::size_t j = 0; j < n; ++j) dnear[j] = dist(j, first);

    while (medoids.size() < k) {
        std::size_t best_cand = n;
        double best_delta = std::numeric_limits<double>::max();
        for (std::size_t cand = 0; cand < n; ++cand) {
            if (is_medoid[cand]) continue;
            double delta = -dnear[cand];
            for (std::size_t j = 0; j < n; ++j) {
                if (j == cand) continue;
                const double d = dist(cand, j);
                if (d < dnear[j]) delta += d - dnear[j];
            }
            if (delta < best_delta) {
                best_delta = delta;
                best_cand = cand;
            }
        }
        medoids.push_back(best_cand);
        is_medoid[best_cand] = true;
        for (std::size_t j = 0; j < n; ++j) {
            dnear[j] = std::min(dnear[j], dist(j, best_cand));
        }
    }
    return medoids;
}

struct PamOutcome {
    std::vector<std::size_t> medoids;
    std::vector<std::size_t> assignments;
    double objective = 0.0;
    std::size_t swaps = 0;
};

// BUILD then best-improvement SWAP until no medoid/non-medoid exchange
// lowers the total cost.
inline PamOutcome pam_core(const DistanceOracle& dist, std::size_t n, std::size_t k) {
    MedoidState state;
    if (k >= n) {
        state.medoids.resize(n);
        for (std::size_t i = 0; i < n; ++i) state.medoids[i] = i;
    } else {
        state.medoids = pam_build(dist, n, k);
    }
    state.refresh(dist, n);

    std::size_t swaps = 0;
    constexpr double kImprovementFloor = -1e-12;
    while (k < n) {
        double best_delta = 0.0;
        std::size_t best_pos = 0, best_cand = 0;
        bool found = false;
        std::vector<bool> is_medoid(n, false);
        for (std::size_t m : state.medoids) is_medoid[m] = true;
        for (std::size_t pos = 0; pos < state.medoids.size(); ++pos) {
            for (std::size_t cand = 0; cand < n; ++cand) {
                if (is_medoid[cand]) continue;
                const double delta = state.swap_delta(dist, n, pos, cand);
                if (delta < best_delta && delta < kImprovementFloor) {
                    best_delta = delta;
                    best_pos = pos;
                    best_cand = cand;
                    found = true;
                }
            }
        }
        if (!found) break;
        state.medoids[best_pos] = best_cand;
        state.refresh(dist, n);
        ++swaps;
    }

    PamOutcome out;
    out.medoids = state.medoids;
    out.assignments = state.nearest;
    out.objective = state.cost;
    out.swaps = swaps;
    return out;
}

inline ClusterModel model_from_medoids(const ClusterInput& input, const PamOutcome& outcome,
                                       Algorithm algorithm, std::size_t k, std::uint64_t seed,
                                       double gamma) {
    ClusterModel model;
    model.spec.algorithm = algorithm;
    model.spec.k = k;
    model.spec.seed = seed;
    model.spec.gamma = gamma;
    model.selected_attributes = input.attribute_names;
    model.assignments = outcome.assignments;
    model.representatives.medoid_rows = outcome.medoids;
    model.objective = outcome.objective;
    model.iterations_run = outcome.swaps;
    model.objective_trace = {outcome.objective};
    return model;
}

// Nearest-medoid assignment over the full input; ties keep the earlier medoid.
inline PamOutcome assign_to_medoids(const ClusterInput& input, const std::vector<std::size_t>& medoids,
                                    Measure measure, double gamma) {
    PamOutcome out;
    out.medoids = medoids;
    out.assignments.resize(input.row_count, 0);
    for (std::size_t r = 0; r < input.row_count; ++r) {
        double best = std::numeric_limits<double>::max();
        std::size_t best_m = 0;
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            const double d = dissimilarity(input.row(r), input.row(medoids[m]), measure, gamma);
            if (d < best) {
                best = d;
                best_m = m;
            }
        }
        out.assignments[r] = best_m;
        out.objective += best;
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Algorithms

inline ClusterModel kmeans(const ClusterInput& input, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100) {
    if (input.categorical_width > 0 || input.numeric_width == 0) {
        throw Error(ErrorCode::NonNumericAttribute, "kmeans requires an all-numeric projection");
    }
    if (k > input.row_count) throw Error(ErrorCode::KExceedsN, "k exceeds row count");
    return detail::lloyd(input, k, seed, max_iter, 0.0, Algorithm::KMeans);
}

inline ClusterModel kmodes(const ClusterInput& input, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100) {
    if (input.numeric_width > 0 || input.categorical_width == 0) {
        throw Error(ErrorCode::NonCategoricalAttribute, "kmodes requires an all-categorical projection");
    }
    if (k > input.row_count) throw Error(ErrorCode::KExceedsN, "k exceeds row count");
    return detail::lloyd(input, k, seed, max_iter, 1.0, Algorithm::KModes);
}

inline ClusterModel kprototypes(const ClusterInput& input, std::size_t k, double gamma,
                                std::uint64_t seed, std::size_t max_iter = 100) {
    if (input.numeric_width == 0 || input.categorical_width == 0) {
        throw Error(ErrorCode::NotMixedData, "kprototypes requires numeric and categorical attributes");
    }
    if (k > input.row_count) throw Error(ErrorCode::KExceedsN, "k exceeds row count");
    const double g = resolve_gamma(input, gamma);
    return detail::lloyd(input, k, seed, max_iter, g, Algorithm::KPrototypes);
}

inline ClusterModel pam(const ClusterInput& input, std::size_t k, std::uint64_t seed = 0,
                        double gamma = -1.0) {
    if (k > input.row_count) throw Error(ErrorCode::KExceedsN, "k exceeds row count");
    const Measure measure = measure_for(input);
    const double g = resolve_gamma(input, gamma);
    detail::DistanceOracle dist(input, measure, g);
    auto outcome = detail::pam_core(dist, input.row_count, k);
    return detail::model_from_medoids(input, outcome, Algorithm::PAM, k, seed, g);
}

inline ClusterModel clara(const ClusterInput& input, const ClusteringSpec& spec) {
    const std::size_t n = input.row_count;
    const std::size_t k = spec.k;
    if (k > n) throw Error(ErrorCode::KExceedsN, "k exceeds row count");
    std::size_t sample_size = spec.clara_sample_size ? spec.clara_sample_size : 40 + 2 * k;
    sample_size = std::min(sample_size, n);
    if (sample_size < k) {
        throw Error(ErrorCode::SampleTooSmall,
                    "sample size " + std::to_string(sample_size) + " below k=" + std::to_string(k));
    }

    const Measure measure = measure_for(input);
    const double gamma = resolve_gamma(input, spec.gamma);
    Rng rng(spec.seed);

    detail::PamOutcome best;
    best.objective = std::numeric_limits<double>::max();
    for (std::size_t s = 0; s < std::max<std::size_t>(1, spec.clara_samples); ++s) {
        // Carry the best medoids so far into every later sample.
        std::vector<std::size_t> sample = best.objective == std::numeric_limits<double>::max()
            ? std::vector<std::size_t>{}
            : best.medoids;
        std::vector<bool> taken(n, false);
        for (std::size_t i : sample) taken[i] = true;
        while (sample.size() < sample_size) {
            const std::size_t i = rng.index(n);
            if (!taken[i]) {
                taken[i] = true;
                sample.push_back(i);
            }
        }
        std::sort(sample.begin(), sample.end());

        const ClusterInput sub = subset(input, sample);
        detail::DistanceOracle dist(sub, measure, gamma);
        const auto local = detail::pam_core(dist, sub.row_count, k);

        std::vector<std::size_t> medoids;
        medoids.reserve(k);
        for (std::size_t m : local.medoids) medoids.push_back(sample[m]);
        auto full = detail::assign_to_medoids(input, medoids, measure, gamma);
        full.swaps = local.swaps;
        if (full.objective < best.objective) best = std::move(full);
    }

    ClusterModel model = detail::model_from_medoids(input, best, Algorithm::CLARA, k, spec.seed, gamma);
    model.spec.clara_samples = spec.clara_samples;
    model.spec.clara_sample_size = sample_size;
    return model;
}

inline ClusterModel clarans(const ClusterInput& input, const ClusteringSpec& spec) {
    const std::size_t n = input.row_count;
    const std::size_t k = spec.k;
    if (k > n) throw Error(ErrorCode::KExceedsN, "k exceeds row count");

    const Measure measure = measure_for(input);
    const double gamma = resolve_gamma(input, spec.gamma);
    detail::DistanceOracle dist(input, measure, gamma);

    if (k == n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        auto outcome = detail::assign_to_medoids(input, all, measure, gamma);
        return detail::model_from_medoids(input, outcome, Algorithm::CLARANS, k, spec.seed, gamma);
    }

    const std::size_t maxneighbor = spec.clarans_maxneighbor
        ? spec.clarans_maxneighbor
        : std::max<std::size_t>(250, static_cast<std::size_t>(
              std::ceil(0.0125 * static_cast<double>(k) * static_cast<double>(n - k))));

    Rng rng(spec.seed);
    detail::MedoidState best;
    best.cost = std::numeric_limits<double>::max();
    std::size_t total_swaps = 0;
    constexpr double kImprovementFloor = -1e-12;

    for (std::size_t local = 0; local < std::max<std::size_t>(1, spec.clarans_numlocal); ++local) {
        detail::MedoidState state;
        state.medoids = rng.sample_indices(n, k);
        state.refresh(dist, n);
        std::vector<bool> is_medoid(n, false);
        for (std::size_t m : state.medoids) is_medoid[m] = true;

        std::size_t failures = 0;
        while (failures < maxneighbor) {
            const std::size_t pos = rng.index(k);
            std::size_t cand = rng.index(n);
            while (is_medoid[cand]) cand = rng.index(n);
            const double delta = state.swap_delta(dist, n, pos, cand);
            if (delta < kImprovementFloor) {
                is_medoid[state.medoids[pos]] = false;
                is_medoid[cand] = true;
                state.medoids[pos] = cand;
                state.refresh(dist, n);
                failures = 0;
                ++total_swaps;
            } else {
                ++failures;
            }
        }
        if (state.cost < best.cost) best = std::move(state);
    }

    detail::PamOutcome outcome;
    outcome.medoids = best.medoids;
    outcome.assignments = best.nearest;
    outcome.objective = best.cost;
    outcome.swaps = total_swaps;
    ClusterModel model = detail::model_from_medoids(input, outcome, Algorithm::CLARANS, k, spec.seed, gamma);
    model.spec.clarans_numlocal = spec.clarans_numlocal;
    model.spec.clarans_maxneighbor = maxneighbor;
    return model;
}

// ---------------------------------------------------------------------------
// Automatic algorithm choice: attribute kinds decide the family, the row
// count decides whether a sampling variant stands in, and a type-compatible
// algorithm remembered from past sessions takes precedence.

inline bool algorithm_supports(Algorithm a, const DataSummary& s) {
    switch (a) {
        case Algorithm::KMeans: return s.has_numeric && !s.has_categorical;
        case Algorithm::KModes: return s.has_categorical && !s.has_numeric;
        case Algorithm::KPrototypes: return s.has_numeric && s.has_categorical;
        default: return true;
    }
}

inline ClusteringSpec select_algorithm(const DataSummary& summary,
                                       std::optional<Algorithm> profile_hint,
                                       std::size_t k, std::uint64_t seed,
                                       std::size_t large_n_threshold = 2000) {
    if (!summary.has_numeric && !summary.has_categorical) {
        throw Error(ErrorCode::NoAttributesSelected, "no attributes selected");
    }
    const bool large = summary.n > large_n_threshold;

    Algorithm algo;
    if (profile_hint && algorithm_supports(*profile_hint, summary)) {
        algo = *profile_hint;
        if (algo == Algorithm::PAM && large) algo = Algorithm::CLARA;  // keep the medoid preference at scale
    } else if (summary.has_numeric && summary.has_categorical) {
        algo = Algorithm::KPrototypes;
    } else if (summary.has_categorical) {
        algo = Algorithm::KModes;
    } else if (!large) {
        algo = Algorithm::KMeans;
    } else {
        algo = Algorithm::CLARA;
    }

    ClusteringSpec spec;
    spec.algorithm = algo;
    spec.k = k;
    spec.seed = seed;
    return spec;
}

inline ClusterModel run_clustering(const ClusterInput& input, const ClusteringSpec& spec) {
    if (spec.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    switch (spec.algorithm) {
        case Algorithm::KMeans: return kmeans(input, spec.k, spec.seed, spec.max_iter);
        case Algorithm::KModes: return kmodes(input, spec.k, spec.seed, spec.max_iter);
        case Algorithm::KPrototypes:
            return kprototypes(input, spec.k, spec.gamma, spec.seed, spec.max_iter);
        case Algorithm::PAM: return pam(input, spec.k, spec.seed, spec.gamma);
        case Algorithm::CLARA: return clara(input, spec);
        case Algorithm::CLARANS: return clarans(input, spec);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm");
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json spec_to_json(const ClusteringSpec& s) {
    return nlohmann::json{
        {"algorithm", to_string(s.algorithm)},
        {"k", s.k},
        {"seed", s.seed},
        {"max_iter", s.max_iter},
        {"gamma", s.gamma},
        {"clara_samples", s.clara_samples},
        {"clara_sample_size", s.clara_sample_size},
        {"clarans_numlocal", s.clarans_numlocal},
        {"clarans_maxneighbor", s.clarans_maxneighbor},
    };
}

inline ClusteringSpec spec_from_json(const nlohmann::json& j) {
    ClusteringSpec s;
    const auto algo = algorithm_from_string(j.at("algorithm").get<std::string>());
    if (!algo) throw Error(ErrorCode::InvalidArgument, "unknown algorithm in spec");
    s.algorithm = *algo;
    s.k = j.at("k").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.max_iter = j.value("max_iter", std::size_t{100});
    s.gamma = j.value("gamma", -1.0);
    s.clara_samples = j.value("clara_samples", std::size_t{5});
    s.clara_sample_size = j.value("clara_sample_size", std::size_t{0});
    s.clarans_numlocal = j.value("clarans_numlocal", std::size_t{2});
    s.clarans_maxneighbor = j.value("clarans_maxneighbor", std::size_t{0});
    return s;
}

inline nlohmann::json model_to_json(const ClusterModel& m) {
    return nlohmann::json{
        {"version", 1},
        {"spec", spec_to_json(m.spec)},
        {"selected_attributes", m.selected_attributes},
        {"assignments", m.assignments},
        {"representatives",
         {{"numeric_centers", m.representatives.numeric_centers},
          {"category_modes", m.representatives.category_modes},
          {"medoid_rows", m.representatives.medoid_rows}}},
        {"objective", m.objective},
        {"iterations_run", m.iterations_run},
    };
}

inline ClusterModel model_from_json(const nlohmann::json& j) {
    ClusterModel m;
    m.spec = spec_from_json(j.at("spec"));
    m.selected_attributes = j.at("selected_attributes").get<std::vector<std::string>>();
    m.assignments = j.at("assignments").get<std::vector<std::size_t>>();
    const auto& reps = j.at("representatives");
    m.representatives.numeric_centers = reps.at("numeric_centers").get<std::vector<std::vector<double>>>();
    m.representatives.category_modes =
        reps.at("category_modes").get<std::vector<std::vector<std::string>>>();
    m.representatives.medoid_rows = reps.at("medoid_rows").get<std::vector<std::size_t>>();
    m.objective = j.at("objective").get<double>();
    m.iterations_run = j.at("iterations_run").get<std::size_t>();
    return m;
}

}  // namespace automine
