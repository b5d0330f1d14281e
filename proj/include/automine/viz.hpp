#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "automine/clustering.hpp"
#include "automine/detection.hpp"

namespace automine {

enum class Dimensionality { D1, D2, D3, Multi };
enum class ChartKind { Histogram, Bar, Scatter2D, GroupedBar, Scatter3D, LinkChart };

inline const char* to_string(Dimensionality d) {
    switch (d) {
        case Dimensionality::D1: return "1d";
        case Dimensionality::D2: return "2d";
        case Dimensionality::D3: return "3d";
        case Dimensionality::Multi: return "multi";
    }
    return "unknown";
}

inline const char* to_string(ChartKind c) {
    switch (c) {
        case ChartKind::Histogram: return "histogram";
        case ChartKind::Bar: return "bar";
        case ChartKind::Scatter2D: return "scatter2d";
        case ChartKind::GroupedBar: return "grouped_bar";
        case ChartKind::Scatter3D: return "scatter3d";
        case ChartKind::LinkChart: return "link_chart";
    }
    return "unknown";
}

struct AxisSpec {
    std::string name;
    AttributeKind kind = AttributeKind::Numeric;
    std::vector<std::string> ticks;  // categorical levels or bin labels
};

struct SeriesPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct PlotSeries {
    std::string label;
    std::size_t cluster_id = 0;
    std::string glyph;
    bool greyed = false;
    std::vector<SeriesPoint> points;   // scatter charts
    std::vector<double> bars;          // bar-family charts, one value per tick
    std::vector<double> bar_counts;    // rows behind each bar
};

struct LinkEdge {
    std::string a;
    std::string b;
    double weight = 0.0;       // association strength in (0, 1]
    std::string thickness;     // thin | medium | thick
};

struct LinkChartSpec {
    std::vector<std::string> nodes;
    std::vector<LinkEdge> edges;
    std::string filter = "positive_only";
    double aggregate = 0.0;  // scaled sum of retained weights
};

struct PlotSpec {
    Dimensionality dimensionality = Dimensionality::D1;
    ChartKind chart = ChartKind::Histogram;
    std::string title;
    std::vector<AxisSpec> axes;
    std::vector<PlotSeries> series;
    std::vector<std::string> annotations;
    std::optional<LinkChartSpec> link;
};

inline constexpr double kPositiveEdgeFloor = 0.05;
inline constexpr double kAggregateScale = 1000.0;
inline constexpr std::size_t kScatterPointCap = 5000;
inline constexpr std::size_t kHistogramBins = 20;

inline const std::array<const char*, 5>& glyph_cycle() {
    static const std::array<const char*, 5> glyphs = {"circle", "square", "triangle", "diamond", "cross"};
    return glyphs;
}

// Marker shapes cycle; later rounds switch to outline variants so every
// cluster keeps a distinct glyph id.
inline std::string glyph_for(std::size_t cluster_id) {
    const auto& cycle = glyph_cycle();
    std::string glyph = cycle[cluster_id % cycle.size()];
    const std::size_t round = cluster_id / cycle.size();
    if (round == 1) glyph += "-open";
    else if (round > 1) glyph += "-open" + std::to_string(round);
    return glyph;
}

// ---------------------------------------------------------------------------
// Chart selection

inline Dimensionality classify_dimensionality(const std::vector<std::string>& selected) {
    if (selected.empty()) throw Error(ErrorCode::EmptySelection, "no attributes to visualize");
    switch (selected.size()) {
        case 1: return Dimensionality::D1;
        case 2: return Dimensionality::D2;
        case 3: return Dimensionality::D3;
        default: return Dimensionality::Multi;
    }
}

inline ChartKind choose_chart(Dimensionality dim, const std::vector<AttributeKind>& kinds) {
    const std::size_t numeric =
        static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), AttributeKind::Numeric));
    switch (dim) {
        case Dimensionality::D1:
            return kinds.at(0) == AttributeKind::Numeric ? ChartKind::Histogram : ChartKind::Bar;
        case Dimensionality::D2:
            return numeric == 2 ? ChartKind::Scatter2D : ChartKind::GroupedBar;
        case Dimensionality::D3:
            return numeric >= 2 ? ChartKind::Scatter3D : ChartKind::LinkChart;
        case Dimensionality::Multi:
            return ChartKind::LinkChart;
    }
    return ChartKind::LinkChart;
}

// ---------------------------------------------------------------------------
// Pairwise association for the link chart

namespace detail {

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

inline std::optional<double> cramers_v(const std::vector<std::string>& x,
                                       const std::vector<std::string>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    std::map<std::string, std::size_t> xi, yi;
    for (const auto& v : x) xi.emplace(v, xi.size());
    for (const auto& v : y) yi.emplace(v, yi.size());
    const std::size_t r = xi.size(), c = yi.size();
    if (r < 2 || c < 2) return std::nullopt;

    std::vector<double> table(r * c, 0.0), row(r, 0.0), col(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = xi[x[i]], b = yi[y[i]];
        table[a * c + b] += 1.0;
        row[a] += 1.0;
        col[b] += 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = 0; b < c; ++b) {
            const double expected = row[a] * col[b] / static_cast<double>(n);
            if (expected > 0.0) {
                const double d = table[a * c + b] - expected;
                chi2 += d * d / expected;
            }
        }
    }
    const double denom = static_cast<double>(n) * static_cast<double>(std::min(r, c) - 1);
    return std::sqrt(std::max(0.0, chi2 / denom));
}

// Correlation ratio: share of numeric variance explained by the grouping.
inline std::optional<double> correlation_ratio(const std::vector<std::string>& groups,
                                               const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return std::nullopt;
    std::map<std::string, std::pair<double, std::size_t>> acc;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto& [sum, count] = acc[groups[i]];
        sum += values[i];
        ++count;
        mean += values[i];
    }
    mean /= static_cast<double>(n);
    double total = 0.0;
    for (double v : values) total += (v - mean) * (v - mean);
    if (total <= 0.0 || acc.size() < 2) return std::nullopt;
    double between = 0.0;
    for (const auto& [_, sc] : acc) {
        const double gm = sc.first / static_cast<double>(sc.second);
        between += static_cast<double>(sc.second) * (gm - mean) * (gm - mean);
    }
    return std::sqrt(std::clamp(between / total, 0.0, 1.0));
}

}  // namespace detail

// Pairwise association chart, positive links only. Numeric pairs associate by
// Pearson correlation, categorical pairs by Cramer's V, mixed pairs by the
// correlation ratio. Edges at or below the noise floor are dropped.
inline LinkChartSpec link_chart(const Dataset& ds, const std::vector<std::string>& attrs) {
    if (attrs.size() < 2) throw Error(ErrorCode::TooFewAttributes, "link chart needs at least 2 attributes");

    LinkChartSpec spec;
    spec.nodes = attrs;

    for (std::size_t i = 0; i < attrs.size(); ++i) {
        for (std::size_t j = i + 1; j < attrs.size(); ++j) {
            const std::size_t ci = ds.attribute_index(attrs[i]);
            const std::size_t cj = ds.attribute_index(attrs[j]);
            const bool ni = ds.attributes[ci].kind == AttributeKind::Numeric;
            const bool nj = ds.attributes[cj].kind == AttributeKind::Numeric;

            // complete rows only
            std::vector<double> xi, xj;
            std::vector<std::string> si, sj;
            for (const auto& row : ds.rows) {
                if (is_missing(row[ci]) || is_missing(row[cj])) continue;
                if (ni) xi.push_back(cell_number(row[ci]));
                else si.push_back(cell_category(row[ci]));
                if (nj) xj.push_back(cell_number(row[cj]));
                else sj.push_back(cell_category(row[cj]));
            }

            std::optional<double> assoc;
            if (ni && nj) assoc = detail::pearson(xi, xj);
            else if (!ni && !nj) assoc = detail::cramers_v(si, sj);
            else if (ni) assoc = detail::correlation_ratio(sj, xi);
            else assoc = detail::correlation_ratio(si, xj);

            if (assoc && *assoc > kPositiveEdgeFloor) {
                spec.edges.push_back({attrs[i], attrs[j], *assoc, ""});
            }
        }
    }

    // Thickness by weight terciles; a single edge counts as thick.
    if (!spec.edges.empty()) {
        std::vector<double> weights;
        for (const auto& e : spec.edges) weights.push_back(e.weight);
        std::sort(weights.begin(), weights.end());
        const double t1 = weights[(weights.size() - 1) / 3];
        const double t2 = weights[2 * (weights.size() - 1) / 3];
        double aggregate = 0.0;
        for (auto& e : spec.edges) {
            e.thickness = e.weight >= t2 ? "thick" : e.weight >= t1 ? "medium" : "thin";
            aggregate += std::abs(e.weight);
        }
        spec.aggregate = aggregate * kAggregateScale;
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Plot building

namespace detail {

inline std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

inline double numeric_at(const Dataset& ds, std::size_t row, std::size_t col) {
    const Cell& cell = ds.rows[row][col];
    return is_number(cell) ? cell_number(cell) : 0.0;
}

}  // namespace detail

// One series per cluster; clusters judged bad are greyed out and noted. The
// attrs prefix defaults to everything the model clustered on.
inline PlotSpec build_plot_spec(const Dataset& ds, const ClusterModel& model,
                                const QualityReport& quality, ChartKind chart,
                                std::vector<std::string> attrs = {},
                                std::size_t point_cap = kScatterPointCap) {
    if (attrs.empty()) attrs = model.selected_attributes;
    if (attrs.empty()) throw Error(ErrorCode::EmptySelection, "no attributes to visualize");

    PlotSpec spec;
    spec.chart = chart;
    spec.dimensionality = classify_dimensionality(attrs);

    std::string title = to_string(chart);
    title += ":";
    for (std::size_t i = 0; i < attrs.size(); ++i) title += (i ? " x " : " ") + attrs[i];
    spec.title = title;

    if (chart == ChartKind::LinkChart) {
        spec.link = link_chart(ds, attrs);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "Correlation Value: %.3g", spec.link->aggregate);
        spec.annotations.push_back(buf);
        if (quality.good_count == 0) spec.annotations.push_back("no good clusters");
        return spec;
    }

    const std::size_t k = model.spec.k;
    std::vector<std::size_t> columns;
    std::vector<AttributeKind> kinds;
    for (const auto& name : attrs) {
        columns.push_back(ds.attribute_index(name));
        kinds.push_back(ds.attributes[columns.back()].kind);
    }

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t r = 0; r < ds.n(); ++r) members[model.assignments[r]].push_back(r);

    std::vector<bool> good(k, false);
    for (const auto& q : quality.per_cluster) {
        if (q.cluster_id < k) good[q.cluster_id] = q.good;
    }

    auto make_series = [&](std::size_t c) {
        PlotSeries s;
        s.cluster_id = c;
        s.label = "cluster " + std::to_string(c);
        s.glyph = glyph_for(c);
        s.greyed = !good[c];
        return s;
    };

    switch (chart) {
        case ChartKind::Histogram: {
            const std::size_t col = columns[0];
            const AttributeMeta& meta = ds.attributes[col];
            const double lo = meta.min;
            const double span = meta.max > meta.min ? meta.max - meta.min : 1.0;
            AxisSpec axis{attrs[0], AttributeKind::Numeric, {}};
            for (std::size_t b = 0; b < kHistogramBins; ++b) {
                axis.ticks.push_back(detail::fmt_tick(lo + span * static_cast<double>(b) /
                                                               static_cast<double>(kHistogramBins)));
            }
            spec.axes.push_back(std::move(axis));
            for (std::size_t c = 0; c < k; ++c) {
                PlotSeries s = make_series(c);
                s.bars.assign(kHistogramBins, 0.0);
                for (std::size_t r : members[c]) {
                    const double v = detail::numeric_at(ds, r, col);
                    auto b = static_cast<std::size_t>((v - lo) / span * static_cast<double>(kHistogramBins));
                    if (b >= kHistogramBins) b = kHistogramBins - 1;
                    s.bars[b] += 1.0;
                }
                s.bar_counts = s.bars;
                spec.series.push_back(std::move(s));
            }
            break;
        }
        case ChartKind::Bar: {
            const std::size_t col = columns[0];
            const auto& categories = ds.attributes[col].categories;
            spec.axes.push_back({attrs[0], AttributeKind::Categorical, categories});
            for (std::size_t c = 0; c < k; ++c) {
                PlotSeries s = make_series(c);
                s.bars.assign(categories.size(), 0.0);
                for (std::size_t r : members[c]) {
                    const auto& cell = ds.rows[r][col];
                    if (is_missing(cell)) continue;
                    const auto it = std::lower_bound(categories.begin(), categories.end(),
                                                     cell_category(cell));
                    if (it != categories.end() && *it == cell_category(cell)) {
                        s.bars[static_cast<std::size_t>(it - categories.begin())] += 1.0;
                    }
                }
                s.bar_counts = s.bars;
                spec.series.push_back(std::move(s));
            }
            break;
        }
        case ChartKind::GroupedBar: {
            // Category levels on the x axis, per-cluster mean of the numeric
            // attribute as bar height (plain counts when no numeric is present).
            std::size_t cat_pos = attrs.size(), num_pos = attrs.size();
            for (std::size_t i = 0; i < attrs.size(); ++i) {
                if (kinds[i] == AttributeKind::Categorical && cat_pos == attrs.size()) cat_pos = i;
                if (kinds[i] == AttributeKind::Numeric && num_pos == attrs.size()) num_pos = i;
            }
            if (cat_pos == attrs.size()) cat_pos = 0;
            const std::size_t cat_col = columns[cat_pos];
            const auto& categories = ds.attributes[cat_col].categories;
            spec.axes.push_back({attrs[cat_pos], AttributeKind::Categorical, categories});
            if (num_pos < attrs.size()) {
                spec.axes.push_back({attrs[num_pos], AttributeKind::Numeric, {}});
            }
            for (std::size_t c = 0; c < k; ++c) {
                PlotSeries s = make_series(c);
                std::vector<double> sums(categories.size(), 0.0);
                std::vector<double> counts(categories.size(), 0.0);
                for (std::size_t r : members[c]) {
                    const auto& cell = ds.rows[r][cat_col];
                    if (is_missing(cell)) continue;
                    const auto it = std::lower_bound(categories.begin(), categories.end(),
                                                     cell_category(cell));
                    if (it == categories.end() || *it != cell_category(cell)) continue;
                    const auto idx = static_cast<std::size_t>(it - categories.begin());
                    counts[idx] += 1.0;
                    if (num_pos < attrs.size()) {
                        sums[idx] += detail::numeric_at(ds, r, columns[num_pos]);
                    } else {
                        sums[idx] += 1.0;
                    }
                }
                s.bars.resize(categories.size(), 0.0);
                for (std::size_t i = 0; i < categories.size(); ++i) {
                    s.bars[i] = counts[i] > 0.0 && num_pos < attrs.size() ? sums[i] / counts[i] : sums[i];
                }
                s.bar_counts = counts;
                spec.series.push_back(std::move(s));
            }
            break;
        }
        case ChartKind::Scatter2D:
        case ChartKind::Scatter3D: {
            const std::size_t dims = chart == ChartKind::Scatter2D ? 2 : 3;
            for (std::size_t i = 0; i < dims && i < attrs.size(); ++i) {
                AxisSpec axis{attrs[i], kinds[i], {}};
                if (kinds[i] == AttributeKind::Categorical) {
                    axis.ticks = ds.attributes[columns[i]].categories;
                }
                spec.axes.push_back(std::move(axis));
            }
            auto coord = [&](std::size_t r, std::size_t i) {
                if (i >= attrs.size()) return 0.0;
                if (kinds[i] == AttributeKind::Numeric) return detail::numeric_at(ds, r, columns[i]);
                const auto& cats = ds.attributes[columns[i]].categories;
                const auto& cell = ds.rows[r][columns[i]];
                if (is_missing(cell)) return 0.0;
                const auto it = std::lower_bound(cats.begin(), cats.end(), cell_category(cell));
                return static_cast<double>(it - cats.begin());
            };
            Rng rng(model.spec.seed ^ 0x5eed5eedULL);
            for (std::size_t c = 0; c < k; ++c) {
                PlotSeries s = make_series(c);
                std::vector<std::size_t> rows = members[c];
                if (rows.size() > point_cap) {
                    auto keep = rng.sample_indices(rows.size(), point_cap);
                    std::sort(keep.begin(), keep.end());
                    std::vector<std::size_t> sampled;
                    sampled.reserve(point_cap);
                    for (std::size_t idx : keep) sampled.push_back(rows[idx]);
                    rows = std::move(sampled);
                    spec.annotations.push_back("series 'cluster " + std::to_string(c) +
                                               "' downsampled to " + std::to_string(point_cap) +
                                               " points");
                }
                for (std::size_t r : rows) {
                    s.points.push_back({coord(r, 0), coord(r, 1), dims == 3 ? coord(r, 2) : 0.0});
                }
                spec.series.push_back(std::move(s));
            }
            if (chart == ChartKind::Scatter3D && attrs.size() >= 3) {
                spec.annotations.push_back("glyph size encodes " + attrs[2]);
            }
            break;
        }
        case ChartKind::LinkChart:
            break;  // handled above
    }

    for (std::size_t c = 0; c < k; ++c) {
        if (!good[c]) {
            spec.annotations.push_back("cluster " + std::to_string(c) +
                                       " below quality thresholds (greyed)");
        }
    }
    if (quality.good_count == 0) spec.annotations.push_back("no good clusters");
    return spec;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json plotspec_to_json(const PlotSpec& spec) {
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : spec.axes) {
        axes.push_back({{"name", a.name}, {"kind", to_string(a.kind)}, {"ticks", a.ticks}});
    }
    nlohmann::json series = nlohmann::json::array();
    for (const auto& s : spec.series) {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& p : s.points) points.push_back({p.x, p.y, p.z});
        series.push_back({{"label", s.label},
                          {"cluster_id", s.cluster_id},
                          {"glyph", s.glyph},
                          {"greyed", s.greyed},
                          {"points", points},
                          {"bars", s.bars},
                          {"bar_counts", s.bar_counts}});
    }
    nlohmann::json out{{"dimensionality", to_string(spec.dimensionality)},
                       {"chart", to_string(spec.chart)},
                       {"title", spec.title},
                       {"axes", axes},
                       {"series", series},
                       {"annotations", spec.annotations}};
    if (spec.link) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : spec.link->edges) {
            edges.push_back({{"a", e.a}, {"b", e.b}, {"weight", e.weight}, {"thickness", e.thickness}});
        }
        out["link"] = {{"nodes", spec.link->nodes},
                       {"edges", edges},
                       {"filter", spec.link->filter},
                       {"aggregate", spec.link->aggregate}};
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVG rendering. Output is deterministic: no timestamps, fixed palette and
// fixed two-decimal coordinates.

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline const char* series_color(std::size_t cluster_id, bool greyed) {
    static const std::array<const char*, 6> palette = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                                       "#d62728", "#9467bd", "#8c564b"};
    return greyed ? "#bbbbbb" : palette[cluster_id % palette.size()];
}

inline void append_glyph(std::string& svg, const std::string& glyph, double x, double y, double r,
                         const std::string& color) {
    const bool open = glyph.find("-open") != std::string::npos;
    const std::string shape = glyph.substr(0, glyph.find('-'));
    const std::string paint = open ? "fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\""
                                   : "fill=\"" + color + "\"";
    if (shape == "square") {
        svg += "<rect x=\"" + fmt2(x - r) + "\" y=\"" + fmt2(y - r) + "\" width=\"" + fmt2(2 * r) +
               "\" height=\"" + fmt2(2 * r) + "\" " + paint + "/>";
    } else if (shape == "triangle") {
        svg += "<polygon points=\"" + fmt2(x) + "," + fmt2(y - r) + " " + fmt2(x - r) + "," +
               fmt2(y + r) + " " + fmt2(x + r) + "," + fmt2(y + r) + "\" " + paint + "/>";
    } else if (shape == "diamond") {
        svg += "<polygon points=\"" + fmt2(x) + "," + fmt2(y - r) + " " + fmt2(x + r) + "," + fmt2(y) +
               " " + fmt2(x) + "," + fmt2(y + r) + " " + fmt2(x - r) + "," + fmt2(y) + "\" " + paint +
               "/>";
    } else if (shape == "cross") {
        svg += "<path d=\"M" + fmt2(x - r) + " " + fmt2(y) + " H" + fmt2(x + r) + " M" + fmt2(x) +
               " " + fmt2(y - r) + " V" + fmt2(y + r) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\" fill=\"none\"/>";
    } else {
        svg += "<circle cx=\"" + fmt2(x) + "\" cy=\"" + fmt2(y) + "\" r=\"" + fmt2(r) + "\" " + paint +
               "/>";
    }
}

struct Frame {
    double width = 840.0;
    double height = 560.0;
    double left = 70.0;
    double right = 660.0;   // legend sits past this
    double top = 60.0;
    double bottom = 470.0;
};

inline void append_axes(std::string& svg, const Frame& f) {
    svg += "<line x1=\"" + fmt2(f.left) + "\" y1=\"" + fmt2(f.bottom) + "\" x2=\"" + fmt2(f.right) +
           "\" y2=\"" + fmt2(f.bottom) + "\" stroke=\"#333333\"/>";
    svg += "<line x1=\"" + fmt2(f.left) + "\" y1=\"" + fmt2(f.top) + "\" x2=\"" + fmt2(f.left) +
           "\" y2=\"" + fmt2(f.bottom) + "\" stroke=\"#333333\"/>";
}

inline void append_legend(std::string& svg, const PlotSpec& spec, const Frame& f) {
    double y = f.top + 10.0;
    for (const auto& s : spec.series) {
        const std::string color = series_color(s.cluster_id, s.greyed);
        append_glyph(svg, s.glyph, f.right + 24.0, y - 4.0, 5.0, color);
        svg += "<text x=\"" + fmt2(f.right + 36.0) + "\" y=\"" + fmt2(y) +
               "\" font-size=\"12\" fill=\"#333333\">" + xml_escape(s.label) +
               (s.greyed ? " (bad)" : "") + "</text>";
        y += 18.0;
    }
}

inline void append_annotations(std::string& svg, const PlotSpec& spec, const Frame& f) {
    double y = f.bottom + 38.0;
    for (const auto& note : spec.annotations) {
        svg += "<text x=\"" + fmt2(f.left) + "\" y=\"" + fmt2(y) +
               "\" font-size=\"11\" fill=\"#666666\">" + xml_escape(note) + "</text>";
        y += 14.0;
    }
}

}  // namespace detail

inline std::string render_svg_string(const PlotSpec& spec) {
    using detail::fmt2;
    const detail::Frame f;

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           fmt2(f.width) + "\" height=\"" + fmt2(f.height) + "\" viewBox=\"0 0 " + fmt2(f.width) +
           " " + fmt2(f.height) + "\">";
    svg += "<rect width=\"" + fmt2(f.width) + "\" height=\"" + fmt2(f.height) + "\" fill=\"#ffffff\"/>";
    svg += "<text x=\"" + fmt2(f.width / 2.0) + "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\" "
           "fill=\"#111111\">" + detail::xml_escape(spec.title) + "</text>";

    if (spec.chart == ChartKind::LinkChart && spec.link) {
        // Nodes on a circle, association edges between them. Thick edges are
        // drawn red to call out the strongest links.
        const LinkChartSpec& link = *spec.link;
        const double cx = (f.left + f.right) / 2.0;
        const double cy = (f.top + f.bottom) / 2.0;
        const double radius = std::min(f.right - f.left, f.bottom - f.top) / 2.0 - 30.0;
        std::map<std::string, std::pair<double, double>> pos;
        for (std::size_t i = 0; i < link.nodes.size(); ++i) {
            const double angle = 2.0 * 3.14159265358979323846 * static_cast<double>(i) /
                                 static_cast<double>(link.nodes.size()) - 1.5707963267948966;
            pos[link.nodes[i]] = {cx + radius * std::cos(angle), cy + radius * std::sin(angle)};
        }
        for (const auto& e : link.edges) {
            const auto& [x1, y1] = pos.at(e.a);
            const auto& [x2, y2] = pos.at(e.b);
            const double width = e.thickness == "thick" ? 5.0 : e.thickness == "medium" ? 2.5 : 1.0;
            const char* color = e.thickness == "thick" ? "#d62728" : "#5b7fa6";
            svg += "<line x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) +
                   "\" y2=\"" + fmt2(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" +
                   fmt2(width) + "\"/>";
            svg += "<text x=\"" + fmt2((x1 + x2) / 2.0) + "\" y=\"" + fmt2((y1 + y2) / 2.0 - 4.0) +
                   "\" font-size=\"10\" fill=\"#444444\" text-anchor=\"middle\">" + fmt2(e.weight) +
                   "</text>";
        }
        for (const auto& node : link.nodes) {
            const auto& [x, y] = pos.at(node);
            svg += "<circle cx=\"" + fmt2(x) + "\" cy=\"" + fmt2(y) + "\" r=\"6\" fill=\"#1f77b4\"/>";
            svg += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(y - 10.0) +
                   "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111111\">" +
                   detail::xml_escape(node) + "</text>";
        }
        detail::append_annotations(svg, spec, f);
        svg += "</svg>\n";
        return svg;
    }

    detail::append_axes(svg, f);
    if (!spec.axes.empty()) {
        svg += "<text x=\"" + fmt2((f.left + f.right) / 2.0) + "\" y=\"" + fmt2(f.bottom + 26.0) +
               "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#333333\">" +
               detail::xml_escape(spec.axes[0].name) + "</text>";
    }
    if (spec.axes.size() > 1) {
        svg += "<text x=\"18\" y=\"" + fmt2((f.top + f.bottom) / 2.0) +
               "\" font-size=\"12\" fill=\"#333333\" transform=\"rotate(-90 18 " +
               fmt2((f.top + f.bottom) / 2.0) + ")\">" + detail::xml_escape(spec.axes[1].name) +
               "</text>";
    }

    const bool bar_family = spec.chart == ChartKind::Histogram || spec.chart == ChartKind::Bar ||
                            spec.chart == ChartKind::GroupedBar;
    if (bar_family) {
        const std::size_t ticks = spec.axes.empty() ? 0 : spec.axes[0].ticks.size();
        double max_bar = 0.0;
        for (const auto& s : spec.series) {
            for (double b : s.bars) max_bar = std::max(max_bar, b);
        }
        if (max_bar <= 0.0) max_bar = 1.0;
        const double slot = ticks > 0 ? (f.right - f.left) / static_cast<double>(ticks) : 0.0;
        const std::size_t groups = std::max<std::size_t>(1, spec.series.size());
        const double bar_w = slot > 0.0 ? std::max(1.0, slot * 0.8 / static_cast<double>(groups)) : 0.0;

        for (std::size_t t = 0; t < ticks; ++t) {
            const double x0 = f.left + slot * static_cast<double>(t) + slot * 0.1;
            for (std::size_t si = 0; si < spec.series.size(); ++si) {
                const auto& s = spec.series[si];
                if (t >= s.bars.size()) continue;
                const double h = s.bars[t] / max_bar * (f.bottom - f.top);
                if (h <= 0.0) continue;
                svg += "<rect x=\"" + fmt2(x0 + bar_w * static_cast<double>(si)) + "\" y=\"" +
                       fmt2(f.bottom - h) + "\" width=\"" + fmt2(bar_w) + "\" height=\"" + fmt2(h) +
                       "\" fill=\"" + detail::series_color(s.cluster_id, s.greyed) + "\"/>";
            }
            // Tick labels thin out when crowded.
            if (ticks <= 12 || t % (ticks / 12 + 1) == 0) {
                svg += "<text x=\"" + fmt2(f.left + slot * (static_cast<double>(t) + 0.5)) + "\" y=\"" +
                       fmt2(f.bottom + 14.0) + "\" font-size=\"10\" text-anchor=\"middle\" "
                       "fill=\"#333333\">" + detail::xml_escape(spec.axes[0].ticks[t]) + "</text>";
            }
        }
        svg += "<text x=\"" + fmt2(f.left - 6.0) + "\" y=\"" + fmt2(f.top + 4.0) +
               "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333333\">" + detail::fmt_tick(max_bar) +
               "</text>";
        svg += "<text x=\"" + fmt2(f.left - 6.0) + "\" y=\"" + fmt2(f.bottom) +
               "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333333\">0</text>";
    } else {
        // Scatter. A third dimension projects onto the plane with the depth
        // encoded as glyph size (fixed 45/30 degree view).
        const bool three_d = spec.chart == ChartKind::Scatter3D;
        double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0, min_z = 0.0, max_z = 1.0;
        bool first = true;
        for (const auto& s : spec.series) {
            for (const auto& p : s.points) {
                if (first) {
                    min_x = max_x = p.x;
                    min_y = max_y = p.y;
                    min_z = max_z = p.z;
                    first = false;
                } else {
                    min_x = std::min(min_x, p.x);
                    max_x = std::max(max_x, p.x);
                    min_y = std::min(min_y, p.y);
                    max_y = std::max(max_y, p.y);
                    min_z = std::min(min_z, p.z);
                    max_z = std::max(max_z, p.z);
                }
            }
        }
        const double span_x = max_x > min_x ? max_x - min_x : 1.0;
        const double span_y = max_y > min_y ? max_y - min_y : 1.0;
        const double span_z = max_z > min_z ? max_z - min_z : 1.0;
        const double cos_az = 0.70710678118654752;  // azimuth 45 degrees
        const double sin_el = 0.5;                  // elevation 30 degrees

        for (const auto& s : spec.series) {
            const std::string color = detail::series_color(s.cluster_id, s.greyed);
            for (const auto& p : s.points) {
                double ux = (p.x - min_x) / span_x;
                double uy = (p.y - min_y) / span_y;
                const double uz = (p.z - min_z) / span_z;
                if (three_d) {
                    const double px = (ux - uy) * cos_az * 0.5 + 0.5;
                    const double py = (ux + uy) * sin_el * 0.5;
                    ux = px;
                    uy = py;
                }
                const double x = f.left + ux * (f.right - f.left);
                const double y = f.bottom - uy * (f.bottom - f.top);
                const double radius = three_d ? 2.0 + 5.0 * uz : 3.5;
                detail::append_glyph(svg, s.glyph, x, y, radius, color);
            }
        }
        svg += "<text x=\"" + fmt2(f.left) + "\" y=\"" + fmt2(f.bottom + 14.0) +
               "\" font-size=\"10\" fill=\"#333333\">" + detail::fmt_tick(min_x) + "</text>";
        svg += "<text x=\"" + fmt2(f.right) + "\" y=\"" + fmt2(f.bottom + 14.0) +
               "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333333\">" + detail::fmt_tick(max_x) +
               "</text>";
        svg += "<text x=\"" + fmt2(f.left - 6.0) + "\" y=\"" + fmt2(f.bottom) +
               "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333333\">" + detail::fmt_tick(min_y) +
               "</text>";
        svg += "<text x=\"" + fmt2(f.left - 6.0) + "\" y=\"" + fmt2(f.top + 4.0) +
               "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333333\">" + detail::fmt_tick(max_y) +
               "</text>";
    }

    detail::append_legend(svg, spec, f);
    detail::append_annotations(svg, spec, f);
    svg += "</svg>\n";
    return svg;
}

inline void render_svg(const PlotSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << render_svg_string(spec);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace automine
