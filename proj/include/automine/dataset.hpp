#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "automine/common.hpp"

namespace automine {

enum class AttributeKind { Numeric, Categorical };

inline const char* to_string(AttributeKind k) {
    return k == AttributeKind::Numeric ? "numeric" : "categorical";
}

// A table cell is a real number, a category token, or missing.
using Cell = std::variant<std::monostate, double, std::string>;

inline Cell missing_cell() { return Cell{std::monostate{}}; }
inline Cell number_cell(double v) { return Cell{v}; }
inline Cell category_cell(std::string s) { return Cell{std::move(s)}; }
inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
inline bool is_number(const Cell& c) { return std::holds_alternative<double>(c); }
inline double cell_number(const Cell& c) { return std::get<double>(c); }
inline const std::string& cell_category(const Cell& c) { return std::get<std::string>(c); }

struct AttributeMeta {
    std::string name;
    AttributeKind kind = AttributeKind::Categorical;
    std::size_t cardinality = 0;
    double missing_ratio = 0.0;
    // Numeric statistics, over non-missing cells.
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    // Categorical roster, sorted, with per-category counts.
    std::vector<std::string> categories;
    std::vector<std::size_t> category_counts;
};

struct Dataset {
    std::vector<AttributeMeta> attributes;
    std::vector<std::vector<Cell>> rows;

    std::size_t n() const { return rows.size(); }

    std::size_t attribute_index(const std::string& name) const {
        for (std::size_t i = 0; i < attributes.size(); ++i) {
            if (attributes[i].name == name) return i;
        }
        throw Error(ErrorCode::UnknownAttribute, "no attribute named '" + name + "'");
    }

    bool has_attribute(const std::string& name) const {
        for (const auto& a : attributes) {
            if (a.name == name) return true;
        }
        return false;
    }
};

enum class MissingPolicy { DropRow, ImputeMeanMode };

// ---------------------------------------------------------------------------
// Parsing primitives

inline bool is_missing_marker(const std::string& raw) {
    const std::string s = to_lower(trim(raw));
    return s.empty() || s == "na" || s == "null";
}

inline std::optional<double> parse_number(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;  // from_chars rejects a leading plus
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

// RFC-4180 style: quoted fields may contain the delimiter, doubled quotes and
// line breaks. Accepts both \n and \r\n endings.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text, char delimiter = ',') {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;

    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(row);
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        any = true;
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == delimiter) {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field.push_back(c);
        }
    }
    if (any && (!field.empty() || !row.empty())) end_row();
    return rows;
}

// ---------------------------------------------------------------------------
// Type inference

namespace detail {

struct NumericAccum {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double min = 0.0;
    double max = 0.0;

    void add(double v) {
        if (count == 0) {
            min = max = v;
        } else {
            min = std::min(min, v);
            max = std::max(max, v);
        }
        ++count;
        const double d = v - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (v - mean);
    }

    double stddev() const {
        // Population standard deviation.
        return count > 0 ? std::sqrt(m2 / static_cast<double>(count)) : 0.0;
    }
};

inline void fill_numeric_meta(AttributeMeta& meta, const NumericAccum& acc, std::size_t total) {
    meta.kind = AttributeKind::Numeric;
    meta.min = acc.count ? acc.min : 0.0;
    meta.max = acc.count ? acc.max : 0.0;
    meta.mean = acc.count ? acc.mean : 0.0;
    meta.stddev = acc.stddev();
    meta.missing_ratio = total == 0 ? 0.0
                                    : static_cast<double>(total - acc.count) / static_cast<double>(total);
    meta.categories.clear();
    meta.category_counts.clear();
    meta.cardinality = 0;
}

inline void fill_categorical_meta(AttributeMeta& meta,
                                  const std::map<std::string, std::size_t>& counts,
                                  std::size_t present, std::size_t total) {
    meta.kind = AttributeKind::Categorical;
    meta.categories.clear();
    meta.category_counts.clear();
    for (const auto& [cat, cnt] : counts) {
        meta.categories.push_back(cat);
        meta.category_counts.push_back(cnt);
    }
    meta.cardinality = meta.categories.size();
    meta.missing_ratio = total == 0 ? 0.0
                                    : static_cast<double>(total - present) / static_cast<double>(total);
    meta.min = meta.max = meta.mean = meta.stddev = 0.0;
}

}  // namespace detail

// A column is numeric when at least 95% of its non-missing cells parse as
// real numbers; the stray non-parsing cells are then treated as missing.
inline constexpr double kNumericShareThreshold = 0.95;

inline std::vector<AttributeMeta> infer_types(const std::vector<std::vector<std::string>>& raw_columns,
                                              const std::vector<std::string>& names = {}) {
    if (raw_columns.empty()) throw Error(ErrorCode::EmptyInput, "no columns");
    const std::size_t n = raw_columns.front().size();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "columns are empty");
    for (const auto& col : raw_columns) {
        if (col.size() != n) throw Error(ErrorCode::InvalidArgument, "columns differ in length");
    }

    std::vector<AttributeMeta> metas(raw_columns.size());
    for (std::size_t c = 0; c < raw_columns.size(); ++c) {
        AttributeMeta& meta = metas[c];
        meta.name = c < names.size() ? names[c] : "col" + std::to_string(c);

        std::size_t non_missing = 0;
        std::size_t parseable = 0;
        for (const auto& raw : raw_columns[c]) {
            if (is_missing_marker(raw)) continue;
            ++non_missing;
            if (parse_number(raw)) ++parseable;
        }

        const bool numeric = non_missing > 0 &&
            static_cast<double>(parseable) >= kNumericShareThreshold * static_cast<double>(non_missing);
        if (numeric) {
            detail::NumericAccum acc;
            for (const auto& raw : raw_columns[c]) {
                if (is_missing_marker(raw)) continue;
                if (auto v = parse_number(raw)) acc.add(*v);
            }
            detail::fill_numeric_meta(meta, acc, n);
        } else {
            std::map<std::string, std::size_t> counts;
            std::size_t present = 0;
            for (const auto& raw : raw_columns[c]) {
                if (is_missing_marker(raw)) continue;
                ++present;
                ++counts[trim(raw)];
            }
            detail::fill_categorical_meta(meta, counts, present, n);
        }
    }
    return metas;
}

// Recompute every AttributeMeta from the typed cells, keeping kinds fixed.
inline void refresh_metadata(Dataset& ds) {
    const std::size_t n = ds.n();
    for (std::size_t c = 0; c < ds.attributes.size(); ++c) {
        AttributeMeta& meta = ds.attributes[c];
        if (meta.kind == AttributeKind::Numeric) {
            detail::NumericAccum acc;
            for (const auto& row : ds.rows) {
                if (is_number(row[c])) acc.add(cell_number(row[c]));
            }
            const std::string name = meta.name;
            detail::fill_numeric_meta(meta, acc, n);
            meta.name = name;
        } else {
            std::map<std::string, std::size_t> counts;
            std::size_t present = 0;
            for (const auto& row : ds.rows) {
                if (is_missing(row[c])) continue;
                ++present;
                ++counts[cell_category(row[c])];
            }
            detail::fill_categorical_meta(meta, counts, present, n);
        }
    }
}

inline Dataset dataset_from_strings(const std::vector<std::string>& names,
                                    const std::vector<std::vector<std::string>>& raw_rows) {
    if (raw_rows.empty()) throw Error(ErrorCode::EmptyInput, "no data rows");
    std::vector<std::vector<std::string>> columns(names.size());
    for (auto& col : columns) col.reserve(raw_rows.size());
    for (const auto& row : raw_rows) {
        for (std::size_t c = 0; c < names.size(); ++c) columns[c].push_back(row[c]);
    }

    Dataset ds;
    ds.attributes = infer_types(columns, names);
    ds.rows.reserve(raw_rows.size());
    for (const auto& raw : raw_rows) {
        std::vector<Cell> row(names.size());
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (is_missing_marker(raw[c])) {
                row[c] = missing_cell();
            } else if (ds.attributes[c].kind == AttributeKind::Numeric) {
                auto v = parse_number(raw[c]);
                row[c] = v ? number_cell(*v) : missing_cell();
            } else {
                row[c] = category_cell(trim(raw[c]));
            }
        }
        ds.rows.push_back(std::move(row));
    }
    refresh_metadata(ds);
    return ds;
}

// ---------------------------------------------------------------------------
// CSV ingestion

inline Dataset load_csv_text(const std::string& text, char delimiter = ',', bool has_header = true) {
    auto records = parse_csv(text, delimiter);
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "file holds no rows");

    std::vector<std::string> names;
    std::size_t first_data = 0;
    if (has_header) {
        for (auto& h : records.front()) names.push_back(trim(h));
        first_data = 1;
    } else {
        for (std::size_t c = 0; c < records.front().size(); ++c) names.push_back("col" + std::to_string(c));
    }
    if (records.size() <= first_data) throw Error(ErrorCode::EmptyInput, "file holds no data rows");

    const std::size_t width = names.size();
    for (std::size_t r = first_data; r < records.size(); ++r) {
        if (records[r].size() != width) {
            throw Error(ErrorCode::RaggedRow,
                        "row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                            " fields, expected " + std::to_string(width));
        }
    }

    std::vector<std::vector<std::string>> raw_rows(records.begin() + static_cast<std::ptrdiff_t>(first_data),
                                                   records.end());
    return dataset_from_strings(names, raw_rows);
}

inline Dataset load_csv(const std::string& path, char delimiter = ',', bool has_header = true) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path);
    const std::string text = buf.str();
    if (text.empty()) throw Error(ErrorCode::EmptyInput, path + " is empty");
    return load_csv_text(text, delimiter, has_header);
}

inline std::string csv_escape(const std::string& field, char delimiter) {
    const bool needs_quotes = field.find(delimiter) != std::string::npos ||
                              field.find('"') != std::string::npos ||
                              field.find('\n') != std::string::npos ||
                              field.find('\r') != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string csv_string(const Dataset& ds, char delimiter = ',') {
    std::string out;
    for (std::size_t c = 0; c < ds.attributes.size(); ++c) {
        if (c) out.push_back(delimiter);
        out += csv_escape(ds.attributes[c].name, delimiter);
    }
    out.push_back('\n');
    for (const auto& row : ds.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out.push_back(delimiter);
            if (is_missing(row[c])) continue;  // missing writes an empty field
            if (is_number(row[c])) out += format_number(cell_number(row[c]));
            else out += csv_escape(cell_category(row[c]), delimiter);
        }
        out.push_back('\n');
    }
    return out;
}

inline void write_csv(const Dataset& ds, const std::string& path, char delimiter = ',') {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << csv_string(ds, delimiter);
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

// ---------------------------------------------------------------------------
// Missing-value handling

inline Dataset handle_missing(const Dataset& ds, MissingPolicy policy) {
    Dataset out;
    out.attributes = ds.attributes;

    if (policy == MissingPolicy::DropRow) {
        for (const auto& row : ds.rows) {
            const bool holed = std::any_of(row.begin(), row.end(),
                                           [](const Cell& c) { return is_missing(c); });
            if (!holed) out.rows.push_back(row);
        }
        if (out.rows.empty()) throw Error(ErrorCode::AllRowsDropped, "every row had a missing cell");
    } else {
        // Numeric gaps take the attribute mean, categorical gaps the modal
        // category (smallest category on a tie).
        std::vector<Cell> fills(ds.attributes.size(), missing_cell());
        for (std::size_t c = 0; c < ds.attributes.size(); ++c) {
            const AttributeMeta& meta = ds.attributes[c];
            if (meta.kind == AttributeKind::Numeric) {
                fills[c] = number_cell(meta.mean);
            } else if (!meta.categories.empty()) {
                std::size_t best = 0;
                for (std::size_t i = 1; i < meta.category_counts.size(); ++i) {
                    if (meta.category_counts[i] > meta.category_counts[best]) best = i;
                }
                fills[c] = category_cell(meta.categories[best]);
            }
        }
        out.rows = ds.rows;
        for (auto& row : out.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (is_missing(row[c])) row[c] = fills[c];
            }
        }
    }
    refresh_metadata(out);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic student dataset.
//
// The table mirrors a registrar export: identifier columns (registration
// number, library account, email, phone) are near-unique, enrolment columns
// are skewed toward the dominant campus values, and assessment columns derive
// from a per-row performance figure. Two regularities are planted:
//   * summer-term rows carry no lab marks, so their pass percentage sits in
//     a band strictly below the spring/fall bands for every seed;
//   * a small high-performer stratum has pass percentage above 90.
// Output is deterministic for a fixed (n, seed).

inline Dataset generate_student_data(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw Error(ErrorCode::InvalidCount, "need at least 10 rows");
    Rng rng(seed);

    enum class Term { Spring, Fall, Summer };
    struct RowPlan {
        Term term = Term::Spring;
        bool high_performer = false;
    };

    const std::size_t n_summer = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.12 * static_cast<double>(n))));
    const std::size_t n_regular = n - n_summer;
    const std::size_t n_high = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.12 * static_cast<double>(n_regular))));

    std::vector<RowPlan> plan(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_summer) {
            plan[i].term = Term::Summer;
        } else {
            plan[i].term = (i - n_summer) % 2 == 0 ? Term::Spring : Term::Fall;
            plan[i].high_performer = (i - n_summer) < n_high;
        }
    }
    rng.shuffle(plan);

    static const std::array<const char*, 45> kFirst = {
        "arun", "bala", "chitra", "deepa", "esha", "farid", "gita", "hari", "indu", "jaya",
        "kavi", "lakshmi", "mani", "nila", "omar", "priya", "qadir", "ravi", "sara", "tara",
        "uma", "venkat", "wasim", "xavier", "yamini", "zara", "anil", "bhavna", "charan", "divya",
        "ganesh", "harini", "ishan", "jyoti", "karthik", "leela", "mohan", "naveen", "pooja", "rahul",
        "shreya", "tanvi", "varun", "swati", "vikram"};
    static const std::array<const char*, 45> kLast = {
        "iyer", "nair", "menon", "reddy", "rao", "sharma", "verma", "patel", "gupta", "das",
        "bose", "sen", "mukherjee", "banerjee", "chatterjee", "pillai", "naidu", "shetty", "hegde", "kamath",
        "kulkarni", "joshi", "deshpande", "sawant", "gaikwad", "singh", "yadav", "mishra", "tripathi", "dubey",
        "pandey", "tiwari", "chauhan", "rathore", "bhat", "kaur", "gill", "sandhu", "malik", "ahuja",
        "kapoor", "khanna", "mehta", "shah", "jain"};
    static const std::array<const char*, 4> kSpecializations = {"cs", "it", "ece", "mech"};
    static const std::array<const char*, 4> kModules = {"mca101", "mit202", "mec303", "mme404"};
    static const std::array<const char*, 4> kTutors = {"prof raman", "prof kumar", "prof devi", "prof thomas"};
    static const std::array<const char*, 6> kPlaces = {"coimbatore", "chennai", "madurai", "salem", "erode", "trichy"};
    static const std::array<const char*, 4> kCountries = {"india", "uk", "us", "sg"};

    auto pick_skewed = [&](const double* cumulative, std::size_t count) {
        const double u = rng.uniform();
        for (std::size_t i = 0; i + 1 < count; ++i) {
            if (u < cumulative[i]) return i;
        }
        return count - 1;
    };
    static const double kSpecCum[4] = {0.84, 0.91, 0.96, 1.0};
    static const double kTutorCum[4] = {0.84, 0.92, 0.97, 1.0};
    static const double kPlaceCum[6] = {0.85, 0.88, 0.91, 0.94, 0.97, 1.0};
    static const double kCountryCum[4] = {0.92, 0.95, 0.98, 1.0};

    const std::vector<std::string> names = {
        "REG_NO", "NAME", "YEAR", "SEMESTER", "SESSION", "SPECIALIZATION", "MODULE_CODE",
        "TUTOR_NAME", "PLACE", "COUNTRY", "STREET_NO", "LIB_ACCNO", "ACC_NO", "ISSUE_DATE",
        "RETURN_DATA", "EMAIL_ID", "TEL_PHONE", "ASSIG_PARAMETER", "MAX_MARK", "MIN_MARK",
        "LAB_MARK", "PASS_PERCENTAGE", "AVG_INT", "AVG_EXT", "AVG_TOT"};

    const std::vector<AttributeKind> kinds = {
        AttributeKind::Categorical, AttributeKind::Categorical, AttributeKind::Numeric,
        AttributeKind::Categorical, AttributeKind::Categorical, AttributeKind::Categorical,
        AttributeKind::Categorical, AttributeKind::Categorical, AttributeKind::Categorical,
        AttributeKind::Categorical, AttributeKind::Categorical, AttributeKind::Categorical,
        AttributeKind::Categorical, AttributeKind::Categorical, AttributeKind::Categorical,
        AttributeKind::Categorical, AttributeKind::Categorical, AttributeKind::Numeric,
        AttributeKind::Numeric, AttributeKind::Numeric, AttributeKind::Numeric,
        AttributeKind::Numeric, AttributeKind::Numeric, AttributeKind::Numeric,
        AttributeKind::Numeric};

    auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
    char buf[64];

    Dataset ds;
    ds.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const RowPlan& p = plan[i];
        std::vector<Cell> row;
        row.reserve(names.size());

        const int year = 2019 + static_cast<int>(rng.index(4));

        std::snprintf(buf, sizeof(buf), "R%d-%05zu", year, i + 1);
        row.push_back(category_cell(buf));

        std::string name = std::string(kFirst[(i / kLast.size()) % kFirst.size()]) + " " +
                           kLast[i % kLast.size()];
        if (i >= kFirst.size() * kLast.size()) name += " " + std::to_string(i);
        row.push_back(category_cell(name));

        row.push_back(number_cell(static_cast<double>(year)));

        row.push_back(category_cell(p.term == Term::Spring ? "spring"
                                    : p.term == Term::Fall ? "fall"
                                                           : "summer"));
        row.push_back(category_cell(rng.uniform() < 0.92 ? "day" : "evening"));

        const std::size_t spec = pick_skewed(kSpecCum, kSpecializations.size());
        row.push_back(category_cell(kSpecializations[spec]));
        row.push_back(category_cell(kModules[spec]));
        row.push_back(category_cell(kTutors[pick_skewed(kTutorCum, kTutors.size())]));
        row.push_back(category_cell(kPlaces[pick_skewed(kPlaceCum, kPlaces.size())]));
        row.push_back(category_cell(kCountries[pick_skewed(kCountryCum, kCountries.size())]));

        std::snprintf(buf, sizeof(buf), "%zu/%c", i + 1, static_cast<char>('A' + rng.index(6)));
        row.push_back(category_cell(buf));

        std::snprintf(buf, sizeof(buf), "LIB%06zu", 100000 + i);
        row.push_back(category_cell(buf));
        std::snprintf(buf, sizeof(buf), "AC%06zu", 500000 + i);
        row.push_back(category_cell(buf));

        const int issue_month = 1 + static_cast<int>(rng.index(6));
        const int issue_day = 1 + static_cast<int>(rng.index(28));
        std::snprintf(buf, sizeof(buf), "%d-%02d-%02d %02zu:%02zu:%02zu", year, issue_month, issue_day,
                      rng.index(24), rng.index(60), rng.index(60));
        row.push_back(category_cell(buf));
        std::snprintf(buf, sizeof(buf), "%d-%02d-%02d %02zu:%02zu:%02zu", year, issue_month + 6, issue_day,
                      rng.index(24), rng.index(60), rng.index(60));
        row.push_back(category_cell(buf));

        std::snprintf(buf, sizeof(buf), "student%05zu@example.edu", i + 1);
        row.push_back(category_cell(buf));
        std::snprintf(buf, sizeof(buf), "98%03zu-%05zu", (i * 7) % 1000, 10000 + i % 90000);
        row.push_back(category_cell(buf));

        double pass = 0.0;
        if (p.term == Term::Summer) {
            pass = rng.uniform(4.0, 24.0);
        } else if (p.high_performer) {
            pass = rng.uniform(91.0, 99.0);
        } else {
            pass = rng.uniform(32.0, 80.0);
        }
        pass = round2(pass);

        const double assig = round2(2.2 + 0.05 * pass + rng.uniform(-0.8, 0.8));
        const double max_mark = round2(78.0 + 0.12 * pass + rng.uniform(-5.0, 5.0));
        const double min_mark = round2(20.0 + 0.25 * pass + rng.uniform(-8.0, 8.0));
        const double lab = p.term == Term::Summer ? 0.0 : round2(rng.uniform(14.5, 17.5));
        const double avg_int = round2(22.0 + 0.18 * pass + rng.uniform(-3.0, 3.0));
        const double avg_ext = round2(6.0 + 0.42 * pass + rng.uniform(-3.0, 3.0));

        row.push_back(number_cell(assig));
        row.push_back(number_cell(max_mark));
        row.push_back(number_cell(min_mark));
        row.push_back(number_cell(lab));
        row.push_back(number_cell(pass));
        row.push_back(number_cell(avg_int));
        row.push_back(number_cell(avg_ext));
        row.push_back(number_cell(round2(avg_int + avg_ext)));

        ds.rows.push_back(std::move(row));
    }

    ds.attributes.resize(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
        ds.attributes[c].name = names[c];
        ds.attributes[c].kind = kinds[c];
    }
    refresh_metadata(ds);
    return ds;
}

}  // namespace automine
