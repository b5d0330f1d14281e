#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace automine {

enum class ErrorCode {
    IoError,
    RaggedRow,
    EmptyInput,
    AllRowsDropped,
    InvalidCount,
    MissingValues,
    CorruptStore,
    SessionClosed,
    PersistFailure,
    InvalidSelectionSize,
    InvalidWeights,
    LayoutMismatch,
    NonNumericAttribute,
    NonCategoricalAttribute,
    NotMixedData,
    KExceedsN,
    SampleTooSmall,
    NoAttributesSelected,
    InvalidKnn,
    TooFewMembers,
    SingleCluster,
    EmptySelection,
    TooFewAttributes,
    UnknownAttribute,
    IllegalTransfer,
    ConfigError,
    StageFailure,
    InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::RaggedRow: return "RaggedRow";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::AllRowsDropped: return "AllRowsDropped";
        case ErrorCode::InvalidCount: return "InvalidCount";
        case ErrorCode::MissingValues: return "MissingValues";
        case ErrorCode::CorruptStore: return "CorruptStore";
        case ErrorCode::SessionClosed: return "SessionClosed";
        case ErrorCode::PersistFailure: return "PersistFailure";
        case ErrorCode::InvalidSelectionSize: return "InvalidSelectionSize";
        case ErrorCode::InvalidWeights: return "InvalidWeights";
        case ErrorCode::LayoutMismatch: return "LayoutMismatch";
        case ErrorCode::NonNumericAttribute: return "NonNumericAttribute";
        case ErrorCode::NonCategoricalAttribute: return "NonCategoricalAttribute";
        case ErrorCode::NotMixedData: return "NotMixedData";
        case ErrorCode::KExceedsN: return "KExceedsN";
        case ErrorCode::SampleTooSmall: return "SampleTooSmall";
        case ErrorCode::NoAttributesSelected: return "NoAttributesSelected";
        case ErrorCode::InvalidKnn: return "InvalidKnn";
        case ErrorCode::TooFewMembers: return "TooFewMembers";
        case ErrorCode::SingleCluster: return "SingleCluster";
        case ErrorCode::EmptySelection: return "EmptySelection";
        case ErrorCode::TooFewAttributes: return "TooFewAttributes";
        case ErrorCode::UnknownAttribute: return "UnknownAttribute";
        case ErrorCode::IllegalTransfer: return "IllegalTransfer";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::StageFailure: return "StageFailure";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ---------------------------------------------------------------------------
// String helpers

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

// Lowercase alphanumeric runs of length >= 2, de-duplicated and sorted.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::set<std::string> out;
    std::string cur;
    auto flush = [&]() {
        if (cur.size() >= 2) out.insert(cur);
        cur.clear();
    };
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return {out.begin(), out.end()};
}

// Attribute names are matched case-insensitively with underscores as spaces.
inline std::string normalize_name(const std::string& name) {
    std::string out = to_lower(name);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

// Compact decimal form with enough digits for a 1e-9 round trip at data scale.
inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Deterministic random source. The transforms below are fixed here rather
// than taken from <random> distributions so that identical seeds produce
// identical streams on every toolchain.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::size_t index(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return static_cast<std::size_t>(v % span);
    }

    double normal(double mean, double sd) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mean + sd * r * std::cos(a);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    // k distinct indices from [0, n), order of discovery.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) throw Error(ErrorCode::InvalidArgument, "sample larger than population");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(pool[i], pool[i + index(n - i)]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Time helpers. Timestamps are stored as UTC milliseconds since the epoch and
// rendered as ISO-8601 with millisecond precision.

inline std::int64_t now_millis() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

inline std::string iso8601_utc(std::int64_t millis) {
    const std::int64_t secs = millis >= 0 ? millis / 1000 : (millis - 999) / 1000;
    const int ms = static_cast<int>(millis - secs * 1000);
    std::time_t t = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
    return buf;
}

inline std::int64_t parse_iso8601_utc(const std::string& text) {
    int year = 0, mon = 0, day = 0, hour = 0, min = 0, sec = 0, ms = 0;
    const int got = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d.%dZ",
                                &year, &mon, &day, &hour, &min, &sec, &ms);
    if (got < 6) throw Error(ErrorCode::InvalidArgument, "bad timestamp: " + text);
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = mon - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = min;
    tm.tm_sec = sec;
    const std::time_t t = timegm(&tm);
    return static_cast<std::int64_t>(t) * 1000 + (got >= 7 ? ms : 0);
}

inline std::uint64_t fnv1a_hash(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace automine
