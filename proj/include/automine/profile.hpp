#pragma once

#include <cstdio>
#include <fcntl.h>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <sys/file.h>
#include <unistd.h>
#include <vector>

#include "json.hpp"

#include "automine/common.hpp"

namespace automine {

struct SessionRecord {
    std::string session_id;
    std::string user_id;
    std::int64_t timestamp_ms = 0;  // UTC
    std::string objective;
    std::vector<std::string> objective_tokens;  // lowercase, de-duplicated
    std::vector<std::string> selected_attributes;
    std::string algorithm_used;
    std::size_t k_used = 0;
    double quality_summary = 0.0;  // overall silhouette
    bool accepted = false;
};

struct UserProfile {
    std::string user_id;
    std::vector<SessionRecord> sessions;  // ascending by timestamp
};

struct PatternSummary {
    std::string source_session;
    std::vector<std::string> selected_attributes;
    std::string algorithm_used;
    std::size_t k_used = 0;
    double relevance = 0.0;
};

struct NavigationEvent {
    std::string kind;
    std::string payload;
};

struct SessionOutcome {
    std::vector<std::string> selected_attributes;
    std::string algorithm_used;
    std::size_t k_used = 0;
    double quality_summary = 0.0;
    bool accepted = false;
};

class SessionContext {
public:
    SessionContext(std::string user_id, std::string objective, std::int64_t opened_ms)
        : user_id_(std::move(user_id)),
          objective_(std::move(objective)),
          tokens_(tokenize(objective_)),
          opened_ms_(opened_ms) {}

    const std::string& user_id() const { return user_id_; }
    const std::string& objective() const { return objective_; }
    const std::vector<std::string>& objective_tokens() const { return tokens_; }
    std::int64_t opened_ms() const { return opened_ms_; }
    bool is_open() const { return open_; }
    const std::vector<NavigationEvent>& events() const { return events_; }

    void append_event(NavigationEvent event) {
        if (!open_) throw Error(ErrorCode::SessionClosed, "session already committed");
        events_.push_back(std::move(event));
    }

    void close() { open_ = false; }

private:
    std::string user_id_;
    std::string objective_;
    std::vector<std::string> tokens_;
    std::int64_t opened_ms_;
    std::vector<NavigationEvent> events_;
    bool open_ = true;
};

// Pattern relevance blends topical overlap, recency and acceptance.
struct RelevanceWeights {
    double jaccard = 0.6;
    double recency = 0.3;
    double accepted = 0.1;
    double half_life_days = 30.0;
};

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    std::size_t i = 0, j = 0;  // both sorted
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) { ++inter; ++i; ++j; }
        else if (a[i] < b[j]) ++i;
        else ++j;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double pattern_relevance(const SessionRecord& rec, const std::vector<std::string>& tokens,
                                std::int64_t now_ms, const RelevanceWeights& w = {}) {
    const double overlap = jaccard(tokens, rec.objective_tokens);
    const double age_days = std::max(0.0, static_cast<double>(now_ms - rec.timestamp_ms) / 86400000.0);
    const double recency = std::exp2(-age_days / w.half_life_days);
    const double bonus = rec.accepted ? 1.0 : 0.0;
    return w.jaccard * overlap + w.recency * recency + w.accepted * bonus;
}

// ---------------------------------------------------------------------------
// JSON layout: {"version": 1, "users": [{"user_id", "sessions": [...]}]}

namespace detail {

inline nlohmann::json record_to_json(const SessionRecord& r) {
    return nlohmann::json{
        {"session_id", r.session_id},
        {"user_id", r.user_id},
        {"timestamp", iso8601_utc(r.timestamp_ms)},
        {"objective", r.objective},
        {"objective_tokens", r.objective_tokens},
        {"selected_attributes", r.selected_attributes},
        {"algorithm_used", r.algorithm_used},
        {"k_used", r.k_used},
        {"quality_summary", r.quality_summary},
        {"accepted", r.accepted},
    };
}

inline SessionRecord record_from_json(const nlohmann::json& j) {
    SessionRecord r;
    r.session_id = j.at("session_id").get<std::string>();
    r.user_id = j.at("user_id").get<std::string>();
    r.timestamp_ms = parse_iso8601_utc(j.at("timestamp").get<std::string>());
    r.objective = j.at("objective").get<std::string>();
    r.objective_tokens = j.at("objective_tokens").get<std::vector<std::string>>();
    r.selected_attributes = j.at("selected_attributes").get<std::vector<std::string>>();
    r.algorithm_used = j.at("algorithm_used").get<std::string>();
    r.k_used = j.at("k_used").get<std::size_t>();
    r.quality_summary = j.at("quality_summary").get<double>();
    r.accepted = j.at("accepted").get<bool>();
    return r;
}

// Advisory lock held for the lifetime of the object.
class FileLock {
public:
    FileLock(const std::string& path, int operation) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ >= 0) ::flock(fd_, operation);
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace detail

class ProfileStore {
public:
    static ProfileStore open(const std::string& path) {
        ProfileStore store;
        store.path_ = path;
        detail::FileLock lock(path + ".lock", LOCK_SH);
        std::ifstream in(path, std::ios::binary);
        if (!in) return store;  // absent file means an empty store
        std::ostringstream buf;
        buf << in.rdbuf();
        store.load_text(buf.str());
        return store;
    }

    const std::string& path() const { return path_; }
    std::size_t user_count() const { return users_.size(); }

    const UserProfile* find_user(const std::string& user_id) const {
        auto it = users_.find(user_id);
        return it == users_.end() ? nullptr : &it->second;
    }

    std::vector<std::string> user_ids() const {
        std::vector<std::string> out;
        for (const auto& [id, _] : users_) out.push_back(id);
        return out;
    }

    // Opens a session and surfaces candidate patterns: a returning user sees
    // patterns from their own history, a first-time user sees patterns other
    // users mined for objectives sharing at least one token.
    std::pair<SessionContext, std::vector<PatternSummary>>
    begin_session(const std::string& user_id, const std::string& objective,
                  std::int64_t now_ms = now_millis()) const {
        if (user_id.empty()) throw Error(ErrorCode::InvalidArgument, "user id is empty");
        if (trim(objective).empty()) throw Error(ErrorCode::InvalidArgument, "objective is empty");

        SessionContext ctx(user_id, objective, now_ms);
        ctx.append_event({"login", user_id});

        struct Scored {
            double relevance;
            const SessionRecord* rec;
        };
        std::vector<Scored> scored;
        const UserProfile* own = find_user(user_id);
        if (own != nullptr) {
            for (const auto& rec : own->sessions) {
                scored.push_back({pattern_relevance(rec, ctx.objective_tokens(), now_ms, weights_), &rec});
            }
        } else {
            for (const auto& [id, profile] : users_) {
                for (const auto& rec : profile.sessions) {
                    if (jaccard(ctx.objective_tokens(), rec.objective_tokens) <= 0.0) continue;
                    scored.push_back({pattern_relevance(rec, ctx.objective_tokens(), now_ms, weights_), &rec});
                }
            }
        }
        std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.relevance != b.relevance) return a.relevance > b.relevance;
            if (a.rec->timestamp_ms != b.rec->timestamp_ms) return a.rec->timestamp_ms > b.rec->timestamp_ms;
            return a.rec->session_id < b.rec->session_id;
        });

        std::vector<PatternSummary> patterns;
        patterns.reserve(scored.size());
        for (const auto& s : scored) {
            patterns.push_back({s.rec->session_id, s.rec->selected_attributes,
                                s.rec->algorithm_used, s.rec->k_used, s.relevance});
        }
        return {std::move(ctx), std::move(patterns)};
    }

    SessionRecord commit_session(SessionContext& ctx, const SessionOutcome& outcome,
                                 std::int64_t now_ms = now_millis()) {
        if (!ctx.is_open()) throw Error(ErrorCode::SessionClosed, "session already committed");

        UserProfile& profile = users_[ctx.user_id()];
        profile.user_id = ctx.user_id();

        SessionRecord rec;
        rec.user_id = ctx.user_id();
        rec.timestamp_ms = std::max(now_ms, ctx.opened_ms());
        if (!profile.sessions.empty()) {
            rec.timestamp_ms = std::max(rec.timestamp_ms, profile.sessions.back().timestamp_ms);
        }
        rec.session_id = ctx.user_id() + "-" + std::to_string(rec.timestamp_ms) + "-" +
                         std::to_string(profile.sessions.size() + 1);
        rec.objective = ctx.objective();
        rec.objective_tokens = ctx.objective_tokens();
        rec.selected_attributes = outcome.selected_attributes;
        rec.algorithm_used = outcome.algorithm_used;
        rec.k_used = outcome.k_used;
        rec.quality_summary = outcome.quality_summary;
        rec.accepted = outcome.accepted;

        profile.sessions.push_back(rec);
        try {
            persist();
        } catch (...) {
            profile.sessions.pop_back();
            if (profile.sessions.empty()) users_.erase(ctx.user_id());
            throw;
        }
        ctx.close();
        return rec;
    }

    // Test and tooling hook: insert a prebuilt record and persist.
    void add_record(const SessionRecord& rec) {
        UserProfile& profile = users_[rec.user_id];
        profile.user_id = rec.user_id;
        profile.sessions.push_back(rec);
        std::sort(profile.sessions.begin(), profile.sessions.end(),
                  [](const SessionRecord& a, const SessionRecord& b) {
                      return a.timestamp_ms < b.timestamp_ms;
                  });
        persist();
    }

    void set_relevance_weights(const RelevanceWeights& w) { weights_ = w; }
    const RelevanceWeights& relevance_weights() const { return weights_; }

    nlohmann::json to_json() const {
        nlohmann::json users = nlohmann::json::array();
        for (const auto& [id, profile] : users_) {
            nlohmann::json sessions = nlohmann::json::array();
            for (const auto& rec : profile.sessions) sessions.push_back(detail::record_to_json(rec));
            users.push_back({{"user_id", id}, {"sessions", sessions}});
        }
        return nlohmann::json{{"version", 1}, {"users", users}};
    }

private:
    void load_text(const std::string& text) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::CorruptStore, path_ + ": " + e.what());
        }
        try {
            if (!doc.is_object() || doc.at("version").get<int>() != 1) {
                throw Error(ErrorCode::CorruptStore, path_ + ": unsupported store version");
            }
            for (const auto& user : doc.at("users")) {
                UserProfile profile;
                profile.user_id = user.at("user_id").get<std::string>();
                for (const auto& session : user.at("sessions")) {
                    profile.sessions.push_back(detail::record_from_json(session));
                }
                std::sort(profile.sessions.begin(), profile.sessions.end(),
                          [](const SessionRecord& a, const SessionRecord& b) {
                              return a.timestamp_ms < b.timestamp_ms;
                          });
                users_[profile.user_id] = std::move(profile);
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::CorruptStore, path_ + ": " + e.what());
        }
    }

    // Write-temp-then-rename so a crash never leaves a half-written store.
    void persist() const {
        detail::FileLock lock(path_ + ".lock", LOCK_EX);
        const std::string tmp = path_ + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorCode::PersistFailure, "cannot open " + tmp);
            out << to_json().dump(2) << "\n";
            out.flush();
            if (!out) throw Error(ErrorCode::PersistFailure, "failed writing " + tmp);
        }
        if (std::rename(tmp.c_str(), path_.c_str()) != 0) {
            std::remove(tmp.c_str());
            throw Error(ErrorCode::PersistFailure, "cannot replace " + path_);
        }
    }

    std::string path_;
    std::map<std::string, UserProfile> users_;
    RelevanceWeights weights_;
};

inline ProfileStore open_store(const std::string& path) { return ProfileStore::open(path); }

inline void record_navigation(SessionContext& session, NavigationEvent event) {
    session.append_event(std::move(event));
}

}  // namespace automine
