#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "automine/clustering.hpp"
#include "automine/dataset.hpp"
#include "automine/detection.hpp"
#include "automine/profile.hpp"
#include "automine/ranking.hpp"
#include "automine/viz.hpp"

namespace automine {

// ---------------------------------------------------------------------------
// In-process agent messaging. Control flows user interface -> data mining
// (with a ranking sub-call) -> visualization; results travel back along the
// matching reverse edges. Anything else is rejected.

enum class AgentId { UserInterface, Ranking, DataMining, Visualization };
enum class MessageKind { TransferControl, Result, Error };

inline const char* to_string(AgentId a) {
    switch (a) {
        case AgentId::UserInterface: return "user_interface";
        case AgentId::Ranking: return "ranking";
        case AgentId::DataMining: return "data_mining";
        case AgentId::Visualization: return "visualization";
    }
    return "unknown";
}

inline const char* to_string(MessageKind k) {
    switch (k) {
        case MessageKind::TransferControl: return "transfer_control";
        case MessageKind::Result: return "result";
        case MessageKind::Error: return "error";
    }
    return "unknown";
}

struct AgentMessage {
    AgentId from = AgentId::UserInterface;
    AgentId to = AgentId::DataMining;
    MessageKind kind = MessageKind::TransferControl;
    std::string payload;
};

enum class BusStage { AwaitingMining, Mining, RankingCall, MiningResumed, Visualizing, Done };

struct MessageBus {
    BusStage stage = BusStage::AwaitingMining;
    std::vector<AgentMessage> log;
};

inline MessageBus dispatch(const MessageBus& bus, const AgentMessage& msg) {
    auto illegal = [&]() {
        return Error(ErrorCode::IllegalTransfer,
                     std::string(to_string(msg.from)) + " -> " + to_string(msg.to) + " (" +
                         to_string(msg.kind) + ") is not a legal transfer");
    };

    BusStage next = bus.stage;
    if (msg.kind == MessageKind::Error) {
        if (msg.to != AgentId::UserInterface || msg.from == AgentId::UserInterface) throw illegal();
        next = BusStage::Done;
    } else if (bus.stage == BusStage::AwaitingMining && msg.from == AgentId::UserInterface &&
               msg.to == AgentId::DataMining && msg.kind == MessageKind::TransferControl) {
        next = BusStage::Mining;
    } else if (bus.stage == BusStage::Mining && msg.from == AgentId::DataMining &&
               msg.to == AgentId::Ranking && msg.kind == MessageKind::TransferControl) {
        next = BusStage::RankingCall;
    } else if (bus.stage == BusStage::RankingCall && msg.from == AgentId::Ranking &&
               msg.to == AgentId::DataMining && msg.kind == MessageKind::Result) {
        next = BusStage::MiningResumed;
    } else if (bus.stage == BusStage::MiningResumed && msg.from == AgentId::DataMining &&
               msg.to == AgentId::Visualization && msg.kind == MessageKind::TransferControl) {
        next = BusStage::Visualizing;
    } else if (bus.stage == BusStage::Visualizing && msg.from == AgentId::Visualization &&
               msg.to == AgentId::UserInterface && msg.kind == MessageKind::Result) {
        next = BusStage::Done;
    } else {
        throw illegal();
    }

    MessageBus out = bus;
    out.stage = next;
    out.log.push_back(msg);
    return out;
}

// ---------------------------------------------------------------------------
// Configuration. Flat "dotted.key = value" lines with optional [section]
// headers and '#' comments; unknown keys are rejected outright.

struct PipelineConfig {
    std::string store_path = "automine_store.json";
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    RankingWeights ranking_weights;
    std::size_t ranking_top_m = 3;

    std::size_t large_n_threshold = 2000;
    std::size_t max_iter = 100;
    double gamma = -1.0;
    std::size_t clara_samples = 5;
    std::size_t clara_sample_size = 0;
    std::size_t clarans_numlocal = 2;
    std::size_t clarans_maxneighbor = 0;
    std::size_t k_max = 10;

    DetectionThresholds detection;
    RelevanceWeights relevance;
    std::size_t viz_point_cap = kScatterPointCap;
};

namespace detail {

inline double config_number(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "key '" + key + "' has a non-numeric value '" + value + "'");
    }
}

inline std::string config_string(std::string value) {
    value = trim(value);
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\''))) {
        value = value.substr(1, value.size() - 2);
    }
    return value;
}

}  // namespace detail

inline void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto num = [&]() { return detail::config_number(key, detail::config_string(value)); };
    auto count = [&]() { return static_cast<std::size_t>(num()); };

    if (key == "store_path") cfg.store_path = detail::config_string(value);
    else if (key == "out_dir") cfg.out_dir = detail::config_string(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
    else if (key == "ranking.w_score") cfg.ranking_weights.type_score = num();
    else if (key == "ranking.w_query") cfg.ranking_weights.query = num();
    else if (key == "ranking.m") cfg.ranking_top_m = count();
    else if (key == "selection.large_n_threshold") cfg.large_n_threshold = count();
    else if (key == "clustering.max_iter") cfg.max_iter = count();
    else if (key == "clustering.gamma") cfg.gamma = num();
    else if (key == "clustering.clara_samples") cfg.clara_samples = count();
    else if (key == "clustering.clara_sample_size") cfg.clara_sample_size = count();
    else if (key == "clustering.clarans_numlocal") cfg.clarans_numlocal = count();
    else if (key == "clustering.clarans_maxneighbor") cfg.clarans_maxneighbor = count();
    else if (key == "clustering.k_max") cfg.k_max = count();
    else if (key == "detection.min_silhouette") cfg.detection.min_silhouette = num();
    else if (key == "detection.max_apl_ratio") cfg.detection.max_apl_ratio = num();
    else if (key == "detection.min_size_abs") cfg.detection.min_size_abs = count();
    else if (key == "detection.min_size_frac") cfg.detection.min_size_frac = num();
    else if (key == "detection.baseline_sets") cfg.detection.baseline_sets = count();
    else if (key == "detection.k_nn") cfg.detection.k_nn = count();
    else if (key == "profile.w_jaccard") cfg.relevance.jaccard = num();
    else if (key == "profile.w_recency") cfg.relevance.recency = num();
    else if (key == "profile.w_accepted") cfg.relevance.accepted = num();
    else if (key == "profile.half_life_days") cfg.relevance.half_life_days = num();
    else if (key == "viz.point_cap") cfg.viz_point_cap = count();
    else throw Error(ErrorCode::ConfigError, "unknown configuration key '" + key + "'");
}

inline PipelineConfig parse_config_text(const std::string& text, PipelineConfig cfg = {}) {
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + " is not key = value");
        }
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        apply_config_entry(cfg, key, line.substr(eq + 1));
    }
    return cfg;
}

inline PipelineConfig load_config(const std::string& path, PipelineConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), std::move(cfg));
}

// ---------------------------------------------------------------------------
// Full session run

struct PipelineOverrides {
    std::optional<Algorithm> algorithm;
    std::optional<std::size_t> k;
    std::optional<std::size_t> use_suggestion;  // 1-based index into the suggestion list
    bool accepted = true;
};

struct StageTiming {
    std::string stage;
    double millis = 0.0;
};

struct SessionReport {
    std::string user_id;
    std::string objective;
    std::string session_id;
    std::uint64_t input_hash = 0;
    std::uint64_t seed = 0;
    std::vector<PatternSummary> suggestions;
    std::optional<std::size_t> used_suggestion;
    RankedAttributes ranked;
    std::vector<std::string> selected_attributes;
    ClusterModel model;
    QualityReport quality;
    std::vector<std::string> plot_files;
    nlohmann::json plotspec;
    std::vector<StageTiming> timings;
    std::vector<AgentMessage> messages;
    SessionRecord committed;
};

namespace detail {

inline std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_hash(buf.str());
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

class StageClock {
public:
    void start(const std::string& stage) {
        stage_ = stage;
        begin_ = std::chrono::steady_clock::now();
    }
    void stop(std::vector<StageTiming>& out) {
        const auto end = std::chrono::steady_clock::now();
        out.push_back({stage_, std::chrono::duration<double, std::milli>(end - begin_).count()});
    }
    const std::string& stage() const { return stage_; }

private:
    std::string stage_ = "user_interface";
    std::chrono::steady_clock::time_point begin_;
};

// Move whatever this run produced under out_dir/failed and leave a note
// naming the failing stage.
inline void stash_failed_artifacts(const std::string& out_dir,
                                   const std::vector<std::string>& written,
                                   const std::string& stage, const std::string& what) {
    const std::string failed_dir = out_dir + "/failed";
    std::error_code ec;
    std::filesystem::create_directories(failed_dir, ec);
    for (const auto& name : written) {
        std::filesystem::rename(out_dir + "/" + name, failed_dir + "/" + name, ec);
    }
    nlohmann::json err{{"version", 1}, {"stage", stage}, {"error", what}};
    try {
        write_text_file(failed_dir + "/error.json", err.dump(2) + "\n");
    } catch (const Error&) {
        // the thrown StageFailure still names the stage
    }
}

}  // namespace detail

inline nlohmann::json ranks_to_json(const RankedAttributes& ranked, const std::string& objective) {
    nlohmann::json ranks = nlohmann::json::array();
    for (const auto& r : ranked.ranks) {
        ranks.push_back({{"name", r.name},
                         {"type_score", r.type_score},
                         {"query_weight", r.query_weight},
                         {"combined", r.combined},
                         {"rank", r.rank}});
    }
    return nlohmann::json{
        {"version", 1}, {"objective", objective}, {"ranks", ranks}, {"selected", ranked.selected}};
}

inline nlohmann::json report_to_json(const SessionReport& r) {
    nlohmann::json suggestions = nlohmann::json::array();
    for (const auto& p : r.suggestions) {
        suggestions.push_back({{"source_session", p.source_session},
                               {"selected_attributes", p.selected_attributes},
                               {"algorithm_used", p.algorithm_used},
                               {"k_used", p.k_used},
                               {"relevance", p.relevance}});
    }
    nlohmann::json timings = nlohmann::json::array();
    for (const auto& t : r.timings) timings.push_back({{"stage", t.stage}, {"millis", t.millis}});
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : r.messages) {
        messages.push_back(
            {{"from", to_string(m.from)}, {"to", to_string(m.to)}, {"kind", to_string(m.kind)}});
    }
    std::vector<std::size_t> sizes(r.model.spec.k, 0);
    for (std::size_t a : r.model.assignments) {
        if (a < sizes.size()) ++sizes[a];
    }
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(r.input_hash));
    return nlohmann::json{
        {"version", 1},
        {"session",
         {{"user_id", r.user_id},
          {"objective", r.objective},
          {"session_id", r.session_id},
          {"seed", r.seed},
          {"input_hash", hash_buf}}},
        {"suggestions", suggestions},
        {"used_suggestion", r.used_suggestion ? nlohmann::json(*r.used_suggestion) : nlohmann::json()},
        {"ranked", ranks_to_json(r.ranked, r.objective)},
        {"selected_attributes", r.selected_attributes},
        {"spec", spec_to_json(r.model.spec)},
        {"model_summary",
         {{"objective", r.model.objective},
          {"iterations_run", r.model.iterations_run},
          {"cluster_sizes", sizes}}},
        {"quality", quality_to_json(r.quality)},
        {"plots", r.plot_files},
        {"stage_timings", timings},
        {"messages", messages},
        {"accepted", r.committed.accepted},
    };
}

// Runs the whole session: open the profile, surface prior patterns, rank,
// cluster, judge quality, draw charts, then commit the session back into the
// profile store. Artifacts land under config.out_dir; a failing stage moves
// what exists so far to out_dir/failed and reports the stage by name.
inline SessionReport run_pipeline(const PipelineConfig& config, const std::string& user_id,
                                  const std::string& objective, const std::string& data_path,
                                  const PipelineOverrides& overrides = {}) {
    namespace fs = std::filesystem;

    SessionReport report;
    report.user_id = user_id;
    report.objective = objective;
    report.seed = config.seed;

    std::vector<std::string> written;
    auto artifact_path = [&](const std::string& name) { return config.out_dir + "/" + name; };
    auto emit = [&](const std::string& name, const std::string& text) {
        detail::write_text_file(artifact_path(name), text);
        written.push_back(name);
    };

    MessageBus bus;
    detail::StageClock clock;
    auto send = [&](AgentId from, AgentId to, MessageKind kind, const std::string& payload) {
        bus = dispatch(bus, AgentMessage{from, to, kind, payload});
    };

    try {
        fs::create_directories(config.out_dir);

        // User interface: identify the user and surface prior patterns.
        ProfileStore store = ProfileStore::open(config.store_path);
        store.set_relevance_weights(config.relevance);
        auto [ctx, suggestions] = store.begin_session(user_id, objective);
        report.suggestions = suggestions;
        ctx.append_event({"suggestions_shown", std::to_string(suggestions.size())});

        std::optional<PatternSummary> adopted;
        if (overrides.use_suggestion) {
            const std::size_t idx = *overrides.use_suggestion;
            if (idx < 1 || idx > suggestions.size()) {
                throw Error(ErrorCode::InvalidArgument,
                            "suggestion " + std::to_string(idx) + " does not exist (have " +
                                std::to_string(suggestions.size()) + ")");
            }
            adopted = suggestions[idx - 1];
            report.used_suggestion = idx;
            ctx.append_event({"suggestion_used", adopted->source_session});
        }

        send(AgentId::UserInterface, AgentId::DataMining, MessageKind::TransferControl, data_path);

        // Attribute preparation.
        clock.start("attribute_selection");
        report.input_hash = detail::hash_file(data_path);
        const Dataset raw = load_csv(data_path);
        const Dataset complete = handle_missing(raw, MissingPolicy::ImputeMeanMode);
        clock.stop(report.timings);

        // Ranking sub-call.
        send(AgentId::DataMining, AgentId::Ranking, MessageKind::TransferControl, "rank");
        clock.start("ranking");
        const std::vector<std::string> tokens = tokenize(objective);
        std::vector<SessionRecord> history;
        if (const UserProfile* own = store.find_user(user_id)) history = own->sessions;
        const std::size_t m = std::min(config.ranking_top_m, raw.attributes.size());
        report.ranked = rank_attributes(raw, tokens, history, std::max<std::size_t>(1, m),
                                        config.ranking_weights);
        report.selected_attributes = report.ranked.selected;
        if (adopted) {
            std::vector<std::string> kept;
            for (const auto& name : adopted->selected_attributes) {
                if (raw.has_attribute(name)) kept.push_back(name);
            }
            if (!kept.empty()) report.selected_attributes = kept;
        }
        emit("ranks.json", ranks_to_json(report.ranked, objective).dump(2) + "\n");
        clock.stop(report.timings);
        send(AgentId::Ranking, AgentId::DataMining, MessageKind::Result, "ranks.json");

        // Cluster formation.
        clock.start("cluster_formation");
        const ClusterInput input = make_cluster_input(complete, report.selected_attributes);
        const DataSummary summary = summarize(input);

        std::optional<Algorithm> hint;
        if (adopted) hint = algorithm_from_string(adopted->algorithm_used);
        if (!hint) {
            for (auto it = history.rbegin(); it != history.rend(); ++it) {
                if (!it->accepted) continue;
                hint = algorithm_from_string(it->algorithm_used);
                if (hint) break;
            }
        }

        ClusteringSpec spec;
        if (overrides.algorithm) {
            spec.algorithm = *overrides.algorithm;
        } else {
            spec = select_algorithm(summary, hint, 0, config.seed, config.large_n_threshold);
        }
        spec.seed = config.seed;
        spec.max_iter = config.max_iter;
        spec.gamma = config.gamma;
        spec.clara_samples = config.clara_samples;
        spec.clara_sample_size = config.clara_sample_size;
        spec.clarans_numlocal = config.clarans_numlocal;
        spec.clarans_maxneighbor = config.clarans_maxneighbor;

        if (overrides.k) {
            spec.k = *overrides.k;
        } else if (adopted && adopted->k_used >= 1 && adopted->k_used <= input.row_count) {
            spec.k = adopted->k_used;
        } else {
            spec.k = choose_k(input, spec, config.k_max);
        }

        report.model = run_clustering(input, spec);
        emit("model.json", model_to_json(report.model).dump(2) + "\n");
        clock.stop(report.timings);

        // Cluster detection.
        clock.start("cluster_detection");
        report.quality = detect_good_clusters(report.model, input, config.detection);
        emit("quality.json", quality_to_json(report.quality).dump(2) + "\n");
        clock.stop(report.timings);

        send(AgentId::DataMining, AgentId::Visualization, MessageKind::TransferControl, "model.json");

        // Visualization: one chart per prefix depth, plus the attribute
        // relation chart once at least two attributes are in play.
        clock.start("visualization");
        nlohmann::json charts = nlohmann::json::array();
        const auto& selected = report.selected_attributes;
        for (std::size_t depth = 1; depth <= std::min<std::size_t>(3, selected.size()); ++depth) {
            std::vector<std::string> prefix(selected.begin(),
                                            selected.begin() + static_cast<std::ptrdiff_t>(depth));
            std::vector<AttributeKind> kinds;
            for (const auto& name : prefix) {
                kinds.push_back(complete.attributes[complete.attribute_index(name)].kind);
            }
            const Dimensionality dim = classify_dimensionality(prefix);
            const ChartKind chart = choose_chart(dim, kinds);
            const PlotSpec plot = build_plot_spec(complete, report.model, report.quality, chart,
                                                  prefix, config.viz_point_cap);
            const std::string file = "chart_" + std::to_string(depth) + "d.svg";
            render_svg(plot, artifact_path(file));
            written.push_back(file);
            report.plot_files.push_back(file);
            charts.push_back(plotspec_to_json(plot));
        }
        if (selected.size() >= 2) {
            const PlotSpec plot = build_plot_spec(complete, report.model, report.quality,
                                                  ChartKind::LinkChart, selected, config.viz_point_cap);
            render_svg(plot, artifact_path("link_chart.svg"));
            written.push_back("link_chart.svg");
            report.plot_files.push_back("link_chart.svg");
            charts.push_back(plotspec_to_json(plot));
        }
        report.plotspec = nlohmann::json{{"version", 1}, {"charts", charts}};
        emit("plotspec.json", report.plotspec.dump(2) + "\n");
        clock.stop(report.timings);

        send(AgentId::Visualization, AgentId::UserInterface, MessageKind::Result, "plotspec.json");

        // Close the loop: persist the session.
        SessionOutcome outcome;
        outcome.selected_attributes = report.selected_attributes;
        outcome.algorithm_used = to_string(report.model.spec.algorithm);
        outcome.k_used = report.model.spec.k;
        outcome.quality_summary = report.quality.overall_silhouette;
        outcome.accepted = overrides.accepted;
        report.committed = store.commit_session(ctx, outcome);
        report.session_id = report.committed.session_id;

        report.messages = bus.log;
        emit("report.json", report_to_json(report).dump(2) + "\n");
        return report;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StageFailure) throw;
        detail::stash_failed_artifacts(config.out_dir, written, clock.stage(), e.what());
        throw Error(ErrorCode::StageFailure, "stage '" + clock.stage() + "' failed: " + e.what());
    } catch (const std::exception& e) {
        detail::stash_failed_artifacts(config.out_dir, written, clock.stage(), e.what());
        throw Error(ErrorCode::StageFailure, "stage '" + clock.stage() + "' failed: " + e.what());
    }
}

}  // namespace automine
