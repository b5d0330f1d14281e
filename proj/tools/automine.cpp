// automine: rank attributes, cluster, judge cluster quality and draw charts
// for a tabular dataset, keeping per-user session history for suggestions.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <unistd.h>

#include "CLI11.hpp"

#include "automine/automine.hpp"

namespace {

using namespace automine;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitStage = 4;

int classify_error(const Error& e) {
    switch (e.code()) {
        case ErrorCode::StageFailure:
            return kExitStage;
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidSelectionSize:
        case ErrorCode::InvalidWeights:
            return kExitUsage;
        default:
            return kExitData;
    }
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    detail::write_text_file(path, doc.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, path + ": " + e.what());
    }
    return doc;
}

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> store_path;
};

PipelineConfig resolve_config(const CommonOpts& opts) {
    PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path, cfg);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    if (opts.store_path) cfg.store_path = *opts.store_path;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Configuration file (key = value lines)");
    cmd->add_option("--seed", [&opts](const CLI::results_t& r) {
        opts.seed = std::stoull(r.at(0));
        return true;
    }, "Random seed")->expected(1);
    cmd->add_option("--out-dir", [&opts](const CLI::results_t& r) {
        opts.out_dir = r.at(0);
        return true;
    }, "Artifact output directory")->expected(1);
    cmd->add_option("--store", [&opts](const CLI::results_t& r) {
        opts.store_path = r.at(0);
        return true;
    }, "Profile store path")->expected(1);
}

void print_rank_table(const RankedAttributes& ranked) {
    std::printf("%-4s %-20s %10s %12s %10s\n", "rank", "attribute", "type", "query", "combined");
    for (const auto& r : ranked.ranks) {
        std::printf("%-4zu %-20s %10.4f %12.4f %10.4f\n", r.rank, r.name.c_str(), r.type_score,
                    r.query_weight, r.combined);
    }
    std::printf("selected:");
    for (const auto& name : ranked.selected) std::printf(" %s", name.c_str());
    std::printf("\n");
}

Dataset load_input(const std::string& path, char delimiter, bool no_header) {
    return load_csv(path, delimiter, !no_header);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"automated attribute ranking, clustering, quality detection and charting"};
    app.require_subcommand(1);

    CommonOpts common;

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Write the synthetic student dataset as CSV");
    std::size_t gen_n = 2000;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "data.csv";
    gen->add_option("--n", gen_n, "Row count (minimum 10)");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output CSV path");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load a CSV, report attribute types and statistics");
    std::string in_path, ingest_out;
    std::string delimiter = ",";
    bool no_header = false;
    std::string policy = "none";
    ingest->add_option("--in", in_path, "Input CSV")->required();
    ingest->add_option("--delimiter", delimiter, "Field delimiter (default ,)");
    ingest->add_flag("--no-header", no_header, "Treat the first row as data");
    ingest->add_option("--policy", policy, "Missing-value policy: none|drop|impute");
    ingest->add_option("--out", ingest_out, "Write the (possibly cleaned) table back as CSV");

    // rank
    auto* rank = app.add_subcommand("rank", "Score and rank attributes for an objective");
    std::string rank_in, rank_objective, rank_user;
    std::size_t rank_top = 3;
    rank->add_option("--in", rank_in, "Input CSV")->required();
    rank->add_option("--objective", rank_objective, "Mining objective text")->required();
    rank->add_option("--top", rank_top, "How many attributes to select");
    rank->add_option("--user", rank_user, "Rank with this user's session history");
    add_common(rank, common);

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Run a partitioning clustering algorithm");
    std::string cl_in, cl_attrs, cl_algorithm = "auto";
    std::size_t cl_k = 0;
    cluster->add_option("--in", cl_in, "Input CSV")->required();
    cluster->add_option("--attrs", cl_attrs, "Comma-separated attribute names (default: all)");
    cluster->add_option("--algorithm", cl_algorithm,
                        "auto|kmeans|pam|kmodes|kprototypes|clara|clarans");
    cluster->add_option("--k", cl_k, "Cluster count (default: silhouette scan)");
    add_common(cluster, common);

    // detect
    auto* detect = app.add_subcommand("detect", "Judge cluster quality for a stored model");
    std::string det_model, det_in;
    detect->add_option("--model", det_model, "model.json path")->required();
    detect->add_option("--in", det_in, "Input CSV the model was built from")->required();
    add_common(detect, common);

    // viz
    auto* viz = app.add_subcommand("viz", "Emit charts for a model and quality report");
    std::string viz_model, viz_quality, viz_in;
    viz->add_option("--model", viz_model, "model.json path")->required();
    viz->add_option("--quality", viz_quality, "quality.json path")->required();
    viz->add_option("--in", viz_in, "Input CSV")->required();
    add_common(viz, common);

    // mine
    auto* mine = app.add_subcommand("mine", "Run the full session end to end");
    std::string mine_in, mine_user, mine_objective, mine_algorithm;
    std::size_t mine_k = 0, mine_suggestion = 0;
    bool mine_no_accept = false, mine_interactive = false;
    mine->add_option("--in", mine_in, "Input CSV")->required();
    mine->add_option("--user", mine_user, "User id")->required();
    mine->add_option("--objective", mine_objective, "Mining objective text")->required();
    mine->add_option("--algorithm", mine_algorithm, "Force an algorithm (default: auto)");
    mine->add_option("--k", mine_k, "Force a cluster count");
    mine->add_option("--use-suggestion", mine_suggestion, "Adopt suggestion N from the list");
    mine->add_flag("--no-accept", mine_no_accept, "Record the session as not accepted");
    mine->add_flag("--interactive", mine_interactive, "Prompt for a suggestion on a TTY");
    add_common(mine, common);

    // profile show
    auto* profile = app.add_subcommand("profile", "Profile store operations");
    auto* show = profile->add_subcommand("show", "Print a user's session history");
    std::string show_user;
    show->add_option("--user", show_user, "User id")->required();
    add_common(show, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const Dataset ds = generate_student_data(gen_n, gen_seed);
            write_csv(ds, gen_out);
            std::printf("wrote %zu rows x %zu attributes to %s\n", ds.n(), ds.attributes.size(),
                        gen_out.c_str());
            return kExitOk;
        }

        if (ingest->parsed()) {
            Dataset ds = load_input(in_path, delimiter.empty() ? ',' : delimiter[0], no_header);
            if (policy == "drop") ds = handle_missing(ds, MissingPolicy::DropRow);
            else if (policy == "impute") ds = handle_missing(ds, MissingPolicy::ImputeMeanMode);
            else if (policy != "none") throw Error(ErrorCode::InvalidArgument, "unknown policy " + policy);

            std::printf("%-20s %-12s %12s %10s %10s %10s\n", "attribute", "kind", "cardinality",
                        "missing", "mean", "stddev");
            for (const auto& a : ds.attributes) {
                std::printf("%-20s %-12s %12zu %9.1f%% %10.3f %10.3f\n", a.name.c_str(),
                            to_string(a.kind), a.cardinality, 100.0 * a.missing_ratio, a.mean,
                            a.stddev);
            }
            std::printf("%zu rows\n", ds.n());
            if (!ingest_out.empty()) write_csv(ds, ingest_out);
            return kExitOk;
        }

        if (rank->parsed()) {
            const PipelineConfig cfg = resolve_config(common);
            const Dataset ds = load_csv(rank_in);
            std::vector<SessionRecord> history;
            if (!rank_user.empty()) {
                const ProfileStore store = ProfileStore::open(cfg.store_path);
                if (const UserProfile* p = store.find_user(rank_user)) history = p->sessions;
            }
            const auto ranked = rank_attributes(ds, tokenize(rank_objective), history,
                                                std::min(rank_top, ds.attributes.size()),
                                                cfg.ranking_weights);
            print_rank_table(ranked);
            std::filesystem::create_directories(cfg.out_dir);
            write_json_file(cfg.out_dir + "/ranks.json", ranks_to_json(ranked, rank_objective));
            return kExitOk;
        }

        if (cluster->parsed()) {
            const PipelineConfig cfg = resolve_config(common);
            const Dataset raw = load_csv(cl_in);
            const Dataset ds = handle_missing(raw, MissingPolicy::ImputeMeanMode);
            std::vector<std::string> attrs;
            if (cl_attrs.empty()) {
                for (const auto& a : ds.attributes) attrs.push_back(a.name);
            } else {
                for (auto& part : split(cl_attrs, ',')) {
                    const std::string name = trim(part);
                    if (!name.empty()) attrs.push_back(name);
                }
            }
            const ClusterInput input = make_cluster_input(ds, attrs);

            ClusteringSpec spec;
            if (cl_algorithm == "auto") {
                spec = select_algorithm(summarize(input), std::nullopt, 0, cfg.seed,
                                        cfg.large_n_threshold);
            } else {
                const auto algo = algorithm_from_string(cl_algorithm);
                if (!algo) throw Error(ErrorCode::InvalidArgument, "unknown algorithm " + cl_algorithm);
                spec.algorithm = *algo;
            }
            spec.seed = cfg.seed;
            spec.max_iter = cfg.max_iter;
            spec.gamma = cfg.gamma;
            spec.clara_samples = cfg.clara_samples;
            spec.clara_sample_size = cfg.clara_sample_size;
            spec.clarans_numlocal = cfg.clarans_numlocal;
            spec.clarans_maxneighbor = cfg.clarans_maxneighbor;
            spec.k = cl_k > 0 ? cl_k : choose_k(input, spec, cfg.k_max);

            const ClusterModel model = run_clustering(input, spec);
            std::filesystem::create_directories(cfg.out_dir);
            write_json_file(cfg.out_dir + "/model.json", model_to_json(model));
            std::printf("%s k=%zu objective=%.6f iterations=%zu -> %s/model.json\n",
                        to_string(model.spec.algorithm), model.spec.k, model.objective,
                        model.iterations_run, cfg.out_dir.c_str());
            return kExitOk;
        }

        if (detect->parsed()) {
            const PipelineConfig cfg = resolve_config(common);
            const ClusterModel model = model_from_json(read_json_file(det_model));
            const Dataset raw = load_csv(det_in);
            const Dataset ds = handle_missing(raw, MissingPolicy::ImputeMeanMode);
            const ClusterInput input = make_cluster_input(ds, model.selected_attributes);
            const QualityReport quality = detect_good_clusters(model, input, cfg.detection);
            std::filesystem::create_directories(cfg.out_dir);
            write_json_file(cfg.out_dir + "/quality.json", quality_to_json(quality));
            for (const auto& q : quality.per_cluster) {
                std::printf("cluster %zu size=%zu silhouette=%.4f apl=%s verdict=%s\n", q.cluster_id,
                            q.size, q.silhouette,
                            q.avg_path_length ? format_number(*q.avg_path_length).c_str()
                                              : "disconnected",
                            q.good ? "good" : "bad");
            }
            std::printf("overall silhouette %.4f, %zu good of %zu\n", quality.overall_silhouette,
                        quality.good_count, quality.per_cluster.size());
            return kExitOk;
        }

        if (viz->parsed()) {
            const PipelineConfig cfg = resolve_config(common);
            const ClusterModel model = model_from_json(read_json_file(viz_model));
            const QualityReport quality = quality_from_json(read_json_file(viz_quality));
            const Dataset raw = load_csv(viz_in);
            const Dataset ds = handle_missing(raw, MissingPolicy::ImputeMeanMode);
            std::filesystem::create_directories(cfg.out_dir);

            nlohmann::json charts = nlohmann::json::array();
            const auto& selected = model.selected_attributes;
            for (std::size_t depth = 1; depth <= std::min<std::size_t>(3, selected.size()); ++depth) {
                std::vector<std::string> prefix(selected.begin(), selected.begin() + depth);
                std::vector<AttributeKind> kinds;
                for (const auto& name : prefix) {
                    kinds.push_back(ds.attributes[ds.attribute_index(name)].kind);
                }
                const ChartKind chart = choose_chart(classify_dimensionality(prefix), kinds);
                const PlotSpec plot =
                    build_plot_spec(ds, model, quality, chart, prefix, cfg.viz_point_cap);
                const std::string file = cfg.out_dir + "/chart_" + std::to_string(depth) + "d.svg";
                render_svg(plot, file);
                charts.push_back(plotspec_to_json(plot));
                std::printf("wrote %s\n", file.c_str());
            }
            if (selected.size() >= 2) {
                const PlotSpec plot = build_plot_spec(ds, model, quality, ChartKind::LinkChart,
                                                      selected, cfg.viz_point_cap);
                render_svg(plot, cfg.out_dir + "/link_chart.svg");
                charts.push_back(plotspec_to_json(plot));
                std::printf("wrote %s/link_chart.svg\n", cfg.out_dir.c_str());
            }
            write_json_file(cfg.out_dir + "/plotspec.json",
                            nlohmann::json{{"version", 1}, {"charts", charts}});
            return kExitOk;
        }

        if (mine->parsed()) {
            const PipelineConfig cfg = resolve_config(common);
            PipelineOverrides overrides;
            if (!mine_algorithm.empty() && mine_algorithm != "auto") {
                const auto algo = algorithm_from_string(mine_algorithm);
                if (!algo) throw Error(ErrorCode::InvalidArgument, "unknown algorithm " + mine_algorithm);
                overrides.algorithm = algo;
            }
            if (mine_k > 0) overrides.k = mine_k;
            if (mine_suggestion > 0) overrides.use_suggestion = mine_suggestion;
            overrides.accepted = !mine_no_accept;

            if (mine_interactive && mine_suggestion == 0 && isatty(fileno(stdin))) {
                const ProfileStore store = ProfileStore::open(cfg.store_path);
                const auto [ctx, suggestions] = store.begin_session(mine_user, mine_objective);
                (void)ctx;
                if (!suggestions.empty()) {
                    std::printf("prior patterns:\n");
                    for (std::size_t i = 0; i < suggestions.size() && i < 5; ++i) {
                        std::printf("  [%zu] algo=%s k=%zu relevance=%.3f attrs=", i + 1,
                                    suggestions[i].algorithm_used.c_str(), suggestions[i].k_used,
                                    suggestions[i].relevance);
                        for (const auto& a : suggestions[i].selected_attributes) std::printf("%s ", a.c_str());
                        std::printf("\n");
                    }
                    std::printf("use suggestion [1-%zu, enter to skip]: ", std::min<std::size_t>(5, suggestions.size()));
                    std::string line;
                    if (std::getline(std::cin, line) && !trim(line).empty()) {
                        overrides.use_suggestion = std::stoul(trim(line));
                    }
                }
            }

            const SessionReport report = run_pipeline(cfg, mine_user, mine_objective, mine_in, overrides);
            std::printf("session %s\n", report.session_id.c_str());
            std::printf("selected:");
            for (const auto& a : report.selected_attributes) std::printf(" %s", a.c_str());
            std::printf("\nalgorithm=%s k=%zu objective=%.6f\n", to_string(report.model.spec.algorithm),
                        report.model.spec.k, report.model.objective);
            std::printf("good clusters: %zu of %zu (overall silhouette %.4f)\n", report.quality.good_count,
                        report.quality.per_cluster.size(), report.quality.overall_silhouette);
            for (const auto& f : report.plot_files) std::printf("plot: %s/%s\n", cfg.out_dir.c_str(), f.c_str());
            std::printf("report: %s/report.json\n", cfg.out_dir.c_str());
            return kExitOk;
        }

        if (show->parsed()) {
            const PipelineConfig cfg = resolve_config(common);
            const ProfileStore store = ProfileStore::open(cfg.store_path);
            const UserProfile* p = store.find_user(show_user);
            if (p == nullptr) {
                std::printf("no sessions for user %s\n", show_user.c_str());
                return kExitOk;
            }
            for (const auto& s : p->sessions) {
                std::printf("%s %s objective=\"%s\" algo=%s k=%zu silhouette=%.4f accepted=%s\n",
                            iso8601_utc(s.timestamp_ms).c_str(), s.session_id.c_str(),
                            s.objective.c_str(), s.algorithm_used.c_str(), s.k_used,
                            s.quality_summary, s.accepted ? "yes" : "no");
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify_error(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
