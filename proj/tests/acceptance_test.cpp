// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Criteria 7 and 9 drive the installed CLI binary end to end.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "automine/automine.hpp"
#include "oracles.hpp"

using namespace automine;
namespace fs = std::filesystem;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point begin = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    }
};

void criterion(int number, const std::string& description, bool ok) {
    std::printf("[criterion %2d] %s: %s\n", number, ok ? "PASS" : "FAIL", description.c_str());
    std::fflush(stdout);
    REQUIRE(ok);
}

std::string scratch_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / "automine_acceptance" / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

int run_cli(const std::string& args, const std::string& log_path) {
    const std::string cmd = std::string(AUTOMINE_CLI_PATH) + " " + args + " >" + log_path + " 2>&1";
    return std::system(cmd.c_str());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

ClusterInput input_of(const Dataset& ds, const std::vector<std::string>& attrs) {
    return make_cluster_input(ds, attrs);
}

ClusterInput plain_numeric(const std::vector<std::vector<double>>& rows) {
    const Dataset ds = oracle::numeric_dataset(rows);
    std::vector<std::string> names;
    for (const auto& a : ds.attributes) names.push_back(a.name);
    return make_cluster_input(ds, names);
}

}  // namespace

TEST_CASE("criterion 1: pam equals the exhaustive medoid-pair optimum") {
    Stopwatch watch;
    bool all_equal = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed * 31 + 7);
        const std::size_t n = 8 + static_cast<std::size_t>(seed % 5);  // 8..12
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i) {
            const double shift = i % 2 == 0 ? 0.0 : 6.0;
            rows.push_back({rng.uniform() * 2.0 + shift, rng.uniform() * 2.0});
        }
        const auto input = plain_numeric(rows);
        const double exact = oracle::brute_force_pam2(input, Measure::SqEuclidean, 1.0);
        const double got = pam(input, 2).objective;
        if (std::abs(got - exact) > 1e-9) all_equal = false;
    }
    const double elapsed = watch.seconds();
    criterion(1, "pam == exhaustive pair optimum on 10 datasets (n<=12) in " +
                     std::to_string(elapsed) + "s",
              all_equal && elapsed < 1.0);
}

TEST_CASE("criterion 2: lloyd objectives equal brute force over 2-partitions") {
    Stopwatch watch;
    bool all_equal = true;

    const std::vector<std::vector<std::vector<double>>> numeric_sets = {
        {{0.0}, {0.4}, {1.1}, {2.0}, {7.0}, {7.3}, {8.2}, {9.0}},
        {{0.0, 0.0}, {1.0, 0.5}, {0.5, 1.0}, {6.0, 6.0}, {7.0, 6.5}, {6.5, 7.0}, {0.2, 0.8}, {6.8, 6.2}},
        {{-3.0}, {-2.5}, {-2.0}, {2.0}, {2.5}, {3.0}, {0.1}, {-0.1}}};
    for (const auto& rows : numeric_sets) {
        const auto input = plain_numeric(rows);
        const double exact = oracle::brute_force_kmeans2(input);
        double best = std::numeric_limits<double>::max();
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            best = std::min(best, kmeans(input, 2, seed).objective);
        }
        if (std::abs(best - exact) > 1e-9) all_equal = false;
    }

    const std::vector<std::vector<std::vector<std::string>>> categorical_sets = {
        {{"a", "p"}, {"a", "p"}, {"a", "q"}, {"b", "p"}, {"c", "r"}, {"c", "r"}, {"c", "s"}, {"d", "r"}},
        {{"x", "1", "m"}, {"x", "1", "n"}, {"x", "2", "m"}, {"y", "1", "m"},
         {"z", "3", "o"}, {"z", "3", "p"}, {"z", "4", "o"}, {"w", "3", "o"}}};
    for (const auto& rows : categorical_sets) {
        const Dataset ds = oracle::categorical_dataset(rows);
        std::vector<std::string> names;
        for (const auto& a : ds.attributes) names.push_back(a.name);
        const auto input = make_cluster_input(ds, names);
        const double exact = oracle::brute_force_kmodes2(input);
        double best = std::numeric_limits<double>::max();
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            best = std::min(best, kmodes(input, 2, seed).objective);
        }
        if (std::abs(best - exact) > 1e-9) all_equal = false;
    }

    const double elapsed = watch.seconds();
    criterion(2, "best-of-10-seed kmeans/kmodes == brute force on 5 datasets (n<=8) in " +
                     std::to_string(elapsed) + "s",
              all_equal && elapsed < 5.0);
}

TEST_CASE("criterion 3: kmeans recovers planted blobs") {
    Stopwatch watch;
    const auto [ds, labels] = oracle::make_blobs({{0.0, 0.0}, {10.0, 0.0}, {0.0, 10.0}},
                                                 {100, 100, 100}, 1.0, 2024);
    const auto input = input_of(ds, {"x0", "x1"});
    std::size_t hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto model = kmeans(input, 3, seed);
        if (oracle::adjusted_rand_index(model.assignments, labels) >= 0.95) ++hits;
    }
    const double elapsed = watch.seconds();
    criterion(3, "ARI >= 0.95 on " + std::to_string(hits) + "/10 seeds in " +
                     std::to_string(elapsed) + "s",
              hits >= 9 && elapsed < 1.0);
}

TEST_CASE("criterion 4: clara and clarans stay within 5 percent of pam") {
    Stopwatch watch;
    const auto [ds, labels] = oracle::make_blobs({{0.0, 0.0}, {9.0, 0.0}, {0.0, 9.0}},
                                                 {170, 170, 160}, 1.0, 404);
    const auto input = input_of(ds, {"x0", "x1"});
    const double pam_objective = pam(input, 3).objective;

    std::vector<double> clara_ratio, clarans_ratio;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ClusteringSpec spec;
        spec.k = 3;
        spec.seed = seed;
        spec.algorithm = Algorithm::CLARA;
        clara_ratio.push_back(clara(input, spec).objective / pam_objective);
        spec.algorithm = Algorithm::CLARANS;
        clarans_ratio.push_back(clarans(input, spec).objective / pam_objective);
    }
    std::sort(clara_ratio.begin(), clara_ratio.end());
    std::sort(clarans_ratio.begin(), clarans_ratio.end());
    const double clara_median = (clara_ratio[4] + clara_ratio[5]) / 2.0;
    const double clarans_median = (clarans_ratio[4] + clarans_ratio[5]) / 2.0;
    const double elapsed = watch.seconds();
    criterion(4, "median objective ratios clara=" + std::to_string(clara_median) +
                     " clarans=" + std::to_string(clarans_median) + " on n=500, k=3 in " +
                     std::to_string(elapsed) + "s",
              clara_median <= 1.05 && clarans_median <= 1.05 && elapsed < 30.0);
}

TEST_CASE("criterion 5: detection separates good from overclustered") {
    // six-dimensional planted blobs: a one-axis split genuinely loses
    // silhouette while the true clusters stay decisively separated
    const auto [ds, labels] =
        oracle::make_blobs({{0, 0, 0, 0, 0, 0}, {9, 9, 9, 9, 9, 9}, {9, 0, 9, 0, 9, 0}},
                           {100, 100, 100}, 1.0, 4);
    const auto input = input_of(ds, {"x0", "x1", "x2", "x3", "x4", "x5"});

    const auto k3 = detect_good_clusters(kmeans(input, 3, 2), input);
    const bool all_good = k3.good_count == 3 && k3.per_cluster.size() == 3;

    const auto k6 = detect_good_clusters(kmeans(input, 6, 2), input);
    const bool some_bad = k6.good_count < 6;

    bool in_bounds = true;
    for (const auto& q : k3.per_cluster) {
        if (q.silhouette < -1.0 || q.silhouette > 1.0) in_bounds = false;
    }
    for (const auto& q : k6.per_cluster) {
        if (q.silhouette < -1.0 || q.silhouette > 1.0) in_bounds = false;
    }

    // n=6 reference comparison at 1e-12
    const auto small = plain_numeric({{0.0}, {0.5}, {1.1}, {5.0}, {5.4}, {6.2}});
    const std::vector<std::size_t> assign = {0, 0, 0, 1, 1, 1};
    const auto got = silhouette(small, assign, Measure::SqEuclidean, 2);
    const auto ref = oracle::reference_silhouette_points(small, assign, Measure::SqEuclidean, 2, 1.0);
    double ref_c0 = (ref[0] + ref[1] + ref[2]) / 3.0;
    double ref_c1 = (ref[3] + ref[4] + ref[5]) / 3.0;
    const bool matches_reference = std::abs(got.per_cluster[0] - ref_c0) <= 1e-12 &&
                                   std::abs(got.per_cluster[1] - ref_c1) <= 1e-12;

    criterion(5, "k=3 all good (" + std::to_string(k3.good_count) + "/3), k=6 has bad verdicts (" +
                     std::to_string(k6.good_count) + "/6 good), reference match",
              all_good && some_bad && in_bounds && matches_reference);
}

TEST_CASE("criterion 6: path-length metric on fixed graphs") {
    NeighborGraph path;
    path.n = 3;
    path.adjacency = {{1}, {0, 2}, {1}};
    const auto apl_path = avg_path_length(path, {0, 1, 2});
    const bool path_ok = apl_path.has_value() && *apl_path == 4.0 / 3.0;

    NeighborGraph clique;
    clique.n = 5;
    clique.adjacency = {{1, 2, 3, 4}, {0, 2, 3, 4}, {0, 1, 3, 4}, {0, 1, 2, 4}, {0, 1, 2, 3}};
    const auto apl_clique = avg_path_length(clique, {0, 1, 2, 3, 4});
    const bool clique_ok = apl_clique.has_value() && *apl_clique == 1.0;

    NeighborGraph split;
    split.n = 4;
    split.adjacency = {{1}, {0}, {3}, {2}};
    const bool split_ok = !avg_path_length(split, {0, 2}).has_value();

    criterion(6, "path graph 4/3 exact, clique 1 exact, split components disconnected",
              path_ok && clique_ok && split_ok);
}

TEST_CASE("criterion 7: cli mine reproduces the planted semester pattern") {
    Stopwatch watch;
    const std::string dir = scratch_dir("criterion7");
    REQUIRE(run_cli("gen-data --n 2000 --seed 1 --out " + dir + "/data.csv", dir + "/gen.log") == 0);

    const int rc = run_cli("mine --in " + dir + "/data.csv --user u7 --objective \"semester performance\""
                           " --store " + dir + "/store.json --out-dir " + dir + "/run --k 9 --seed 1",
                           dir + "/mine.log");
    REQUIRE(rc == 0);

    const auto report = read_json(dir + "/run/report.json");
    const auto selected = report.at("selected_attributes").get<std::vector<std::string>>();
    const bool semester_selected =
        std::find(selected.begin(), selected.end(), "SEMESTER") != selected.end();

    // grouped bar over semester x pass percentage, summer strictly lowest
    bool grouped_ok = false;
    const auto plots = read_json(dir + "/run/plotspec.json");
    for (const auto& chart : plots.at("charts")) {
        if (chart.at("chart") != "grouped_bar") continue;
        if (chart.at("axes").size() < 2 || chart.at("axes")[1].at("name") != "PASS_PERCENTAGE") continue;
        const auto ticks = chart.at("axes")[0].at("ticks").get<std::vector<std::string>>();
        std::vector<double> sums(ticks.size(), 0.0), counts(ticks.size(), 0.0);
        for (const auto& series : chart.at("series")) {
            const auto bars = series.at("bars").get<std::vector<double>>();
            const auto bc = series.at("bar_counts").get<std::vector<double>>();
            for (std::size_t t = 0; t < ticks.size(); ++t) {
                sums[t] += bars[t] * bc[t];
                counts[t] += bc[t];
            }
        }
        auto mean_of = [&](const std::string& name) {
            const auto pos = static_cast<std::size_t>(
                std::find(ticks.begin(), ticks.end(), name) - ticks.begin());
            return counts[pos] > 0 ? sums[pos] / counts[pos] : 0.0;
        };
        if (std::find(ticks.begin(), ticks.end(), "summer") != ticks.end() &&
            mean_of("summer") < mean_of("spring") && mean_of("summer") < mean_of("fall")) {
            grouped_ok = true;
        }
    }

    // some good cluster averages above 90 in pass percentage
    const auto model = read_json(dir + "/run/model.json");
    const auto quality = read_json(dir + "/run/quality.json");
    const auto assignments = model.at("assignments").get<std::vector<std::size_t>>();
    const Dataset data = load_csv(dir + "/data.csv");
    const std::size_t pass_col = data.attribute_index("PASS_PERCENTAGE");
    const std::size_t k = model.at("spec").at("k").get<std::size_t>();
    std::vector<double> sums(k, 0.0), counts(k, 0.0);
    for (std::size_t r = 0; r < assignments.size(); ++r) {
        sums[assignments[r]] += cell_number(data.rows[r][pass_col]);
        counts[assignments[r]] += 1.0;
    }
    bool high_good_cluster = false;
    for (const auto& q : quality.at("per_cluster")) {
        const std::size_t id = q.at("cluster_id").get<std::size_t>();
        if (q.at("verdict") == "good" && counts[id] > 0 && sums[id] / counts[id] > 90.0) {
            high_good_cluster = true;
        }
    }

    const double elapsed = watch.seconds();
    criterion(7, "mine selects SEMESTER, grouped bar puts summer lowest, a good cluster averages >90 (" +
                     std::to_string(elapsed) + "s)",
              semester_selected && grouped_ok && high_good_cluster && elapsed < 30.0);
}

TEST_CASE("criterion 8: link chart keeps positive and drops negative pairs") {
    Rng rng(88);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform(0.0, 10.0);
        rows.push_back({x, x + rng.normal(0.0, 0.5), -x + rng.normal(0.0, 0.5)});
    }
    const Dataset ds = oracle::numeric_dataset(rows, {"base", "ally", "foe"});

    // sanity: the engineered correlations are as strong as intended
    std::vector<double> base_col, ally_col, foe_col;
    for (const auto& row : ds.rows) {
        base_col.push_back(cell_number(row[0]));
        ally_col.push_back(cell_number(row[1]));
        foe_col.push_back(cell_number(row[2]));
    }
    const double rho_pos = *automine::detail::pearson(base_col, ally_col);
    const double rho_neg = *automine::detail::pearson(base_col, foe_col);
    REQUIRE(rho_pos >= 0.9);
    REQUIRE(rho_neg <= -0.9);

    const auto spec = link_chart(ds, {"base", "ally", "foe"});
    bool positive_edge_thick = false;
    bool negative_edge_absent = true;
    for (const auto& e : spec.edges) {
        const bool base_ally = (e.a == "base" && e.b == "ally") || (e.a == "ally" && e.b == "base");
        const bool base_foe = (e.a == "base" && e.b == "foe") || (e.a == "foe" && e.b == "base");
        const bool ally_foe = (e.a == "ally" && e.b == "foe") || (e.a == "foe" && e.b == "ally");
        if (base_ally && e.thickness == "thick") positive_edge_thick = true;
        if (base_foe || ally_foe) negative_edge_absent = false;
    }
    criterion(8, "engineered positive pair kept as thick, negative pairs dropped",
              positive_edge_thick && negative_edge_absent);
}

TEST_CASE("criterion 9: session history feeds later runs") {
    const std::string dir = scratch_dir("criterion9");
    REQUIRE(run_cli("gen-data --n 400 --seed 1 --out " + dir + "/data.csv", dir + "/gen.log") == 0);

    const std::string common = " --in " + dir + "/data.csv --store " + dir + "/store.json --seed 1";
    REQUIRE(run_cli("mine" + common + " --user u9 --objective \"semester performance\" --out-dir " +
                        dir + "/run1", dir + "/mine1.log") == 0);
    const auto first = read_json(dir + "/run1/report.json");
    const auto first_selected = first.at("selected_attributes").get<std::vector<std::string>>();

    REQUIRE(run_cli("mine" + common + " --user u9 --objective \"semester performance\" --out-dir " +
                        dir + "/run2", dir + "/mine2.log") == 0);
    const auto second = read_json(dir + "/run2/report.json");
    bool own_pattern_first = false;
    if (!second.at("suggestions").empty()) {
        const auto attrs =
            second.at("suggestions")[0].at("selected_attributes").get<std::vector<std::string>>();
        own_pattern_first = attrs == first_selected;
    }

    REQUIRE(run_cli("mine" + common + " --user fresh --objective \"semester analysis\" --out-dir " +
                        dir + "/run3", dir + "/mine3.log") == 0);
    const auto third = read_json(dir + "/run3/report.json");
    bool inherited = false;
    for (const auto& s : third.at("suggestions")) {
        if (s.at("selected_attributes").get<std::vector<std::string>>() == first_selected) {
            inherited = true;
        }
    }

    criterion(9, "returning user sees their pattern at rank 1, a fresh user inherits it",
              own_pattern_first && inherited);
}

TEST_CASE("criterion 10: determinism and canonical control order") {
    const std::string dir = scratch_dir("criterion10");
    const std::string data = dir + "/data.csv";
    write_csv(generate_student_data(300, 5), data);

    PipelineConfig cfg;
    cfg.seed = 5;
    cfg.store_path = dir + "/storeA.json";
    cfg.out_dir = dir + "/outA";
    const SessionReport a = run_pipeline(cfg, "alice", "semester performance", data);
    cfg.store_path = dir + "/storeB.json";
    cfg.out_dir = dir + "/outB";
    const SessionReport b = run_pipeline(cfg, "alice", "semester performance", data);

    const bool bytes_equal =
        read_file(dir + "/outA/plotspec.json") == read_file(dir + "/outB/plotspec.json");
    const bool objectives_equal = a.model.objective == b.model.objective;

    const std::vector<std::tuple<AgentId, AgentId, MessageKind>> canonical = {
        {AgentId::UserInterface, AgentId::DataMining, MessageKind::TransferControl},
        {AgentId::DataMining, AgentId::Ranking, MessageKind::TransferControl},
        {AgentId::Ranking, AgentId::DataMining, MessageKind::Result},
        {AgentId::DataMining, AgentId::Visualization, MessageKind::TransferControl},
        {AgentId::Visualization, AgentId::UserInterface, MessageKind::Result},
    };
    bool trace_ok = a.messages.size() == canonical.size();
    for (std::size_t i = 0; trace_ok && i < canonical.size(); ++i) {
        trace_ok = a.messages[i].from == std::get<0>(canonical[i]) &&
                   a.messages[i].to == std::get<1>(canonical[i]) &&
                   a.messages[i].kind == std::get<2>(canonical[i]);
    }

    bool illegal_rejected = false;
    try {
        dispatch(MessageBus{}, {AgentId::Visualization, AgentId::Ranking, MessageKind::TransferControl, ""});
    } catch (const Error& e) {
        illegal_rejected = e.code() == ErrorCode::IllegalTransfer;
    }

    criterion(10, "byte-identical plotspec, equal objectives, canonical trace, illegal edges rejected",
              bytes_equal && objectives_equal && trace_ok && illegal_rejected);
}
