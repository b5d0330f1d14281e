// Drives the installed binary through every subcommand and checks the
// artifact contract and exit codes.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "automine/dataset.hpp"

using namespace automine;
namespace fs = std::filesystem;

namespace {

std::string scratch_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / "automine_cli_tests" / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

int run_cli(const std::string& args, const std::string& log) {
    const std::string cmd = std::string(AUTOMINE_CLI_PATH) + " " + args + " >" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

}  // namespace

TEST_CASE("gen-data then ingest with imputation") {
    const std::string dir = scratch_dir("ingest");
    REQUIRE(run_cli("gen-data --n 120 --seed 6 --out " + dir + "/data.csv", dir + "/a.log") == 0);

    REQUIRE(run_cli("ingest --in " + dir + "/data.csv --policy impute --out " + dir + "/clean.csv",
                    dir + "/b.log") == 0);
    const std::string table = read_file(dir + "/b.log");
    CHECK(table.find("SEMESTER") != std::string::npos);
    CHECK(table.find("120 rows") != std::string::npos);

    const Dataset clean = load_csv(dir + "/clean.csv");
    CHECK(clean.n() == 120);
    for (const auto& meta : clean.attributes) CHECK(meta.missing_ratio == 0.0);
}

TEST_CASE("rank cluster detect viz chain produces versioned artifacts") {
    const std::string dir = scratch_dir("chain");
    REQUIRE(run_cli("gen-data --n 300 --seed 2 --out " + dir + "/data.csv", dir + "/gen.log") == 0);

    REQUIRE(run_cli("rank --in " + dir + "/data.csv --objective \"semester percentage\" --top 3"
                    " --out-dir " + dir, dir + "/rank.log") == 0);
    const auto ranks = read_json(dir + "/ranks.json");
    CHECK(ranks.at("version") == 1);
    const auto selected = ranks.at("selected").get<std::vector<std::string>>();
    CHECK(std::find(selected.begin(), selected.end(), "SEMESTER") != selected.end());

    REQUIRE(run_cli("cluster --in " + dir + "/data.csv --attrs SEMESTER,PASS_PERCENTAGE"
                    " --algorithm auto --k 3 --seed 2 --out-dir " + dir, dir + "/cluster.log") == 0);
    const auto model = read_json(dir + "/model.json");
    CHECK(model.at("version") == 1);
    CHECK(model.at("spec").at("algorithm") == "kprototypes");  // mixed kinds resolve automatically
    CHECK(model.at("assignments").size() == 300);

    REQUIRE(run_cli("detect --model " + dir + "/model.json --in " + dir + "/data.csv --out-dir " + dir,
                    dir + "/detect.log") == 0);
    const auto quality = read_json(dir + "/quality.json");
    CHECK(quality.at("version") == 1);
    CHECK(quality.at("per_cluster").size() == 3);

    REQUIRE(run_cli("viz --model " + dir + "/model.json --quality " + dir + "/quality.json --in " +
                    dir + "/data.csv --out-dir " + dir, dir + "/viz.log") == 0);
    CHECK(fs::exists(dir + "/plotspec.json"));
    CHECK(fs::exists(dir + "/chart_1d.svg"));
    CHECK(fs::exists(dir + "/chart_2d.svg"));
    CHECK(fs::exists(dir + "/link_chart.svg"));
    const auto plots = read_json(dir + "/plotspec.json");
    CHECK(plots.at("version") == 1);
    CHECK(plots.at("charts").size() == 3);  // 1d, 2d, link
}

TEST_CASE("exit codes separate usage, data and stage failures") {
    const std::string dir = scratch_dir("exitcodes");

    // unknown flag -> usage error
    CHECK(run_cli("rank --bogus", dir + "/usage.log") == 2);

    // unreadable data -> data error
    CHECK(run_cli("ingest --in " + dir + "/missing.csv", dir + "/data.log") == 3);

    // type-incompatible forced algorithm -> stage failure, stage named
    {
        std::ofstream out(dir + "/cats.csv");
        out << "tag,grade\n";
        for (int i = 0; i < 25; ++i) out << (i % 2 ? "a" : "b") << "," << (i % 3 ? "x" : "y") << "\n";
    }
    CHECK(run_cli("mine --in " + dir + "/cats.csv --user u --objective \"grades by tag\""
                  " --algorithm kmeans --k 2 --store " + dir + "/store.json --out-dir " + dir + "/out",
                  dir + "/stage.log") == 4);
    const std::string log = read_file(dir + "/stage.log");
    CHECK(log.find("cluster_formation") != std::string::npos);
    CHECK(log.find("NonNumericAttribute") != std::string::npos);
}

TEST_CASE("config files steer the pipeline and reject junk") {
    const std::string dir = scratch_dir("config");
    REQUIRE(run_cli("gen-data --n 100 --seed 8 --out " + dir + "/data.csv", dir + "/gen.log") == 0);
    {
        std::ofstream out(dir + "/mine.conf");
        out << "# two attributes only\n"
            << "[ranking]\n"
            << "m = 2\n"
            << "[detection]\n"
            << "min_size_abs = 2\n";
    }
    REQUIRE(run_cli("mine --in " + dir + "/data.csv --user cfg --objective \"semester performance\""
                    " --store " + dir + "/store.json --out-dir " + dir + "/out --k 2 --config " +
                    dir + "/mine.conf", dir + "/mine.log") == 0);
    const auto report = read_json(dir + "/out/report.json");
    CHECK(report.at("selected_attributes").size() == 2);

    {
        std::ofstream out(dir + "/bad.conf");
        out << "no_such_key = 1\n";
    }
    CHECK(run_cli("mine --in " + dir + "/data.csv --user cfg --objective x --store " + dir +
                  "/store.json --out-dir " + dir + "/out2 --config " + dir + "/bad.conf",
                  dir + "/bad.log") == 2);
}

TEST_CASE("profile show lists committed sessions") {
    const std::string dir = scratch_dir("profile");
    REQUIRE(run_cli("gen-data --n 80 --seed 4 --out " + dir + "/data.csv", dir + "/gen.log") == 0);
    REQUIRE(run_cli("mine --in " + dir + "/data.csv --user showme --objective \"marks by year\""
                    " --store " + dir + "/store.json --out-dir " + dir + "/out --k 2",
                    dir + "/mine.log") == 0);
    REQUIRE(run_cli("profile show --user showme --store " + dir + "/store.json",
                    dir + "/show.log") == 0);
    const std::string shown = read_file(dir + "/show.log");
    CHECK(shown.find("marks by year") != std::string::npos);
    CHECK(shown.find("k=2") != std::string::npos);

    REQUIRE(run_cli("profile show --user nobody --store " + dir + "/store.json",
                    dir + "/none.log") == 0);
    CHECK(read_file(dir + "/none.log").find("no sessions") != std::string::npos);
}
