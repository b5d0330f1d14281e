#include <catch2/catch_amalgamated.hpp>

#include "automine/ranking.hpp"
#include "oracles.hpp"

using namespace automine;

namespace {

SessionRecord history_entry(std::vector<std::string> attrs) {
    SessionRecord rec;
    rec.user_id = "u";
    rec.selected_attributes = std::move(attrs);
    return rec;
}

}  // namespace

TEST_CASE("score_attribute zeroes constant columns") {
    const Dataset ds = oracle::numeric_dataset({{5.0}, {5.0}, {5.0}});
    CHECK(score_attribute(ds.attributes[0], ds.n()) == 0.0);
}

TEST_CASE("score_attribute shrinks with missing cells") {
    AttributeMeta meta;
    meta.name = "grade";
    meta.kind = AttributeKind::Categorical;
    meta.cardinality = 3;
    meta.categories = {"a", "b", "c"};
    meta.category_counts = {300, 400, 300};
    meta.missing_ratio = 0.0;
    const double complete = score_attribute(meta, 1000);
    meta.missing_ratio = 0.5;
    const double holed = score_attribute(meta, 1000);
    CHECK(complete > holed);
    CHECK(holed == Catch::Approx(complete * 0.5));
    CHECK(complete <= 0.8);
}

TEST_CASE("identifier-like columns are clamped on generated data") {
    const Dataset ds = generate_student_data(400, 5);
    for (const char* name : {"REG_NO", "NAME", "EMAIL_ID", "TEL_PHONE"}) {
        const auto& meta = ds.attributes[ds.attribute_index(name)];
        CHECK(meta.cardinality >= static_cast<std::size_t>(0.9 * 400));
        CHECK(score_attribute(meta, ds.n()) <= 0.1);
    }
}

TEST_CASE("query_weight name match with empty history") {
    CHECK(query_weight("SEMESTER", tokenize("semester performance"), {}) == Catch::Approx(0.5));
}

TEST_CASE("query_weight usage fraction without name match") {
    const std::vector<SessionRecord> history = {
        history_entry({"YEAR"}), history_entry({"YEAR", "PLACE"}),
        history_entry({"PLACE"}), history_entry({"COUNTRY"})};
    CHECK(query_weight("YEAR", tokenize("unrelated objective"), history) == Catch::Approx(0.25));
}

TEST_CASE("query_weight maxes out with match and full usage") {
    const std::vector<SessionRecord> history = {
        history_entry({"SEMESTER"}), history_entry({"SEMESTER"}), history_entry({"SEMESTER"})};
    CHECK(query_weight("SEMESTER", tokenize("semester analysis"), history) == Catch::Approx(1.0));
}

TEST_CASE("rank_attributes with m equal to the attribute count") {
    const Dataset ds = oracle::numeric_dataset({{1.0, 10.0}, {2.0, 30.0}, {3.0, 15.0}});
    const auto ranked = rank_attributes(ds, tokenize("anything"), {}, 2);
    CHECK(ranked.selected.size() == 2);
    CHECK(ranked.ranks.size() == 2);
    CHECK(ranked.ranks[0].rank == 1);
    CHECK(ranked.ranks[1].rank == 2);
}

TEST_CASE("student data objective picks semester and pass percentage") {
    const Dataset ds = generate_student_data(2000, 1);
    const auto ranked = rank_attributes(ds, tokenize("semester percentage"), {}, 3);
    const auto& sel = ranked.selected;
    CHECK(std::find(sel.begin(), sel.end(), "SEMESTER") != sel.end());
    CHECK(std::find(sel.begin(), sel.end(), "PASS_PERCENTAGE") != sel.end());
    CHECK(ranked.ranks[0].name == "SEMESTER");
}

TEST_CASE("ties break toward the earlier column") {
    const Dataset ds = oracle::numeric_dataset({{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}},
                                               {"left", "right"});
    const auto ranked = rank_attributes(ds, {}, {}, 2);
    CHECK(ranked.ranks[0].combined == Catch::Approx(ranked.ranks[1].combined));
    CHECK(ranked.ranks[0].name == "left");
}

TEST_CASE("rank positions are a permutation") {
    const Dataset ds = generate_student_data(200, 2);
    const auto ranked = rank_attributes(ds, tokenize("semester performance"), {}, 5);
    std::vector<bool> seen(ranked.ranks.size(), false);
    for (const auto& r : ranked.ranks) {
        REQUIRE(r.rank >= 1);
        REQUIRE(r.rank <= ranked.ranks.size());
        CHECK(!seen[r.rank - 1]);
        seen[r.rank - 1] = true;
    }
    for (std::size_t i = 0; i < ranked.selected.size(); ++i) {
        CHECK(ranked.selected[i] == ranked.ranks[i].name);
    }
}

TEST_CASE("type score is invariant to positive rescaling") {
    const Dataset base = oracle::numeric_dataset({{1.0}, {2.0}, {4.0}, {9.0}});
    Dataset scaled = base;
    for (auto& row : scaled.rows) row[0] = number_cell(cell_number(row[0]) * 1000.0);
    refresh_metadata(scaled);
    CHECK(score_attribute(scaled.attributes[0], scaled.n()) ==
          Catch::Approx(score_attribute(base.attributes[0], base.n())).margin(1e-12));
}

TEST_CASE("usage history never lowers a rank") {
    const Dataset ds = generate_student_data(300, 4);
    const auto tokens = tokenize("student analysis");
    const auto without = rank_attributes(ds, tokens, {}, 3);
    const std::vector<SessionRecord> history = {history_entry({"AVG_TOT"}),
                                                history_entry({"AVG_TOT"})};
    const auto with = rank_attributes(ds, tokens, history, 3);
    auto position = [](const RankedAttributes& r, const std::string& name) {
        for (const auto& entry : r.ranks) {
            if (entry.name == name) return entry.rank;
        }
        return std::size_t{0};
    };
    CHECK(position(with, "AVG_TOT") <= position(without, "AVG_TOT"));
}

TEST_CASE("identifier columns never reach a small selection") {
    const Dataset ds = generate_student_data(500, 6);
    for (const char* objective : {"semester performance", "semester percentage", "marks by year"}) {
        const auto ranked = rank_attributes(ds, tokenize(objective), {}, 3);
        for (const auto& name : ranked.selected) {
            const auto& meta = ds.attributes[ds.attribute_index(name)];
            if (meta.kind == AttributeKind::Categorical) {
                CHECK(meta.cardinality < static_cast<std::size_t>(0.9 * 500));
            }
        }
    }
}

TEST_CASE("rank_attributes validates m and weights") {
    const Dataset ds = oracle::numeric_dataset({{1.0}, {2.0}});
    CHECK_THROWS_AS(rank_attributes(ds, {}, {}, 0), Error);
    CHECK_THROWS_AS(rank_attributes(ds, {}, {}, 2), Error);
    CHECK_THROWS_AS(rank_attributes(ds, {}, {}, 1, {0.7, 0.4}), Error);
    CHECK_THROWS_AS(rank_attributes(ds, {}, {}, 1, {-0.1, 1.1}), Error);
}
