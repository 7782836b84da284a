#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "robustmct/csv.hpp"

using namespace robustmct;

namespace {

CsvTable parse(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in, "<test>");
}

const std::string kBasic =
    "dose,creatinine,alt\n"
    "100,1.2,30\n"
    "0,0.9,25\n"
    "0,1.0,28\n"
    "100,1.4,31\n"
    "50,1.1,27\n"
    "50,1.0,26\n"
    "0,0.8,24\n"
    "100,1.3,33\n"
    "50,1.2,29\n";

} // namespace

TEST_CASE("header and fields are parsed with whitespace trimmed") {
    const CsvTable t = parse(" a , b \n 1 , x y \n2,z\n");
    REQUIRE(t.columns.size() == 2);
    CHECK(t.columns[0] == "a");
    CHECK(t.columns[1] == "b");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x y");
    CHECK(t.column_index("b") == 1);
    CHECK(t.column_index("missing") == -1);
}

TEST_CASE("ragged rows are reported with their line number") {
    try {
        parse("a,b\n1,2\n3\n");
        FAIL("expected a parse error");
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":3:") != std::string::npos);
    }
}

TEST_CASE("empty input and missing header are rejected") {
    CHECK_THROWS_AS(parse(""), invalid_design_error);
}

TEST_CASE("groups come out control first, then ascending dose") {
    const CsvTable t = parse(kBasic);
    IngestConfig cfg;
    cfg.group_column = "dose";
    cfg.control_label = "0";
    const auto samples = ingest_samples(t, cfg, {"creatinine", "alt"});
    REQUIRE(samples.size() == 2);
    const GroupedSample& cr = samples[0];
    REQUIRE(cr.num_groups() == 3);
    CHECK(cr.group(0).label == "0");
    CHECK(cr.group(1).label == "50");
    CHECK(cr.group(2).label == "100");
    CHECK(cr.n(0) == 3);
    CHECK(cr.n(1) == 3);
    CHECK(cr.n(2) == 3);
    // values land in the right groups
    CHECK(cr.group(0).responses.sum() == doctest::Approx(0.9 + 1.0 + 0.8));
    CHECK(samples[1].group(2).responses.sum() == doctest::Approx(30 + 31 + 33));
}

TEST_CASE("unknown columns and control labels are diagnosed") {
    const CsvTable t = parse(kBasic);
    IngestConfig cfg;
    cfg.group_column = "dose";
    cfg.control_label = "0";
    CHECK_THROWS_AS(ingest_samples(t, cfg, {"nope"}), invalid_design_error);
    cfg.group_column = "nope";
    CHECK_THROWS_AS(ingest_samples(t, cfg, {"creatinine"}), invalid_design_error);
    cfg.group_column = "dose";
    cfg.control_label = "999";
    CHECK_THROWS_AS(ingest_samples(t, cfg, {"creatinine"}), invalid_design_error);
}

TEST_CASE("unparseable values are reported with line numbers unless dropped") {
    const std::string text =
        "dose,y\n"
        "0,1.0\n0,2.0\n0,1.5\n"
        "1,2.0\n1,oops\n1,2.5\n1,2.2\n";
    const CsvTable t = parse(text);
    IngestConfig cfg;
    cfg.group_column = "dose";
    cfg.control_label = "0";
    try {
        ingest_samples(t, cfg, {"y"});
        FAIL("expected a diagnostic");
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 6") != std::string::npos);
        CHECK(msg.find("y") != std::string::npos);
    }
    cfg.drop_missing = true;
    const auto samples = ingest_samples(t, cfg, {"y"});
    CHECK(samples[0].n(0) == 3);
    CHECK(samples[0].n(1) == 3);  // the bad row is dropped
}

TEST_CASE("groups with fewer than two observations are rejected") {
    const std::string text = "dose,y\n0,1\n0,2\n1,3\n";
    const CsvTable t = parse(text);
    IngestConfig cfg;
    cfg.group_column = "dose";
    cfg.control_label = "0";
    CHECK_THROWS_AS(ingest_samples(t, cfg, {"y"}), invalid_design_error);
}

TEST_CASE("non-numeric group labels fall back to label order") {
    const std::string text =
        "arm,y\n"
        "placebo,1\nplacebo,2\n"
        "high,5\nhigh,6\n"
        "low,3\nlow,4\n";
    const CsvTable t = parse(text);
    IngestConfig cfg;
    cfg.group_column = "arm";
    cfg.control_label = "placebo";
    const auto samples = ingest_samples(t, cfg, {"y"});
    REQUIRE(samples[0].num_groups() == 3);
    CHECK(samples[0].group(0).label == "placebo");
    // remaining arms are ordered by label
    CHECK(samples[0].group(1).label == "high");
    CHECK(samples[0].group(2).label == "low");
}

TEST_CASE("file round trip") {
    const std::string path = "/tmp/robustmct_csv_roundtrip.csv";
    {
        std::ofstream out(path);
        out << kBasic;
    }
    const CsvTable t = read_csv(path);
    CHECK(t.rows.size() == 9);
    CHECK_THROWS_AS(read_csv("/tmp/definitely-missing-robustmct.csv"), invalid_design_error);
}
