#include <doctest.h>

#include "odcsim/config.hpp"
#include "odcsim/report.hpp"

using namespace odcsim;

TEST_CASE("defaults mirror the golden setting") {
    ExperimentConfig cfg;
    CHECK(cfg.minibatch_size == 4);
    CHECK(cfg.cluster.devices == 8);
    CHECK(cfg.packing_ratio == 1.0);
    CHECK(cfg.alpha == 1.0);
    CHECK(cfg.beta == 0.0);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config round-trips through its canonical json form") {
    ExperimentConfig cfg;
    cfg.strategy = Strategy::LbMini;
    cfg.scheme = Scheme::Odc;
    cfg.minibatch_size = 7;
    cfg.packing_ratio = 1.5;
    cfg.cluster.devices = 16;
    cfg.seed = 99;
    cfg.beta = 12.5;
    nlohmann::json canonical = config_to_json(config_from_json(config_to_json(cfg)));
    CHECK(canonical == config_to_json(cfg));
    CHECK(canonical.dump() == config_to_json(cfg).dump());
}

TEST_CASE("lb-mini under collectives is rejected at validation") {
    ExperimentConfig cfg;
    cfg.strategy = Strategy::LbMini;
    cfg.scheme = Scheme::Collective;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg.scheme = Scheme::Odc;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config field validation names the offender") {
    ExperimentConfig cfg;
    cfg.packing_ratio = 0.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("packing_ratio"), ParamError);
    cfg = ExperimentConfig{};
    cfg.minibatch_size = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("minibatch_size"), ParamError);
    cfg = ExperimentConfig{};
    cfg.sharding = ShardingMode::Hybrid;  // single node by default
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"strategy", "fifo"}}), ParamError);
}

TEST_CASE("sweep spec validation") {
    SweepSpec spec;
    spec.values = {1, 2, 4};
    CHECK_NOTHROW(spec.validate());
    spec.values = {4, 2};
    CHECK_THROWS_AS(spec.validate(), ParamError);
    spec.values = {};
    CHECK_THROWS_AS(spec.validate(), ParamError);
    spec.axis = SweepAxis::Devices;
    spec.values = {2.5};
    CHECK_THROWS_AS(spec.validate(), ParamError);
    CHECK(parse_sweep_axis("max-length-ratio") == SweepAxis::MaxLengthRatio);
    CHECK_THROWS_AS(parse_sweep_axis("nope"), ParamError);
}

TEST_CASE("empty result set emits a header-only csv") {
    ReportTable t;
    t.columns = {"a", "b"};
    CHECK(emit_report(t, ReportFormat::Csv) == "a,b\n");
}

TEST_CASE("single row round-trips through json") {
    ReportTable t;
    t.columns = {"strategy", "value"};
    t.rows = {{"lb-micro", "1.25"}};
    auto parsed = nlohmann::json::parse(emit_report(t, ReportFormat::Json));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0]["strategy"] == "lb-micro");
    CHECK(parsed[0]["value"] == "1.25");
}

TEST_CASE("markdown keeps the timing-table column order") {
    ExperimentConfig cfg;
    cfg.workload_spec = "uniform:lo=64,hi=64";
    cfg.workload_n = 32;
    auto table = experiment_table(run_experiment(cfg));
    CHECK(table.columns[0] == "strategy");
    CHECK(table.columns[1] == "scheme");
    CHECK(table.columns[2] == "minibs");
    auto md = emit_report(table, ReportFormat::Markdown);
    CHECK(md.rfind("| strategy | scheme | minibs |", 0) == 0);
    std::size_t header_cells = 0;
    for (char ch : md.substr(0, md.find('\n'))) header_cells += ch == '|';
    CHECK(header_cells == table.columns.size() + 1);
}

TEST_CASE("csv escapes embedded separators") {
    ReportTable t;
    t.columns = {"x"};
    t.rows = {{"a,b\"c"}};
    CHECK(emit_report(t, ReportFormat::Csv) == "x\n\"a,b\"\"c\"\n");
}

TEST_CASE("number formatting is shortest round-trip") {
    CHECK(format_number(1.25) == "1.25");
    CHECK(format_number(15.0) == "15");
    CHECK(std::stod(format_number(0.1)) == 0.1);
}
