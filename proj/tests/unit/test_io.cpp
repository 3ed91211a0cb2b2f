#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "revkin/io.hpp"

using namespace revkin;

TEST_CASE("configuration JSON round trip is lossless") {
    const Configuration config = test::demo_config();
    const std::string text = io::configuration_to_json(config);
    const Configuration back = io::configuration_from_json(text);
    REQUIRE(back.n_regions() == config.n_regions());
    for (int i = 0; i < config.n_regions(); ++i) {
        CHECK(back.regions()[i].id == config.regions()[i].id);
        CHECK(back.regions()[i].params.K1 == config.regions()[i].params.K1);
        CHECK(back.regions()[i].params.k2 == config.regions()[i].params.k2);
        CHECK(back.regions()[i].params.k3 == config.regions()[i].params.k3);
        CHECK(back.regions()[i].params.k4 == config.regions()[i].params.k4);
    }
    for (int j = 0; j < config.input().degree(); ++j) {
        CHECK(back.input().terms()[j].lambda == config.input().terms()[j].lambda);
        CHECK(back.input().terms()[j].mu == config.input().terms()[j].mu);
    }
}

TEST_CASE("configuration JSON rejects bad documents") {
    CHECK_THROWS_AS(io::configuration_from_json("not json"), ValidationError);
    CHECK_THROWS_AS(io::configuration_from_json("{}"), ValidationError);
    CHECK_THROWS_AS(io::configuration_from_json(
                        R"({"input": {"terms": [{"lambda": 1.0}]}, "regions": []})"),
                    ValidationError);
    // Duplicate region ids violate the configuration invariant.
    const std::string dup = R"({
      "input": {"terms": [{"lambda": 1.0, "mu": -0.5}]},
      "regions": [
        {"id": "a", "K1": 0.5, "k2": 0.4, "k3": 0.3, "k4": 0.1},
        {"id": "a", "K1": 0.6, "k2": 0.4, "k3": 0.3, "k4": 0.1}
      ]})";
    CHECK_THROWS_AS(io::configuration_from_json(dup), ValidationError);
}

TEST_CASE("tac table CSV round trip is exact") {
    const Configuration config = test::demo_config();
    const TacTable table = simulate_tacs(config, test::log_grid(0.25, 60.0, 16));
    const std::string text = io::tac_table_to_csv(table);
    const TacTable back = io::tac_table_from_csv(text);
    REQUIRE(back.curves.size() == table.curves.size());
    REQUIRE(back.time_grid.size() == table.time_grid.size());
    for (std::size_t l = 0; l < table.time_grid.size(); ++l) {
        CHECK(back.time_grid[l] == table.time_grid[l]);
    }
    for (std::size_t i = 0; i < table.curves.size(); ++i) {
        CHECK(back.curves[i].region_id == table.curves[i].region_id);
        for (std::size_t l = 0; l < table.time_grid.size(); ++l) {
            CHECK(back.curves[i].values[l] == table.curves[i].values[l]);
        }
    }
}

TEST_CASE("tac table CSV rejects malformed input") {
    CHECK_THROWS_AS(io::tac_table_from_csv("bad,header\n"), ValidationError);
    CHECK_THROWS_AS(io::tac_table_from_csv("region_id,time_min,value\nr1,1.0\n"),
                    ValidationError);
    CHECK_THROWS_AS(
        io::tac_table_from_csv("region_id,time_min,value\nr1,1.0,0.5\nr2,2.0,0.5\n"),
        ValidationError);
}

TEST_CASE("whole-blood CSV round trip") {
    const std::vector<WbSample> samples{{1.0, 3.25}, {5.0, 1.125}, {20.0, 0.25}};
    const auto back = io::wb_samples_from_csv(io::wb_samples_to_csv(samples));
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(back[i].time == samples[i].time);
        CHECK(back[i].value == samples[i].value);
    }
}

TEST_CASE("trajectory CSV carries ct = cf + cb") {
    Trajectory traj;
    traj.times = {0.0, 1.0};
    traj.cf = {0.0, 0.25};
    traj.cb = {0.0, 0.5};
    const std::string text = io::trajectory_to_csv(traj);
    CHECK(text.find("time_min,cf,cb,ct") == 0);
    CHECK(text.find("0.75") != std::string::npos);
}

TEST_CASE("exponential-polynomial sum JSON round trip") {
    const ExpPolySum sum = expand_configuration(test::demo_params(), test::demo_input());
    const ExpPolySum back = io::expsum_from_json(io::expsum_to_json(sum));
    REQUIRE(back.terms.size() == sum.terms.size());
    for (std::size_t i = 0; i < sum.terms.size(); ++i) {
        CHECK(back.terms[i].exponent == sum.terms[i].exponent);
        CHECK(back.terms[i].coeffs == sum.terms[i].coeffs);
    }
}

TEST_CASE("format_double survives a parse round trip") {
    for (double v : {1.0 / 3.0, 0.1, 1e-17, 123456.789, -2.5e-13}) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
}

TEST_CASE("report serialization has stable field order") {
    RichnessReport report;
    report.satisfied = true;
    report.distinct_k34_count = 7;
    report.distinct_alpha_count = 14;
    report.witnesses.push_back({"bullet", {"r1", "r2", "r3"}});
    const std::string text = io::richness_report_to_json(report);
    CHECK(text.find("\"satisfied\"") < text.find("\"distinct_k34_count\""));
    CHECK(text.find("\"distinct_k34_count\"") < text.find("\"distinct_alpha_count\""));
    CHECK(text.find("\"witnesses\"") < text.find("\"violations\""));
}

TEST_CASE("atomic text writes land complete") {
    const auto dir = std::filesystem::temp_directory_path() / "revkin_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "x.txt";
    io::write_text_atomic("hello\n", path);
    CHECK(io::read_text(path) == "hello\n");
    io::write_text_atomic("replaced\n", path);
    CHECK(io::read_text(path) == "replaced\n");
    std::filesystem::remove_all(dir);
}
