#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "shotbudget/bench.hpp"
#include "shotbudget/errors.hpp"

using namespace shotbudget;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

ScalingConfig small_config() {
    ScalingConfig config;
    config.operator_name = "sum_z";
    config.qubits = {4, 5, 6};
    config.decompositions = {"pauli", "xi"};
    config.n_states = 10;
    config.n_layers = 5;
    config.seed = 77;
    config.prior_shots = 20000;
    return config;
}

}  // namespace

TEST_CASE("benchmark operator weight vectors") {
    CHECK(operator_weights("sum_z", 3) == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(operator_weights("linear_z", 4) ==
          std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(operator_weights("sum_x", 3), ConfigError);
}

TEST_CASE("scaling config parsing") {
    const ScalingConfig config = parse_scaling_config(R"({
        "operator": "sum_z",
        "qubits": [4, 5],
        "decompositions": ["pauli", "xi"],
        "n_states": 7,
        "layers": 3,
        "seed": 99,
        "prior_shots": 50000
    })");
    CHECK(config.qubits == std::vector<int>{4, 5});
    CHECK(config.n_states == 7);
    CHECK(config.n_layers == 3);
    CHECK(config.seed == 99);
    CHECK(config.prior_shots == 50000);
    CHECK(config.sgn_degree == 20);
    CHECK(config.sgn_delta == 0.0);
    CHECK(config.sgn_margin == 0.15);
    CHECK(parse_scaling_config(R"({
        "qubits": [4], "decompositions": ["sgn"],
        "sgn_degree": 8, "sgn_delta": 0.1, "sgn_margin": 0.2
    })").sgn_margin == 0.2);

    CHECK_THROWS_AS(parse_scaling_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_scaling_config(R"({"qubits": [4], "decompositions": ["xi"], "typo_key": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scaling_config(R"({"qubits": "four", "decompositions": ["xi"]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scaling_config(R"({"qubits": [1], "decompositions": ["xi"]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scaling_config(R"({"qubits": [4], "decompositions": ["fft"]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scaling_config(R"({"qubits": [4], "decompositions": ["xi", "xi"]})"),
                    ConfigError);
}

TEST_CASE("scaling run structure, ordering and reproducibility") {
    const ScalingConfig config = small_config();
    const std::vector<ExperimentRecord> records = run_scaling(config);
    REQUIRE(records.size() == 90);  // 3 N * 10 states * (baseline + 2)

    for (std::size_t i = 0; i < records.size(); i += 3) {
        CHECK(records[i].decomposition == "vn");
        CHECK(records[i + 1].decomposition == "pauli");
        CHECK(records[i + 2].decomposition == "xi");
        CHECK(records[i].n == records[i + 1].n);
        CHECK(records[i].seed == records[i + 2].seed);
        // The baseline never exceeds an analytic decomposition's value.
        CHECK(records[i + 1].value >= records[i].value - 1e-9);
        CHECK(records[i + 2].value >= records[i].value - 1e-9);
    }
    for (const ExperimentRecord& r : records) {
        CHECK(r.value >= 0.0);
        CHECK(r.wall_time >= 0.0);
        CHECK(r.experiment == "scaling");
    }
    for (int n : config.qubits) {
        CHECK(mean_value(records, "scaling", n, "xi") <=
              mean_value(records, "scaling", n, "pauli"));
    }

    const std::vector<ExperimentRecord> replay = run_scaling(config);
    REQUIRE(replay.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(replay[i].value == records[i].value);
        CHECK(replay[i].seed == records[i].seed);
    }
}

TEST_CASE("power-law, exponential and quadratic-exponent fits") {
    std::vector<double> xs{1, 2, 3, 4, 5, 6};
    std::vector<double> power_ys, exp_ys, quad_ys;
    for (double x : xs) {
        power_ys.push_back(3.0 * x * x);
        exp_ys.push_back(std::exp(0.5 * x));
        quad_ys.push_back(std::exp(0.1 * x * x + 0.2 * x + 0.3));
    }

    const FitResult power = fit_series(xs, power_ys, FitModel::power_law);
    CHECK(power.parameters[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(power.parameters[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(power.residual < 1e-12);

    const FitResult expo = fit_series(xs, exp_ys, FitModel::exponential);
    CHECK(expo.parameters[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(expo.parameters[1] == doctest::Approx(0.5).epsilon(1e-9));

    const FitResult quad = fit_series(xs, quad_ys, FitModel::exp_quadratic);
    CHECK(quad.parameters[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(quad.parameters[1] == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(quad.parameters[2] == doctest::Approx(0.3).epsilon(1e-9));

    CHECK_THROWS_AS(fit_series({1, 2, 3}, {1, 2, 3}, FitModel::power_law),
                    ConfigError);
    CHECK_THROWS_AS(fit_series(xs, {1, 2, 3, 4, 5, 0}, FitModel::power_law),
                    ConfigError);
    CHECK_THROWS_AS(fit_series({0, 1, 2, 3}, {1, 1, 1, 1}, FitModel::power_law),
                    ConfigError);
}

TEST_CASE("CSV emission and read-back") {
    const std::string path = temp_path("shotbudget_bench_test.csv");

    emit_csv({}, path);
    CHECK(slurp(path) == "experiment,N,decomposition,seed,value\n");

    std::vector<ExperimentRecord> records{
        {"scaling", 4, "xi", 0, 1.25, 0.0},
        {"scaling", 4, "vn", 0, 0.5, 0.0},
        {"qsp-loss", 7, "qsp", 1, 0.123456789012345, 0.0}};
    emit_csv(records, path);
    const std::string bytes = slurp(path);
    emit_csv(records, path);
    CHECK(slurp(path) == bytes);
    CHECK(bytes.find("\r") == std::string::npos);

    const std::vector<ExperimentRecord> loaded = read_csv(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].experiment == records[i].experiment);
        CHECK(loaded[i].n == records[i].n);
        CHECK(loaded[i].decomposition == records[i].decomposition);
        CHECK(loaded[i].seed == records[i].seed);
        CHECK(loaded[i].value == records[i].value);
    }
    std::filesystem::remove(path);

    CHECK_THROWS_AS(emit_csv({}, "/nonexistent-dir/x.csv"), ConfigError);
    CHECK_THROWS_AS(read_csv("/nonexistent-dir/x.csv"), ConfigError);
}

TEST_CASE("grouped means over records") {
    const std::vector<ExperimentRecord> records{
        {"scaling", 4, "xi", 0, 1.0, 0.0},
        {"scaling", 4, "xi", 1, 3.0, 0.0},
        {"scaling", 5, "xi", 0, 10.0, 0.0}};
    CHECK(mean_value(records, "scaling", 4, "xi") == doctest::Approx(2.0));
    CHECK(mean_value(records, "scaling", 5, "xi") == doctest::Approx(10.0));
    CHECK_THROWS_AS(mean_value(records, "scaling", 6, "xi"), ConfigError);
}
