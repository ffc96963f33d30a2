#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shotbudget/qcore.hpp"

namespace shotbudget {

struct ExperimentRecord {
    std::string experiment;
    int n = 0;                  // qubit count (or polynomial degree)
    std::string decomposition;  // estimator label; "vn" marks the baseline
    std::uint64_t seed = 0;     // state index within the ensemble
    double value = 0.0;         // shot-variance M * Var, or a loss value
    double wall_time = 0.0;     // seconds spent on this record; not serialized
};

struct ScalingConfig {
    std::string operator_name = "sum_z";  // "sum_z" or "linear_z"
    std::vector<int> qubits;
    std::vector<std::string> decompositions;  // pauli | xi | gpsk | sgn
    int n_states = 100;
    int n_layers = 5;
    std::uint64_t seed = 1;
    long long prior_shots = 100000;
    double floor_fraction = 1e-4;
    int sgn_degree = 20;
    double sgn_delta = 0.0;
    double sgn_margin = 0.15;
};

ScalingConfig parse_scaling_config(const std::string& json_text);
ScalingConfig load_scaling_config(const std::string& path);

// Weight vector of the benchmark observable for a register size.
std::vector<double> operator_weights(const std::string& operator_name, int n_qubits);

// For each (N, state): one analytic Von Neumann baseline record plus one
// adaptive shot-variance record per requested decomposition. Trials run
// concurrently over states with independent substreams and are merged in
// config order.
std::vector<ExperimentRecord> run_scaling(const ScalingConfig& config);

enum class FitModel { power_law, exponential, exp_quadratic };

// power_law: y = A x^p, parameters {A, p}. exponential: y = A e^{m x},
// parameters {A, m}. exp_quadratic: y = e^{a x^2 + b x + c}, parameters
// {a, b, c}. All fits are least squares in log coordinates; residual is the
// rms log-space misfit.
struct FitResult {
    FitModel model = FitModel::power_law;
    std::vector<double> parameters;
    double residual = 0.0;
};

FitResult fit_series(const std::vector<double>& xs, const std::vector<double>& ys,
                     FitModel model);

// Columns: experiment,N,decomposition,seed,value. UTF-8, LF endings.
void emit_csv(const std::vector<ExperimentRecord>& records,
              const std::string& path);
std::vector<ExperimentRecord> read_csv(const std::string& path);

// Mean of the record values matching (experiment, n, decomposition).
double mean_value(const std::vector<ExperimentRecord>& records,
                  const std::string& experiment, int n,
                  const std::string& decomposition);

}  // namespace shotbudget
