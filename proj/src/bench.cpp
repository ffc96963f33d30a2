#include "shotbudget/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "shotbudget/alloc.hpp"
#include "shotbudget/ansatz.hpp"
#include "shotbudget/decomp.hpp"
#include "shotbudget/errors.hpp"
#include "shotbudget/qsp.hpp"
#include "shotbudget/rng.hpp"

namespace shotbudget {

namespace {

const std::vector<std::string> kKnownKeys{
    "operator", "qubits", "decompositions", "n_states", "layers",
    "seed", "prior_shots", "floor_fraction", "sgn_degree", "sgn_delta",
    "sgn_margin"};

const std::vector<std::string> kDecompositionLabels{"pauli", "xi", "gpsk", "sgn"};

void check_config(const ScalingConfig& config) {
    operator_weights(config.operator_name, 2);
    if (config.qubits.empty()) throw ConfigError("qubits list is empty");
    for (int n : config.qubits) {
        if (n < 2 || n > 13) {
            throw ConfigError("qubit counts must lie in [2, 13]");
        }
    }
    if (config.decompositions.empty()) {
        throw ConfigError("decompositions list is empty");
    }
    for (std::size_t i = 0; i < config.decompositions.size(); ++i) {
        const std::string& label = config.decompositions[i];
        if (std::find(kDecompositionLabels.begin(), kDecompositionLabels.end(),
                      label) == kDecompositionLabels.end()) {
            throw ConfigError("unknown decomposition label: " + label);
        }
        for (std::size_t j = i + 1; j < config.decompositions.size(); ++j) {
            if (config.decompositions[j] == label) {
                throw ConfigError("duplicate decomposition label: " + label);
            }
        }
    }
    if (config.n_states < 1) throw ConfigError("n_states must be positive");
    if (config.n_layers < 1) throw ConfigError("layers must be positive");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> solve_normal_equations(std::vector<std::vector<double>> a,
                                           std::vector<double> b) {
    const std::size_t k = b.size();
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < k; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-12) {
            throw InvariantError("fit design matrix is degenerate");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < k; ++row) {
            const double f = a[row][col] / a[col][col];
            for (std::size_t c = col; c < k; ++c) a[row][c] -= f * a[col][c];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(k, 0.0);
    for (std::size_t row = k; row-- > 0;) {
        double s = b[row];
        for (std::size_t c = row + 1; c < k; ++c) s -= a[row][c] * x[c];
        x[row] = s / a[row][row];
    }
    return x;
}

}  // namespace

std::vector<double> operator_weights(const std::string& operator_name,
                                     int n_qubits) {
    std::vector<double> weights(static_cast<std::size_t>(n_qubits), 1.0);
    if (operator_name == "sum_z") return weights;
    if (operator_name == "linear_z") {
        for (int j = 0; j < n_qubits; ++j) {
            weights[static_cast<std::size_t>(j)] = static_cast<double>(j + 1);
        }
        return weights;
    }
    throw ConfigError("unknown operator: " + operator_name);
}

ScalingConfig parse_scaling_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    for (const auto& item : doc.items()) {
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), item.key()) ==
            kKnownKeys.end()) {
            throw ConfigError("unknown config key: " + item.key());
        }
    }
    ScalingConfig config;
    try {
        if (doc.contains("operator")) config.operator_name = doc["operator"];
        if (doc.contains("qubits")) {
            config.qubits = doc["qubits"].get<std::vector<int>>();
        }
        if (doc.contains("decompositions")) {
            config.decompositions =
                doc["decompositions"].get<std::vector<std::string>>();
        }
        if (doc.contains("n_states")) config.n_states = doc["n_states"];
        if (doc.contains("layers")) config.n_layers = doc["layers"];
        if (doc.contains("seed")) config.seed = doc["seed"];
        if (doc.contains("prior_shots")) config.prior_shots = doc["prior_shots"];
        if (doc.contains("floor_fraction")) {
            config.floor_fraction = doc["floor_fraction"];
        }
        if (doc.contains("sgn_degree")) config.sgn_degree = doc["sgn_degree"];
        if (doc.contains("sgn_delta")) config.sgn_delta = doc["sgn_delta"];
        if (doc.contains("sgn_margin")) config.sgn_margin = doc["sgn_margin"];
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config value has the wrong type: ") +
                          e.what());
    }
    check_config(config);
    return config;
}

ScalingConfig load_scaling_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scaling_config(buffer.str());
}

std::vector<ExperimentRecord> run_scaling(const ScalingConfig& config) {
    check_config(config);

    const bool wants_sgn =
        std::find(config.decompositions.begin(), config.decompositions.end(),
                  "sgn") != config.decompositions.end();
    SignApproximation sgn_profile;
    if (wants_sgn) {
        sgn_profile = optimize_phases(config.sgn_degree, config.sgn_delta,
                                      derive_seed(config.seed, 0x51471));
    }

    const std::size_t per_state = 1 + config.decompositions.size();
    std::vector<ExperimentRecord> records(config.qubits.size() *
                                          static_cast<std::size_t>(config.n_states) *
                                          per_state);

    std::size_t block_start = 0;
    for (int n : config.qubits) {
        const std::vector<double> weights =
            operator_weights(config.operator_name, n);
        const HermitianOperator op = weighted_z(weights);
        double weight_sum = 0.0;
        for (double w : weights) weight_sum += w;

        std::vector<Decomposition> decomps;
        for (const std::string& label : config.decompositions) {
            if (label == "pauli") {
                decomps.push_back(pauli_decomposition(weights));
            } else if (label == "xi") {
                decomps.push_back(xi_decomposition(op));
            } else if (label == "gpsk") {
                decomps.push_back(gpsk_decomposition(
                    op, static_cast<int>(std::llround(weight_sum))));
            } else {
                decomps.push_back(
                    sgn_decomposition(op, sgn_profile, config.sgn_margin));
            }
        }

        std::atomic<int> next{0};
        std::mutex failure_lock;
        std::exception_ptr failure;
        auto work_loop = [&]() {
            for (int k = next.fetch_add(1); k < config.n_states;
                 k = next.fetch_add(1)) {
                const QuantumState psi = random_he_state(
                    {n, config.n_layers,
                     derive_seed(config.seed, static_cast<std::uint64_t>(n),
                                 static_cast<std::uint64_t>(k))});
                const std::size_t slot =
                    block_start + static_cast<std::size_t>(k) * per_state;

                auto t0 = std::chrono::steady_clock::now();
                records[slot] = ExperimentRecord{
                    "scaling", n, "vn", static_cast<std::uint64_t>(k),
                    von_neumann_variance(op, psi), seconds_since(t0)};

                for (std::size_t i = 0; i < decomps.size(); ++i) {
                    t0 = std::chrono::steady_clock::now();
                    const double value =
                        adaptive_shot_variance(
                            decomps[i], psi, config.prior_shots,
                            derive_seed(config.seed,
                                        (static_cast<std::uint64_t>(n) << 8) |
                                            (i + 1),
                                        static_cast<std::uint64_t>(k)))
                            .shot_variance;
                    records[slot + 1 + i] = ExperimentRecord{
                        "scaling", n, config.decompositions[i],
                        static_cast<std::uint64_t>(k), value, seconds_since(t0)};
                }
            }
        };
        auto worker = [&]() {
            try {
                work_loop();
            } catch (...) {
                const std::lock_guard<std::mutex> hold(failure_lock);
                if (!failure) failure = std::current_exception();
            }
        };

        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        const unsigned n_threads = std::min<unsigned>(
            hw, static_cast<unsigned>(config.n_states));
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);

        block_start += static_cast<std::size_t>(config.n_states) * per_state;
    }
    return records;
}

FitResult fit_series(const std::vector<double>& xs, const std::vector<double>& ys,
                     FitModel model) {
    if (xs.size() != ys.size()) throw ConfigError("x/y length mismatch");
    std::vector<double> distinct = xs;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 4) {
        throw ConfigError("fits need at least 4 distinct x values");
    }
    for (double y : ys) {
        if (!(y > 0.0)) throw ConfigError("fit values must be positive");
    }

    std::vector<std::vector<double>> design;
    std::vector<double> target;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        std::vector<double> row;
        switch (model) {
            case FitModel::power_law:
                if (!(x > 0.0)) {
                    throw ConfigError("power-law fits need positive x");
                }
                row = {1.0, std::log(x)};
                break;
            case FitModel::exponential:
                row = {1.0, x};
                break;
            case FitModel::exp_quadratic:
                row = {x * x, x, 1.0};
                break;
        }
        design.push_back(std::move(row));
        target.push_back(std::log(ys[i]));
    }

    const std::size_t k = design.front().size();
    std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
    std::vector<double> atb(k, 0.0);
    for (std::size_t i = 0; i < design.size(); ++i) {
        for (std::size_t r = 0; r < k; ++r) {
            atb[r] += design[i][r] * target[i];
            for (std::size_t c = 0; c < k; ++c) {
                ata[r][c] += design[i][r] * design[i][c];
            }
        }
    }
    const std::vector<double> coeff = solve_normal_equations(ata, atb);

    double ss = 0.0;
    for (std::size_t i = 0; i < design.size(); ++i) {
        double pred = 0.0;
        for (std::size_t r = 0; r < k; ++r) pred += design[i][r] * coeff[r];
        ss += (pred - target[i]) * (pred - target[i]);
    }

    FitResult result;
    result.model = model;
    result.residual = std::sqrt(ss / static_cast<double>(design.size()));
    switch (model) {
        case FitModel::power_law:
        case FitModel::exponential:
            result.parameters = {std::exp(coeff[0]), coeff[1]};
            break;
        case FitModel::exp_quadratic:
            result.parameters = coeff;
            break;
    }
    return result;
}

void emit_csv(const std::vector<ExperimentRecord>& records,
              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << "experiment,N,decomposition,seed,value\n";
    for (const ExperimentRecord& r : records) {
        out << r.experiment << ',' << r.n << ',' << r.decomposition << ','
            << r.seed << ',' << format_value(r.value) << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::vector<ExperimentRecord> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input file: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "experiment,N,decomposition,seed,value") {
        throw ConfigError("unexpected CSV header in " + path);
    }
    std::vector<ExperimentRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        ExperimentRecord r;
        std::string field;
        try {
            if (!std::getline(row, r.experiment, ',')) throw ConfigError("");
            if (!std::getline(row, field, ',')) throw ConfigError("");
            r.n = std::stoi(field);
            if (!std::getline(row, r.decomposition, ',')) throw ConfigError("");
            if (!std::getline(row, field, ',')) throw ConfigError("");
            r.seed = std::stoull(field);
            if (!std::getline(row, field)) throw ConfigError("");
            r.value = std::stod(field);
        } catch (const std::exception&) {
            throw ConfigError("malformed CSV row: " + line);
        }
        records.push_back(std::move(r));
    }
    return records;
}

double mean_value(const std::vector<ExperimentRecord>& records,
                  const std::string& experiment, int n,
                  const std::string& decomposition) {
    double sum = 0.0;
    int count = 0;
    for (const ExperimentRecord& r : records) {
        if (r.experiment == experiment && r.n == n &&
            r.decomposition == decomposition) {
            sum += r.value;
            ++count;
        }
    }
    if (count == 0) throw ConfigError("no records match the requested group");
    return sum / count;
}

}  // namespace shotbudget
