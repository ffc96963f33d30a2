#include "shotbudget/qsp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "shotbudget/errors.hpp"
#include "shotbudget/rng.hpp"

namespace shotbudget {

namespace {

constexpr double kPi = std::numbers::pi;

int default_grid(int degree) { return 50 * degree + 64; }

void check_delta(double delta, const char* what) {
    if (delta < 0.0 || delta >= kPi / 2.0) {
        throw ConfigError(std::string(what) + ": delta outside [0, pi/2)");
    }
}

double grid_point(double delta, int k, int points) {
    return delta + (kPi - 2.0 * delta) * static_cast<double>(k) /
                       static_cast<double>(points - 1);
}

int checked_grid(const std::vector<double>& phases, int grid_points,
                 const char* what) {
    const int degree = static_cast<int>(phases.size()) - 1;
    if (degree < 1) {
        throw ConfigError(std::string(what) + ": need at least two phases");
    }
    const int points = grid_points > 0 ? grid_points : default_grid(degree);
    if (points < 50 * degree) {
        throw ConfigError(std::string(what) + ": grid too coarse");
    }
    return points;
}

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    bool stagnated = false;
};

// Standard Nelder-Mead; stops when the best value has improved by less than
// 1e-10 over 200 consecutive iterations.
template <typename F>
SimplexResult nelder_mead(const F& objective, std::vector<double> x0,
                          double step, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step;
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = objective(xs[i]);

    double best_seen = *std::min_element(values.begin(), values.end());
    int stale = 0;
    bool stagnated = false;

    std::vector<std::size_t> order(n + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return values[a] < values[b];
        });
        const std::size_t lo = order[0];
        const std::size_t hi = order[n];
        const std::size_t next_hi = order[n - 1];

        if (values[lo] < best_seen - 1e-10) {
            best_seen = values[lo];
            stale = 0;
        } else if (++stale >= 200) {
            stagnated = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == hi) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += xs[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d) {
                p[d] = centroid[d] + t * (xs[hi][d] - centroid[d]);
            }
            return p;
        };

        const std::vector<double> reflected = blend(-1.0);
        const double fr = objective(reflected);
        if (fr < values[lo]) {
            const std::vector<double> expanded = blend(-2.0);
            const double fe = objective(expanded);
            if (fe < fr) {
                xs[hi] = expanded;
                values[hi] = fe;
            } else {
                xs[hi] = reflected;
                values[hi] = fr;
            }
            continue;
        }
        if (fr < values[next_hi]) {
            xs[hi] = reflected;
            values[hi] = fr;
            continue;
        }
        const std::vector<double> contracted =
            blend(fr < values[hi] ? -0.5 : 0.5);
        const double fc = objective(contracted);
        if (fc < std::min(fr, values[hi])) {
            xs[hi] = contracted;
            values[hi] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == lo) continue;
            for (std::size_t d = 0; d < n; ++d) {
                xs[i][d] = xs[lo][d] + 0.5 * (xs[i][d] - xs[lo][d]);
            }
            values[i] = objective(xs[i]);
        }
    }

    std::size_t lo = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (values[i] < values[lo]) lo = i;
    }
    return SimplexResult{xs[lo], values[lo], stagnated};
}

SignApproximation optimize_single(int degree, double delta, std::uint64_t seed,
                                  const std::vector<double>* warm_free) {
    const std::size_t free_count = static_cast<std::size_t>((degree + 1) / 2);
    const auto objective = [&](const std::vector<double>& free_half) {
        return qsp_loss(assemble_phases(free_half, degree), delta, 0);
    };

    std::vector<std::vector<double>> starts;
    for (int restart = 0; restart < 5; ++restart) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(degree),
                            static_cast<std::uint64_t>(restart)));
        std::vector<double> x0(free_count);
        for (double& x : x0) x = rng.uniform(-kPi / 4.0, kPi / 4.0);
        starts.push_back(std::move(x0));
    }
    if (warm_free != nullptr) {
        std::vector<double> x0 = *warm_free;
        x0.resize(free_count, 0.0);
        starts.push_back(std::move(x0));
    }

    SimplexResult best;
    bool have_best = false;
    for (const std::vector<double>& x0 : starts) {
        const SimplexResult run = nelder_mead(objective, x0, 0.15, 20000);
        if (!have_best || run.value < best.value) {
            best = run;
            have_best = true;
        }
    }

    SignApproximation result;
    result.phases.degree = degree;
    result.phases.delta = delta;
    result.phases.phases = assemble_phases(best.x, degree);
    result.converged = best.stagnated;
    const int points = default_grid(degree);
    double total = 0.0;
    double worst = 0.0;
    for (int k = 0; k < points; ++k) {
        const double w = grid_point(delta, k, points);
        const double err =
            std::abs(1.0 - sign_approximant(result.phases.phases, w));
        total += err;
        worst = std::max(worst, err);
    }
    result.loss = total / static_cast<double>(points);
    result.max_pointwise_error = worst;
    return result;
}

}  // namespace

void validate_phases(const QspPhases& p) {
    if (p.degree < 1) throw ConfigError("QspPhases: degree must be >= 1");
    if (p.phases.size() != static_cast<std::size_t>(p.degree) + 1) {
        throw ConfigError("QspPhases: need degree + 1 phases");
    }
    check_delta(p.delta, "QspPhases");
    for (int r = 0; r <= p.degree; ++r) {
        if (std::abs(p.phases[r] + p.phases[p.degree - r]) > 1e-12) {
            throw ConfigError("QspPhases: phases are not antisymmetric");
        }
    }
}

cplx s_phi(const std::vector<double>& phases, double omega) {
    if (phases.size() < 2) {
        throw ConfigError("s_phi: need at least two phases");
    }
    const cplx layer0{std::cos(0.5 * phases[0]), 0.0};
    cplx v0 = layer0;
    cplx v1 = cplx{0.0, -std::sin(0.5 * phases[0])};
    const cplx down{std::cos(0.5 * omega), -std::sin(0.5 * omega)};
    const cplx up = std::conj(down);
    for (std::size_t k = 1; k < phases.size(); ++k) {
        v0 *= down;
        v1 *= up;
        const double c = std::cos(0.5 * phases[k]);
        const double s = std::sin(0.5 * phases[k]);
        const cplx w0 = c * v0 - cplx{0.0, s} * v1;
        const cplx w1 = -cplx{0.0, s} * v0 + c * v1;
        v0 = w0;
        v1 = w1;
    }
    return -v1;
}

double sign_approximant(const std::vector<double>& phases, double omega) {
    return s_phi(phases, omega).real();
}

std::vector<double> assemble_phases(const std::vector<double>& free_half,
                                    int degree) {
    const std::size_t free_count = static_cast<std::size_t>((degree + 1) / 2);
    if (free_half.size() != free_count) {
        throw ConfigError("assemble_phases: wrong free-phase count");
    }
    std::vector<double> phases(static_cast<std::size_t>(degree) + 1, 0.0);
    for (std::size_t i = 0; i < free_count; ++i) {
        phases[i] = free_half[i];
        phases[degree - i] = -free_half[i];
    }
    return phases;
}

double qsp_loss(const std::vector<double>& phases, double delta,
                int grid_points) {
    check_delta(delta, "qsp_loss");
    const int points = checked_grid(phases, grid_points, "qsp_loss");
    double total = 0.0;
    for (int k = 0; k < points; ++k) {
        const double w = grid_point(delta, k, points);
        total += std::abs(1.0 - sign_approximant(phases, w));
    }
    return total / static_cast<double>(points);
}

double qsp_loss_squared(const std::vector<double>& phases, double delta,
                        int grid_points) {
    check_delta(delta, "qsp_loss_squared");
    const int points = checked_grid(phases, grid_points, "qsp_loss_squared");
    double total = 0.0;
    for (int k = 0; k < points; ++k) {
        const double w = grid_point(delta, k, points);
        const double err = 1.0 - sign_approximant(phases, w);
        total += err * err;
    }
    return total / static_cast<double>(points);
}

SignApproximation optimize_phases(int degree, double delta,
                                  std::uint64_t seed) {
    if (degree < 1) throw ConfigError("optimize_phases: degree must be >= 1");
    check_delta(delta, "optimize_phases");
    const int base = 2 - (degree % 2);
    SignApproximation current;
    for (int r = base; r <= degree; r += 2) {
        std::vector<double> warm;
        const std::vector<double>* warm_ptr = nullptr;
        if (r > base) {
            const std::size_t prev_free =
                static_cast<std::size_t>((r - 1) / 2);
            warm.assign(current.phases.phases.begin(),
                        current.phases.phases.begin() + prev_free);
            warm_ptr = &warm;
        }
        current = optimize_single(r, delta, seed, warm_ptr);
    }
    return current;
}

std::vector<SignApproximation> optimize_range(int degree_min, int degree_max,
                                              double delta,
                                              std::uint64_t seed) {
    if (degree_min < 1 || degree_max < degree_min) {
        throw ConfigError("optimize_range: bad degree range");
    }
    check_delta(delta, "optimize_range");
    std::map<int, SignApproximation> chain;
    for (int parity = 0; parity < 2; ++parity) {
        const int base = 1 + parity;
        SignApproximation current;
        for (int r = base; r <= degree_max; r += 2) {
            std::vector<double> warm;
            const std::vector<double>* warm_ptr = nullptr;
            if (r > base) {
                const std::size_t prev_free =
                    static_cast<std::size_t>((r - 1) / 2);
                warm.assign(current.phases.phases.begin(),
                            current.phases.phases.begin() + prev_free);
                warm_ptr = &warm;
            }
            current = optimize_single(r, delta, seed, warm_ptr);
            if (r >= degree_min) chain[r] = current;
        }
    }
    std::vector<SignApproximation> out;
    for (auto& [r, approx] : chain) {
        (void)r;
        out.push_back(std::move(approx));
    }
    return out;
}

}  // namespace shotbudget
