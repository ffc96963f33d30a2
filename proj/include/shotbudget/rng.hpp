#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace shotbudget {

// splitmix64 step; used to whiten seeds and derive independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream seed: mixes a base seed with one or two stream ids.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t substream = 0) {
    std::uint64_t s = base;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(s);
    s ^= substream * 0x9e3779b97f4a7c15ULL + 0x94d049bb133111ebULL;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ (c >> 1);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return dist_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t binomial(std::uint64_t n, double p) {
        if (n == 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        std::binomial_distribution<std::uint64_t> d(n, p);
        return d(engine_);
    }

    // Multinomial draw by sequential conditional binomials; O(#categories)
    // regardless of the shot count.
    std::vector<std::uint64_t> multinomial(std::uint64_t n,
                                           const std::vector<double>& probs) {
        std::vector<std::uint64_t> counts(probs.size(), 0);
        double remaining_p = 1.0;
        std::uint64_t remaining_n = n;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            if (remaining_n == 0) break;
            double p = probs[i] <= 0.0 ? 0.0 : probs[i] / remaining_p;
            if (p > 1.0) p = 1.0;
            std::uint64_t c = binomial(remaining_n, p);
            counts[i] = c;
            remaining_n -= c;
            remaining_p -= probs[i];
            if (remaining_p <= 0.0) remaining_p = 0.0;
        }
        if (!probs.empty()) counts.back() = remaining_n;
        return counts;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> dist_{0.0, 1.0};
};

}  // namespace shotbudget
