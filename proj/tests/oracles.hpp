#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Per-hop Bernoulli retries: hop h succeeds if any of its trials succeeds.
inline Estimate monte_carlo_pdr(const std::vector<double>& pdrs, const std::vector<int>& retries, int trials, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int ok = 0;
    for (int n = 0; n < trials; ++n) {
        bool arrived = true;
        for (std::size_t h = 0; h < pdrs.size() && arrived; ++h) {
            bool hop = false;
            for (int r = 0; r < retries[h] && !hop; ++r) hop = u(gen) < pdrs[h];
            arrived = hop;
        }
        ok += arrived ? 1 : 0;
    }
    const double p = static_cast<double>(ok) / trials;
    return {p, std::sqrt(std::max(p * (1 - p), 1e-12) / trials)};
}

inline double product_pdr(const std::vector<double>& pdrs, const std::vector<int>& retries) {
    double p = 1.0;
    for (std::size_t h = 0; h < pdrs.size(); ++h) p *= 1.0 - std::pow(1.0 - pdrs[h], retries[h]);
    return p;
}

// Every vector with entries >= 1 and total <= cap; minimal total, then lexicographically largest.
inline std::vector<int> exhaustive_retry(const std::vector<double>& pdrs, double required, int cap) {
    std::vector<int> best;
    int best_total = cap + 1;
    std::vector<int> cur(pdrs.size(), 1);
    std::function<void(std::size_t, int)> rec = [&](std::size_t h, int left) {
        if (h == pdrs.size()) {
            const int total = static_cast<int>(std::accumulate(cur.begin(), cur.end(), 0));
            if (product_pdr(pdrs, cur) < required) return;
            if (total < best_total || (total == best_total && cur > best)) {
                best_total = total;
                best = cur;
            }
            return;
        }
        const int rest = static_cast<int>(pdrs.size() - h - 1);
        for (int r = 1; r <= left - rest; ++r) {
            cur[h] = r;
            rec(h + 1, left - r);
        }
    };
    rec(0, cap);
    return best;
}

// Minimum number of subsets covering the universe, by full enumeration.
inline int brute_set_cover(int universe, const std::vector<std::vector<int>>& subsets) {
    const std::size_t m = subsets.size();
    int best = -1;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        std::vector<bool> hit(static_cast<std::size_t>(universe), false);
        for (std::size_t j = 0; j < m; ++j) {
            if (mask >> j & 1u) {
                for (int e : subsets[j]) hit[static_cast<std::size_t>(e)] = true;
            }
        }
        if (std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) {
            const int c = __builtin_popcount(mask);
            if (best < 0 || c < best) best = c;
        }
    }
    return best;
}

// Fewest packets whose freed slots meet every need, by full enumeration; -1 if impossible.
inline int brute_packet_drop(const std::vector<int>& need, const std::vector<std::vector<int>>& eps) {
    int best = -1;
    for (std::uint32_t mask = 0; mask < (1u << eps.size()); ++mask) {
        bool ok = true;
        for (std::size_t i = 0; i < need.size() && ok; ++i) {
            int got = 0;
            for (std::size_t j = 0; j < eps.size(); ++j) {
                if (mask >> j & 1u) got += eps[j][i];
            }
            ok = got >= need[i];
        }
        if (ok) {
            const int c = __builtin_popcount(mask);
            if (best < 0 || c < best) best = c;
        }
    }
    return best;
}

// floor(P * (g + (k-1)(1-g)/R)) with g = num/den, in integer arithmetic.
inline std::vector<std::int64_t> rhythmic_periods(std::int64_t period, std::int64_t num, std::int64_t den, int steps) {
    std::vector<std::int64_t> out;
    for (int k = 1; k <= steps; ++k) {
        const std::int64_t top = period * (num * steps + (k - 1) * (den - num));
        out.push_back(top / (den * steps));
    }
    return out;
}

}  // namespace oracle
