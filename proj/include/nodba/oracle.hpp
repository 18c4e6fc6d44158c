#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cost_model.hpp"
#include "errors.hpp"
#include "workload.hpp"

namespace nodba {

inline constexpr std::uint64_t kOracleGuard = 1'000'000;

struct OracleResult
{
    IndexConfig best{0, 0};
    double cost = 0.0;
    std::uint64_t configs_evaluated = 0;
};

/// sum_{i=0..k} C(n, i), saturating at `cap + 1`.
inline std::uint64_t subsets_up_to(std::size_t n, std::size_t k, std::uint64_t cap = kOracleGuard)
{
    std::uint64_t total = 0, binom = 1;
    for (std::size_t i = 0; i <= k and i <= n; ++i) {
        if (i > 0) binom = binom * (n - i + 1) / i; // exact: C(n,i-1)*(n-i+1) is divisible by i
        total += binom;
        if (total > cap or binom > cap) return cap + 1;
    }
    return total;
}

namespace detail {

/// Smaller set first, then the lexicographically smaller bitlist.
inline bool oracle_prefers(const IndexConfig &a, const IndexConfig &b)
{
    if (a.count() != b.count()) return a.count() < b.count();
    return a.bits() < b.bits();
}

}

/** Exhaustive optimum over every index set of at most k columns.  With `used_only`, only columns some query
 * restricts are enumerated; the others change no query's cost.  Ties go to the smaller set, then to the
 * lexicographically smallest bitlist. */
inline OracleResult enumerate_optimal(const Workload &workload, const Catalog &catalog, std::size_t k,
                                      const CostProvider &provider, bool used_only = true,
                                      std::uint64_t guard = kOracleGuard)
{
    const std::size_t m = catalog.num_columns();
    if (k > m) throw ConfigError("oracle: k exceeds the number of columns");

    std::vector<std::size_t> pool;
    if (used_only) {
        const auto mat = build_matrix(workload, catalog);
        for (std::size_t j = 0; j != m; ++j)
            if (mat.column_used(j)) pool.push_back(j);
    } else {
        for (std::size_t j = 0; j != m; ++j) pool.push_back(j);
    }
    const std::size_t max_size = std::min(k, pool.size());
    if (subsets_up_to(pool.size(), max_size, guard) > guard)
        throw TooLargeError("oracle: more than " + std::to_string(guard) + " index sets to enumerate; lower k "
                            "or restrict the workload's columns");

    OracleResult res{IndexConfig(m, k), std::numeric_limits<double>::infinity(), 0};
    std::vector<std::size_t> pick;
    auto visit = [&] {
        IndexConfig c(m, k);
        for (auto p : pick) c.set(pool[p]);
        const double cost = provider.workload_cost(workload, c);
        ++res.configs_evaluated;
        if (cost < res.cost or (cost == res.cost and detail::oracle_prefers(c, res.best))) {
            res.cost = cost;
            res.best = std::move(c);
        }
    };

    for (std::size_t size = 0; size <= max_size; ++size) {
        pick.resize(size);
        for (std::size_t i = 0; i != size; ++i) pick[i] = i;
        for (;;) {
            visit();
            // next combination in lexicographic order of positions
            std::size_t i = size;
            while (i > 0 and pick[i - 1] == pool.size() - size + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t t = i; t != size; ++t) pick[t] = pick[t - 1] + 1;
        }
    }
    return res;
}

/// cost(config) / cost(optimum); 1 iff `config` is optimal.
inline double regret(const IndexConfig &config, const Workload &workload, const Catalog &catalog, std::size_t k,
                     const CostProvider &provider)
{
    const auto opt = enumerate_optimal(workload, catalog, k, provider);
    const double cost = provider.workload_cost(workload, config);
    if (opt.cost == 0.0) return cost == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return cost / opt.cost;
}

}
