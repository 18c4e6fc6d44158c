#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "catalog.hpp"
#include "cost_model.hpp"
#include "errors.hpp"
#include "workload.hpp"

namespace nodba {

/// r(L) = max(cost(empty) / cost(L) - 1, 0)
inline double reward_fn(double cost_empty, double cost_l)
{
    if (not (cost_l > 0.0)) throw DomainError("reward_fn: cost(L) must be positive");
    if (cost_empty < 0.0) throw DomainError("reward_fn: cost(empty) must be nonnegative");
    return std::max(cost_empty / cost_l - 1.0, 0.0);
}

struct EnvConfig
{
    std::size_t k = 3;       ///< index budget, episode length
    std::size_t n_fixed = 5; ///< query rows in the encoding
};

struct Action
{
    std::size_t column = 0;
    bool operator==(const Action&) const = default;
};

/// One step (L_{i-1}, a, L_i, r).
struct Transition
{
    IndexConfig prev_config;
    Action action;
    IndexConfig next_config;
    double reward = 0.0;
};

/// Data fixed for the duration of an episode.
struct Episode
{
    Workload workload;
    SelectivityMatrix matrix;
    double baseline_cost = 0.0; ///< cost(empty)
};

struct EnvState
{
    std::shared_ptr<const Episode> episode;
    IndexConfig config;
    std::size_t steps_taken = 0;

    const SelectivityMatrix & matrix() const { return episode->matrix; }
    double baseline_cost() const { return episode->baseline_cost; }
};

struct StepResult
{
    EnvState state;
    double reward;
    bool done;
    Transition transition;
};

/** Episodic index-selection environment.  An episode starts with no indexes and adds one index per step until
 * k indexes exist or no useful column is left.  The environment itself is immutable; all episode state lives
 * in `EnvState`, so one environment may serve many threads. */
class Environment
{
    const Catalog *catalog_;
    const CostProvider *provider_;
    EnvConfig config_;

public:
    Environment(const Catalog &catalog, const CostProvider &provider, EnvConfig config = {})
        : catalog_(&catalog), provider_(&provider), config_(config)
    {
        if (config_.k < 1 or config_.k > catalog.num_columns())
            throw ConfigError("k must satisfy 1 <= k <= m (m=" + std::to_string(catalog.num_columns()) + ")");
        if (config_.n_fixed < 1) throw ConfigError("n_fixed must be positive");
    }

    const Catalog & catalog() const { return *catalog_; }
    const CostProvider & provider() const { return *provider_; }
    const EnvConfig & config() const { return config_; }
    std::size_t num_columns() const { return catalog_->num_columns(); }
    std::size_t observation_size() const { return config_.n_fixed * num_columns() + num_columns(); }

    EnvState reset(const Workload &workload) const
    {
        if (workload.size() > config_.n_fixed)
            throw WorkloadTooLargeError("workload has " + std::to_string(workload.size()) +
                                        " queries, encoding holds " + std::to_string(config_.n_fixed));
        auto ep = std::make_shared<Episode>();
        ep->workload = workload;
        ep->matrix = build_matrix(workload, *catalog_);
        const IndexConfig empty(num_columns(), config_.k);
        ep->baseline_cost = provider_->workload_cost(workload, empty);
        return EnvState{std::move(ep), empty, 0};
    }

    /// hasIndex(C_j): 1 if column j is indexed or no query of the workload restricts it.
    std::vector<std::uint8_t> has_index(const EnvState &s) const
    {
        std::vector<std::uint8_t> out(num_columns());
        for (std::size_t j = 0; j != out.size(); ++j)
            out[j] = s.config.test(j) or not s.matrix().column_used(j);
        return out;
    }

    /// Row-major n_fixed x m selectivities (missing rows padded with 1) followed by the hasIndex bits.
    std::vector<double> encode(const EnvState &s) const
    {
        const std::size_t m = num_columns();
        std::vector<double> out(observation_size(), 1.0);
        const auto &mat = s.matrix();
        for (std::size_t i = 0; i != mat.rows(); ++i)
            for (std::size_t j = 0; j != m; ++j) out[i * m + j] = mat(i, j);
        const auto bits = has_index(s);
        for (std::size_t j = 0; j != m; ++j) out[config_.n_fixed * m + j] = bits[j];
        return out;
    }

    /// Columns an action may target: not yet indexed and restricted by some query.
    std::vector<std::uint8_t> action_mask(const EnvState &s) const
    {
        auto mask = has_index(s);
        for (auto &b : mask) b = not b;
        if (s.steps_taken >= config_.k) std::fill(mask.begin(), mask.end(), 0);
        return mask;
    }

    bool done(const EnvState &s) const
    {
        if (s.steps_taken >= config_.k) return true;
        for (auto b : action_mask(s))
            if (b) return false;
        return true;
    }

    StepResult step(const EnvState &s, Action a) const
    {
        if (a.column >= num_columns()) throw IllegalActionError("action column out of range");
        if (not action_mask(s)[a.column])
            throw IllegalActionError("action on masked column " + catalog_->column(a.column).name);
        EnvState next{s.episode, s.config, s.steps_taken + 1};
        next.config.set(a.column);
        const double cost = provider_->workload_cost(s.episode->workload, next.config);
        const double r = reward_fn(s.baseline_cost(), cost);
        const bool finished = done(next);
        Transition t{s.config, a, next.config, r};
        return StepResult{std::move(next), r, finished, std::move(t)};
    }
};

}
