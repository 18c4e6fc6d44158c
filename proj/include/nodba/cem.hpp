#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "environment.hpp"
#include "errors.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "workload.hpp"

namespace nodba {

/*----- Rollouts -------------------------------------------------------------------------------------------------*/

struct RolloutResult
{
    double episode_return = 0.0;
    IndexConfig final_config{0, 0};
    std::vector<Transition> transitions;
};

/// Plays one greedy, masked episode from `start` (a freshly reset state).
inline RolloutResult rollout(const PolicyParams &params, const Environment &env, const EnvState &start)
{
    RolloutResult res;
    EnvState s = start;
    while (not env.done(s)) {
        const auto obs = env.encode(s);
        const auto dist = forward(params, obs);
        const auto mask = env.action_mask(s);
        auto step = env.step(s, select_action(dist, mask, SelectMode::Greedy));
        res.episode_return += step.reward;
        res.transitions.push_back(std::move(step.transition));
        s = std::move(step.state);
    }
    res.final_config = s.config;
    return res;
}

inline RolloutResult rollout(const PolicyParams &params, const Environment &env, const Workload &workload)
{
    return rollout(params, env, env.reset(workload));
}

/// Mean greedy return over a batch of reset states.
inline double evaluate_params(const PolicyParams &params, const Environment &env, std::span<const EnvState> batch)
{
    if (batch.empty()) throw ConfigError("evaluate_params: empty batch");
    double sum = 0.0;
    for (auto &s : batch) sum += rollout(params, env, s).episode_return;
    return sum / double(batch.size());
}

inline double evaluate_params(const PolicyParams &params, const Environment &env,
                              const std::vector<Workload> &workloads)
{
    std::vector<EnvState> batch;
    for (auto &w : workloads) batch.push_back(env.reset(w));
    return evaluate_params(params, env, batch);
}

/// Final configuration of the greedy episode on `workload`.
inline IndexConfig recommend(const PolicyParams &params, const Workload &workload, const Environment &env)
{
    return rollout(params, env, workload).final_config;
}

/*----- Cross-entropy method -------------------------------------------------------------------------------------*/

struct CemConfig
{
    std::size_t population = 50;
    double elite_fraction = 0.2;
    std::size_t iterations = 100;
    std::size_t episodes_per_eval = 4;
    double init_std = 1.0;
    /// Extra sampling variance added to sigma^2; decays linearly to 0 over the run.
    double extra_noise_initial = 1.0;
    std::uint64_t seed = 0;
    /// Worker threads for candidate evaluation; 0 picks the hardware concurrency.  Does not affect results.
    std::size_t threads = 1;

    std::size_t elite_count() const
    {
        return std::size_t(std::ceil(elite_fraction * double(population) - 1e-9));
    }

    void validate() const
    {
        if (population == 0 or iterations == 0 or episodes_per_eval == 0)
            throw ConfigError("CEM population, iterations and episodes must be positive");
        if (not (elite_fraction > 0.0 and elite_fraction <= 1.0))
            throw ConfigError("CEM elite fraction must be in (0, 1]");
        if (elite_count() < 1) throw ConfigError("CEM elite set is empty");
        if (not (init_std >= 0.0) or not (extra_noise_initial >= 0.0))
            throw ConfigError("CEM noise parameters must be nonnegative");
    }
};

struct IterationStats
{
    double mean_return = 0.0;
    double elite_mean_return = 0.0;
    double best_so_far = 0.0;
};

struct TrainResult
{
    PolicyParams best_params;
    double best_fitness = 0.0;
    std::vector<IterationStats> history;
};

/// Produces the training workload for a derived seed.
using WorkloadSource = std::function<Workload(std::uint64_t)>;

inline WorkloadSource generator_source(const Catalog &catalog, std::size_t queries, GeneratorProfile profile)
{
    return [&catalog, queries, profile = std::move(profile)](std::uint64_t seed) {
        return generate_workload(catalog, queries, profile, seed);
    };
}

namespace detail {

enum : std::uint64_t { kBatchStream = 1, kCandidateStream = 2 };

template<typename F>
void parallel_for(std::size_t n, std::size_t threads, F &&fn)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i != n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t != threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
}

}

/** Trains the policy with the cross-entropy method.
 *
 * Each iteration draws one batch of training workloads shared by every candidate, samples candidates from
 * N(mu, diag(sigma^2 + z)), scores them by mean greedy return on the batch, and refits mu and sigma to the
 * elite fraction.  All randomness flows from seeds derived from `(seed, stream, iteration, index)`, so the
 * result does not depend on the thread count. */
inline TrainResult cem_train(const Environment &env, const WorkloadSource &source, const CemConfig &cfg)
{
    cfg.validate();
    if (env.provider().capability() == CostCapability::Live and cfg.threads != 1)
        throw ConfigError("a live cost provider cannot be used by concurrent training threads");

    const NetArch arch = NetArch::for_environment(env.config(), env.num_columns());
    const std::size_t dim = arch.parameter_count();
    const std::size_t n_elite = cfg.elite_count();

    std::vector<double> mu(dim, 0.0), sigma(dim, cfg.init_std);
    TrainResult result{PolicyParams::zeros(arch), -std::numeric_limits<double>::infinity(), {}};
    result.history.reserve(cfg.iterations);

    std::vector<PolicyParams> candidates(cfg.population, PolicyParams::zeros(arch));
    std::vector<double> fitness(cfg.population);

    for (std::size_t it = 0; it != cfg.iterations; ++it) {
        std::vector<EnvState> batch;
        for (std::size_t slot = 0; slot != cfg.episodes_per_eval; ++slot)
            batch.push_back(env.reset(source(derive_seed(cfg.seed, {detail::kBatchStream, it, slot}))));

        const double z = cfg.extra_noise_initial * std::max(0.0, 1.0 - double(it) / double(cfg.iterations));
        std::vector<double> scale(dim);
        for (std::size_t d = 0; d != dim; ++d) scale[d] = std::sqrt(sigma[d] * sigma[d] + z);

        detail::parallel_for(cfg.population, cfg.threads, [&](std::size_t c) {
            Rng rng(derive_seed(cfg.seed, {detail::kCandidateStream, it, c}));
            auto &theta = candidates[c].theta;
            for (std::size_t d = 0; d != dim; ++d) theta[d] = mu[d] + scale[d] * rng.normal();
            fitness[c] = evaluate_params(candidates[c], env, batch);
        });

        std::vector<std::size_t> order(cfg.population);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fitness[a] > fitness[b]; });

        IterationStats stats;
        for (double f : fitness) stats.mean_return += f;
        stats.mean_return /= double(cfg.population);
        for (std::size_t e = 0; e != n_elite; ++e) stats.elite_mean_return += fitness[order[e]];
        stats.elite_mean_return /= double(n_elite);

        if (fitness[order[0]] > result.best_fitness) {
            result.best_fitness = fitness[order[0]];
            result.best_params = candidates[order[0]];
        }
        stats.best_so_far = result.best_fitness;
        result.history.push_back(stats);

        for (std::size_t d = 0; d != dim; ++d) {
            double mean = 0.0;
            for (std::size_t e = 0; e != n_elite; ++e) mean += candidates[order[e]].theta[d];
            mean /= double(n_elite);
            double var = 0.0;
            for (std::size_t e = 0; e != n_elite; ++e) {
                const double dev = candidates[order[e]].theta[d] - mean;
                var += dev * dev;
            }
            mu[d] = mean;
            sigma[d] = std::sqrt(var / double(n_elite));
        }
    }
    return result;
}

/// Convenience overload that trains on generated workloads of `env.n_fixed` queries.
inline TrainResult cem_train(const EnvConfig &env_config, const Catalog &catalog, const GeneratorProfile &profile,
                             const CemConfig &cfg, const CostProvider &provider)
{
    const Environment env(catalog, provider, env_config);
    return cem_train(env, generator_source(catalog, env_config.n_fixed, profile), cfg);
}

/*----- Policy files ---------------------------------------------------------------------------------------------*/

struct PolicyFile
{
    PolicyParams params;
    EnvConfig env;
    CemConfig trained_with;
};

inline nlohmann::json policy_to_json(const PolicyFile &pf)
{
    const auto &a = pf.params.arch;
    const auto &c = pf.trained_with;
    return {
        {"version", 1},
        {"arch", {{"input_dim", a.input_dim}, {"hidden_layers", a.hidden_layers},
                  {"hidden_width", a.hidden_width}, {"output_dim", a.output_dim}}},
        {"theta", pf.params.theta},
        {"trained_with", {{"population", c.population}, {"elite_fraction", c.elite_fraction},
                          {"iterations", c.iterations}, {"episodes_per_eval", c.episodes_per_eval},
                          {"init_std", c.init_std}, {"extra_noise_initial", c.extra_noise_initial},
                          {"k", pf.env.k}, {"n_fixed", pf.env.n_fixed}}},
        {"seed", c.seed},
    };
}

inline PolicyFile policy_from_json(const nlohmann::json &j)
{
    try {
        if (j.at("version").get<int>() != 1) throw ParseError("policy: unsupported version");
        PolicyFile pf;
        auto &a = j.at("arch");
        pf.params.arch = NetArch{a.at("input_dim").get<std::size_t>(), a.at("hidden_layers").get<std::size_t>(),
                                 a.at("hidden_width").get<std::size_t>(), a.at("output_dim").get<std::size_t>()};
        pf.params.theta = j.at("theta").get<std::vector<double>>();
        auto &t = j.at("trained_with");
        pf.trained_with.population = t.at("population").get<std::size_t>();
        pf.trained_with.elite_fraction = t.at("elite_fraction").get<double>();
        pf.trained_with.iterations = t.at("iterations").get<std::size_t>();
        pf.trained_with.episodes_per_eval = t.at("episodes_per_eval").get<std::size_t>();
        pf.trained_with.init_std = t.at("init_std").get<double>();
        pf.trained_with.extra_noise_initial = t.at("extra_noise_initial").get<double>();
        pf.env.k = t.at("k").get<std::size_t>();
        pf.env.n_fixed = t.at("n_fixed").get<std::size_t>();
        pf.trained_with.seed = j.at("seed").get<std::uint64_t>();
        try {
            pf.params.validate();
        } catch (const ConfigError &e) {
            throw ParseError(std::string("policy: ") + e.what());
        }
        if (pf.params.arch.input_dim != pf.env.n_fixed * pf.params.arch.output_dim + pf.params.arch.output_dim)
            throw ParseError("policy: input_dim inconsistent with n_fixed and output_dim");
        return pf;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("policy: ") + e.what());
    }
}

inline void save_policy(const PolicyFile &pf, const std::filesystem::path &path)
{
    write_text_file(path, policy_to_json(pf).dump(1) + "\n");
}

inline PolicyFile load_policy(const std::filesystem::path &path) { return policy_from_json(read_json_file(path)); }

/// Throws `ArchMismatchError` unless the policy fits an environment over `m` columns with `env`'s n_fixed.
inline void check_policy_fits(const PolicyFile &pf, std::size_t m, const EnvConfig &env)
{
    const NetArch want = NetArch::for_environment(env, m);
    if (pf.params.arch != want)
        throw ArchMismatchError("policy expects m=" + std::to_string(pf.params.arch.output_dim) +
                                ", input_dim=" + std::to_string(pf.params.arch.input_dim) + " but catalog has m=" +
                                std::to_string(m) + " and n_fixed=" + std::to_string(env.n_fixed));
}

inline void write_history_csv(const TrainResult &r, const std::filesystem::path &path)
{
    std::string out = "iteration,mean_return,elite_mean_return,best_so_far\n";
    for (std::size_t i = 0; i != r.history.size(); ++i) {
        const auto &h = r.history[i];
        out += std::to_string(i) + "," + format_number(h.mean_return) + "," + format_number(h.elite_mean_return) +
               "," + format_number(h.best_so_far) + "\n";
    }
    write_text_file(path, out);
}

}
