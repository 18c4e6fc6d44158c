#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "environment.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace nodba {

/// Dense MLP shape: `hidden_layers` RELU layers of `hidden_width` units, softmax over `output_dim` actions.
struct NetArch
{
    std::size_t input_dim = 0;
    std::size_t hidden_layers = 4;
    std::size_t hidden_width = 8;
    std::size_t output_dim = 0;

    static NetArch for_environment(const EnvConfig &env, std::size_t m)
    {
        return NetArch{env.n_fixed * m + m, 4, 8, m};
    }

    /// Input width of dense layer `l` (0-based, the last one is the output layer).
    std::size_t layer_in(std::size_t l) const { return l == 0 ? input_dim : hidden_width; }
    std::size_t layer_out(std::size_t l) const { return l == hidden_layers ? output_dim : hidden_width; }
    std::size_t num_layers() const { return hidden_layers + 1; }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (std::size_t l = 0; l != num_layers(); ++l) n += layer_out(l) * layer_in(l) + layer_out(l);
        return n;
    }

    void validate() const
    {
        if (input_dim == 0 or hidden_layers == 0 or hidden_width == 0 or output_dim == 0)
            throw ConfigError("network dimensions must be positive");
    }

    bool operator==(const NetArch&) const = default;
};

/** Network weights as one flat vector.  Layers are stored in order; each layer is its weight matrix
 * (`out x in`, row-major, so row `o` holds the incoming weights of unit `o`) followed by its `out` biases. */
struct PolicyParams
{
    NetArch arch;
    std::vector<double> theta;

    static PolicyParams zeros(const NetArch &arch)
    {
        arch.validate();
        return PolicyParams{arch, std::vector<double>(arch.parameter_count(), 0.0)};
    }

    void validate() const
    {
        arch.validate();
        if (theta.size() != arch.parameter_count())
            throw ConfigError("theta has " + std::to_string(theta.size()) + " entries, arch needs " +
                              std::to_string(arch.parameter_count()));
    }
};

/// Action probabilities for one observation.
inline std::vector<double> forward(const PolicyParams &params, std::span<const double> input)
{
    const NetArch &arch = params.arch;
    if (input.size() != arch.input_dim)
        throw ConfigError("forward: input has " + std::to_string(input.size()) + " entries, expected " +
                          std::to_string(arch.input_dim));
    if (params.theta.size() != arch.parameter_count()) throw ConfigError("forward: theta size mismatch");

    std::vector<double> act(input.begin(), input.end()), next;
    const double *w = params.theta.data();
    for (std::size_t l = 0; l != arch.num_layers(); ++l) {
        const std::size_t in = arch.layer_in(l), out = arch.layer_out(l);
        const double *b = w + out * in;
        next.assign(out, 0.0);
        for (std::size_t o = 0; o != out; ++o) {
            double z = b[o];
            const double *row = w + o * in;
            for (std::size_t i = 0; i != in; ++i) z += row[i] * act[i];
            next[o] = (l + 1 == arch.num_layers()) ? z : std::max(z, 0.0);
        }
        w = b + out;
        act.swap(next);
    }

    const double zmax = *std::max_element(act.begin(), act.end());
    double sum = 0.0;
    for (auto &x : act) sum += (x = std::exp(x - zmax));
    for (auto &x : act) x /= sum;
    return act;
}

enum class SelectMode { Greedy, Sample };

/** Picks an action from `dist` restricted to `mask`.  Greedy takes the argmax of the renormalized
 * distribution, ties to the lowest column.  Sample draws from it. */
inline Action select_action(std::span<const double> dist, std::span<const std::uint8_t> mask, SelectMode mode,
                            Rng *rng = nullptr)
{
    if (dist.size() != mask.size()) throw ConfigError("select_action: dist/mask size mismatch");
    double total = 0.0;
    std::size_t first = dist.size();
    for (std::size_t j = 0; j != dist.size(); ++j)
        if (mask[j]) {
            total += dist[j];
            if (first == dist.size()) first = j;
        }
    if (first == dist.size()) throw IllegalActionError("select_action: every action is masked");

    if (mode == SelectMode::Greedy or total <= 0.0) {
        // a zero total (all permitted probabilities underflowed) degrades to the lowest permitted column
        std::size_t best = first;
        for (std::size_t j = first + 1; j != dist.size(); ++j)
            if (mask[j] and dist[j] > dist[best]) best = j;
        return Action{best};
    }

    if (not rng) throw ConfigError("select_action: sampling needs an Rng");
    const double u = rng->uniform01() * total;
    double acc = 0.0;
    std::size_t last = first;
    for (std::size_t j = first; j != dist.size(); ++j) {
        if (not mask[j]) continue;
        acc += dist[j];
        last = j;
        if (u < acc) return Action{j};
    }
    return Action{last};
}

}
