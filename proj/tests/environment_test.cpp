#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nodba;
using namespace nodba::testing;

TEST(Reward, Formula)
{
    EXPECT_EQ(reward_fn(100.0, 100.0), 0.0);
    EXPECT_DOUBLE_EQ(reward_fn(100.0, 25.0), 3.0);
    EXPECT_EQ(reward_fn(100.0, 200.0), 0.0);
    EXPECT_THROW(reward_fn(100.0, 0.0), DomainError);
    EXPECT_THROW(reward_fn(100.0, -1.0), DomainError);
}

TEST(Environment, Configuration)
{
    const Catalog c = uniform_catalog(4);
    const AnalyticCostModel model(c);
    EXPECT_THROW(Environment(c, model, {0, 5}), ConfigError);
    EXPECT_THROW(Environment(c, model, {5, 5}), ConfigError);
    EXPECT_THROW(Environment(c, model, {2, 0}), ConfigError);
    const Environment full(c, model, {4, 5});
    EXPECT_EQ(full.observation_size(), 5u * 4u + 4u);
}

TEST(Environment, W1MaskAndEncoding)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const Environment env(c, model);
    const Workload w1 = parse_workload(fixture("w1.json"));
    const EnvState s = env.reset(w1);

    std::vector<std::size_t> legal;
    const auto mask = env.action_mask(s);
    for (std::size_t j = 0; j != mask.size(); ++j)
        if (mask[j]) legal.push_back(j);
    EXPECT_EQ(legal, (std::vector<std::size_t>{0, 1, 2, 3, 4, 6}));

    const auto x = env.encode(s);
    ASSERT_EQ(x.size(), 5u * 16u + 16u);
    const auto mat = build_matrix(w1, c);
    for (std::size_t i = 0; i != 5; ++i)
        for (std::size_t j = 0; j != 16; ++j) EXPECT_EQ(x[i * 16 + j], mat(i, j));
    for (std::size_t j = 0; j != 16; ++j) EXPECT_EQ(x[80 + j], mask[j] ? 0.0 : 1.0);
    EXPECT_EQ(s.baseline_cost(), 5.0 * double(c.row_count()));
}

TEST(Environment, PadsShortWorkloads)
{
    const Catalog c = uniform_catalog(3);
    const AnalyticCostModel model(c);
    const Environment env(c, model, {2, 4});
    const EnvState s = env.reset(Workload{{Query{{lt("c1", 500.0)}}}});
    const auto x = env.encode(s);
    ASSERT_EQ(x.size(), 15u);
    EXPECT_EQ(std::vector<double>(x.begin(), x.begin() + 3), (std::vector<double>{1.0, 0.5, 1.0}));
    for (std::size_t i = 3; i != 12; ++i) EXPECT_EQ(x[i], 1.0);
    EXPECT_EQ(std::vector<double>(x.begin() + 12, x.end()), (std::vector<double>{1.0, 0.0, 1.0}));
}

TEST(Environment, RejectsOversizedWorkload)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const Environment env(c, model);
    EXPECT_THROW(env.reset(generate_workload(c, 6, {}, 1)), WorkloadTooLargeError);
}

TEST(Environment, StepsMaskAndTerminate)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const Environment env(c, model);
    const Workload w1 = parse_workload(fixture("w1.json"));
    EnvState s = env.reset(w1);
    EXPECT_THROW(env.step(s, {5}), IllegalActionError);
    EXPECT_THROW(env.step(s, {99}), IllegalActionError);

    auto r1 = env.step(s, {0});
    EXPECT_FALSE(r1.done);
    EXPECT_EQ(r1.transition.prev_config.count(), 0u);
    EXPECT_EQ(r1.transition.next_config.columns(), (std::vector<std::size_t>{0}));
    EXPECT_DOUBLE_EQ(r1.reward, reward_fn(s.baseline_cost(), model.workload_cost(w1, r1.state.config)));
    EXPECT_THROW(env.step(r1.state, {0}), IllegalActionError);
    EXPECT_EQ(env.encode(r1.state)[80], 1.0);

    auto r2 = env.step(r1.state, {1});
    auto r3 = env.step(r2.state, {2});
    EXPECT_TRUE(r3.done);
    EXPECT_TRUE(env.done(r3.state));
    for (auto b : env.action_mask(r3.state)) EXPECT_EQ(b, 0);
    EXPECT_THROW(env.step(r3.state, {3}), IllegalActionError);
    // reset leaves earlier states untouched
    EXPECT_EQ(s.config.count(), 0u);
}

TEST(Environment, EndsWhenNoUsefulColumnRemains)
{
    const Catalog c = uniform_catalog(4);
    const AnalyticCostModel model(c);
    const Environment env(c, model, {3, 5});
    EnvState s = env.reset(Workload{{Query{{lt("c2", 10.0)}}}});
    EXPECT_FALSE(env.done(s));
    auto r = env.step(s, {2});
    EXPECT_TRUE(r.done);
}

TEST(Environment, RewardIsNonNegative)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const Environment env(c, model);
    for (std::uint64_t seed = 0; seed != 30; ++seed) {
        EnvState s = env.reset(generate_workload(c, 5, {}, seed));
        Rng rng(seed);
        while (not env.done(s)) {
            const auto mask = env.action_mask(s);
            std::vector<std::size_t> legal;
            for (std::size_t j = 0; j != mask.size(); ++j)
                if (mask[j]) legal.push_back(j);
            auto r = env.step(s, {legal[std::size_t(rng.uniform_int(0, std::int64_t(legal.size()) - 1))]});
            EXPECT_GE(r.reward, 0.0);
            s = r.state;
        }
    }
}
