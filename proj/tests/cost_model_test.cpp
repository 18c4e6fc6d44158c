#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nodba;
using namespace nodba::testing;

TEST(IndexConfig, BudgetAndBits)
{
    IndexConfig c(5, 2);
    EXPECT_EQ(c.count(), 0u);
    c.set(3);
    c.set(3);
    c.set(0);
    EXPECT_EQ(c.columns(), (std::vector<std::size_t>{0, 3}));
    EXPECT_THROW(c.set(1), ConfigError);
    EXPECT_EQ(IndexConfig::all(4).count(), 4u);
    EXPECT_THROW(c.test(5), std::out_of_range);
}

TEST(AnalyticCost, WorkedExamples)
{
    const Catalog c = uniform_catalog(2, 1000);
    const AnalyticCostModel model(c);
    const Query q{{lt("c0", 100.0)}};

    EXPECT_EQ(model.workload_cost(Workload{{q}}, IndexConfig(2, 1)), 1000.0);

    const double expected = std::log2(1000.0) + 2.0 * 0.1 * 1000.0;
    const double indexed = model.workload_cost(Workload{{q}}, IndexConfig::from_columns(2, 1, {0}));
    EXPECT_DOUBLE_EQ(indexed, expected);
    EXPECT_NEAR(indexed, 209.97, 0.005);

    // an index on a column the query ignores does nothing
    EXPECT_EQ(model.workload_cost(Workload{{q}}, IndexConfig::from_columns(2, 1, {1})), 1000.0);

    // an index that would fetch most rows loses to the scan
    const Query wide{{lt("c0", 600.0)}};
    EXPECT_EQ(model.workload_cost(Workload{{wide}}, IndexConfig::from_columns(2, 1, {0})), 1000.0);
}

TEST(AnalyticCost, PicksCheapestIndex)
{
    const Catalog c = uniform_catalog(3, 1'000'000);
    const AnalyticCostModel model(c);
    const Query q{{lt("c0", 100.0), lt("c1", 10.0), lt("c2", 50.0)}};
    const double n = 1e6;
    EXPECT_DOUBLE_EQ(model.workload_cost(Workload{{q}}, IndexConfig::all(3)), std::log2(n) + 2.0 * 0.01 * n);
    EXPECT_DOUBLE_EQ(model.workload_cost(Workload{{q}}, IndexConfig::from_columns(3, 2, {0, 2})),
                     std::log2(n) + 2.0 * 0.05 * n);
}

TEST(AnalyticCost, MonotoneInConfig)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const std::size_t m = c.num_columns();
    for (std::uint64_t seed = 0; seed != 20; ++seed) {
        const Workload w = generate_workload(c, 5, {}, seed);
        IndexConfig cfg(m, m);
        double prev = model.workload_cost(w, cfg);
        Rng rng(seed);
        for (std::size_t step = 0; step != m; ++step) {
            cfg.set(std::size_t(rng.uniform_int(0, std::int64_t(m) - 1)));
            const double cur = model.workload_cost(w, cfg);
            EXPECT_LE(cur, prev);
            prev = cur;
        }
    }
}

TEST(AnalyticCost, RowFormAgrees)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const Workload w = generate_workload(c, 5, {}, 11);
    const auto mat = build_matrix(w, c);
    const auto cfg = IndexConfig::from_columns(c.num_columns(), 3, {0, 5, 10});
    const auto costs = model.query_costs(w, cfg);
    for (std::size_t i = 0; i != w.size(); ++i)
        EXPECT_DOUBLE_EQ(query_cost_from_row(mat, i, cfg, double(c.row_count())), costs[i]);
}

TEST(AnalyticCost, RejectsBadPenalty)
{
    const Catalog c = uniform_catalog(1);
    EXPECT_THROW(AnalyticCostModel(c, 0.0), ConfigError);
}

TEST(CostReport, TotalsAndColumns)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const Workload w = parse_workload(fixture("w1.json"));
    const auto cfg = IndexConfig::from_columns(c.num_columns(), 3, {0, 1});
    const CostReport r = cost_report(w, cfg, model);
    ASSERT_EQ(r.rows.size(), 5u);
    double none = 0, all = 0, conf = 0;
    for (auto &row : r.rows) {
        EXPECT_EQ(row.no_index, double(c.row_count()));
        EXPECT_LE(row.indexed_all, row.configured);
        EXPECT_LE(row.configured, row.no_index);
        none += row.no_index;
        all += row.indexed_all;
        conf += row.configured;
    }
    EXPECT_DOUBLE_EQ(r.totals.no_index, none);
    EXPECT_DOUBLE_EQ(r.totals.indexed_all, all);
    EXPECT_DOUBLE_EQ(r.totals.configured, conf);
    EXPECT_DOUBLE_EQ(r.totals.configured, model.workload_cost(w, cfg));
}

TEST(CostReport, CsvAndJsonRoundTrip)
{
    const Catalog c = lineitem();
    const AnalyticCostModel model(c);
    const Workload w = parse_workload(fixture("w2.json"));
    const CostReport r = cost_report(w, IndexConfig::from_columns(c.num_columns(), 3, {0, 4}), model);

    const std::string csv = cost_report_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "query,no_index,indexed_all,configured");
    EXPECT_EQ(cost_report_from_csv(csv), r);
    EXPECT_EQ(cost_report_from_json(nlohmann::json::parse(cost_report_json(r).dump())), r);

    EXPECT_THROW(cost_report_from_csv("nope\n"), ParseError);
    EXPECT_THROW(cost_report_from_csv("query,no_index,indexed_all,configured\nQ1,1,2,3\n"), ParseError);
}
