#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nodba;
using namespace nodba::testing;

namespace {

/** Scripted stand-in for a PostgreSQL session over table `t`.  It keeps an index set, answers count(*) from
 * fixed numbers, and prices a query at 100 per plan without an index on its first column, 10 with one. */
class FakeSession : public SqlSession
{
public:
    std::vector<std::string> log;
    std::set<std::string> indexes{"nodba_idx_c1", "other_idx"};
    std::optional<std::string> fail_on;

    Rows execute(const std::string &sql) override
    {
        log.push_back(sql);
        if (fail_on and sql.find(*fail_on) != std::string::npos) throw DbError("scripted failure");
        if (sql == "SELECT count(*) FROM t") return {{"1000"}};
        if (sql.starts_with("SELECT count(*) FROM t WHERE ")) return {{sql.find("c0") != std::string::npos ? "250" : "40"}};
        if (sql.starts_with("SELECT indexname FROM pg_indexes")) {
            Rows rows;
            for (auto &n : indexes)
                if (n.starts_with("nodba")) rows.push_back({n});
            return rows;
        }
        if (sql.starts_with("CREATE INDEX IF NOT EXISTS ")) {
            const auto rest = sql.substr(27);
            indexes.insert(rest.substr(0, rest.find(' ')));
            return {};
        }
        if (sql.starts_with("DROP INDEX IF EXISTS ")) {
            indexes.erase(sql.substr(21));
            return {};
        }
        if (sql.starts_with("ANALYZE")) return {};
        if (sql.starts_with("EXPLAIN ")) {
            const auto where = sql.find("WHERE ");
            const auto col = sql.substr(where + 6, 2);
            const bool indexed = indexes.count("nodba_idx_" + col);
            return {{indexed ? "Index Scan using nodba_idx_x on t  (cost=0.29..10.50 rows=5 width=4)"
                             : "Aggregate  (cost=98.00..100.25 rows=1 width=8)"},
                    {"  ->  Seq Scan on t  (cost=0.00..95.00 rows=1000 width=0)"}};
        }
        throw DbError("unexpected statement: " + sql);
    }
};

}

TEST(PlanCost, ParsesRootNodeTotal)
{
    EXPECT_DOUBLE_EQ(DbmsConnector::parse_plan_cost({{"Aggregate  (cost=180.00..180.01 rows=1 width=8)"}}), 180.01);
    EXPECT_DOUBLE_EQ(DbmsConnector::parse_plan_cost({{"Seq Scan on t  (cost=0.00..35 rows=2550 width=4)"}}), 35.0);
    EXPECT_THROW(DbmsConnector::parse_plan_cost({}), ParseError);
    EXPECT_THROW(DbmsConnector::parse_plan_cost({{"Result"}}), ParseError);
}

TEST(Connector, RejectsUnsafeIdentifiers)
{
    FakeSession s;
    const Catalog bad("t; drop", 10, {{"a", ColumnKind::Integer, 5, 0.0, 9.0, {}}});
    EXPECT_THROW(DbmsConnector(s, bad), ValidationError);
}

TEST(Connector, MeasuresAndCachesSelectivity)
{
    FakeSession s;
    const Catalog c = uniform_catalog(3);
    DbmsConnector conn(s, c);
    const Workload w{{Query{{lt("c0", 250.0), eq("c2", 4.0)}}}};
    const auto mat = conn.measure_matrix(w);
    EXPECT_DOUBLE_EQ(mat(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(mat(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(mat(0, 2), 0.04);
    const auto before = s.log.size();
    conn.measure_matrix(w);
    EXPECT_EQ(s.log.size(), before);
}

TEST(Connector, ManagesOnlyPrefixedIndexes)
{
    FakeSession s;
    s.indexes.insert("nodbaish");
    const Catalog c = uniform_catalog(3);
    DbmsConnector conn(s, c);
    EXPECT_EQ(conn.managed_indexes(), (std::vector<std::string>{"nodba_idx_c1"}));
    conn.apply_config(IndexConfig::from_columns(3, 2, {0, 2}));
    EXPECT_EQ(conn.managed_indexes(), (std::vector<std::string>{"nodba_idx_c0", "nodba_idx_c1", "nodba_idx_c2"}));
    conn.clear_config();
    EXPECT_EQ(s.indexes, (std::set<std::string>{"nodbaish", "other_idx"}));
}

TEST(Connector, LiveCostsRestorePriorIndexes)
{
    FakeSession s;
    const Catalog c = uniform_catalog(3);
    DbmsConnector conn(s, c);
    LiveCostProvider live(conn);
    const Workload w{{Query{{lt("c0", 10.0)}}, Query{{lt("c2", 10.0)}}}};

    EXPECT_EQ(live.query_costs(w, IndexConfig::from_columns(3, 1, {0})), (std::vector<double>{10.5, 100.25}));
    EXPECT_EQ(s.indexes, (std::set<std::string>{"nodba_idx_c1", "other_idx"}));
    EXPECT_DOUBLE_EQ(live.workload_cost(w, IndexConfig(3, 1)), 200.5);

    s.fail_on = "EXPLAIN";
    EXPECT_THROW(live.query_costs(w, IndexConfig::from_columns(3, 1, {2})), DbError);
    EXPECT_EQ(s.indexes, (std::set<std::string>{"nodba_idx_c1", "other_idx"}));
}

TEST(Connector, EmptyTable)
{
    struct Empty : FakeSession {
        Rows execute(const std::string &sql) override
        {
            if (sql == "SELECT count(*) FROM t") return {{"0"}};
            return FakeSession::execute(sql);
        }
    } s;
    const Catalog c = uniform_catalog(1);
    DbmsConnector conn(s, c);
    EXPECT_THROW(conn.measure_selectivity(lt("c0", 3.0)), DbError);
}

TEST(DbUrl, FlagThenEnvironment)
{
    EXPECT_EQ(*resolve_db_url("postgresql://x"), "postgresql://x");
}

/*----- Against a real server, only when NODBA_DB_URL names one holding the lineitem table ------------------*/

TEST(LiveDatabase, ShipdateSelectivityNearAnalytic)
{
    const auto url = resolve_db_url();
    if (not url) GTEST_SKIP() << "NODBA_DB_URL not set";
    PgSession session(*url);
    const Catalog c = lineitem();
    DbmsConnector conn(session, c);
    const auto p = lt("l_shipdate", std::string("1994-01-01"));
    const double analytic = selectivity(Query{{p}}, c.column_index("l_shipdate"), c);
    EXPECT_NEAR(conn.measure_selectivity(p), analytic, 0.05);
}

TEST(LiveDatabase, IndexChangesPlanCostAndIsCleanedUp)
{
    const auto url = resolve_db_url();
    if (not url) GTEST_SKIP() << "NODBA_DB_URL not set";
    PgSession session(*url);
    const Catalog c = lineitem();
    DbmsConnector conn(session, c);
    const auto prior = conn.managed_indexes();
    LiveCostProvider live(conn);
    const Workload w{{Query{{lt("l_orderkey", 1000.0)}}}};
    const std::size_t m = c.num_columns();
    const double none = live.workload_cost(w, IndexConfig(m, 1));
    const double with = live.workload_cost(w, IndexConfig::from_columns(m, 1, {0}));
    EXPECT_LT(with, none);
    EXPECT_EQ(conn.managed_indexes(), prior);
}
