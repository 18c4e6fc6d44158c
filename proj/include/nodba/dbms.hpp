#pragma once

#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <dlfcn.h>

#include "catalog.hpp"
#include "cost_model.hpp"
#include "errors.hpp"
#include "workload.hpp"

namespace nodba {

/// Minimal synchronous SQL session: one statement at a time, results as text.
class SqlSession
{
public:
    using Rows = std::vector<std::vector<std::string>>;

    virtual ~SqlSession() = default;

    /// Runs one statement.  Commands return no rows.  Failures throw `DbError`.
    virtual Rows execute(const std::string &sql) = 0;
};

/*----- PostgreSQL via libpq -------------------------------------------------------------------------------------*/

/** PostgreSQL session backed by libpq, resolved at run time so that building does not require the client
 * headers.  Only the handful of entry points used here are bound. */
class PgSession final : public SqlSession
{
    struct Api
    {
        void *lib = nullptr;
        void * (*connectdb)(const char *) = nullptr;
        int (*status)(const void *) = nullptr;
        char * (*error_message)(const void *) = nullptr;
        void (*finish)(void *) = nullptr;
        void * (*exec)(void *, const char *) = nullptr;
        int (*result_status)(const void *) = nullptr;
        char * (*result_error_message)(const void *) = nullptr;
        int (*ntuples)(const void *) = nullptr;
        int (*nfields)(const void *) = nullptr;
        char * (*getvalue)(const void *, int, int) = nullptr;
        void (*clear)(void *) = nullptr;
    };

    static constexpr int kConnectionOk = 0;
    static constexpr int kCommandOk = 1;
    static constexpr int kTuplesOk = 2;

    Api api_;
    void *conn_ = nullptr;

    template<typename Fn>
    static void bind(void *lib, Fn &fn, const char *name)
    {
        void *sym = dlsym(lib, name);
        if (not sym) throw DbError(std::string("libpq: missing symbol ") + name);
        fn = reinterpret_cast<Fn>(sym);
    }

    static Api load_api()
    {
        Api api;
        for (const char *name : {"libpq.so.5", "libpq.so"})
            if ((api.lib = dlopen(name, RTLD_NOW | RTLD_LOCAL))) break;
        if (not api.lib) throw DbError("PostgreSQL client library (libpq) not found");
        bind(api.lib, api.connectdb, "PQconnectdb");
        bind(api.lib, api.status, "PQstatus");
        bind(api.lib, api.error_message, "PQerrorMessage");
        bind(api.lib, api.finish, "PQfinish");
        bind(api.lib, api.exec, "PQexec");
        bind(api.lib, api.result_status, "PQresultStatus");
        bind(api.lib, api.result_error_message, "PQresultErrorMessage");
        bind(api.lib, api.ntuples, "PQntuples");
        bind(api.lib, api.nfields, "PQnfields");
        bind(api.lib, api.getvalue, "PQgetvalue");
        bind(api.lib, api.clear, "PQclear");
        return api;
    }

public:
    explicit PgSession(const std::string &url, std::chrono::milliseconds statement_timeout = std::chrono::seconds(60))
        : api_(load_api())
    {
        conn_ = api_.connectdb(url.c_str());
        if (not conn_ or api_.status(conn_) != kConnectionOk) {
            std::string msg = conn_ ? api_.error_message(conn_) : "out of memory";
            if (conn_) api_.finish(conn_);
            dlclose(api_.lib);
            throw DbError("connection failed: " + msg);
        }
        execute("SET statement_timeout = " + std::to_string(statement_timeout.count()));
    }

    PgSession(const PgSession&) = delete;
    PgSession & operator=(const PgSession&) = delete;

    ~PgSession() override
    {
        if (conn_) api_.finish(conn_);
        if (api_.lib) dlclose(api_.lib);
    }

    Rows execute(const std::string &sql) override
    {
        void *res = api_.exec(conn_, sql.c_str());
        if (not res) throw DbError(std::string("query failed: ") + api_.error_message(conn_));
        const int st = api_.result_status(res);
        if (st != kCommandOk and st != kTuplesOk) {
            std::string msg = api_.result_error_message(res);
            api_.clear(res);
            throw DbError("statement failed: " + msg + " [" + sql + "]");
        }
        Rows rows;
        if (st == kTuplesOk) {
            const int n = api_.ntuples(res), f = api_.nfields(res);
            for (int r = 0; r != n; ++r) {
                auto &row = rows.emplace_back();
                for (int c = 0; c != f; ++c) row.emplace_back(api_.getvalue(res, r, c));
            }
        }
        api_.clear(res);
        return rows;
    }
};

/// Connection string from `--db-url`, else the `NODBA_DB_URL` environment variable.
inline std::optional<std::string> resolve_db_url(const std::string &flag = {})
{
    if (not flag.empty()) return flag;
    if (const char *env = std::getenv("NODBA_DB_URL"); env and *env) return std::string(env);
    return std::nullopt;
}

/*----- Connector ------------------------------------------------------------------------------------------------*/

inline constexpr std::string_view kIndexPrefix = "nodba_idx_";

/** Live database operations for one table: measured selectivities, plan-cost estimates, and creation and
 * removal of the single-column indexes this tool owns (named `nodba_idx_<column>`).
 *
 * Plan costs are read from PostgreSQL's text `EXPLAIN` output: the first line is the root plan node and
 * carries `cost=<startup>..<total>`; the total is returned. */
class DbmsConnector
{
    SqlSession *session_;
    const Catalog *catalog_;
    std::optional<std::int64_t> total_rows_;
    std::map<std::string, double> selectivity_cache_;

    static void check_identifier(std::string_view id)
    {
        static const std::regex re("[A-Za-z_][A-Za-z0-9_]*");
        if (not std::regex_match(id.begin(), id.end(), re))
            throw ValidationError("not a plain SQL identifier: '" + std::string(id) + "'");
    }

public:
    DbmsConnector(SqlSession &session, const Catalog &catalog) : session_(&session), catalog_(&catalog)
    {
        check_identifier(catalog.table_name());
        for (auto &c : catalog.columns()) check_identifier(c.name);
    }

    const Catalog & catalog() const { return *catalog_; }

    static std::string index_name(std::string_view column) { return std::string(kIndexPrefix) + std::string(column); }

    std::int64_t total_rows()
    {
        if (not total_rows_) {
            const auto rows = session_->execute("SELECT count(*) FROM " + catalog_->table_name());
            if (rows.empty() or rows[0].empty()) throw DbError("count(*) returned no rows");
            const std::int64_t n = std::stoll(rows[0][0]);
            if (n <= 0) throw DbError("table " + catalog_->table_name() + " has no rows");
            total_rows_ = n;
        }
        return *total_rows_;
    }

    /// Fraction of rows satisfying a single predicate, counted on the live table.  Cached per predicate.
    double measure_selectivity(const Predicate &p)
    {
        catalog_->column_index(p.column);
        const std::string where = predicate_sql(p);
        if (auto it = selectivity_cache_.find(where); it != selectivity_cache_.end()) return it->second;
        const std::int64_t total = total_rows();
        const auto rows = session_->execute("SELECT count(*) FROM " + catalog_->table_name() + " WHERE " + where);
        if (rows.empty() or rows[0].empty()) throw DbError("count(*) returned no rows");
        const double sel = double(std::stoll(rows[0][0])) / double(total);
        selectivity_cache_.emplace(where, sel);
        return sel;
    }

    /// Measured counterpart of `build_matrix`.
    SelectivityMatrix measure_matrix(const Workload &w)
    {
        validate_workload(w, *catalog_);
        SelectivityMatrix mat(w.size(), catalog_->num_columns());
        for (std::size_t i = 0; i != w.size(); ++i)
            for (auto &p : w.queries[i].predicates) mat(i, catalog_->column_index(p.column)) = measure_selectivity(p);
        return mat;
    }

    /// Total estimated cost of the root plan node, parsed from the first line of `EXPLAIN`.
    static double parse_plan_cost(const SqlSession::Rows &plan)
    {
        if (plan.empty() or plan[0].empty()) throw ParseError("EXPLAIN returned no plan");
        static const std::regex re(R"(cost=([0-9]+(?:\.[0-9]+)?)\.\.([0-9]+(?:\.[0-9]+)?))");
        std::smatch m;
        if (not std::regex_search(plan[0][0], m, re))
            throw ParseError("unexpected plan text: '" + plan[0][0] + "'");
        return std::stod(m[2].str());
    }

    double plan_cost(const std::string &sql) { return parse_plan_cost(session_->execute("EXPLAIN " + sql)); }

    /// Names of every index carrying the tool's prefix.
    std::vector<std::string> managed_indexes()
    {
        std::vector<std::string> out;
        for (auto &row : session_->execute("SELECT indexname FROM pg_indexes WHERE indexname LIKE 'nodba%' "
                                           "ORDER BY indexname"))
            if (not row.empty() and row[0].starts_with(kIndexPrefix)) out.push_back(row[0]);
        return out;
    }

    /// Creates the configured indexes that do not exist yet.
    void apply_config(const IndexConfig &config)
    {
        if (config.size() != catalog_->num_columns()) throw ConfigError("apply_config: config width mismatch");
        for (auto j : config.columns()) create_index(catalog_->column(j).name);
    }

    /// Drops every `nodba_idx_*` index and nothing else.
    void clear_config()
    {
        for (auto &name : managed_indexes()) session_->execute("DROP INDEX IF EXISTS " + name);
    }

    void refresh_statistics() { session_->execute("ANALYZE " + catalog_->table_name()); }

    /** Per-query plan costs with exactly `config`'s indexes present.  The managed indexes that existed before
     * the call are restored afterwards, also when a step fails. */
    std::vector<double> live_query_costs(const Workload &w, const IndexConfig &config)
    {
        const auto prior = managed_indexes();
        std::vector<double> costs;
        try {
            clear_config();
            apply_config(config);
            refresh_statistics();
            for (auto &q : w.queries) costs.push_back(plan_cost(to_sql(q, catalog_->table_name())));
        } catch (...) {
            try {
                restore(prior);
            } catch (...) { }
            throw;
        }
        restore(prior);
        return costs;
    }

private:
    void create_index(const std::string &column)
    {
        session_->execute("CREATE INDEX IF NOT EXISTS " + index_name(column) + " ON " + catalog_->table_name() +
                          " (" + column + ")");
    }

    void restore(const std::vector<std::string> &prior)
    {
        clear_config();
        for (auto &name : prior) {
            const std::string column = name.substr(kIndexPrefix.size());
            if (catalog_->find_column(column)) create_index(column);
        }
    }
};

/// CostProvider over a live database; not thread-safe.
class LiveCostProvider final : public CostProvider
{
    DbmsConnector *conn_;

public:
    explicit LiveCostProvider(DbmsConnector &conn) : conn_(&conn) { }

    CostCapability capability() const override { return CostCapability::Live; }

    std::vector<double> query_costs(const Workload &workload, const IndexConfig &config) const override
    {
        return conn_->live_query_costs(workload, config);
    }
};

}
