// nodba: train and evaluate a learned index advisor from the command line.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <nodba.hpp>

using namespace nodba;

namespace {

const std::string kDefaultCatalog = std::string(NODBA_FIXTURE_DIR) + "/lineitem_sf1.json";

struct UsageError : Error { using Error::Error; };

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (not item.empty()) out.push_back(item);
    return out;
}

std::vector<std::size_t> column_positions(const Catalog &catalog, const std::string &list)
{
    std::vector<std::size_t> out;
    for (auto &name : split_list(list)) {
        auto j = catalog.find_column(name);
        if (not j) throw UsageError("unknown column '" + name + "'");
        out.push_back(*j);
    }
    return out;
}

std::vector<std::string> column_names(const Catalog &catalog, const IndexConfig &config)
{
    std::vector<std::string> out;
    for (auto j : config.columns()) out.push_back(catalog.column(j).name);
    return out;
}

std::uint64_t fresh_seed()
{
    std::random_device rd;
    return (std::uint64_t(rd()) << 32) ^ rd();
}

/// Cost provider chosen by `--cost`, owning the live session when one is needed.
struct ProviderHolder
{
    std::unique_ptr<PgSession> session;
    std::unique_ptr<DbmsConnector> connector;
    std::unique_ptr<CostProvider> provider;

    ProviderHolder(const Catalog &catalog, const std::string &kind, const std::string &db_url)
    {
        if (kind == "analytic") {
            provider = std::make_unique<AnalyticCostModel>(catalog);
        } else if (kind == "dbms") {
            auto url = resolve_db_url(db_url);
            if (not url) throw UsageError("--cost dbms needs --db-url or NODBA_DB_URL");
            session = std::make_unique<PgSession>(*url);
            connector = std::make_unique<DbmsConnector>(*session, catalog);
            provider = std::make_unique<LiveCostProvider>(*connector);
        } else {
            throw UsageError("--cost must be 'analytic' or 'dbms'");
        }
    }
};

struct CommonOpts
{
    std::string catalog = kDefaultCatalog;
    std::string cost = "analytic";
    std::string db_url;
};

void add_cost_opts(CLI::App *cmd, CommonOpts &o)
{
    cmd->add_option("--cost", o.cost, "Cost provider: analytic or dbms")->capture_default_str();
    cmd->add_option("--db-url", o.db_url, "Database connection string (overrides NODBA_DB_URL)");
}

struct ProfileOpts
{
    std::size_t min_preds = 4;
    std::size_t max_preds = 6;
    double eq_prob = 0.5;
    std::string columns;

    void add(CLI::App *cmd)
    {
        cmd->add_option("--min-preds", min_preds, "Minimum predicates per query")->capture_default_str();
        cmd->add_option("--max-preds", max_preds, "Maximum predicates per query")->capture_default_str();
        cmd->add_option("--eq-prob", eq_prob, "Probability of an equality predicate")->capture_default_str();
        cmd->add_option("--columns", columns, "Comma-separated candidate columns (default: all)");
    }

    GeneratorProfile build(const Catalog &catalog) const
    {
        return GeneratorProfile{column_positions(catalog, columns), min_preds, max_preds, eq_prob};
    }
};

/*----- gen-workload ---------------------------------------------------------------------------------------------*/

struct GenOpts
{
    CommonOpts common;
    ProfileOpts profile;
    std::size_t queries = 5;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_gen_workload(const GenOpts &o)
{
    const Catalog catalog = load_catalog(o.common.catalog);
    const std::uint64_t seed = o.seed.value_or(fresh_seed());
    const Workload w = generate_workload(catalog, o.queries, o.profile.build(catalog), seed);
    write_workload(w, o.out);
    std::cout << "seed " << seed << "\n";
    return 0;
}

/*----- train ----------------------------------------------------------------------------------------------------*/

struct TrainOpts
{
    CommonOpts common;
    ProfileOpts profile;
    EnvConfig env;
    CemConfig cem;
    std::optional<std::uint64_t> seed;
    std::string out = "policy.json";
    std::string history = "history.csv";
};

int cmd_train(TrainOpts o)
{
    const Catalog catalog = load_catalog(o.common.catalog);
    if (o.env.k < 1 or o.env.k > catalog.num_columns())
        throw UsageError("--k must be between 1 and the number of columns (" +
                         std::to_string(catalog.num_columns()) + ")");
    o.cem.seed = o.seed.value_or(fresh_seed());
    ProviderHolder ph(catalog, o.common.cost, o.common.db_url);
    const Environment env(catalog, *ph.provider, o.env);
    const auto result = cem_train(env, generator_source(catalog, o.env.n_fixed, o.profile.build(catalog)), o.cem);
    save_policy(PolicyFile{result.best_params, o.env, o.cem}, o.out);
    write_history_csv(result, o.history);
    std::cout << "seed " << o.cem.seed << "\n"
              << "best fitness " << format_number(result.best_fitness) << "\n"
              << "wrote " << o.out << " and " << o.history << "\n";
    return 0;
}

/*----- recommend ------------------------------------------------------------------------------------------------*/

struct RecommendOpts
{
    CommonOpts common;
    std::string policy;
    std::string workload;
};

int cmd_recommend(const RecommendOpts &o)
{
    const Catalog catalog = load_catalog(o.common.catalog);
    const PolicyFile pf = load_policy(o.policy);
    check_policy_fits(pf, catalog.num_columns(), pf.env);
    const Workload w = parse_workload(o.workload);
    ProviderHolder ph(catalog, o.common.cost, o.common.db_url);
    const Environment env(catalog, *ph.provider, pf.env);

    const auto t0 = std::chrono::steady_clock::now();
    const IndexConfig config = recommend(pf.params, w, env);
    const auto t1 = std::chrono::steady_clock::now();

    const double cost_conf = ph.provider->workload_cost(w, config);
    const double cost_none = ph.provider->workload_cost(w, IndexConfig(catalog.num_columns(), 0));
    const nlohmann::json out = {
        {"indexes", column_names(catalog, config)},
        {"cost_configured", cost_conf},
        {"cost_no_index", cost_none},
        {"reward", reward_fn(cost_none, cost_conf)},
    };
    std::cout << out.dump() << "\n";
    std::cerr << "prediction took " << std::chrono::duration<double, std::milli>(t1 - t0).count() << " ms\n";
    return 0;
}

/*----- evaluate -------------------------------------------------------------------------------------------------*/

struct EvaluateOpts
{
    CommonOpts common;
    std::string workload;
    std::string policy;
    std::string indexes;
    std::string format = "csv";
    std::string out;
};

int cmd_evaluate(const EvaluateOpts &o)
{
    if (o.policy.empty() == o.indexes.empty()) throw UsageError("pass exactly one of --policy or --indexes");
    if (o.format != "csv" and o.format != "json") throw UsageError("--format must be csv or json");
    const Catalog catalog = load_catalog(o.common.catalog);
    const Workload w = parse_workload(o.workload);
    validate_workload(w, catalog);
    ProviderHolder ph(catalog, o.common.cost, o.common.db_url);

    IndexConfig config(catalog.num_columns(), 0);
    if (not o.indexes.empty()) {
        const auto cols = column_positions(catalog, o.indexes);
        config = IndexConfig::from_columns(catalog.num_columns(), cols.size(), cols);
    } else {
        const PolicyFile pf = load_policy(o.policy);
        check_policy_fits(pf, catalog.num_columns(), pf.env);
        config = recommend(pf.params, w, Environment(catalog, *ph.provider, pf.env));
    }

    const CostReport report = cost_report(w, config, *ph.provider);
    const std::string text = o.format == "csv" ? cost_report_csv(report) : cost_report_json(report).dump(2) + "\n";
    if (o.out.empty()) std::cout << text;
    else write_text_file(o.out, text);
    return 0;
}

/*----- oracle ---------------------------------------------------------------------------------------------------*/

struct OracleOpts
{
    CommonOpts common;
    std::string workload;
    std::size_t k = 3;
    std::string regret_policy;
};

int cmd_oracle(const OracleOpts &o)
{
    const Catalog catalog = load_catalog(o.common.catalog);
    if (o.k > catalog.num_columns()) throw UsageError("--k exceeds the number of columns");
    const Workload w = parse_workload(o.workload);
    ProviderHolder ph(catalog, o.common.cost, o.common.db_url);
    const auto res = enumerate_optimal(w, catalog, o.k, *ph.provider);
    nlohmann::json out = {
        {"columns", column_names(catalog, res.best)},
        {"cost", res.cost},
        {"configs_evaluated", res.configs_evaluated},
    };
    if (not o.regret_policy.empty()) {
        const PolicyFile pf = load_policy(o.regret_policy);
        check_policy_fits(pf, catalog.num_columns(), pf.env);
        const IndexConfig rec = recommend(pf.params, w, Environment(catalog, *ph.provider, pf.env));
        out["policy_columns"] = column_names(catalog, rec);
        out["regret"] = ph.provider->workload_cost(w, rec) / res.cost;
    }
    std::cout << out.dump() << "\n";
    return 0;
}

}

int main(int argc, char **argv)
{
    CLI::App app{"nodba: learned secondary-index advisor"};
    app.require_subcommand(1);

    GenOpts gen;
    auto *g = app.add_subcommand("gen-workload", "Generate a random conjunctive workload");
    g->add_option("--catalog", gen.common.catalog, "Catalog JSON")->capture_default_str();
    g->add_option("--queries", gen.queries, "Number of queries")->check(CLI::PositiveNumber)->capture_default_str();
    g->add_option("--seed", gen.seed, "Random seed (drawn and printed if omitted)");
    g->add_option("--out", gen.out, "Output workload JSON")->required();
    gen.profile.add(g);

    TrainOpts train;
    auto *t = app.add_subcommand("train", "Train a policy with the cross-entropy method");
    t->add_option("--catalog", train.common.catalog, "Catalog JSON")->capture_default_str();
    t->add_option("--k", train.env.k, "Index budget")->capture_default_str();
    t->add_option("--n-fixed", train.env.n_fixed, "Query rows in the encoding")->check(CLI::PositiveNumber)
        ->capture_default_str();
    t->add_option("--population", train.cem.population, "CEM population")->check(CLI::PositiveNumber)
        ->capture_default_str();
    t->add_option("--iterations", train.cem.iterations, "CEM iterations")->check(CLI::PositiveNumber)
        ->capture_default_str();
    t->add_option("--elite-frac", train.cem.elite_fraction, "Elite fraction")->check(CLI::Range(1e-9, 1.0))
        ->capture_default_str();
    t->add_option("--episodes", train.cem.episodes_per_eval, "Training workloads per iteration")
        ->check(CLI::PositiveNumber)->capture_default_str();
    t->add_option("--init-std", train.cem.init_std, "Initial sampling std")->capture_default_str();
    t->add_option("--extra-noise", train.cem.extra_noise_initial, "Initial extra sampling variance")
        ->capture_default_str();
    t->add_option("--seed", train.seed, "Random seed (drawn and printed if omitted)");
    t->add_option("--threads", train.cem.threads, "Evaluation threads (0 = all cores)")->capture_default_str();
    t->add_option("--out", train.out, "Policy JSON output")->capture_default_str();
    t->add_option("--history", train.history, "Per-iteration history CSV")->capture_default_str();
    train.profile.add(t);
    add_cost_opts(t, train.common);

    RecommendOpts rec;
    auto *r = app.add_subcommand("recommend", "Recommend indexes for a workload");
    r->add_option("--catalog", rec.common.catalog, "Catalog JSON")->capture_default_str();
    r->add_option("--policy", rec.policy, "Policy JSON")->required();
    r->add_option("--workload", rec.workload, "Workload JSON")->required();
    add_cost_opts(r, rec.common);

    EvaluateOpts ev;
    auto *e = app.add_subcommand("evaluate", "Cost report: no indexes, all indexes, and a configuration");
    e->add_option("--catalog", ev.common.catalog, "Catalog JSON")->capture_default_str();
    e->add_option("--workload", ev.workload, "Workload JSON")->required();
    e->add_option("--policy", ev.policy, "Policy whose recommendation is evaluated");
    e->add_option("--indexes", ev.indexes, "Comma-separated columns to evaluate");
    e->add_option("--format", ev.format, "csv or json")->capture_default_str();
    e->add_option("--out", ev.out, "Output file (default: stdout)");
    add_cost_opts(e, ev.common);

    OracleOpts orc;
    auto *o = app.add_subcommand("oracle", "Exhaustive optimal index set");
    o->add_option("--catalog", orc.common.catalog, "Catalog JSON")->capture_default_str();
    o->add_option("--workload", orc.workload, "Workload JSON")->required();
    o->add_option("--k", orc.k, "Index budget")->capture_default_str();
    o->add_option("--regret", orc.regret_policy, "Also report this policy's regret ratio");
    add_cost_opts(o, orc.common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*g) return cmd_gen_workload(gen);
        if (*t) return cmd_train(train);
        if (*r) return cmd_recommend(rec);
        if (*e) return cmd_evaluate(ev);
        if (*o) return cmd_oracle(orc);
    } catch (const UsageError &ex) {
        std::cerr << "usage error: " << ex.what() << "\n";
        return 2;
    } catch (const ConfigError &ex) {
        std::cerr << "configuration error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception &ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
