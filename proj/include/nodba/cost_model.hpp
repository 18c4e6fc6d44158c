#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "errors.hpp"
#include "util.hpp"
#include "workload.hpp"

namespace nodba {

/*----- IndexConfig ----------------------------------------------------------------------------------------------*/

/// The set L of indexed columns as an m-bit list, together with the budget k it must respect.
class IndexConfig
{
    std::vector<std::uint8_t> bits_;
    std::size_t k_;

public:
    IndexConfig(std::size_t m, std::size_t k) : bits_(m, 0), k_(k) { }

    /// Every column indexed; the budget is widened to m.
    static IndexConfig all(std::size_t m)
    {
        IndexConfig c(m, m);
        std::fill(c.bits_.begin(), c.bits_.end(), 1);
        return c;
    }

    static IndexConfig from_columns(std::size_t m, std::size_t k, const std::vector<std::size_t> &columns)
    {
        IndexConfig c(m, k);
        for (auto j : columns) c.set(j);
        return c;
    }

    std::size_t size() const { return bits_.size(); }
    std::size_t budget() const { return k_; }
    bool test(std::size_t j) const { return bits_.at(j) != 0; }
    const std::vector<std::uint8_t> & bits() const { return bits_; }

    std::size_t count() const
    {
        std::size_t n = 0;
        for (auto b : bits_) n += b;
        return n;
    }

    /// Sets bit j.  Throws `ConfigError` if that would exceed the budget.
    void set(std::size_t j)
    {
        if (test(j)) return;
        if (count() >= k_) throw ConfigError("index budget k=" + std::to_string(k_) + " exhausted");
        bits_[j] = 1;
    }

    std::vector<std::size_t> columns() const
    {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j != bits_.size(); ++j)
            if (bits_[j]) out.push_back(j);
        return out;
    }

    bool operator==(const IndexConfig&) const = default;
};

/*----- Analytic cost --------------------------------------------------------------------------------------------*/

inline constexpr double kDefaultFetchPenalty = 2.0;

/** Cost of one query: a full scan costs N; an index on a restricted column costs a B-tree descent plus a
 * random fetch per qualifying row, `log2(N) + F * Sel * N`.  The cheapest access path wins; at most one index
 * is used per query. */
inline double query_cost(const Query &query, const IndexConfig &config, const Catalog &catalog,
                         double fetch_penalty = kDefaultFetchPenalty)
{
    const double n = double(catalog.row_count());
    double best = n;
    for (auto &p : query.predicates) {
        const std::size_t j = catalog.column_index(p.column);
        if (not config.test(j)) continue;
        const double sel = predicate_selectivity(p, catalog.column(j));
        best = std::min(best, std::log2(n) + fetch_penalty * sel * n);
    }
    return best;
}

/// Same model evaluated from a precomputed selectivity row.
inline double query_cost_from_row(const SelectivityMatrix &mat, std::size_t row, const IndexConfig &config,
                                  double row_count, double fetch_penalty = kDefaultFetchPenalty)
{
    double best = row_count;
    const double lookup = std::log2(row_count);
    for (std::size_t j = 0; j != mat.cols(); ++j) {
        const double sel = mat(row, j);
        if (config.test(j) and sel < 1.0)
            best = std::min(best, lookup + fetch_penalty * sel * row_count);
    }
    return best;
}

inline double workload_cost(const Workload &workload, const IndexConfig &config, const Catalog &catalog,
                            double fetch_penalty = kDefaultFetchPenalty)
{
    double total = 0.0;
    for (auto &q : workload.queries) total += query_cost(q, config, catalog, fetch_penalty);
    return total;
}

/*----- Providers ------------------------------------------------------------------------------------------------*/

enum class CostCapability { Analytic, Live };

/// Source of cost(L).  Analytic providers are pure and may be shared by threads; live ones may not.
class CostProvider
{
public:
    virtual ~CostProvider() = default;

    virtual CostCapability capability() const = 0;

    /// Cost of each query of `workload` under `config`, in provider-specific units.
    virtual std::vector<double> query_costs(const Workload &workload, const IndexConfig &config) const = 0;

    virtual double workload_cost(const Workload &workload, const IndexConfig &config) const
    {
        double total = 0.0;
        for (double c : query_costs(workload, config)) total += c;
        return total;
    }
};

class AnalyticCostModel final : public CostProvider
{
    const Catalog *catalog_;
    double fetch_penalty_;

public:
    explicit AnalyticCostModel(const Catalog &catalog, double fetch_penalty = kDefaultFetchPenalty)
        : catalog_(&catalog), fetch_penalty_(fetch_penalty)
    {
        if (not (fetch_penalty > 0.0)) throw ConfigError("fetch penalty must be positive");
    }

    const Catalog & catalog() const { return *catalog_; }
    double fetch_penalty() const { return fetch_penalty_; }

    CostCapability capability() const override { return CostCapability::Analytic; }

    std::vector<double> query_costs(const Workload &workload, const IndexConfig &config) const override
    {
        std::vector<double> out;
        out.reserve(workload.size());
        for (auto &q : workload.queries) out.push_back(query_cost(q, config, *catalog_, fetch_penalty_));
        return out;
    }

    double workload_cost(const Workload &workload, const IndexConfig &config) const override
    {
        return nodba::workload_cost(workload, config, *catalog_, fetch_penalty_);
    }
};

/*----- CostReport -----------------------------------------------------------------------------------------------*/

struct CostRow
{
    double no_index = 0.0;
    double indexed_all = 0.0;
    double configured = 0.0;

    bool operator==(const CostRow&) const = default;
};

/// Per-query costs under no indexes, every column indexed, and a given configuration.
struct CostReport
{
    std::vector<CostRow> rows;
    CostRow totals;

    bool operator==(const CostReport&) const = default;
};

inline CostReport make_cost_report(std::vector<CostRow> rows)
{
    CostReport r{std::move(rows), {}};
    for (auto &row : r.rows) {
        r.totals.no_index += row.no_index;
        r.totals.indexed_all += row.indexed_all;
        r.totals.configured += row.configured;
    }
    return r;
}

inline CostReport cost_report(const Workload &workload, const IndexConfig &config, const CostProvider &provider)
{
    const std::size_t m = config.size();
    const auto none = provider.query_costs(workload, IndexConfig(m, 0));
    const auto all = provider.query_costs(workload, IndexConfig::all(m));
    const auto conf = provider.query_costs(workload, config);
    std::vector<CostRow> rows;
    for (std::size_t i = 0; i != workload.size(); ++i) rows.push_back({none.at(i), all.at(i), conf.at(i)});
    return make_cost_report(std::move(rows));
}

inline std::string cost_report_csv(const CostReport &r)
{
    std::string out = "query,no_index,indexed_all,configured\n";
    auto line = [&](const std::string &label, const CostRow &row) {
        out += label + "," + format_number(row.no_index) + "," + format_number(row.indexed_all) + "," +
               format_number(row.configured) + "\n";
    };
    for (std::size_t i = 0; i != r.rows.size(); ++i) line("Q" + std::to_string(i + 1), r.rows[i]);
    line("total", r.totals);
    return out;
}

inline nlohmann::json cost_report_json(const CostReport &r)
{
    auto row_json = [](const CostRow &row) {
        return nlohmann::json{
            {"no_index", row.no_index}, {"indexed_all", row.indexed_all}, {"configured", row.configured}};
    };
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i != r.rows.size(); ++i) {
        auto j = row_json(r.rows[i]);
        j["query"] = "Q" + std::to_string(i + 1);
        rows.push_back(j);
    }
    return {{"queries", rows}, {"totals", row_json(r.totals)}};
}

inline CostReport cost_report_from_json(const nlohmann::json &j)
{
    try {
        auto row = [](const nlohmann::json &x) {
            return CostRow{x.at("no_index").get<double>(), x.at("indexed_all").get<double>(),
                           x.at("configured").get<double>()};
        };
        std::vector<CostRow> rows;
        for (auto &x : j.at("queries")) rows.push_back(row(x));
        CostReport r{std::move(rows), row(j.at("totals"))};
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("cost report: ") + e.what());
    }
}

inline CostReport cost_report_from_csv(const std::string &text)
{
    std::istringstream in(text);
    std::string line;
    if (not std::getline(in, line) or line != "query,no_index,indexed_all,configured")
        throw ParseError("cost report CSV: bad header");
    CostReport r;
    bool have_total = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string label, a, b, c;
        if (not std::getline(fields, label, ',') or not std::getline(fields, a, ',') or
            not std::getline(fields, b, ',') or not std::getline(fields, c))
            throw ParseError("cost report CSV: bad row '" + line + "'");
        CostRow row;
        try {
            row = {std::stod(a), std::stod(b), std::stod(c)};
        } catch (const std::exception &) {
            throw ParseError("cost report CSV: bad number in '" + line + "'");
        }
        if (label == "total") {
            r.totals = row;
            have_total = true;
        } else {
            r.rows.push_back(row);
        }
    }
    if (not have_total) throw ParseError("cost report CSV: missing total row");
    return r;
}

}
