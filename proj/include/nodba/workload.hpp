#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

#include "catalog.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace nodba {

enum class PredicateOp { Eq, Lt };

/// Predicate literal: numbers for integer/decimal columns, strings for dates (ISO) and categories.
using Literal = std::variant<double, std::string>;

struct Predicate
{
    std::string column;
    PredicateOp op = PredicateOp::Eq;
    Literal value;

    bool operator==(const Predicate&) const = default;
};

/// Conjunction of selections: `SELECT count(*) FROM t WHERE p1 AND p2 AND ...`.
struct Query
{
    std::vector<Predicate> predicates;

    const Predicate * find(std::string_view column) const
    {
        for (auto &p : predicates)
            if (p.column == column) return &p;
        return nullptr;
    }

    bool operator==(const Query&) const = default;
};

struct Workload
{
    std::vector<Query> queries;

    std::size_t size() const { return queries.size(); }
    bool operator==(const Workload&) const = default;
};

/*----- Validation -----------------------------------------------------------------------------------------------*/

/// Numeric position of a predicate value in an ordered column's domain (day offset for dates).
inline double ordered_value(const Predicate &p, const ColumnStats &col)
{
    if (col.kind == ColumnKind::Date) {
        if (auto s = std::get_if<std::string>(&p.value)) return double(parse_date(*s));
        throw ValidationError("predicate on date column '" + col.name + "' needs a YYYY-MM-DD string");
    }
    if (auto v = std::get_if<double>(&p.value)) {
        if (not std::isfinite(*v)) throw ValidationError("non-finite value on column '" + col.name + "'");
        return *v;
    }
    throw ValidationError("predicate on numeric column '" + col.name + "' needs a number");
}

/** Checks a predicate against its column.  Equality values must lie in the column's domain (or be a known
 * category).  Range cut-points may lie outside the domain; they clamp to selectivity 0 or 1. */
inline void validate_predicate(const Predicate &p, const ColumnStats &col)
{
    if (col.kind == ColumnKind::Categorical) {
        if (p.op != PredicateOp::Eq)
            throw ValidationError("range predicate on categorical column '" + col.name + "'");
        auto s = std::get_if<std::string>(&p.value);
        if (not s) throw ValidationError("predicate on categorical column '" + col.name + "' needs a string");
        if (not col.categories.empty() and not col.has_category(*s))
            throw ValidationError("unknown category '" + *s + "' for column '" + col.name + "'");
        return;
    }
    const double v = ordered_value(p, col);
    if (p.op == PredicateOp::Eq and (v < *col.min_value or v > *col.max_value))
        throw ValidationError("equality value outside the domain of column '" + col.name + "'");
}

inline void validate_query(const Query &q, const Catalog &catalog)
{
    if (q.predicates.empty()) throw ValidationError("query without predicates");
    std::unordered_set<std::string_view> seen;
    for (auto &p : q.predicates) {
        if (not seen.insert(p.column).second)
            throw ValidationError("two predicates on column '" + p.column + "' in one query");
        validate_predicate(p, catalog.column(catalog.column_index(p.column)));
    }
}

inline void validate_workload(const Workload &w, const Catalog &catalog)
{
    if (w.queries.empty()) throw ValidationError("empty workload");
    for (auto &q : w.queries) validate_query(q, catalog);
}

/*----- Selectivity ----------------------------------------------------------------------------------------------*/

/// Selectivity of one predicate under uniformity: 1/distinct for equality, linear interpolation for ranges.
inline double predicate_selectivity(const Predicate &p, const ColumnStats &col)
{
    if (p.op == PredicateOp::Eq) return 1.0 / double(col.distinct_count);
    const double v = ordered_value(p, col);
    const double width = col.domain_width();
    if (width <= 0.0) return 1.0;
    return std::clamp((v - *col.min_value) / width, 0.0, 1.0);
}

/// Sel(query, column j): the fraction of rows the query's predicate on column j retains, 1 if none.
inline double selectivity(const Query &query, std::size_t column_pos, const Catalog &catalog)
{
    const ColumnStats &col = catalog.column(column_pos);
    if (auto p = query.find(col.name)) return predicate_selectivity(*p, col);
    return 1.0;
}

/// Row-major n x m matrix of selectivities, one row per query and one column per catalog column.
class SelectivityMatrix
{
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;

public:
    SelectivityMatrix() = default;
    SelectivityMatrix(std::size_t rows, std::size_t cols, double fill = 1.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) { }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double & operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    const std::vector<double> & values() const { return values_; }

    /// True if some query restricts column j (an entry below 1).
    bool column_used(std::size_t j) const
    {
        for (std::size_t i = 0; i != rows_; ++i)
            if ((*this)(i, j) < 1.0) return true;
        return false;
    }

    bool operator==(const SelectivityMatrix&) const = default;
};

inline SelectivityMatrix build_matrix(const Workload &workload, const Catalog &catalog)
{
    validate_workload(workload, catalog);
    SelectivityMatrix mat(workload.size(), catalog.num_columns());
    for (std::size_t i = 0; i != workload.size(); ++i)
        for (auto &p : workload.queries[i].predicates) {
            const std::size_t j = catalog.column_index(p.column);
            mat(i, j) = predicate_selectivity(p, catalog.column(j));
        }
    return mat;
}

/*----- Generation -----------------------------------------------------------------------------------------------*/

/// How range cut-points are placed inside a column's domain.
enum class RangeDraw
{
    Uniform,    ///< cut-point uniform over the domain, so selectivity is uniform on (0, 1]
    LogUniform, ///< offset from the domain minimum log-uniform between one grid step and the full width
};

/// Shape of randomly generated training queries.
struct GeneratorProfile
{
    /// Column positions predicates may be placed on; empty means every catalog column.
    std::vector<std::size_t> candidate_columns;
    std::size_t min_predicates = 4;
    std::size_t max_predicates = 6;
    /// Probability of an equality (vs. range) predicate on an ordered column.
    double eq_probability = 0.5;
    RangeDraw range_draw = RangeDraw::Uniform;
};

namespace detail {

inline double round_to_cents(double x) { return std::round(x * 100.0) / 100.0; }

/// Smallest meaningful distance between two values of an ordered column.
inline double grid_step(const ColumnStats &col)
{
    return col.kind == ColumnKind::Decimal ? 0.01 : 1.0;
}

inline Predicate random_predicate(const ColumnStats &col, Rng &rng, double eq_probability, RangeDraw range_draw)
{
    Predicate p{col.name, PredicateOp::Eq, 0.0};
    if (col.kind == ColumnKind::Categorical) {
        if (col.categories.empty()) // labels not enumerated: use a synthetic label, selectivity is 1/distinct either way
            p.value = col.name + "#" + std::to_string(rng.uniform_int(0, col.distinct_count - 1));
        else
            p.value = col.categories[rng.uniform_int(0, std::int64_t(col.categories.size()) - 1)];
        return p;
    }

    const double lo = *col.min_value, hi = *col.max_value;
    const double u = rng.uniform01();
    const bool eq = u < eq_probability or lo == hi;
    p.op = eq ? PredicateOp::Eq : PredicateOp::Lt;

    if (eq) {
        // equality values come from the evenly spaced grid of `distinct_count` points spanning the domain
        double v = lo;
        if (col.distinct_count > 1) {
            const auto g = rng.uniform_int(0, col.distinct_count - 1);
            v = lo + (hi - lo) * double(g) / double(col.distinct_count - 1);
        }
        switch (col.kind) {
            case ColumnKind::Integer: p.value = std::clamp(std::round(v), lo, hi); break;
            case ColumnKind::Decimal: p.value = std::clamp(round_to_cents(v), lo, hi); break;
            case ColumnKind::Date:    p.value = format_date(std::int64_t(std::round(v))); break;
            default: break;
        }
        return p;
    }

    // range cut-point in (lo, hi]
    if (range_draw == RangeDraw::LogUniform) {
        const double step = std::min(grid_step(col), hi - lo);
        const double offset = step * std::exp(rng.uniform01() * std::log((hi - lo) / step));
        const double v = lo + offset;
        switch (col.kind) {
            case ColumnKind::Integer: p.value = std::clamp(std::round(v), lo + 1, hi); break;
            case ColumnKind::Decimal: p.value = std::clamp(round_to_cents(v), lo + step, hi); break;
            case ColumnKind::Date:    p.value = format_date(std::int64_t(std::clamp(std::round(v), lo + 1, hi))); break;
            default: break;
        }
        return p;
    }
    switch (col.kind) {
        case ColumnKind::Integer:
            p.value = double(rng.uniform_int(std::int64_t(lo) + 1, std::int64_t(hi)));
            break;
        case ColumnKind::Date:
            p.value = format_date(rng.uniform_int(std::int64_t(lo) + 1, std::int64_t(hi)));
            break;
        case ColumnKind::Decimal: {
            double v = round_to_cents(lo + (hi - lo) * rng.uniform_open01());
            if (v <= lo) v = lo + (hi - lo) * 0.5;
            p.value = std::min(v, hi);
            break;
        }
        default: break;
    }
    return p;
}

}

/** Draws `n` random conjunctive queries.  Each query gets a uniformly drawn number of predicates within the
 * profile's range on distinct columns sampled without replacement from the candidate set.  Deterministic in
 * `seed`. */
inline Workload generate_workload(const Catalog &catalog, std::size_t n, const GeneratorProfile &profile,
                                  std::uint64_t seed)
{
    if (n == 0) throw ConfigError("generate_workload: query count must be positive");
    std::vector<std::size_t> candidates = profile.candidate_columns;
    if (candidates.empty()) {
        candidates.resize(catalog.num_columns());
        std::iota(candidates.begin(), candidates.end(), 0);
    }
    for (auto j : candidates)
        if (j >= catalog.num_columns()) throw ConfigError("generate_workload: candidate column out of range");
    if (std::unordered_set<std::size_t>(candidates.begin(), candidates.end()).size() != candidates.size())
        throw ConfigError("generate_workload: duplicate candidate column");
    if (profile.min_predicates < 1 or profile.min_predicates > profile.max_predicates)
        throw ConfigError("generate_workload: invalid predicate-count range");
    if (profile.max_predicates > candidates.size())
        throw ProfileInfeasibleError("generate_workload: " + std::to_string(profile.max_predicates) +
                                     " predicates requested but only " + std::to_string(candidates.size()) +
                                     " candidate columns");
    if (not (profile.eq_probability >= 0.0 and profile.eq_probability <= 1.0))
        throw ConfigError("generate_workload: eq_probability must be in [0, 1]");

    Rng rng(seed);
    Workload w;
    w.queries.reserve(n);
    for (std::size_t i = 0; i != n; ++i) {
        const auto count = std::size_t(
            rng.uniform_int(std::int64_t(profile.min_predicates), std::int64_t(profile.max_predicates)));
        std::vector<std::size_t> pool = candidates;
        Query q;
        for (std::size_t s = 0; s != count; ++s) { // partial Fisher-Yates
            const auto r = std::size_t(rng.uniform_int(std::int64_t(s), std::int64_t(pool.size()) - 1));
            std::swap(pool[s], pool[r]);
            q.predicates.push_back(detail::random_predicate(catalog.column(pool[s]), rng, profile.eq_probability,
                                                                profile.range_draw));
        }
        w.queries.push_back(std::move(q));
    }
    return w;
}

/*----- Serialization --------------------------------------------------------------------------------------------*/

inline nlohmann::json workload_to_json(const Workload &w)
{
    nlohmann::json queries = nlohmann::json::array();
    for (auto &q : w.queries) {
        nlohmann::json preds = nlohmann::json::array();
        for (auto &p : q.predicates) {
            nlohmann::json value;
            if (auto s = std::get_if<std::string>(&p.value))
                value = *s;
            else if (double v = std::get<double>(p.value); is_exact_integer(v))
                value = std::int64_t(v);
            else
                value = v;
            preds.push_back({{"column", p.column}, {"op", p.op == PredicateOp::Eq ? "eq" : "lt"}, {"value", value}});
        }
        queries.push_back({{"predicates", preds}});
    }
    return {{"queries", queries}};
}

inline Workload workload_from_json(const nlohmann::json &j)
{
    try {
        Workload w;
        for (auto &jq : j.at("queries")) {
            Query q;
            for (auto &jp : jq.at("predicates")) {
                Predicate p;
                p.column = jp.at("column").get<std::string>();
                const auto op = jp.at("op").get<std::string>();
                if (op == "eq") p.op = PredicateOp::Eq;
                else if (op == "lt") p.op = PredicateOp::Lt;
                else throw ParseError("unknown predicate op '" + op + "'");
                auto &v = jp.at("value");
                if (v.is_string()) p.value = v.get<std::string>();
                else if (v.is_number()) p.value = v.get<double>();
                else throw ParseError("predicate value must be a number or string");
                q.predicates.push_back(std::move(p));
            }
            if (q.predicates.empty()) throw ParseError("query without predicates");
            w.queries.push_back(std::move(q));
        }
        if (w.queries.empty()) throw ParseError("workload without queries");
        return w;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("workload: ") + e.what());
    }
}

inline Workload parse_workload(const std::filesystem::path &path) { return workload_from_json(read_json_file(path)); }

inline void write_workload(const Workload &w, const std::filesystem::path &path)
{
    write_text_file(path, workload_to_json(w).dump(2) + "\n");
}

/*----- SQL ------------------------------------------------------------------------------------------------------*/

inline std::string sql_quote(std::string_view s)
{
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

inline std::string predicate_sql(const Predicate &p)
{
    std::string out = p.column + (p.op == PredicateOp::Eq ? " = " : " < ");
    if (auto s = std::get_if<std::string>(&p.value)) return out + sql_quote(*s);
    return out + format_number(std::get<double>(p.value));
}

/// `SELECT count(*) FROM <table> WHERE c1 = v1 AND c2 < v2 ...`
inline std::string to_sql(const Query &q, std::string_view table)
{
    std::string sql = "SELECT count(*) FROM " + std::string(table) + " WHERE ";
    for (std::size_t i = 0; i != q.predicates.size(); ++i) {
        if (i) sql += " AND ";
        sql += predicate_sql(q.predicates[i]);
    }
    return sql;
}

}
