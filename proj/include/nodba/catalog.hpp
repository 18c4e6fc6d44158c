#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace nodba {

enum class ColumnKind { Integer, Decimal, Date, Categorical };

inline std::string_view to_string(ColumnKind kind)
{
    switch (kind) {
        case ColumnKind::Integer:     return "integer";
        case ColumnKind::Decimal:     return "decimal";
        case ColumnKind::Date:        return "date";
        case ColumnKind::Categorical: return "categorical";
    }
    return "?";
}

inline ColumnKind parse_column_kind(std::string_view s)
{
    if (s == "integer") return ColumnKind::Integer;
    if (s == "decimal") return ColumnKind::Decimal;
    if (s == "date") return ColumnKind::Date;
    if (s == "categorical") return ColumnKind::Categorical;
    throw ParseError("unknown column kind '" + std::string(s) + "'");
}

/// Kinds whose values are totally ordered and support range predicates.
inline bool is_ordered(ColumnKind kind) { return kind != ColumnKind::Categorical; }

/*----- Dates ----------------------------------------------------------------------------------------------------*/

/// Parses `YYYY-MM-DD` into a day offset from 1970-01-01.
inline std::int64_t parse_date(std::string_view text)
{
    int y = 0;
    unsigned mo = 0, d = 0;
    char tail = 0;
    const std::string s(text);
    if (s.size() != 10 or std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &mo, &d, &tail) != 3)
        throw ParseError("invalid date '" + s + "', expected YYYY-MM-DD");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (not ymd.ok())
        throw ParseError("invalid calendar date '" + s + "'");
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

inline std::string format_date(std::int64_t days)
{
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

/*----- ColumnStats / Catalog ------------------------------------------------------------------------------------*/

/** Statistics for one column.  Ordered kinds carry a value domain `[min_value, max_value]`; dates are stored as
 * day offsets from 1970-01-01 so that every ordered domain is numeric. */
struct ColumnStats
{
    std::string name;
    ColumnKind kind = ColumnKind::Integer;
    std::int64_t distinct_count = 1;
    std::optional<double> min_value;
    std::optional<double> max_value;
    /// Category labels of a categorical column; empty when the labels are not enumerated.
    std::vector<std::string> categories;

    double domain_width() const { return *max_value - *min_value; }

    bool has_category(std::string_view label) const
    {
        return std::find(categories.begin(), categories.end(), label) != categories.end();
    }

    bool operator==(const ColumnStats&) const = default;
};

/// Schema of a single table plus row count.  Column order defines the position `j` used everywhere.
class Catalog
{
    std::string table_name_;
    std::int64_t row_count_;
    std::vector<ColumnStats> columns_;

public:
    Catalog(std::string table_name, std::int64_t row_count, std::vector<ColumnStats> columns)
        : table_name_(std::move(table_name)), row_count_(row_count), columns_(std::move(columns))
    {
        validate();
    }

    const std::string & table_name() const { return table_name_; }
    std::int64_t row_count() const { return row_count_; }
    std::size_t num_columns() const { return columns_.size(); }
    const std::vector<ColumnStats> & columns() const { return columns_; }
    const ColumnStats & column(std::size_t j) const { return columns_.at(j); }

    std::optional<std::size_t> find_column(std::string_view name) const
    {
        for (std::size_t j = 0; j != columns_.size(); ++j)
            if (columns_[j].name == name) return j;
        return std::nullopt;
    }

    /// Position of column `name`; throws `NotFoundError` if absent.
    std::size_t column_index(std::string_view name) const
    {
        if (auto j = find_column(name)) return *j;
        throw NotFoundError("unknown column '" + std::string(name) + "' in table " + table_name_);
    }

    /// Catalog over the named columns only, in the given order.
    Catalog project(const std::vector<std::string> &names) const
    {
        std::vector<ColumnStats> cols;
        for (auto &n : names) cols.push_back(columns_[column_index(n)]);
        return Catalog(table_name_, row_count_, std::move(cols));
    }

    bool operator==(const Catalog&) const = default;

private:
    void validate() const
    {
        if (table_name_.empty()) throw ValidationError("catalog: empty table name");
        if (row_count_ < 1) throw ValidationError("catalog: row_count must be positive");
        if (columns_.empty()) throw ValidationError("catalog: no columns");
        std::unordered_set<std::string> seen;
        for (auto &c : columns_) {
            if (c.name.empty()) throw ValidationError("catalog: empty column name");
            if (not seen.insert(c.name).second)
                throw ValidationError("catalog: duplicate column name '" + c.name + "'");
            if (c.distinct_count < 1)
                throw ValidationError("catalog: column '" + c.name + "' has distinct_count < 1");
            if (is_ordered(c.kind)) {
                if (not c.min_value or not c.max_value)
                    throw ValidationError("catalog: ordered column '" + c.name + "' needs min and max");
                if (*c.min_value > *c.max_value)
                    throw ValidationError("catalog: column '" + c.name + "' has min > max");
                if (not c.categories.empty())
                    throw ValidationError("catalog: ordered column '" + c.name + "' must not list categories");
            } else {
                if (c.min_value or c.max_value)
                    throw ValidationError("catalog: categorical column '" + c.name + "' must not have min/max");
                if (not c.categories.empty() and std::int64_t(c.categories.size()) != c.distinct_count)
                    throw ValidationError("catalog: column '" + c.name + "' distinct != number of categories");
                std::unordered_set<std::string> labels(c.categories.begin(), c.categories.end());
                if (labels.size() != c.categories.size())
                    throw ValidationError("catalog: column '" + c.name + "' has duplicate categories");
            }
        }
    }
};

/*----- JSON -----------------------------------------------------------------------------------------------------*/

namespace detail {

inline std::optional<double> endpoint_from_json(const nlohmann::json &v, ColumnKind kind, const std::string &col)
{
    if (v.is_null()) return std::nullopt;
    if (kind == ColumnKind::Date) {
        if (not v.is_string()) throw ParseError("column '" + col + "': date endpoints must be strings");
        return double(parse_date(v.get<std::string>()));
    }
    if (not v.is_number()) throw ParseError("column '" + col + "': endpoints must be numbers");
    return v.get<double>();
}

inline nlohmann::json endpoint_to_json(const std::optional<double> &v, ColumnKind kind)
{
    if (not v) return nullptr;
    if (kind == ColumnKind::Date) return format_date(std::int64_t(*v));
    if (kind == ColumnKind::Integer) return std::int64_t(*v);
    return *v;
}

}

inline Catalog catalog_from_json(const nlohmann::json &j)
{
    try {
        std::vector<ColumnStats> cols;
        for (auto &c : j.at("columns")) {
            ColumnStats s;
            s.name = c.at("name").get<std::string>();
            s.kind = parse_column_kind(c.at("kind").get<std::string>());
            s.distinct_count = c.at("distinct").get<std::int64_t>();
            s.min_value = detail::endpoint_from_json(c.value("min", nlohmann::json()), s.kind, s.name);
            s.max_value = detail::endpoint_from_json(c.value("max", nlohmann::json()), s.kind, s.name);
            if (auto it = c.find("categories"); it != c.end() and not it->is_null())
                s.categories = it->get<std::vector<std::string>>();
            cols.push_back(std::move(s));
        }
        return Catalog(j.at("table").get<std::string>(), j.at("row_count").get<std::int64_t>(), std::move(cols));
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("catalog: ") + e.what());
    }
}

inline nlohmann::json catalog_to_json(const Catalog &catalog)
{
    nlohmann::json cols = nlohmann::json::array();
    for (auto &c : catalog.columns()) {
        cols.push_back({
            {"name", c.name},
            {"kind", to_string(c.kind)},
            {"distinct", c.distinct_count},
            {"min", detail::endpoint_to_json(c.min_value, c.kind)},
            {"max", detail::endpoint_to_json(c.max_value, c.kind)},
            {"categories", c.categories.empty() ? nlohmann::json(nullptr) : nlohmann::json(c.categories)},
        });
    }
    return {{"table", catalog.table_name()}, {"row_count", catalog.row_count()}, {"columns", cols}};
}

inline nlohmann::json read_json_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (not in) throw ParseError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path &path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (not out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

inline Catalog load_catalog(const std::filesystem::path &path) { return catalog_from_json(read_json_file(path)); }

}
