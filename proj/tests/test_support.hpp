#pragma once

#include <string>
#include <vector>

#include <nodba.hpp>

namespace nodba::testing {

inline std::string fixture(const std::string &name) { return std::string(NODBA_FIXTURE_DIR) + "/" + name; }

inline Catalog lineitem() { return load_catalog(fixture("lineitem_sf1.json")); }

/// `m` integer columns c0..c{m-1}, each with domain [0, 1000] and 1000 distinct values.
inline Catalog uniform_catalog(std::size_t m, std::int64_t rows = 1000)
{
    std::vector<ColumnStats> cols;
    for (std::size_t j = 0; j != m; ++j)
        cols.push_back({"c" + std::to_string(j), ColumnKind::Integer, 1000, 0.0, 1000.0, {}});
    return Catalog("t", rows, cols);
}

inline Predicate lt(std::string col, Literal v) { return {std::move(col), PredicateOp::Lt, std::move(v)}; }
inline Predicate eq(std::string col, Literal v) { return {std::move(col), PredicateOp::Eq, std::move(v)}; }

}
