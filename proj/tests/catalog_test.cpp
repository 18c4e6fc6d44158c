#include <filesystem>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nodba;
using namespace nodba::testing;

namespace {

std::filesystem::path temp_file(const std::string &name, const std::string &text)
{
    auto p = std::filesystem::temp_directory_path() / name;
    write_text_file(p, text);
    return p;
}

}

TEST(Catalog, LoadsBundledLineitem)
{
    const Catalog c = lineitem();
    EXPECT_EQ(c.table_name(), "lineitem");
    EXPECT_EQ(c.num_columns(), 16u);
    EXPECT_EQ(c.row_count(), 6'001'215);
    EXPECT_EQ(c.column(0).name, "l_orderkey");
    EXPECT_EQ(c.column(15).name, "l_comment");
    EXPECT_EQ(c.column(c.column_index("l_shipmode")).categories.size(), 7u);
}

TEST(Catalog, DatesAreDayOffsets)
{
    const Catalog c = lineitem();
    const auto &ship = c.column(c.column_index("l_shipdate"));
    EXPECT_EQ(ship.kind, ColumnKind::Date);
    EXPECT_EQ(*ship.min_value, double(parse_date("1992-01-02")));
    EXPECT_EQ(parse_date("1970-01-01"), 0);
    EXPECT_EQ(parse_date("1970-01-02"), 1);
    EXPECT_EQ(format_date(parse_date("1996-02-29")), "1996-02-29");
    EXPECT_THROW(parse_date("1995-02-29"), ParseError);
    EXPECT_THROW(parse_date("1995/02/01"), ParseError);
}

TEST(Catalog, SingleColumnFile)
{
    auto p = temp_file("nodba_single.json", R"({"table": "t", "row_count": 10, "columns": [
        {"name": "a", "kind": "integer", "distinct": 5, "min": 0, "max": 9, "categories": null}]})");
    const Catalog c = load_catalog(p);
    EXPECT_EQ(c.num_columns(), 1u);
    EXPECT_EQ(c.column_index("a"), 0u);
}

TEST(Catalog, RejectsDuplicateNames)
{
    auto p = temp_file("nodba_dup.json", R"({"table": "t", "row_count": 10, "columns": [
        {"name": "a", "kind": "integer", "distinct": 5, "min": 0, "max": 9},
        {"name": "a", "kind": "integer", "distinct": 5, "min": 0, "max": 9}]})");
    EXPECT_THROW(load_catalog(p), ValidationError);
}

TEST(Catalog, RejectsBadStatistics)
{
    EXPECT_THROW(Catalog("t", 10, {{"a", ColumnKind::Integer, 0, 0.0, 9.0, {}}}), ValidationError);
    EXPECT_THROW(Catalog("t", 10, {{"a", ColumnKind::Integer, 3, 9.0, 0.0, {}}}), ValidationError);
    EXPECT_THROW(Catalog("t", 10, {{"a", ColumnKind::Categorical, 3, {}, {}, {"x", "y"}}}), ValidationError);
    EXPECT_THROW(Catalog("t", 0, {{"a", ColumnKind::Integer, 3, 0.0, 9.0, {}}}), ValidationError);
}

TEST(Catalog, MalformedFileIsParseError)
{
    auto p = temp_file("nodba_bad.json", R"({"table": "t", "row_count": )");
    EXPECT_THROW(load_catalog(p), ParseError);
    auto q = temp_file("nodba_bad2.json", R"({"table": "t", "row_count": 3, "columns": [{"name": "a"}]})");
    EXPECT_THROW(load_catalog(q), ParseError);
    EXPECT_THROW(load_catalog("/nonexistent/catalog.json"), ParseError);
}

TEST(Catalog, ColumnIndex)
{
    const Catalog c = lineitem();
    EXPECT_EQ(c.column_index("l_orderkey"), 0u);
    EXPECT_EQ(c.column_index("l_comment"), c.num_columns() - 1);
    EXPECT_THROW(c.column_index("l_nope"), NotFoundError);
    EXPECT_FALSE(c.find_column("l_nope"));
    for (std::size_t j = 0; j != c.num_columns(); ++j) EXPECT_EQ(c.column_index(c.column(j).name), j);
}

TEST(Catalog, LoadIsDeterministic)
{
    EXPECT_EQ(lineitem(), lineitem());
    const Catalog c = lineitem();
    EXPECT_EQ(catalog_from_json(catalog_to_json(c)), c);
}

TEST(Catalog, ProjectKeepsRequestedOrder)
{
    const Catalog c = lineitem().project({"l_tax", "l_orderkey"});
    EXPECT_EQ(c.num_columns(), 2u);
    EXPECT_EQ(c.column(0).name, "l_tax");
    EXPECT_EQ(c.row_count(), 6'001'215);
}
