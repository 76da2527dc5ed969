#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"
#include "lookplan/rng.hpp"
#include "test_util.hpp"

using lookplan::Error;
using lookplan::testing::TempDir;

TEST_CASE("format_double emits the shortest text that parses back exactly") {
  CHECK(lookplan::format_double(0.0) == "0");
  CHECK(lookplan::format_double(1.0) == "1");
  CHECK(lookplan::format_double(-2.5) == "-2.5");
  CHECK(lookplan::format_double(0.1) == "0.1");
  CHECK(lookplan::parse_double(lookplan::format_double(1.0 / 3.0), "t") == 1.0 / 3.0);

  lookplan::Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12, 12));
    CHECK(lookplan::parse_double(lookplan::format_double(v), "t") == v);
  }
}

TEST_CASE("format_fixed keeps the requested number of decimals") {
  CHECK(lookplan::format_fixed(62.43, 2) == "62.43");
  CHECK(lookplan::format_fixed(100.0, 2) == "100.00");
  CHECK(lookplan::format_fixed(-0.005, 2) == "-0.01");
  CHECK(lookplan::format_fixed(2.5, 0) == "2");  // round-half-to-even
  CHECK(lookplan::format_fixed(3.5, 0) == "4");
}

TEST_CASE("parse_double rejects junk and partial numbers") {
  for (const char* bad : {"", "abc", "1.2.3", "1e", "nan(", "--5", "1 2", "4x"}) {
    CHECK_THROWS_AS(lookplan::parse_double(bad, "ctx"), Error);
  }
  CHECK(lookplan::parse_double("1e3", "ctx") == 1000.0);
  CHECK(lookplan::parse_double("-0.25", "ctx") == -0.25);
}

TEST_CASE("parse_long rejects fractions and junk") {
  CHECK(lookplan::parse_long("42", "ctx") == 42);
  CHECK(lookplan::parse_long("-7", "ctx") == -7);
  for (const char* bad : {"", "4.5", "x", "12y", "1e2"}) {
    CHECK_THROWS_AS(lookplan::parse_long(bad, "ctx"), Error);
  }
}

TEST_CASE("csv escaping quotes exactly the fields that need it") {
  CHECK(lookplan::csv_escape("plain") == "plain");
  CHECK(lookplan::csv_escape("a,b") == "\"a,b\"");
  CHECK(lookplan::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(lookplan::csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("split_csv_line inverts csv_escape") {
  std::vector<std::string> fields = {"a", "with,comma", "with \"quotes\"", "", "end"};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += lookplan::csv_escape(fields[i]);
  }
  CHECK(lookplan::split_csv_line(line) == fields);
  CHECK(lookplan::split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
}

TEST_CASE("csv tables round-trip through files") {
  TempDir dir;
  lookplan::CsvTable table;
  table.header = {"name", "value", "note"};
  table.rows = {{"alpha", "1.5", "plain"},
                {"beta", "-2", "needs,quoting"},
                {"gamma", "0", "has \"quotes\""}};
  auto path = dir.file("table.csv");
  lookplan::write_csv(path, table);
  lookplan::CsvTable back = lookplan::read_csv(path);
  CHECK(back.header == table.header);
  CHECK(back.rows == table.rows);
}

TEST_CASE("read_csv flags ragged rows and missing files") {
  TempDir dir;
  auto path = dir.file("ragged.csv");
  lookplan::write_text_file(path, "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(lookplan::read_csv(path), Error);
  CHECK_THROWS_AS(lookplan::read_csv(dir.file("absent.csv")), Error);
}

TEST_CASE("text files round-trip bytes") {
  TempDir dir;
  auto path = dir.file("note.txt");
  std::string content = "first\nsecond\n";
  lookplan::write_text_file(path, content);
  CHECK(lookplan::read_text_file(path) == content);
}
