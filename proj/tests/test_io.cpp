#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>
#include <vector>

#include "fbm/io.hpp"

using namespace fbm;

TEST_CASE("format_double round-trips doubles exactly") {
  for (double v : {0.0, 1.0, -1.0, 0.1, 1e-300, -3.5e200, 0.016934538073242935,
                   1.0696446350319904, 2.2250738585072014e-308}) {
    std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("format_double is locale independent and plain ASCII") {
  std::string s = format_double(1234.5678);
  CHECK(s.find(',') == std::string::npos);
  for (char c : s) CHECK(((c >= '0' && c <= '9') || c == '.' || c == '-' ||
                          c == '+' || c == 'e'));
}

TEST_CASE("csv writer produces header plus rows with newlines") {
  CsvWriter w({"n", "x", "tag"});
  auto r = w.row();
  r.col(3).col(0.5).col(std::string("abc"));
  w.append(std::move(r));
  auto r2 = w.row();
  r2.col(4).col(1e-17).col(std::string("d"));
  w.append(std::move(r2));
  CHECK(w.str() == "n,x,tag\n3,0.5,abc\n4,1.0000000000000001e-17,d\n");
}

TEST_CASE("csv writer rejects mismatched row widths") {
  CsvWriter w({"a", "b"});
  auto r = w.row();
  r.col(1);
  CHECK_THROWS_AS(w.append(std::move(r)), std::logic_error);
}

TEST_CASE("n-grid parser handles arithmetic, dyadic, and single forms") {
  CHECK(parse_n_grid("2:8:3") == std::vector<int>{2, 5, 8});
  CHECK(parse_n_grid("5:5:1") == std::vector<int>{5});
  CHECK(parse_n_grid("dyadic:64:512") == std::vector<int>{64, 128, 256, 512});
  CHECK(parse_n_grid("dyadic:1:1") == std::vector<int>{1});
  CHECK(parse_n_grid("37") == std::vector<int>{37});
}

TEST_CASE("n-grid parser rejects malformed input") {
  CHECK_THROWS_AS(parse_n_grid(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_n_grid("a:b:c"), std::invalid_argument);
  CHECK_THROWS_AS(parse_n_grid("8:2:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_n_grid("1:10:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_n_grid("dyadic:3:12"), std::invalid_argument);
  CHECK_THROWS_AS(parse_n_grid("1:2:3:4"), std::invalid_argument);
  CHECK_THROWS_AS(parse_n_grid("1.5"), std::invalid_argument);
}
