#include <doctest.h>

#include <regex>
#include <sstream>

#include "gridqcqp/errors.hpp"
#include "gridqcqp/matpower_io.hpp"
#include "support.hpp"

using namespace gridqcqp;
namespace ts = test_support;

namespace {

const char* kTwoBus = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	380	1	1.1	0.9;
	2	1	50	10	0	0	1	1	0	380	1	1.1	0.9;
];
mpc.gen = [
	1	50	0	100	-100	1	100	1	200	0;
];
mpc.branch = [
	1	2	0.01	0.1	0	0	0	0	0	0	1	-360	360;
];
)";

// Independent comment stripper: drops everything after '%' on each line.
std::string strip_comments(const std::string& text) {
  return std::regex_replace(text, std::regex("%[^\n]*"), "");
}

}  // namespace

TEST_CASE("case89pegase table sizes") {
  const auto c = ts::load("case89pegase");
  CHECK(c.bus.size() == 89);
  CHECK(c.gen.size() == 12);
  CHECK(c.branch.size() == 210);
  CHECK(c.base_mva == 100.0);
  CHECK(c.name == "case89pegase");
}

TEST_CASE("minimal 2-bus case parses to exactly its rows") {
  const auto c = parse_case(kTwoBus);
  CHECK(c.name == "tiny");
  REQUIRE(c.bus.size() == 2);
  REQUIRE(c.gen.size() == 1);
  REQUIRE(c.branch.size() == 1);
  CHECK(c.gencost.empty());
  CHECK(c.bus.rows[1] == std::vector<double>{2, 1, 50, 10, 0, 0, 1, 1, 0, 380, 1, 1.1, 0.9});
  CHECK(c.branch.at(0, branch_col::x) == 0.1);
}

TEST_CASE("comments inside matrices do not change the parse") {
  std::string commented = kTwoBus;
  const auto pos = commented.find("\t2\t1\t50");
  commented.insert(pos, "% a full comment line inside the bus matrix\n");
  commented.insert(commented.find("0.9;") + 4, " % trailing comment");
  const auto a = parse_case(commented);
  const auto b = parse_case(strip_comments(commented));
  CHECK(a == b);
  CHECK(a == parse_case(kTwoBus));
}

TEST_CASE("write_case round trip") {
  SUBCASE("case89pegase") {
    const auto c = ts::load("case89pegase");
    CHECK(parse_case(write_case(c)) == c);
  }
  SUBCASE("random cases with awkward numbers") {
    for (unsigned seed = 1; seed <= 20; ++seed) {
      auto c = ts::random_case(seed, 12);
      c.bus.rows[0][bus_col::pd] = 0.1 + 0.2;
      c.bus.rows[1][bus_col::qd] = -1e-300;
      c.branch.rows[0][branch_col::rate_a] = 1.0 / 3.0;
      CHECK(parse_case(write_case(c)) == c);
    }
  }
  SUBCASE("raw tap 0 stays 0") {
    const auto c = parse_case(kTwoBus);
    const auto back = parse_case(write_case(c));
    CHECK(back.branch.at(0, branch_col::tap) == 0.0);
  }
  SUBCASE("extra columns and gencost survive") {
    auto c = parse_case(kTwoBus);
    for (auto& row : c.gen.rows) row.resize(21, 0.25);
    c.gencost.rows = {{2, 0, 0, 3, 0.01, 20, 7}};
    CHECK(parse_case(write_case(c)) == c);
  }
}

TEST_CASE("parse errors") {
  SUBCASE("wrong column count reports its line") {
    std::string bad = kTwoBus;
    bad.replace(bad.find("380\t1\t1.1\t0.9;\n\t2"), 14, "380\t1\t1.1;");
    try {
      parse_case(bad);
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("missing branch table") {
    std::string bad = kTwoBus;
    bad = bad.substr(0, bad.find("mpc.branch"));
    CHECK_THROWS_AS(parse_case(bad), StructureError);
  }
  SUBCASE("unsupported version") {
    std::string bad = kTwoBus;
    bad.replace(bad.find("'2'"), 3, "'1'");
    CHECK_THROWS_AS(parse_case(bad), UnsupportedFormatError);
  }
  SUBCASE("bad number") {
    std::string bad = kTwoBus;
    bad.replace(bad.find("0.01"), 4, "0.0x1");
    CHECK_THROWS_AS(parse_case(bad), ParseError);
  }
}

TEST_CASE("clamp_negative_pmin") {
  auto c = parse_case(kTwoBus);
  SUBCASE("negative Pmin is raised to zero") {
    c.gen.rows[0][gen_col::pmin] = -50;
    const auto [out, n] = clamp_negative_pmin(c);
    CHECK(n == 1);
    CHECK(out.gen.at(0, gen_col::pmin) == 0.0);
    auto expected = c;
    expected.gen.rows[0][gen_col::pmin] = 0.0;
    CHECK(out == expected);
    const auto [twice, n2] = clamp_negative_pmin(out);
    CHECK(n2 == 0);
    CHECK(twice == out);
  }
  SUBCASE("no negative Pmin is the identity") {
    const auto [out, n] = clamp_negative_pmin(c);
    CHECK(n == 0);
    CHECK(out == c);
  }
  SUBCASE("vendored cases carry negative Pmin units") {
    const std::pair<const char*, std::size_t> expected[] = {
        {"case89pegase", 2}, {"case1354pegase", 67}, {"case2869pegase", 118}};
    for (const auto& [name, count] : expected) {
      CAPTURE(name);
      const auto [out, n] = clamp_negative_pmin(ts::load(name));
      CHECK(n == count);
      CHECK(clamp_negative_pmin(out).second == 0);
    }
  }
}

TEST_CASE("validate_case") {
  auto c = parse_case(kTwoBus);
  CHECK(validate_case(c).empty());
  c.branch.rows[0][branch_col::to] = 7;
  CHECK_FALSE(validate_case(c).empty());
  CHECK_THROWS_AS(require_valid_case(c), StructureError);
}
