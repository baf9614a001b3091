#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "capflow/expr.hpp"

using namespace capflow;

namespace {

double eval(const char* text, std::vector<double> x) {
  return parse_scalar_field(text, x.size())(x);
}

ParseError parse_failure(const char* text, std::size_t d) {
  try {
    parse_scalar_field(text, d);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error for " << text);
  return ParseError(ErrorKind::SyntaxError, 0, "", "");
}

}  // namespace

TEST_CASE("expression examples") {
  CHECK(eval("cos(2*pi*x1)", {0.5}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(eval("x1 + x2^2", {1.0, 2.0}) == 5.0);
  const ParseError e = parse_failure("sin(2*pi*x1", 1);
  CHECK(e.kind() == ErrorKind::SyntaxError);
  CHECK(e.position() == 11);
  CHECK(e.expected().find(')') != std::string::npos);
}

TEST_CASE("expression grammar") {
  CHECK(eval("-x1^2", {3.0}) == -9.0);
  CHECK(eval("2^3^2", {0.0}) == 512.0);
  CHECK(eval("(1 + 2) * 3 - 4 / 2", {0.0}) == 7.0);
  CHECK(eval("1e-3 * 2.5E2", {0.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(eval("exp(log(x1))", {2.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval("sin(pi/2) + -(-1)", {0.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval("x3 - x1", {1.0, 0.0, 4.0}) == 3.0);
  CHECK(eval("2*x1*x2 / (x1 + x2)", {1.0, 1.0}) == 1.0);
  CHECK(eval("pi", {0.0}) == std::numbers::pi);

  const ScalarField f = parse_scalar_field("cos(4*pi*x1)/2", 1);
  CHECK(f.dimension() == 1);
  CHECK(f.source() == "cos(4*pi*x1)/2");
  CHECK_FALSE(f.empty());
  CHECK(ScalarField{}.empty());
}

TEST_CASE("expression errors") {
  CHECK(parse_failure("x2", 1).kind() == ErrorKind::UnknownIdentifier);
  CHECK(parse_failure("x0", 1).kind() == ErrorKind::UnknownIdentifier);
  CHECK(parse_failure("tan(x1)", 1).kind() == ErrorKind::UnknownIdentifier);
  CHECK(parse_failure("y", 1).kind() == ErrorKind::UnknownIdentifier);
  CHECK(parse_failure("", 1).kind() == ErrorKind::SyntaxError);
  CHECK(parse_failure("1 +", 1).kind() == ErrorKind::SyntaxError);
  CHECK(parse_failure("(1", 1).kind() == ErrorKind::SyntaxError);
  CHECK(parse_failure("1 2", 1).kind() == ErrorKind::SyntaxError);
  CHECK(parse_failure("1 $ 2", 1).position() == 2);
  const ParseError e = parse_failure("1 +", 1);
  CHECK(std::string(e.what()).find("position 3") != std::string::npos);
}
