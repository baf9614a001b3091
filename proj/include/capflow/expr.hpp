#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "capflow/error.hpp"

namespace capflow {

/// Parse failure with the byte offset where it was detected and a
/// description of what the parser would have accepted there.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t position, std::string expected, const std::string& message)
      : Error(kind, message), position_(position), expected_(std::move(expected)) {}

  [[nodiscard]] std::size_t position() const noexcept { return position_; }
  [[nodiscard]] const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

namespace detail {
struct ExprNode;
}

/// Compiled scalar expression over x1..xd.
///
/// Grammar: sums and differences of products and quotients of signed powers;
/// '^' is right-associative and binds tighter than unary minus, so -x1^2 is
/// -(x1^2). Functions sin, cos, exp, log; constant pi.
class ScalarField {
 public:
  ScalarField() = default;

  double operator()(std::span<const double> x) const;
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] const std::string& source() const noexcept { return source_; }
  [[nodiscard]] bool empty() const noexcept { return root_ == nullptr; }

 private:
  friend ScalarField parse_scalar_field(std::string_view text, std::size_t d);

  std::shared_ptr<const detail::ExprNode> root_;
  std::size_t dimension_ = 0;
  std::string source_;
};

/// Throws ParseError with kind SyntaxError or UnknownIdentifier.
ScalarField parse_scalar_field(std::string_view text, std::size_t d);

}  // namespace capflow
