#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratt/eval/rational.hpp"

namespace ratt {

/// Four integers in [1, 9].
struct Game24Instance {
  std::array<int, 4> numbers{};

  /// Throws invalid_input if any number is outside [1, 9].
  static Game24Instance from(std::array<int, 4> numbers);
  void validate() const;
  std::string str() const;  // "3 3 8 8"
  std::array<int, 4> sorted() const;

  friend bool operator==(const Game24Instance&, const Game24Instance&) = default;
};

/// Binary expression tree over integer leaves.
class Expression {
 public:
  static Expression leaf(int value);
  static Expression binary(char op, Expression lhs, Expression rhs);

  Expression(const Expression& other);
  Expression& operator=(const Expression& other);
  Expression(Expression&&) noexcept = default;
  Expression& operator=(Expression&&) noexcept = default;
  ~Expression();

  bool is_leaf() const { return op_ == 0; }
  int value() const { return value_; }
  char op() const { return op_; }
  const Expression& lhs() const { return *lhs_; }
  const Expression& rhs() const { return *rhs_; }

  /// Exact value; empty when some division has a zero divisor.
  std::optional<Rational> evaluate() const;
  std::vector<int> leaves() const;
  /// Fully parenthesized infix, e.g. "(8/(3-(8/3)))".
  std::string str() const;

 private:
  Expression() = default;
  void collect(std::vector<int>& out) const;

  char op_ = 0;  // 0 for a leaf, else one of + - * /
  int value_ = 0;
  std::unique_ptr<Expression> lhs_;
  std::unique_ptr<Expression> rhs_;
};

/// Exhaustive search over every way of repeatedly combining two of the
/// remaining values with + - * / (both operand orders), which covers all
/// permutations, operator choices and parenthesizations. Returns the first
/// expression equal to 24 in that fixed order, or nothing.
std::optional<Expression> solve24_oracle(const Game24Instance& instance);

/// Parses infix text and checks it. Accepts digits, + - * / (also the
/// symbols for multiply, divide and minus), parentheses, whitespace and one
/// optional trailing "= 24". True iff it parses, the leaf multiset equals the
/// instance's, and the exact value is 24.
bool verify24(std::string_view answer_text, const Game24Instance& instance);

/// Parser used by verify24; empty when the text is not a well-formed
/// expression (the "= 24" suffix is not accepted here).
std::optional<Expression> parse_expression(std::string_view text);

}  // namespace ratt
