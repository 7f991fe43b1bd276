#include "ratt/eval/game24.hpp"

#include <algorithm>
#include <cctype>

#include "ratt/core/error.hpp"

namespace ratt {

Game24Instance Game24Instance::from(std::array<int, 4> numbers) {
  Game24Instance g{numbers};
  g.validate();
  return g;
}

void Game24Instance::validate() const {
  for (int v : numbers) {
    if (v < 1 || v > 9) {
      throw Error(ErrorKind::invalid_input,
                  "game24 numbers must be in [1, 9], got " + std::to_string(v));
    }
  }
}

std::string Game24Instance::str() const {
  std::string out;
  for (std::size_t i = 0; i < numbers.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(numbers[i]);
  }
  return out;
}

std::array<int, 4> Game24Instance::sorted() const {
  auto s = numbers;
  std::sort(s.begin(), s.end());
  return s;
}

Expression Expression::leaf(int value) {
  Expression e;
  e.value_ = value;
  return e;
}

Expression Expression::binary(char op, Expression lhs, Expression rhs) {
  if (op != '+' && op != '-' && op != '*' && op != '/') {
    throw Error(ErrorKind::invalid_argument, std::string("unknown operator ") + op);
  }
  Expression e;
  e.op_ = op;
  e.lhs_ = std::make_unique<Expression>(std::move(lhs));
  e.rhs_ = std::make_unique<Expression>(std::move(rhs));
  return e;
}

Expression::Expression(const Expression& other) : op_(other.op_), value_(other.value_) {
  if (other.lhs_) lhs_ = std::make_unique<Expression>(*other.lhs_);
  if (other.rhs_) rhs_ = std::make_unique<Expression>(*other.rhs_);
}

Expression& Expression::operator=(const Expression& other) {
  if (this != &other) *this = Expression(other);
  return *this;
}

Expression::~Expression() = default;

std::optional<Rational> Expression::evaluate() const {
  if (is_leaf()) return Rational(value_);
  const auto a = lhs_->evaluate();
  const auto b = rhs_->evaluate();
  if (!a || !b) return std::nullopt;
  switch (op_) {
    case '+': return *a + *b;
    case '-': return *a - *b;
    case '*': return *a * *b;
    default: return divide(*a, *b);
  }
}

void Expression::collect(std::vector<int>& out) const {
  if (is_leaf()) {
    out.push_back(value_);
    return;
  }
  lhs_->collect(out);
  rhs_->collect(out);
}

std::vector<int> Expression::leaves() const {
  std::vector<int> out;
  collect(out);
  return out;
}

std::string Expression::str() const {
  if (is_leaf()) return std::to_string(value_);
  return "(" + lhs_->str() + op_ + rhs_->str() + ")";
}

namespace {

struct Item {
  Rational value;
  Expression expr;
};

std::optional<Expression> search(std::vector<Item>& items) {
  if (items.size() == 1) {
    if (items[0].value == Rational(24)) return items[0].expr;
    return std::nullopt;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      std::vector<Item> rest;
      for (std::size_t r = 0; r < items.size(); ++r) {
        if (r != i && r != j) rest.push_back(items[r]);
      }
      const Item& a = items[i];
      const Item& b = items[j];
      std::vector<Item> candidates;
      candidates.push_back({a.value + b.value, Expression::binary('+', a.expr, b.expr)});
      candidates.push_back({a.value - b.value, Expression::binary('-', a.expr, b.expr)});
      candidates.push_back({b.value - a.value, Expression::binary('-', b.expr, a.expr)});
      candidates.push_back({a.value * b.value, Expression::binary('*', a.expr, b.expr)});
      if (auto q = divide(a.value, b.value)) {
        candidates.push_back({*q, Expression::binary('/', a.expr, b.expr)});
      }
      if (auto q = divide(b.value, a.value)) {
        candidates.push_back({*q, Expression::binary('/', b.expr, a.expr)});
      }
      for (auto& c : candidates) {
        rest.push_back(std::move(c));
        if (auto hit = search(rest)) return hit;
        rest.pop_back();
      }
    }
  }
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  std::optional<Expression> expression() {
    auto lhs = term();
    if (!lhs) return std::nullopt;
    for (;;) {
      const char op = peek_op();
      if (op != '+' && op != '-') return lhs;
      consume_op();
      auto rhs = term();
      if (!rhs) return std::nullopt;
      lhs = Expression::binary(op, std::move(*lhs), std::move(*rhs));
    }
  }

  bool at_end() {
    skip_space();
    return pos_ == s_.size();
  }

  /// Consumes "= 24" if present.
  void equals_24() {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == '=') {
      const std::size_t save = pos_;
      ++pos_;
      skip_space();
      if (s_.substr(pos_, 2) == "24") {
        pos_ += 2;
      } else {
        pos_ = save;
      }
    }
  }

 private:
  std::optional<Expression> term() {
    auto lhs = factor();
    if (!lhs) return std::nullopt;
    for (;;) {
      const char op = peek_op();
      if (op != '*' && op != '/') return lhs;
      consume_op();
      auto rhs = factor();
      if (!rhs) return std::nullopt;
      lhs = Expression::binary(op, std::move(*lhs), std::move(*rhs));
    }
  }

  std::optional<Expression> factor() {
    skip_space();
    if (pos_ >= s_.size()) return std::nullopt;
    if (s_[pos_] == '(') {
      ++pos_;
      auto inner = expression();
      skip_space();
      if (!inner || pos_ >= s_.size() || s_[pos_] != ')') return std::nullopt;
      ++pos_;
      return inner;
    }
    std::size_t end = pos_;
    while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    if (end == pos_ || end - pos_ > 6) return std::nullopt;
    const int value = std::stoi(std::string(s_.substr(pos_, end - pos_)));
    pos_ = end;
    return Expression::leaf(value);
  }

  // Returns the operator at the cursor (after whitespace) without consuming
  // it, or 0. op_len_ holds its byte length.
  char peek_op() {
    skip_space();
    op_len_ = 0;
    if (pos_ >= s_.size()) return 0;
    const char c = s_[pos_];
    if (c == '+' || c == '-' || c == '*' || c == '/') {
      op_len_ = 1;
      return c;
    }
    const auto rest = s_.substr(pos_);
    if (rest.starts_with("\xC3\x97")) {  // multiplication sign
      op_len_ = 2;
      return '*';
    }
    if (rest.starts_with("\xC3\xB7")) {  // division sign
      op_len_ = 2;
      return '/';
    }
    if (rest.starts_with("\xE2\x88\x92")) {  // minus sign
      op_len_ = 3;
      return '-';
    }
    return 0;
  }

  void consume_op() { pos_ += op_len_; }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t op_len_ = 0;
};

}  // namespace

std::optional<Expression> solve24_oracle(const Game24Instance& instance) {
  instance.validate();
  std::vector<Item> items;
  for (int v : instance.numbers) items.push_back({Rational(v), Expression::leaf(v)});
  return search(items);
}

std::optional<Expression> parse_expression(std::string_view text) {
  Parser p(text);
  auto e = p.expression();
  if (!e || !p.at_end()) return std::nullopt;
  return e;
}

bool verify24(std::string_view answer_text, const Game24Instance& instance) {
  Parser p(answer_text);
  auto e = p.expression();
  if (!e) return false;
  p.equals_24();
  if (!p.at_end()) return false;
  auto leaves = e->leaves();
  std::sort(leaves.begin(), leaves.end());
  const auto want = instance.sorted();
  if (!std::equal(leaves.begin(), leaves.end(), want.begin(), want.end())) return false;
  const auto value = e->evaluate();
  return value && *value == Rational(24);
}

}  // namespace ratt
