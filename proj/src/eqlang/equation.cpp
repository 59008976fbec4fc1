// Copyright 2026 The mwpgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mwpgen/equation.hpp"

#include <cctype>

#include "mwpgen/error.hpp"

namespace mwpgen::eq {

std::string to_string(const Rational& r) {
  using boost::multiprecision::cpp_int;
  const cpp_int num = boost::multiprecision::numerator(r);
  cpp_int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  // Terminating decimal when the denominator only has factors 2 and 5.
  cpp_int rest = den;
  int twos = 0;
  int fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  if (rest != 1) return num.str() + "/" + den.str();
  const int digits = std::max(twos, fives);
  cpp_int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  cpp_int scaled = num * (scale / den);
  const bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.str();
  if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits - static_cast<int>(s.size()) + 1), '0');
  s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  return negative ? "-" + s : s;
}

Rational parse_number(std::string_view text) {
  using boost::multiprecision::cpp_int;
  const auto dot = text.find('.');
  std::string digits(text.substr(0, dot));
  cpp_int den = 1;
  if (dot != std::string_view::npos) {
    std::string_view frac = text.substr(dot + 1);
    digits += frac;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  }
  require(!digits.empty(), ErrorCode::kSyntax, "empty number");
  for (char c : digits) require(std::isdigit(static_cast<unsigned char>(c)) != 0, ErrorCode::kSyntax, "bad number '" + std::string(text) + "'");
  return Rational(cpp_int(digits), den);
}

char op_symbol(Op op) {
  switch (op) {
    case Op::kPlus: return '+';
    case Op::kMinus: return '-';
    case Op::kTimes: return '*';
    case Op::kDivide: return '/';
    case Op::kNone: break;
  }
  return '\0';
}

char variable_symbol(Variable v) { return v == Variable::kX ? 'x' : 'y'; }

namespace {

struct Token {
  enum Kind { kNumber, kVariable, kOp, kEquals, kEnd } kind;
  std::string text;
  int column;  // 1-based
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const int col = static_cast<int>(i) + 1;
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      out.push_back({Token::kNumber, std::string(s.substr(i, j - i)), col});
      i = j;
    } else if (c == 'x' || c == 'y') {
      out.push_back({Token::kVariable, std::string(1, c), col});
      ++i;
    } else if (c == '+' || c == '-' || c == '*' || c == '/') {
      out.push_back({Token::kOp, std::string(1, c), col});
      ++i;
    } else if (c == '=') {
      out.push_back({Token::kEquals, "=", col});
      ++i;
    } else {
      fail(ErrorCode::kSyntax, "unexpected character '" + std::string(1, c) + "' at column " + std::to_string(col));
    }
  }
  out.push_back({Token::kEnd, "", static_cast<int>(s.size()) + 1});
  return out;
}

Op op_from(const std::string& t) {
  switch (t[0]) {
    case '+': return Op::kPlus;
    case '-': return Op::kMinus;
    case '*': return Op::kTimes;
    default: return Op::kDivide;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  EquationAst parse() {
    EquationAst eq;
    if (peek().kind == Token::kOp) {
      const Token& t = take();
      const Op op = op_from(t.text);
      if (op != Op::kPlus && op != Op::kMinus) syntax("leading operator must be + or -", t);
      eq.lead = op;
    }
    eq.first = term();
    bool single = true;
    if (peek().kind == Token::kOp) {
      eq.between = op_from(take().text);
      eq.second = term();
      single = false;
    }
    expect(Token::kEquals, "'='");
    if (single) {
      // Grammar extension: "x=2y" is read as x - 2y = 0.
      if (peek().kind != Token::kVariable && !(peek().kind == Token::kNumber && peek(1).kind == Token::kVariable)) {
        syntax("an equation must mention both x and y", peek());
      }
      eq.second = term();
      eq.between = Op::kMinus;
      eq.rhs = 0;
      eq.variable_rhs = true;
    } else {
      eq.rhs = number();
      if (peek().kind == Token::kOp) {
        eq.rhs_op = op_from(take().text);
        eq.rhs_extra = number();
      }
    }
    if (peek().kind != Token::kEnd) syntax("trailing input", peek());
    if (eq.first.variable == eq.second.variable) {
      fail(ErrorCode::kSyntax, "variable '" + std::string(1, variable_symbol(eq.first.variable)) +
                                   "' appears twice; each equation needs one x term and one y term");
    }
    if (eq.lead == Op::kMinus && eq.between == Op::kMinus) {
      fail(ErrorCode::kConstraintViolation,
           "at most one of the leading operator and the operator between the terms may be a minus");
    }
    if (eq.lead == Op::kMinus && (eq.between == Op::kTimes || eq.between == Op::kDivide)) {
      fail(ErrorCode::kConstraintViolation, "a leading minus is only allowed with additive terms");
    }
    for (const Term* t : {&eq.first, &eq.second}) {
      if (t->coefficient && *t->coefficient <= 0) fail(ErrorCode::kConstraintViolation, "coefficients must be positive");
    }
    return eq;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  const Token& take() { return tokens_[pos_++]; }

  [[noreturn]] void syntax(const std::string& what, const Token& at) {
    const std::string found = at.kind == Token::kEnd ? "end of input" : "'" + at.text + "'";
    fail(ErrorCode::kSyntax, what + " (found " + found + " at column " + std::to_string(at.column) + ")");
  }

  void expect(Token::Kind kind, const char* what) {
    if (peek().kind != kind) syntax(std::string("expected ") + what, peek());
    take();
  }

  Rational number() {
    if (peek().kind != Token::kNumber) syntax("expected a number", peek());
    return parse_number(take().text);
  }

  Term term() {
    Term t;
    if (peek().kind == Token::kNumber) t.coefficient = parse_number(take().text);
    if (peek().kind != Token::kVariable) syntax("expected x or y", peek());
    t.variable = take().text == "x" ? Variable::kX : Variable::kY;
    return t;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string term_text(const Term& t) {
  std::string s = t.coefficient ? to_string(*t.coefficient) : "";
  return s + variable_symbol(t.variable);
}

std::string term_shape(const Term& t, const char* slot) {
  std::string s = t.coefficient ? slot : "";
  return s + variable_symbol(t.variable);
}

const char* slot_name(int equation_index, int position) {
  static const char* kSlots[2][4] = {{"<a>", "<b>", "<m>", "<p>"}, {"<c>", "<d>", "<n>", "<q>"}};
  return kSlots[equation_index][position];
}

template <typename TermFn, typename NumFn>
std::string render(const EquationAst& eq, TermFn term_fn, NumFn num_fn) {
  std::string s;
  if (eq.lead != Op::kNone) s += op_symbol(eq.lead);
  s += term_fn(eq.first, 0);
  if (eq.variable_rhs) return s + "=" + term_fn(eq.second, 1);
  s += op_symbol(eq.between);
  s += term_fn(eq.second, 1);
  s += "=" + num_fn(eq.rhs, 2);
  if (eq.rhs_op != Op::kNone) s += op_symbol(eq.rhs_op) + num_fn(*eq.rhs_extra, 3);
  return s;
}

Rational apply(Op op, const Rational& a, const Rational& b) {
  switch (op) {
    case Op::kPlus: return a + b;
    case Op::kMinus: return a - b;
    case Op::kTimes: return a * b;
    case Op::kDivide:
      require(b != 0, ErrorCode::kConstraintViolation, "division by zero");
      return a / b;
    case Op::kNone: break;
  }
  return a;
}

Rational rhs_value(const EquationAst& eq) {
  return eq.rhs_op == Op::kNone ? eq.rhs : apply(eq.rhs_op, eq.rhs, *eq.rhs_extra);
}

Rational coef(const Term& t) { return t.coefficient.value_or(Rational(1)); }

}  // namespace

EquationAst parse_equation(std::string_view text) { return Parser(text).parse(); }

std::string serialize(const EquationAst& eq) {
  return render(eq, [](const Term& t, int) { return term_text(t); }, [](const Rational& r, int) { return to_string(r); });
}

std::string shape_of(const EquationAst& eq, int equation_index) {
  return render(
      eq, [&](const Term& t, int pos) { return term_shape(t, slot_name(equation_index, pos)); },
      [&](const Rational&, int pos) { return std::string(slot_name(equation_index, pos)); });
}

std::vector<SlotValue> slot_values(const EquationAst& eq, int equation_index) {
  std::vector<SlotValue> out;
  if (eq.first.coefficient) out.push_back({slot_name(equation_index, 0), *eq.first.coefficient});
  if (eq.second.coefficient) out.push_back({slot_name(equation_index, 1), *eq.second.coefficient});
  out.push_back({slot_name(equation_index, 2), eq.rhs});
  if (eq.rhs_extra) out.push_back({slot_name(equation_index, 3), *eq.rhs_extra});
  return out;
}

LinearForm normalize(const EquationAst& eq) {
  const Rational sign0 = eq.lead == Op::kMinus ? -1 : 1;
  const Rational r = rhs_value(eq);
  Rational c0 = sign0 * coef(eq.first);
  Rational c1;
  Rational gamma = r;
  switch (eq.between) {
    case Op::kPlus: c1 = coef(eq.second); break;
    case Op::kMinus: c1 = -coef(eq.second); break;
    case Op::kDivide:
      // c0 v0 / (c1 v1) = r  ->  c0 v0 - r c1 v1 = 0
      c1 = -r * coef(eq.second);
      gamma = 0;
      break;
    case Op::kTimes:
    case Op::kNone:
      fail(ErrorCode::kNonLinear, "'" + serialize(eq) + "' multiplies x by y");
  }
  LinearForm f;
  f.alpha = eq.first.variable == Variable::kX ? c0 : c1;
  f.beta = eq.first.variable == Variable::kX ? c1 : c0;
  f.gamma = gamma;
  return f;
}

LinearSystem parse_system(std::string_view text) {
  const auto semi = text.find(';');
  require(semi != std::string_view::npos, ErrorCode::kSyntax, "expected two equations separated by ';'");
  require(text.find(';', semi + 1) == std::string_view::npos, ErrorCode::kSyntax, "expected exactly two equations");
  LinearSystem sys;
  sys.first = parse_equation(text.substr(0, semi));
  sys.second = parse_equation(text.substr(semi + 1));
  return sys;
}

std::string serialize(const LinearSystem& sys) { return serialize(sys.first) + "; " + serialize(sys.second); }

std::string shape_of(const LinearSystem& sys) { return shape_of(sys.first, 0) + "; " + shape_of(sys.second, 1); }

std::vector<SlotValue> slot_values(const LinearSystem& sys) {
  auto out = slot_values(sys.first, 0);
  auto second = slot_values(sys.second, 1);
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

Solution solve_system(LinearSystem& sys) {
  const LinearForm e1 = normalize(sys.first);
  const LinearForm e2 = normalize(sys.second);
  const Rational det = e1.alpha * e2.beta - e2.alpha * e1.beta;
  if (det == 0) fail(ErrorCode::kSingularSystem, "'" + serialize(sys) + "' has a zero determinant");
  Solution s;
  s.x = (e1.gamma * e2.beta - e2.gamma * e1.beta) / det;
  s.y = (e1.alpha * e2.gamma - e2.alpha * e1.gamma) / det;
  s.positive = s.x > 0 && s.y > 0;
  s.integral = boost::multiprecision::denominator(s.x) == 1 && boost::multiprecision::denominator(s.y) == 1;
  sys.solution = s;
  return s;
}

namespace {
bool holds(const EquationAst& eq, const Rational& x, const Rational& y) {
  auto value = [&](const Term& t) { return coef(t) * (t.variable == Variable::kX ? x : y); };
  Rational lhs = value(eq.first);
  if (eq.lead == Op::kMinus) lhs = -lhs;
  if (eq.variable_rhs) return lhs == value(eq.second);
  if (eq.between == Op::kDivide && value(eq.second) == 0) return false;
  lhs = apply(eq.between, lhs, value(eq.second));
  return lhs == rhs_value(eq);
}
}  // namespace

bool satisfies(const LinearSystem& sys, const Rational& x, const Rational& y) {
  return holds(sys.first, x, y) && holds(sys.second, x, y);
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& relation_vocabulary() {
  static const std::vector<std::string> kAll = {
      relation::kMul,         relation::kDiv,         relation::kAddToRes,    relation::kMinuendToRes,
      relation::kSubtrahendToRes, relation::kAddToDummy, relation::kSubToDummy, relation::kMulToDummy,
      relation::kDivToDummy};
  return kAll;
}

SymbolicGraph build_symbolic_graph(const LinearSystem& sys) {
  SymbolicGraph out;
  LabeledGraph& g = out.graph;
  g.nodes = {"x", "y"};
  auto add_node = [&](const std::string& token) {
    g.nodes.push_back(token);
    return static_cast<int>(g.nodes.size() - 1);
  };
  auto var_node = [](Variable v) { return v == Variable::kX ? 0 : 1; };

  for (int e = 0; e < 2; ++e) {
    const EquationAst& eq = sys.equation(e);
    const int v0 = var_node(eq.first.variable);
    const int v1 = var_node(eq.second.variable);
    const int c0 = eq.first.coefficient ? add_node(slot_name(e, 0)) : -1;
    const int c1 = eq.second.coefficient ? add_node(slot_name(e, 1)) : -1;
    const int m = add_node(slot_name(e, 2));
    int result = m;
    int extra = -1;
    if (eq.rhs_op != Op::kNone) {
      extra = add_node(slot_name(e, 3));
      result = add_node(kDummyToken);
    }
    out.result_nodes.push_back(result);

    if (c0 >= 0) g.edges.push_back({c0, relation::kMul, v0});
    if (c1 >= 0) g.edges.push_back({c1, relation::kMul, v1});

    std::string r0;
    std::string r1;
    switch (eq.between) {
      case Op::kPlus:
        r0 = eq.lead == Op::kMinus ? relation::kSubtrahendToRes : relation::kAddToRes;
        r1 = eq.lead == Op::kMinus ? relation::kMinuendToRes : relation::kAddToRes;
        break;
      case Op::kMinus:
        r0 = relation::kMinuendToRes;
        r1 = relation::kSubtrahendToRes;
        break;
      case Op::kTimes:
        r0 = r1 = relation::kMul;
        break;
      case Op::kDivide:
      case Op::kNone:
        r0 = relation::kMul;
        r1 = relation::kDiv;
        break;
    }
    g.edges.push_back({v0, r0, result});
    g.edges.push_back({v1, r1, result});

    if (extra >= 0) {
      std::string rm;
      std::string rx;
      switch (eq.rhs_op) {
        case Op::kPlus: rm = rx = relation::kAddToDummy; break;
        case Op::kMinus: rm = relation::kAddToDummy; rx = relation::kSubToDummy; break;
        case Op::kTimes: rm = rx = relation::kMulToDummy; break;
        default: rm = relation::kMulToDummy; rx = relation::kDivToDummy; break;
      }
      g.edges.push_back({m, rm, result});
      g.edges.push_back({extra, rx, result});
    }
  }
  return out;
}

}  // namespace mwpgen::eq
