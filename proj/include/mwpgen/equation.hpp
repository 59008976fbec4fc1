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

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mwpgen::eq {

using Rational = boost::multiprecision::cpp_rational;

/// Canonical decimal rendering: "27", "-3", "1.5", otherwise "p/q".
std::string to_string(const Rational& r);
/// Parses an unsigned integer or decimal literal ("12", "0.25").
Rational parse_number(std::string_view text);

enum class Op { kNone, kPlus, kMinus, kTimes, kDivide };
enum class Variable { kX, kY };

char op_symbol(Op op);
char variable_symbol(Variable v);

struct Term {
  Variable variable = Variable::kX;
  std::optional<Rational> coefficient;  // absent = implicit 1
  friend bool operator==(const Term&, const Term&) = default;
};

/// One equation in the general form  [lead] c0 v0  between  c1 v1 = r0 [rhs_op r1].
///
/// The "x=2y" surface form is kept as variable_rhs: it is stored as
/// x - 2y = 0 and reserialized with the variable on the right side.
struct EquationAst {
  Op lead = Op::kNone;
  Term first;
  Op between = Op::kPlus;
  Term second;
  Rational rhs = 0;
  Op rhs_op = Op::kNone;
  std::optional<Rational> rhs_extra;
  bool variable_rhs = false;
  friend bool operator==(const EquationAst&, const EquationAst&) = default;
};

/// Parses one equation. Throws SyntaxError (with column) for text outside
/// the grammar and ConstraintViolation when both left-hand terms carry a
/// minus.
EquationAst parse_equation(std::string_view text);

/// Canonical text without whitespace; implicit coefficients stay implicit.
std::string serialize(const EquationAst& eq);

/// Canonical text of the equation with each present quantity replaced by
/// its slot token (equation index 0 uses <a> <b> <m> <p>, index 1 uses
/// <c> <d> <n> <q>).
std::string shape_of(const EquationAst& eq, int equation_index);

/// Slot tokens of the quantities an equation carries, in position order.
struct SlotValue {
  std::string slot;
  Rational value;
};
std::vector<SlotValue> slot_values(const EquationAst& eq, int equation_index);

/// alpha x + beta y = gamma.
struct LinearForm {
  Rational alpha;
  Rational beta;
  Rational gamma;
};

/// Throws NonLinearEquation when the terms are multiplied together and
/// ConstraintViolation on division by zero.
LinearForm normalize(const EquationAst& eq);

struct Solution {
  Rational x;
  Rational y;
  bool positive = true;   // both strictly positive
  bool integral = true;   // both integers
};

struct LinearSystem {
  EquationAst first;
  EquationAst second;
  std::optional<Solution> solution;

  const EquationAst& equation(int i) const { return i == 0 ? first : second; }
};

/// Parses "eq1; eq2".
LinearSystem parse_system(std::string_view text);
std::string serialize(const LinearSystem& sys);
/// "<shape of eq1>; <shape of eq2>".
std::string shape_of(const LinearSystem& sys);
std::vector<SlotValue> slot_values(const LinearSystem& sys);

/// Exact elimination. Throws SingularSystem on a zero determinant.
/// Non-positive or non-integral solutions are flagged, not rejected.
Solution solve_system(LinearSystem& sys);

/// Substitutes the solution back into both original equations.
bool satisfies(const LinearSystem& sys, const Rational& x, const Rational& y);

// ---------------------------------------------------------------------------
// Symbolic graph

namespace relation {
inline constexpr const char* kMul = "Mul";
inline constexpr const char* kDiv = "Div";
inline constexpr const char* kAddToRes = "Add to res";
inline constexpr const char* kMinuendToRes = "Minuend to res";
inline constexpr const char* kSubtrahendToRes = "Subtrahend to res";
inline constexpr const char* kAddToDummy = "Add to dummy";
inline constexpr const char* kSubToDummy = "Sub to dummy";
inline constexpr const char* kMulToDummy = "Mul to dummy";
inline constexpr const char* kDivToDummy = "Div to dummy";
}  // namespace relation

/// Every relation label the symbolic graph can emit.
const std::vector<std::string>& relation_vocabulary();

inline constexpr const char* kDummyToken = "<dum>";

struct LabeledEdge {
  int head = 0;
  std::string relation;
  int tail = 0;
  friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
};

/// Directed graph with token-labeled nodes and relation-labeled edges; the
/// common input of the Levi transformation.
struct LabeledGraph {
  std::vector<std::string> nodes;
  std::vector<LabeledEdge> edges;
  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;
};

struct SymbolicGraph {
  LabeledGraph graph;
  /// Node index of each equation's result (the right-hand quantity, or the
  /// dummy node when the right side is composite).
  std::vector<int> result_nodes;
};

SymbolicGraph build_symbolic_graph(const LinearSystem& sys);

}  // namespace mwpgen::eq
