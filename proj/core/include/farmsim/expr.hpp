/***************************************************************
 *
 * Copyright (C) 2026, the farmsim developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you
 * may not use this file except in compliance with the License.  You may
 * obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 ***************************************************************/

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// A small classad-style policy language: three-valued logic with UNDEFINED
// and ERROR as first-class values, attribute references resolved against a
// pair of ads (my/target), meta-comparison operators =?= / =!=, and the two
// builtin functions ifThenElse and stringListMember.
//
// Evaluation is total: it never throws.  Anything that goes wrong (type
// mismatch, unknown function, runaway attribute recursion) evaluates to the
// ERROR value instead.

namespace farmsim::expr {

enum class ValueKind { Boolean, Integer, Real, Str, Undefined, Error };

struct Value {
    static Value boolean(bool b) { return Value(Rep(b)); }
    static Value integer(std::int64_t i) { return Value(Rep(i)); }
    static Value real(double d) { return Value(Rep(d)); }
    static Value str(std::string s) { return Value(Rep(std::move(s))); }
    static Value undefined() { return Value(Rep(UndefinedT{})); }
    static Value error() { return Value(Rep(ErrorT{})); }

    ValueKind kind() const { return static_cast<ValueKind>(rep.index()); }

    bool is_boolean() const { return kind() == ValueKind::Boolean; }
    bool is_integer() const { return kind() == ValueKind::Integer; }
    bool is_real() const { return kind() == ValueKind::Real; }
    bool is_str() const { return kind() == ValueKind::Str; }
    bool is_undefined() const { return kind() == ValueKind::Undefined; }
    bool is_error() const { return kind() == ValueKind::Error; }
    bool is_numeric() const { return is_integer() || is_real(); }

    // Boolean(true), anything else is not "true" for matchmaking purposes.
    bool is_true() const { return is_boolean() && as_boolean(); }

    bool as_boolean() const { return std::get<bool>(rep); }
    std::int64_t as_integer() const { return std::get<std::int64_t>(rep); }
    double as_real() const { return std::get<double>(rep); }
    const std::string& as_str() const { return std::get<std::string>(rep); }
    double as_number() const { return is_integer() ? static_cast<double>(as_integer()) : as_real(); }

  private:
    struct UndefinedT {};
    struct ErrorT {};
    using Rep = std::variant<bool, std::int64_t, double, std::string, UndefinedT, ErrorT>;

    explicit Value(Rep r) : rep(std::move(r)) {}

    Rep rep;
};

// =?= semantics: same kind and same payload (strings case-sensitive);
// UNDEFINED is identical to UNDEFINED, ERROR to ERROR.
bool identical(const Value& a, const Value& b);

// Canonical literal form, as the pretty-printer would emit it.
std::string to_string(const Value& v);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge, MetaEq, MetaNe };

const char* to_string(CmpOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class RefScope { Auto, My, Target };

struct Literal { Value value; };
struct AttrRef {
    std::string name;          // original spelling, used for display
    std::string folded;        // case-folded, used for lookup
    RefScope scope = RefScope::Auto;
};
struct Not { ExprPtr operand; };
struct And { ExprPtr lhs, rhs; };
struct Or { ExprPtr lhs, rhs; };
struct Cmp { CmpOp op; ExprPtr lhs, rhs; };
struct Call {
    std::string function;
    std::string function_folded;
    std::vector<ExprPtr> args;
};
struct Paren { ExprPtr inner; };

struct Expr {
    std::variant<Literal, AttrRef, Not, And, Or, Cmp, Call, Paren> node;
};

ExprPtr make_literal(Value v);
ExprPtr make_attr(std::string name, RefScope scope = RefScope::Auto);
ExprPtr make_not(ExprPtr e);
ExprPtr make_and(ExprPtr l, ExprPtr r);
ExprPtr make_or(ExprPtr l, ExprPtr r);
ExprPtr make_cmp(CmpOp op, ExprPtr l, ExprPtr r);
ExprPtr make_call(std::string fn, std::vector<ExprPtr> args);
ExprPtr make_paren(ExprPtr e);

class SyntaxError : public std::runtime_error {
  public:
    SyntaxError(const std::string& msg, std::size_t offset, std::string expected);

    // 1-based byte offset into the source text.
    std::size_t offset() const { return offset_; }
    const std::string& expected() const { return expected_; }

  private:
    std::size_t offset_;
    std::string expected_;
};

// Parses the policy grammar: literals (integer, real, single- or
// double-quoted string, true/false/undefined/error), attribute references
// (optionally MY./TARGET. scoped), !, &&, ||, the comparison operators,
// `is`/`isnt`/`is not` (normalized to =?= / =!=), function calls and
// parentheses.  Throws SyntaxError; never returns a partial AST.
ExprPtr parse(std::string_view text);

// Canonical form: double-quoted strings, single spaces around binary
// operators, =?= / =!= spelled out.  parse(pretty_print(e)) is structurally
// identical to e for every e returned by parse().
std::string pretty_print(const ExprPtr& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

// Named attribute map playing the role of a job ad or slot ad.  Keys are
// case-insensitive; original spelling is preserved for display.
class AttributeSet {
  public:
    void set(const std::string& name, Value v);
    void set_expr(const std::string& name, ExprPtr e);
    void erase(const std::string& name);
    bool contains(std::string_view name) const;

    // Absent attributes evaluate to UNDEFINED; lookup returns nullptr.
    ExprPtr lookup(std::string_view name) const;
    ExprPtr lookup_folded(std::string_view folded_name) const;

    std::size_t size() const { return attrs_.size(); }

    // (original-name, expr) pairs in case-folded key order.
    std::vector<std::pair<std::string, ExprPtr>> items() const;

  private:
    struct Entry {
        std::string original_name;
        ExprPtr value;
    };
    std::map<std::string, Entry, std::less<>> attrs_; // keyed by case-folded name
};

// Three-valued evaluation over a pair of ads.  AttrRef resolves in `my`
// first, then `target`, else UNDEFINED.  Total: never throws.
Value evaluate(const ExprPtr& e, const AttributeSet& my, const AttributeSet& target);

// Bilateral match: both expressions must evaluate to Boolean(true), each
// with its own ad as `my` and the other as `target`.  UNDEFINED and ERROR
// count as no-match.
bool matches(const ExprPtr& job_requirements, const ExprPtr& slot_start,
             const AttributeSet& job, const AttributeSet& slot);

// Scalar literal from loose text (CLI --my k=v and scenario attributes):
// integer, real, true/false/undefined/error, otherwise a string (surrounding
// quotes stripped if present).
Value parse_scalar(std::string_view text);

std::string ascii_lower(std::string_view s);

} // namespace farmsim::expr
