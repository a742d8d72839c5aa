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

#include "farmsim/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace farmsim::expr {

namespace {

// Attribute values may reference other attributes; cap the resolution depth
// so evaluation stays total even on self-referential ads.
constexpr int kMaxEvalDepth = 128;

bool ieq(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

} // namespace

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool identical(const Value& a, const Value& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case ValueKind::Boolean: return a.as_boolean() == b.as_boolean();
        case ValueKind::Integer: return a.as_integer() == b.as_integer();
        case ValueKind::Real: return a.as_real() == b.as_real();
        case ValueKind::Str: return a.as_str() == b.as_str();
        case ValueKind::Undefined:
        case ValueKind::Error: return true;
    }
    return false;
}

static std::string format_real(double d) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    std::string s(buf, end);
    // keep reals lexically distinct from integers
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

static std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string to_string(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Boolean: return v.as_boolean() ? "true" : "false";
        case ValueKind::Integer: return std::to_string(v.as_integer());
        case ValueKind::Real: return format_real(v.as_real());
        case ValueKind::Str: return quote_string(v.as_str());
        case ValueKind::Undefined: return "undefined";
        case ValueKind::Error: return "error";
    }
    return "error";
}

const char* to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::MetaEq: return "=?=";
        case CmpOp::MetaNe: return "=!=";
    }
    return "==";
}

ExprPtr make_literal(Value v) { return std::make_shared<const Expr>(Expr{Literal{std::move(v)}}); }
ExprPtr make_attr(std::string name, RefScope scope) {
    std::string folded = ascii_lower(name);
    return std::make_shared<const Expr>(Expr{AttrRef{std::move(name), std::move(folded), scope}});
}
ExprPtr make_not(ExprPtr e) { return std::make_shared<const Expr>(Expr{Not{std::move(e)}}); }
ExprPtr make_and(ExprPtr l, ExprPtr r) {
    return std::make_shared<const Expr>(Expr{And{std::move(l), std::move(r)}});
}
ExprPtr make_or(ExprPtr l, ExprPtr r) {
    return std::make_shared<const Expr>(Expr{Or{std::move(l), std::move(r)}});
}
ExprPtr make_cmp(CmpOp op, ExprPtr l, ExprPtr r) {
    return std::make_shared<const Expr>(Expr{Cmp{op, std::move(l), std::move(r)}});
}
ExprPtr make_call(std::string fn, std::vector<ExprPtr> args) {
    std::string folded = ascii_lower(fn);
    return std::make_shared<const Expr>(Expr{Call{std::move(fn), std::move(folded), std::move(args)}});
}
ExprPtr make_paren(ExprPtr e) { return std::make_shared<const Expr>(Expr{Paren{std::move(e)}}); }

SyntaxError::SyntaxError(const std::string& msg, std::size_t offset, std::string expected)
    : std::runtime_error(msg + " at offset " + std::to_string(offset) +
                         (expected.empty() ? "" : " (expected " + expected + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
    End, Ident, Int, Real, Str,
    AndAnd, OrOr, Bang,
    LParen, RParen, Comma, Dot,
    Lt, Le, Gt, Ge, EqEq, Ne, MetaEq, MetaNe,
    KwIs, KwIsnt, KwNot, KwTrue, KwFalse, KwUndefined, KwError,
};

struct Token {
    Tok kind = Tok::End;
    std::size_t offset = 0; // 1-based byte offset of first char
    std::string text;       // identifier or string payload
    std::int64_t int_value = 0;
    double real_value = 0;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_ = Token{};
        tok_.offset = pos_ + 1;
        if (pos_ >= src_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            lex_word();
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '.')) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            lex_number();
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string(c);
            return;
        }
        lex_operator();
    }

    void lex_word() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string_view w = src_.substr(start, pos_ - start);
        if (ieq(w, "true")) tok_.kind = Tok::KwTrue;
        else if (ieq(w, "false")) tok_.kind = Tok::KwFalse;
        else if (ieq(w, "undefined")) tok_.kind = Tok::KwUndefined;
        else if (ieq(w, "error")) tok_.kind = Tok::KwError;
        else if (ieq(w, "is")) tok_.kind = Tok::KwIs;
        else if (ieq(w, "isnt")) tok_.kind = Tok::KwIsnt;
        else if (ieq(w, "not")) tok_.kind = Tok::KwNot;
        else {
            tok_.kind = Tok::Ident;
            tok_.text = std::string(w);
        }
    }

    void lex_number() {
        std::size_t start = pos_;
        if (src_[pos_] == '-') ++pos_;
        bool is_real = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            is_real = true;
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                is_real = true;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark; // not an exponent; leave 'e' for the next token
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        if (is_real) {
            tok_.kind = Tok::Real;
            tok_.real_value = std::strtod(text.c_str(), nullptr);
        } else {
            tok_.kind = Tok::Int;
            errno = 0;
            char* end = nullptr;
            long long v = std::strtoll(text.c_str(), &end, 10);
            if (errno == ERANGE) {
                tok_.kind = Tok::Real;
                tok_.real_value = std::strtod(text.c_str(), nullptr);
            } else {
                tok_.int_value = static_cast<std::int64_t>(v);
            }
        }
    }

    void lex_string(char quote) {
        std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (pos_ < src_.size() && src_[pos_] != quote) {
            char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                char e = src_[pos_ + 1];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '\\': out += '\\'; break;
                    case '\'': out += '\''; break;
                    case '"': out += '"'; break;
                    default: out += e;
                }
                pos_ += 2;
            } else {
                out += c;
                ++pos_;
            }
        }
        if (pos_ >= src_.size())
            throw SyntaxError("unterminated string literal", start + 1, "closing quote");
        ++pos_; // closing quote
        tok_.kind = Tok::Str;
        tok_.text = std::move(out);
    }

    void lex_operator() {
        auto two = [&](char a, char b) {
            return pos_ + 1 < src_.size() && src_[pos_] == a && src_[pos_ + 1] == b;
        };
        char c = src_[pos_];
        if (two('&', '&')) { tok_.kind = Tok::AndAnd; pos_ += 2; return; }
        if (two('|', '|')) { tok_.kind = Tok::OrOr; pos_ += 2; return; }
        if (two('=', '=')) { tok_.kind = Tok::EqEq; pos_ += 2; return; }
        if (two('!', '=')) { tok_.kind = Tok::Ne; pos_ += 2; return; }
        if (two('<', '=')) { tok_.kind = Tok::Le; pos_ += 2; return; }
        if (two('>', '=')) { tok_.kind = Tok::Ge; pos_ += 2; return; }
        if (c == '=' && pos_ + 2 < src_.size() && src_[pos_ + 1] == '?' && src_[pos_ + 2] == '=') {
            tok_.kind = Tok::MetaEq; pos_ += 3; return;
        }
        if (c == '=' && pos_ + 2 < src_.size() && src_[pos_ + 1] == '!' && src_[pos_ + 2] == '=') {
            tok_.kind = Tok::MetaNe; pos_ += 3; return;
        }
        switch (c) {
            case '!': tok_.kind = Tok::Bang; ++pos_; return;
            case '(': tok_.kind = Tok::LParen; ++pos_; return;
            case ')': tok_.kind = Tok::RParen; ++pos_; return;
            case ',': tok_.kind = Tok::Comma; ++pos_; return;
            case '.': tok_.kind = Tok::Dot; ++pos_; return;
            case '<': tok_.kind = Tok::Lt; ++pos_; return;
            case '>': tok_.kind = Tok::Gt; ++pos_; return;
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", pos_ + 1,
                                  "a token");
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_;
};

// ---------------------------------------------------------------------------
// Parser (recursive descent; comparison is non-associative)
// ---------------------------------------------------------------------------

class Parser {
  public:
    explicit Parser(std::string_view src) : lex_(src) {}

    ExprPtr parse_all() {
        ExprPtr e = parse_or();
        const Token& t = lex_.peek();
        if (t.kind != Tok::End)
            throw SyntaxError("trailing input after expression", t.offset, "end of input");
        return e;
    }

  private:
    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (lex_.peek().kind == Tok::OrOr) {
            lex_.take();
            lhs = make_or(std::move(lhs), parse_and());
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_cmp();
        while (lex_.peek().kind == Tok::AndAnd) {
            lex_.take();
            lhs = make_and(std::move(lhs), parse_cmp());
        }
        return lhs;
    }

    ExprPtr parse_cmp() {
        ExprPtr lhs = parse_unary();
        std::optional<CmpOp> op;
        switch (lex_.peek().kind) {
            case Tok::EqEq: op = CmpOp::Eq; break;
            case Tok::Ne: op = CmpOp::Ne; break;
            case Tok::Lt: op = CmpOp::Lt; break;
            case Tok::Le: op = CmpOp::Le; break;
            case Tok::Gt: op = CmpOp::Gt; break;
            case Tok::Ge: op = CmpOp::Ge; break;
            case Tok::MetaEq: op = CmpOp::MetaEq; break;
            case Tok::MetaNe: op = CmpOp::MetaNe; break;
            case Tok::KwIs: {
                lex_.take();
                if (lex_.peek().kind == Tok::KwNot) {
                    lex_.take();
                    return make_cmp(CmpOp::MetaNe, std::move(lhs), parse_unary());
                }
                return make_cmp(CmpOp::MetaEq, std::move(lhs), parse_unary());
            }
            case Tok::KwIsnt: {
                lex_.take();
                return make_cmp(CmpOp::MetaNe, std::move(lhs), parse_unary());
            }
            default: break;
        }
        if (!op) return lhs;
        lex_.take();
        return make_cmp(*op, std::move(lhs), parse_unary());
    }

    ExprPtr parse_unary() {
        if (lex_.peek().kind == Tok::Bang) {
            lex_.take();
            return make_not(parse_unary());
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::Int: return make_literal(Value::integer(t.int_value));
            case Tok::Real: return make_literal(Value::real(t.real_value));
            case Tok::Str: return make_literal(Value::str(std::move(t.text)));
            case Tok::KwTrue: return make_literal(Value::boolean(true));
            case Tok::KwFalse: return make_literal(Value::boolean(false));
            case Tok::KwUndefined: return make_literal(Value::undefined());
            case Tok::KwError: return make_literal(Value::error());
            case Tok::LParen: {
                ExprPtr inner = parse_or();
                Token close = lex_.take();
                if (close.kind != Tok::RParen)
                    throw SyntaxError("unbalanced parenthesis", close.offset, "')'");
                return make_paren(std::move(inner));
            }
            case Tok::Ident: {
                if (lex_.peek().kind == Tok::LParen) return parse_call(std::move(t.text));
                if (lex_.peek().kind == Tok::Dot) {
                    RefScope scope;
                    if (ieq(t.text, "my")) scope = RefScope::My;
                    else if (ieq(t.text, "target")) scope = RefScope::Target;
                    else
                        throw SyntaxError("unknown attribute scope '" + t.text + "'", t.offset,
                                          "MY or TARGET");
                    lex_.take(); // '.'
                    Token name = lex_.take();
                    if (name.kind != Tok::Ident)
                        throw SyntaxError("scoped reference needs an attribute name", name.offset,
                                          "attribute name");
                    return make_attr(std::move(name.text), scope);
                }
                return make_attr(std::move(t.text));
            }
            default:
                throw SyntaxError("unexpected token", t.offset, "an expression");
        }
    }

    ExprPtr parse_call(std::string fn) {
        lex_.take(); // '('
        std::vector<ExprPtr> args;
        if (lex_.peek().kind != Tok::RParen) {
            args.push_back(parse_or());
            while (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                args.push_back(parse_or());
            }
        }
        Token close = lex_.take();
        if (close.kind != Tok::RParen)
            throw SyntaxError("unbalanced call argument list", close.offset, "')' or ','");
        return make_call(std::move(fn), std::move(args));
    }

    Lexer lex_;
};

} // namespace

ExprPtr parse(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Pretty-printer
// ---------------------------------------------------------------------------

namespace {

// precedence: Or < And < Cmp < Not < primary
int node_prec(const Expr& e) {
    struct V {
        int operator()(const Literal&) const { return 5; }
        int operator()(const AttrRef&) const { return 5; }
        int operator()(const Not&) const { return 4; }
        int operator()(const Cmp&) const { return 3; }
        int operator()(const And&) const { return 2; }
        int operator()(const Or&) const { return 1; }
        int operator()(const Call&) const { return 5; }
        int operator()(const Paren&) const { return 5; }
    };
    return std::visit(V{}, e.node);
}

void print_expr(const Expr& e, std::string& out);

void print_child(const ExprPtr& child, int min_prec, std::string& out) {
    if (node_prec(*child) < min_prec) {
        out += '(';
        print_expr(*child, out);
        out += ')';
    } else {
        print_expr(*child, out);
    }
}

void print_expr(const Expr& e, std::string& out) {
    struct V {
        std::string& out;
        void operator()(const Literal& l) const { out += to_string(l.value); }
        void operator()(const AttrRef& a) const {
            if (a.scope == RefScope::My) out += "MY.";
            else if (a.scope == RefScope::Target) out += "TARGET.";
            out += a.name;
        }
        void operator()(const Not& n) const {
            out += '!';
            print_child(n.operand, 4, out);
        }
        void operator()(const And& a) const {
            print_child(a.lhs, 2, out);
            out += " && ";
            print_child(a.rhs, 3, out);
        }
        void operator()(const Or& o) const {
            print_child(o.lhs, 1, out);
            out += " || ";
            print_child(o.rhs, 2, out);
        }
        void operator()(const Cmp& c) const {
            print_child(c.lhs, 4, out);
            out += ' ';
            out += to_string(c.op);
            out += ' ';
            print_child(c.rhs, 4, out);
        }
        void operator()(const Call& c) const {
            out += c.function;
            out += '(';
            for (std::size_t i = 0; i < c.args.size(); ++i) {
                if (i) out += ", ";
                print_expr(*c.args[i], out);
            }
            out += ')';
        }
        void operator()(const Paren& p) const {
            out += '(';
            print_expr(*p.inner, out);
            out += ')';
        }
    };
    std::visit(V{out}, e.node);
}

} // namespace

std::string pretty_print(const ExprPtr& e) {
    std::string out;
    if (e) print_expr(*e, out);
    return out;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->node.index() != b->node.index()) return false;
    struct V {
        const Expr& other;
        bool operator()(const Literal& l) const {
            return identical(l.value, std::get<Literal>(other.node).value);
        }
        bool operator()(const AttrRef& r) const {
            const auto& o = std::get<AttrRef>(other.node);
            return r.scope == o.scope && r.folded == o.folded;
        }
        bool operator()(const Not& n) const {
            return structurally_equal(n.operand, std::get<Not>(other.node).operand);
        }
        bool operator()(const And& n) const {
            const auto& o = std::get<And>(other.node);
            return structurally_equal(n.lhs, o.lhs) && structurally_equal(n.rhs, o.rhs);
        }
        bool operator()(const Or& n) const {
            const auto& o = std::get<Or>(other.node);
            return structurally_equal(n.lhs, o.lhs) && structurally_equal(n.rhs, o.rhs);
        }
        bool operator()(const Cmp& n) const {
            const auto& o = std::get<Cmp>(other.node);
            return n.op == o.op && structurally_equal(n.lhs, o.lhs) &&
                   structurally_equal(n.rhs, o.rhs);
        }
        bool operator()(const Call& n) const {
            const auto& o = std::get<Call>(other.node);
            if (n.function_folded != o.function_folded || n.args.size() != o.args.size())
                return false;
            for (std::size_t i = 0; i < n.args.size(); ++i)
                if (!structurally_equal(n.args[i], o.args[i])) return false;
            return true;
        }
        bool operator()(const Paren& n) const {
            return structurally_equal(n.inner, std::get<Paren>(other.node).inner);
        }
    };
    return std::visit(V{*b}, a->node);
}

// ---------------------------------------------------------------------------
// AttributeSet
// ---------------------------------------------------------------------------

void AttributeSet::set(const std::string& name, Value v) {
    set_expr(name, make_literal(std::move(v)));
}

void AttributeSet::set_expr(const std::string& name, ExprPtr e) {
    attrs_[ascii_lower(name)] = Entry{name, std::move(e)};
}

void AttributeSet::erase(const std::string& name) { attrs_.erase(ascii_lower(name)); }

bool AttributeSet::contains(std::string_view name) const {
    return attrs_.count(ascii_lower(name)) > 0;
}

ExprPtr AttributeSet::lookup(std::string_view name) const {
    return lookup_folded(ascii_lower(name));
}

ExprPtr AttributeSet::lookup_folded(std::string_view folded_name) const {
    auto it = attrs_.find(folded_name);
    if (it == attrs_.end()) return nullptr;
    return it->second.value;
}

std::vector<std::pair<std::string, ExprPtr>> AttributeSet::items() const {
    std::vector<std::pair<std::string, ExprPtr>> out;
    out.reserve(attrs_.size());
    for (const auto& [key, entry] : attrs_) out.emplace_back(entry.original_name, entry.value);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

struct EvalCtx {
    const AttributeSet& my;
    const AttributeSet& target;
};

Value eval(const Expr& e, const EvalCtx& ctx, int depth);

// Logical operand coercion: booleans, UNDEFINED and ERROR pass through, any
// other type is a mismatch and becomes ERROR.
Value coerce_logical(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Boolean:
        case ValueKind::Undefined:
        case ValueKind::Error: return v;
        default: return Value::error();
    }
}

// FALSE dominates, then ERROR is absorbing, then UNDEFINED.
Value logical_and(const Value& lraw, const Value& rraw) {
    Value l = coerce_logical(lraw), r = coerce_logical(rraw);
    if ((l.is_boolean() && !l.as_boolean()) || (r.is_boolean() && !r.as_boolean()))
        return Value::boolean(false);
    if (l.is_error() || r.is_error()) return Value::error();
    if (l.is_undefined() || r.is_undefined()) return Value::undefined();
    return Value::boolean(true);
}

// TRUE dominates, then ERROR, then UNDEFINED.
Value logical_or(const Value& lraw, const Value& rraw) {
    Value l = coerce_logical(lraw), r = coerce_logical(rraw);
    if ((l.is_boolean() && l.as_boolean()) || (r.is_boolean() && r.as_boolean()))
        return Value::boolean(true);
    if (l.is_error() || r.is_error()) return Value::error();
    if (l.is_undefined() || r.is_undefined()) return Value::undefined();
    return Value::boolean(false);
}

Value logical_not(const Value& vraw) {
    Value v = coerce_logical(vraw);
    if (v.is_boolean()) return Value::boolean(!v.as_boolean());
    return v;
}

int compare_strings_fold(const std::string& a, const std::string& b) {
    // classad convention: ==/!= and ordering on strings fold case
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        int ca = std::tolower(static_cast<unsigned char>(a[i]));
        int cb = std::tolower(static_cast<unsigned char>(b[i]));
        if (ca != cb) return ca < cb ? -1 : 1;
    }
    if (a.size() == b.size()) return 0;
    return a.size() < b.size() ? -1 : 1;
}

Value eval_cmp(CmpOp op, const Value& l, const Value& r) {
    if (op == CmpOp::MetaEq) return Value::boolean(identical(l, r));
    if (op == CmpOp::MetaNe) return Value::boolean(!identical(l, r));

    if (l.is_error() || r.is_error()) return Value::error();
    if (l.is_undefined() || r.is_undefined()) return Value::undefined();

    int cmp = 0;
    if (l.is_numeric() && r.is_numeric()) {
        if (l.is_integer() && r.is_integer()) {
            auto a = l.as_integer(), b = r.as_integer();
            cmp = a < b ? -1 : (a > b ? 1 : 0);
        } else {
            double a = l.as_number(), b = r.as_number();
            if (std::isnan(a) || std::isnan(b)) return Value::error();
            cmp = a < b ? -1 : (a > b ? 1 : 0);
        }
    } else if (l.is_str() && r.is_str()) {
        cmp = compare_strings_fold(l.as_str(), r.as_str());
    } else if (l.is_boolean() && r.is_boolean()) {
        if (op != CmpOp::Eq && op != CmpOp::Ne) return Value::error();
        cmp = l.as_boolean() == r.as_boolean() ? 0 : 1;
    } else {
        return Value::error(); // type mismatch
    }

    switch (op) {
        case CmpOp::Eq: return Value::boolean(cmp == 0);
        case CmpOp::Ne: return Value::boolean(cmp != 0);
        case CmpOp::Lt: return Value::boolean(cmp < 0);
        case CmpOp::Le: return Value::boolean(cmp <= 0);
        case CmpOp::Gt: return Value::boolean(cmp > 0);
        case CmpOp::Ge: return Value::boolean(cmp >= 0);
        default: return Value::error();
    }
}

// split on commas, trim surrounding whitespace, case-sensitive membership
Value string_list_member(const Value& needle, const Value& list) {
    if (needle.is_undefined() || list.is_undefined()) return Value::undefined();
    if (!needle.is_str() || !list.is_str()) return Value::error();
    const std::string& s = list.as_str();
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::size_t end = comma == std::string::npos ? s.size() : comma;
        std::size_t b = pos, e = end;
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        if (s.compare(b, e - b, needle.as_str()) == 0 && e - b == needle.as_str().size())
            return Value::boolean(true);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return Value::boolean(false);
}

Value eval_call(const Call& call, const EvalCtx& ctx, int depth) {
    const std::string& fn = call.function_folded;
    if (fn == "ifthenelse") {
        if (call.args.size() != 3) return Value::error();
        Value cond = eval(*call.args[0], ctx, depth + 1);
        if (cond.is_undefined()) return Value::undefined();
        if (!cond.is_boolean()) return Value::error();
        return eval(cond.as_boolean() ? *call.args[1] : *call.args[2], ctx, depth + 1);
    }
    if (fn == "stringlistmember") {
        if (call.args.size() != 2) return Value::error();
        Value needle = eval(*call.args[0], ctx, depth + 1);
        Value list = eval(*call.args[1], ctx, depth + 1);
        if (needle.is_error() || list.is_error()) return Value::error();
        return string_list_member(needle, list);
    }
    return Value::error(); // unknown function
}

Value eval(const Expr& e, const EvalCtx& ctx, int depth) {
    if (depth > kMaxEvalDepth) return Value::error();
    struct V {
        const EvalCtx& ctx;
        int depth;
        Value operator()(const Literal& l) const { return l.value; }
        Value operator()(const AttrRef& a) const {
            ExprPtr found;
            if (a.scope == RefScope::My || a.scope == RefScope::Auto)
                found = ctx.my.lookup_folded(a.folded);
            if (!found && (a.scope == RefScope::Target || a.scope == RefScope::Auto))
                found = ctx.target.lookup_folded(a.folded);
            if (!found) return Value::undefined();
            return eval(*found, ctx, depth + 1);
        }
        Value operator()(const Not& n) const { return logical_not(eval(*n.operand, ctx, depth + 1)); }
        Value operator()(const And& n) const {
            return logical_and(eval(*n.lhs, ctx, depth + 1), eval(*n.rhs, ctx, depth + 1));
        }
        Value operator()(const Or& n) const {
            return logical_or(eval(*n.lhs, ctx, depth + 1), eval(*n.rhs, ctx, depth + 1));
        }
        Value operator()(const Cmp& n) const {
            return eval_cmp(n.op, eval(*n.lhs, ctx, depth + 1), eval(*n.rhs, ctx, depth + 1));
        }
        Value operator()(const Call& n) const { return eval_call(n, ctx, depth); }
        Value operator()(const Paren& n) const { return eval(*n.inner, ctx, depth + 1); }
    };
    return std::visit(V{ctx, depth}, e.node);
}

} // namespace

Value evaluate(const ExprPtr& e, const AttributeSet& my, const AttributeSet& target) {
    if (!e) return Value::error();
    return eval(*e, EvalCtx{my, target}, 0);
}

bool matches(const ExprPtr& job_requirements, const ExprPtr& slot_start,
             const AttributeSet& job, const AttributeSet& slot) {
    return evaluate(job_requirements, job, slot).is_true() &&
           evaluate(slot_start, slot, job).is_true();
}

Value parse_scalar(std::string_view text) {
    // trim
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);
    if (text.empty()) return Value::str("");
    if (text.size() >= 2 &&
        ((text.front() == '"' && text.back() == '"') ||
         (text.front() == '\'' && text.back() == '\'')))
        return Value::str(std::string(text.substr(1, text.size() - 2)));
    if (ieq(text, "true")) return Value::boolean(true);
    if (ieq(text, "false")) return Value::boolean(false);
    if (ieq(text, "undefined")) return Value::undefined();
    if (ieq(text, "error")) return Value::error();
    {
        std::int64_t iv = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), iv);
        if (ec == std::errc() && p == text.data() + text.size()) return Value::integer(iv);
    }
    {
        std::string tmp(text);
        char* end = nullptr;
        double dv = std::strtod(tmp.c_str(), &end);
        if (end == tmp.c_str() + tmp.size() && end != tmp.c_str()) return Value::real(dv);
    }
    return Value::str(std::string(text));
}

} // namespace farmsim::expr
