// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>
#include <string>
#include <vector>

#include "farmsim/expr.hpp"
#include "farmsim/provisioning.hpp"

using namespace farmsim;
using namespace farmsim::expr;

namespace {

// The two policy expressions published for the isolated production site.
const char* kExpr1 = kSiteListRequirementsExpr;
const char* kExpr2 = kProductionOnlyStartExpr;

Value eval_str(const std::string& src, const AttributeSet& my = {},
               const AttributeSet& target = {}) {
    return evaluate(parse(src), my, target);
}

// Independent oracle for stringListMember: split on commas, trim ascii
// whitespace, exact comparison.
bool list_member_oracle(const std::string& needle, const std::string& list) {
    std::vector<std::string> items;
    std::string cur;
    for (std::size_t i = 0; i <= list.size(); ++i) {
        if (i == list.size() || list[i] == ',') {
            std::size_t b = 0, e = cur.size();
            while (b < e && std::isspace(static_cast<unsigned char>(cur[b]))) ++b;
            while (e > b && std::isspace(static_cast<unsigned char>(cur[e - 1]))) --e;
            items.push_back(cur.substr(b, e - b));
            cur.clear();
        } else {
            cur += list[i];
        }
    }
    for (const auto& item : items)
        if (item == needle) return true;
    return false;
}

} // namespace

TEST_CASE("parse covers the published policy expressions") {
    ExprPtr e1 = parse(kExpr1);
    REQUIRE(std::holds_alternative<Call>(e1->node));
    const auto& call = std::get<Call>(e1->node);
    CHECK(call.function == "ifthenelse");
    CHECK(call.args.size() == 3);

    ExprPtr e2 = parse(kExpr2);
    REQUIRE(std::holds_alternative<Paren>(e2->node));
    const auto& inner = std::get<Paren>(e2->node).inner;
    REQUIRE(std::holds_alternative<Or>(inner->node));
    const auto& orn = std::get<Or>(inner->node);
    CHECK(std::holds_alternative<Cmp>(orn.lhs->node));
    CHECK(std::holds_alternative<Cmp>(orn.rhs->node));
    CHECK(std::get<Cmp>(orn.lhs->node).op == CmpOp::MetaNe);
    CHECK(std::get<Cmp>(orn.rhs->node).op == CmpOp::MetaNe);

    // canonical form: double-quoted strings, UNDEFINED folded to lowercase
    CHECK(pretty_print(e2) ==
          "(GLIDEIN_CMSSite =!= \"T2_CH_CERN_P5\" || WMAgent_AgentName =!= undefined)");
    CHECK(structurally_equal(parse("(GLIDEIN_CMSSite =!= 'T2_CH_CERN_P5' || "
                                   "WMAgent_AgentName =!= UNDEFINED)"),
                             e2));
}

TEST_CASE("literal and malformed input") {
    ExprPtr t = parse("true");
    REQUIRE(std::holds_alternative<Literal>(t->node));
    CHECK(std::get<Literal>(t->node).value.is_true());

    try {
        parse("1 +");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 3);
    }
}

TEST_CASE("is-not sugar, isnt, and scoped references") {
    CHECK(structurally_equal(parse("x is not undefined"), parse("x =!= UNDEFINED")));
    CHECK(structurally_equal(parse("x isnt 4"), parse("x =!= 4")));
    CHECK(structurally_equal(parse("x is 4"), parse("x =?= 4")));

    AttributeSet my, target;
    my.set("x", Value::integer(1));
    target.set("x", Value::integer(2));
    CHECK(identical(eval_str("MY.x", my, target), Value::integer(1)));
    CHECK(identical(eval_str("TARGET.x", my, target), Value::integer(2)));
    CHECK(eval_str("MY.y", my, target).is_undefined());
    CHECK_THROWS_AS(parse("OTHER.x"), SyntaxError);
}

TEST_CASE("attr resolution prefers my over target, else undefined") {
    AttributeSet my, target;
    my.set("shared", Value::integer(10));
    target.set("shared", Value::integer(20));
    target.set("only_target", Value::str("t"));
    CHECK(identical(eval_str("shared", my, target), Value::integer(10)));
    CHECK(identical(eval_str("only_target", my, target), Value::str("t")));
    CHECK(eval_str("missing", my, target).is_undefined());
    CHECK(eval_str("x == x").is_undefined());
}

TEST_CASE("three-valued logic tables") {
    CHECK(identical(eval_str("undefined && false"), Value::boolean(false)));
    CHECK(identical(eval_str("false && error"), Value::boolean(false)));
    CHECK(eval_str("undefined && true").is_undefined());
    CHECK(eval_str("undefined && undefined").is_undefined());
    CHECK(eval_str("error && true").is_error());
    CHECK(eval_str("error && undefined").is_error());

    CHECK(identical(eval_str("undefined || true"), Value::boolean(true)));
    CHECK(identical(eval_str("error || true"), Value::boolean(true)));
    CHECK(eval_str("undefined || false").is_undefined());
    CHECK(eval_str("error || false").is_error());

    CHECK(identical(eval_str("!false"), Value::boolean(true)));
    CHECK(eval_str("!undefined").is_undefined());
    CHECK(eval_str("!error").is_error());
    CHECK(eval_str("!3").is_error());

    // type mismatches are errors, not exceptions
    CHECK(eval_str("1 && true").is_error());
    CHECK(eval_str("\"a\" < 1").is_error());
    CHECK(eval_str("true < false").is_error());
}

TEST_CASE("comparisons: undefined propagation, promotion, meta ops") {
    CHECK(eval_str("x == 1").is_undefined());
    CHECK(eval_str("x < 1").is_undefined());
    CHECK(identical(eval_str("1 == 1.0"), Value::boolean(true)));
    CHECK(identical(eval_str("3 < 3.5"), Value::boolean(true)));
    CHECK(identical(eval_str("2 >= 2"), Value::boolean(true)));
    CHECK(identical(eval_str("\"abc\" == \"ABC\""), Value::boolean(true))); // folded
    CHECK(identical(eval_str("\"abc\" =?= \"ABC\""), Value::boolean(false))); // exact
    CHECK(identical(eval_str("1 =?= 1.0"), Value::boolean(false))); // type-strict
    CHECK(identical(eval_str("undefined =?= undefined"), Value::boolean(true)));
    CHECK(identical(eval_str("undefined =!= undefined"), Value::boolean(false)));
    CHECK(identical(eval_str("error =?= error"), Value::boolean(true)));
    CHECK(identical(eval_str("error =!= 5"), Value::boolean(true)));
}

TEST_CASE("builtin functions") {
    CHECK(identical(eval_str("ifthenelse(true, 1, 2)"), Value::integer(1)));
    CHECK(identical(eval_str("ifthenelse(false, 1, 2)"), Value::integer(2)));
    CHECK(eval_str("ifthenelse(undefined, 1, 2)").is_undefined());
    CHECK(eval_str("ifthenelse(3, 1, 2)").is_error());
    CHECK(eval_str("IfThenElse(true, 1, 2)").is_integer()); // case-insensitive

    CHECK(identical(eval_str("stringListMember('B', 'A, B ,C')"), Value::boolean(true)));
    CHECK(identical(eval_str("stringListMember('D', 'A, B ,C')"), Value::boolean(false)));
    CHECK(identical(eval_str("stringListMember('b', 'A, B ,C')"), Value::boolean(false)));
    CHECK(eval_str("stringListMember(x, 'A')").is_undefined());
    CHECK(eval_str("stringListMember('A', x)").is_undefined());
    CHECK(eval_str("stringListMember(1, 'A')").is_error());
    CHECK(eval_str("stringListMember('A')").is_error());
    CHECK(eval_str("noSuchFunction(1)").is_error());
}

TEST_CASE("stringListMember against an independent oracle") {
    std::vector<std::string> needles = {"A", "B", "C", "T2_CH_CERN_P5", "", "x y", " B"};
    std::vector<std::string> lists = {"A, B ,C",
                                      "T2_CH_CERN_P5",
                                      "T2_US_Nowhere,T2_CH_CERN_P5",
                                      "",
                                      "  ",
                                      "x y, z",
                                      "A,,B",
                                      " B "};
    for (const auto& n : needles) {
        for (const auto& l : lists) {
            ExprPtr call = make_call(
                "stringListMember", {make_literal(Value::str(n)), make_literal(Value::str(l))});
            Value got = evaluate(call, {}, {});
            REQUIRE(got.is_boolean());
            CHECK_MESSAGE(got.as_boolean() == list_member_oracle(n, l),
                          "needle='" << n << "' list='" << l << "'");
        }
    }
}

TEST_CASE("site policy expressions over ads") {
    ExprPtr e1 = parse(kExpr1);
    ExprPtr e2 = parse(kExpr2);

    AttributeSet p5_slot;
    p5_slot.set("GLIDEIN_CMSSite", Value::str("T2_CH_CERN_P5"));

    // slot-side gate: identical site, no agent name -> both disjuncts false
    CHECK(identical(evaluate(e2, p5_slot, {}), Value::boolean(false)));

    // job-side guard: no site list -> the else-branch is the undefined literal
    AttributeSet anon_job;
    CHECK(evaluate(e1, anon_job, p5_slot).is_undefined());

    AttributeSet t0_job;
    t0_job.set("DESIRED_Sites", Value::str("T2_CH_CERN_P5"));
    t0_job.set("WMAgent_AgentName", Value::str("t0agent"));
    CHECK(identical(evaluate(e1, t0_job, p5_slot), Value::boolean(true)));
    CHECK(matches(e1, e2, t0_job, p5_slot));

    // analysis job: no agent name -> slot START rejects it
    AttributeSet ana_job;
    ana_job.set("DESIRED_Sites", Value::str("T2_CH_CERN_P5"));
    CHECK_FALSE(matches(e1, e2, ana_job, p5_slot));

    // trivial identity policy
    CHECK(matches(parse("true"), parse("true"), {}, {}));
}

TEST_CASE("pretty print canonical form") {
    CHECK(pretty_print(parse("'a'")) == "\"a\"");
    CHECK(pretty_print(parse("a&&b||c")) == "a && b || c");
    CHECK(pretty_print(parse("a && (b || c)")) == "a && (b || c)");
    CHECK(pretty_print(parse("((x))")) == "((x))");
    CHECK(pretty_print(parse("x is not undefined")) == "x =!= undefined");
    CHECK(pretty_print(parse("1.0")) == "1.0");
    CHECK(pretty_print(parse("f ( a , b )")) == "f(a, b)");
}

namespace {

ExprPtr random_ast(std::mt19937& g, int depth) {
    auto pick = [&](int n) { return static_cast<int>(g() % n); };
    const char* attrs[] = {"a", "b", "Foo", "DESIRED_Sites"};
    if (depth <= 0 || pick(10) < 3) {
        switch (pick(7)) {
            case 0: return make_literal(Value::boolean(pick(2) == 0));
            case 1: return make_literal(Value::integer(pick(100) - 50));
            case 2: return make_literal(Value::real(pick(1000) / 8.0));
            case 3: return make_literal(Value::str(std::string(1 + pick(3), 'a' + pick(26))));
            case 4: return make_literal(Value::undefined());
            case 5: return make_literal(Value::error());
            default: return make_attr(attrs[pick(4)]);
        }
    }
    switch (pick(7)) {
        case 0: return make_not(random_ast(g, depth - 1));
        case 1: return make_and(random_ast(g, depth - 1), random_ast(g, depth - 1));
        case 2: return make_or(random_ast(g, depth - 1), random_ast(g, depth - 1));
        case 3: {
            CmpOp ops[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le,
                           CmpOp::Gt, CmpOp::Ge, CmpOp::MetaEq, CmpOp::MetaNe};
            return make_cmp(ops[pick(8)], random_ast(g, depth - 1), random_ast(g, depth - 1));
        }
        case 4: return make_paren(random_ast(g, depth - 1));
        case 5:
            return make_call("ifThenElse", {random_ast(g, depth - 1), random_ast(g, depth - 1),
                                            random_ast(g, depth - 1)});
        default:
            return make_call("stringListMember",
                             {random_ast(g, depth - 1), random_ast(g, depth - 1)});
    }
}

} // namespace

TEST_CASE("round-trip: parse(pretty(parse(s))) is structurally identical") {
    std::vector<std::string> sources = {
        kExpr1,
        kExpr2,
        "((a))",
        "!(a && b) || c =?= 3",
        "MY.a == TARGET.b && stringListMember('x', list)",
        "a is not undefined && b isnt 'q'",
        "-3 < x && x <= 4.5e2",
    };
    std::mt19937 g(20230213);
    for (int i = 0; i < 400; ++i) sources.push_back(pretty_print(random_ast(g, 5)));

    for (const auto& s : sources) {
        ExprPtr once = parse(s);
        std::string printed = pretty_print(once);
        ExprPtr twice = parse(printed);
        CHECK_MESSAGE(structurally_equal(once, twice), "source: " << s << " printed: " << printed);
        CHECK(pretty_print(twice) == printed);
    }
}

TEST_CASE("evaluation is total and yields one of the six variants") {
    std::mt19937 g(7);
    AttributeSet my, target;
    my.set("a", Value::integer(3));
    my.set("Foo", Value::str("bar"));
    target.set("b", Value::real(1.5));
    target.set("DESIRED_Sites", Value::str("T2_CH_CERN_P5"));
    for (int i = 0; i < 3000; ++i) {
        ExprPtr e = random_ast(g, 6);
        Value v = evaluate(e, my, target); // must not throw
        CHECK(static_cast<int>(v.kind()) >= 0);
        CHECK(static_cast<int>(v.kind()) <= 5);
    }
}

TEST_CASE("meta comparison never yields undefined") {
    std::mt19937 g(99);
    for (int i = 0; i < 1000; ++i) {
        ExprPtr e = make_cmp(g() % 2 ? CmpOp::MetaNe : CmpOp::MetaEq, random_ast(g, 4),
                             random_ast(g, 4));
        Value v = evaluate(e, {}, {});
        CHECK(v.is_boolean());
    }
}

TEST_CASE("logical operators are commutative for the match decision") {
    std::mt19937 g(123);
    for (int i = 0; i < 1000; ++i) {
        ExprPtr a = random_ast(g, 4);
        ExprPtr b = random_ast(g, 4);
        Value ab = evaluate(make_and(a, b), {}, {});
        Value ba = evaluate(make_and(b, a), {}, {});
        CHECK(ab.is_true() == ba.is_true());
        CHECK(identical(ab, ba));
        Value oab = evaluate(make_or(a, b), {}, {});
        Value oba = evaluate(make_or(b, a), {}, {});
        CHECK(oab.is_true() == oba.is_true());
        CHECK(identical(oab, oba));
    }
}

TEST_CASE("self-referential attributes terminate with error") {
    AttributeSet my;
    my.set_expr("x", make_attr("x"));
    CHECK(evaluate(make_attr("x"), my, {}).is_error());
}

TEST_CASE("parse_scalar") {
    CHECK(identical(parse_scalar("42"), Value::integer(42)));
    CHECK(identical(parse_scalar("-7"), Value::integer(-7)));
    CHECK(identical(parse_scalar("2.5"), Value::real(2.5)));
    CHECK(identical(parse_scalar("true"), Value::boolean(true)));
    CHECK(parse_scalar("UNDEFINED").is_undefined());
    CHECK(identical(parse_scalar("T2_CH_CERN_P5"), Value::str("T2_CH_CERN_P5")));
    CHECK(identical(parse_scalar("'quoted'"), Value::str("quoted")));
    CHECK(identical(parse_scalar("  spaced  "), Value::str("spaced")));
}

TEST_CASE("shared expressions evaluate safely from many threads") {
    ExprPtr reqs = parse(kExpr1);
    ExprPtr start = parse(kExpr2);
    AttributeSet job, slot;
    job.set("DESIRED_Sites", Value::str("T2_CH_CERN_P5"));
    job.set("WMAgent_AgentName", Value::str("wmagent-x"));
    slot.set("GLIDEIN_CMSSite", Value::str("T2_CH_CERN_P5"));

    std::atomic<int> hits{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < 8; ++t)
        workers.emplace_back([&]() {
            for (int i = 0; i < 20000; ++i)
                if (matches(reqs, start, job, slot)) hits.fetch_add(1);
        });
    for (auto& w : workers) w.join();
    CHECK(hits.load() == 8 * 20000);
}

TEST_CASE("syntax errors carry 1-based offsets and no partial ast") {
    struct Case {
        const char* src;
        std::size_t offset;
    };
    for (const Case& c : {Case{"1 +", 3}, Case{"(a", 3}, Case{"a &&", 5}, Case{"f(a,", 5},
                          Case{"'open", 1}, Case{"a ~ b", 3}}) {
        try {
            parse(c.src);
            FAIL_CHECK("expected SyntaxError for: " << c.src);
        } catch (const SyntaxError& e) {
            CHECK_MESSAGE(e.offset() == c.offset, c.src << " -> offset " << e.offset());
        }
    }
}
