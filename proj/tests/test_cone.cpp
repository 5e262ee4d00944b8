#include "doctest.h"
#include "entcone/catalog.hpp"
#include "entcone/cone.hpp"
#include "entcone/lp.hpp"

using namespace entcone;

namespace {

const VariableSet XYZ({"X", "Y", "Z"});

Cone gamma3() {
    Cone c = Cone::full_space(XYZ);
    for (const auto& k : shannon_elemental(XYZ)) c.add(k);
    return c;
}

IntVec graded(const Cone& c, std::vector<long> g) {
    IntVec r(c.dim(), 0);
    auto order = graded_order(3);
    for (std::size_t i = 0; i < order.size(); ++i) r[static_cast<std::size_t>(c.index_of(order[i]))] = g[i];
    return r;
}

}  // namespace

TEST_CASE("LP optimum and Farkas certificate") {
    LpProblem p;
    p.n = 1;
    p.rows = {{{Rational(1)}, Relation::Geq, 0}, {{Rational(-1)}, Relation::Geq, -1}};
    p.objective = {Rational(1)};
    auto r = lp_solve(p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == 1);

    LpProblem q;
    q.n = 1;
    q.rows = {{{Rational(1)}, Relation::Geq, 1}, {{Rational(-1)}, Relation::Geq, 0}};
    auto s = lp_solve(q);
    REQUIRE(s.status == LpStatus::Infeasible);
    REQUIRE(s.multipliers.size() == 2);
    CHECK(s.multipliers[0] > 0);
    CHECK(s.multipliers[0] == s.multipliers[1]);

    LpProblem u;
    u.n = 1;
    u.rows = {{{Rational(1)}, Relation::Geq, 0}};
    u.objective = {Rational(1)};
    CHECK(lp_solve(u).status == LpStatus::Unbounded);
}

TEST_CASE("elemental inequalities of three variables are irredundant") {
    Cone g = gamma3();
    for (std::size_t i = 0; i < g.ineqs.size(); ++i) {
        auto w = irredundancy_witness(g, i);
        REQUIRE(w.has_value());
        CHECK(dot(g.ineqs[i], *w) < 0);
        for (std::size_t j = 0; j < g.ineqs.size(); ++j)
            if (j != i) CHECK(dot(g.ineqs[j], *w) >= 0);
    }
    CHECK(reduce(g).ineqs.size() == 9);
}

TEST_CASE("implication with certificate") {
    Cone c(XYZ, {1});
    c.add_ineq({Integer(1)});
    auto imp = implies(c, IntVec{Integer(1)});
    REQUIRE(imp.holds);
    CHECK(verify_certificate(c, imp.certificate));
    REQUIRE(imp.certificate.ineq_multipliers.size() == 1);
    CHECK(imp.certificate.ineq_multipliers[0].second == 1);

    auto no = implies(c, IntVec{Integer(-1)});
    CHECK_FALSE(no.holds);
    CHECK(no.counterexample_value < 0);
}

TEST_CASE("instrumental Ingleton instances follow from Shannon and independences") {
    VariableSet v({"A", "X", "Y", "Z"});
    Cone c = Cone::full_space(v);
    for (const auto& k : shannon_elemental(v)) c.add(k);
    Mask A = 1, X = 2, Y = 4, Z = 8;
    c.add(eq(v, I(A, X)));
    c.add(eq(v, I(X, Y, A | Z)));
    for (const auto& p : all_instantiations(Template::parse("ingleton"), v, v.full())) {
        auto imp = implies(c, p.constraint);
        CHECK(imp.holds);
        CHECK(verify_certificate(c, imp.certificate));
    }
}

TEST_CASE("membership and the family witness") {
    Cone g = gamma3();
    Cone c7 = g;
    for (auto row : std::vector<std::vector<long>>{{-1, -1, -1, 1, 1, 0, 0}, {-1, -1, -1, 1, 0, 1, 0},
                                                    {-1, -1, -1, 0, 1, 1, 0}, {-5, -5, -5, 4, 4, 4, -2},
                                                    {-3, -3, -3, 2, 2, 3, -1}, {-3, -3, -3, 2, 3, 2, -1},
                                                    {-3, -3, -3, 3, 2, 2, -1}})
        c7.add_ineq(graded(c7, row));
    IntVec w = graded(c7, {11, 14, 14, 20, 20, 23, 28});
    CHECK(member(c7, to_rational(w)).inside);
    // First family at s=1 on (X,Y,Z): -2X - 2Y - 2Z + 3XY + 3XZ + 3YZ - 4XYZ (direct arithmetic).
    IntVec fam = graded(c7, {-2, -2, -2, 3, 3, 3, -4});
    CHECK(dot(fam, w) == -1);
    CHECK(dot(fam, graded(c7, {2, 3, 3, 4, 4, 5, 6})) == -1);
    Cone tighter = c7;
    tighter.add_ineq(fam);
    auto m = member(tighter, to_rational(w));
    CHECK_FALSE(m.inside);
    CHECK(m.exact_value == -1);
    auto cmp = cone_equal(c7, tighter);
    CHECK_FALSE(cmp.equal);
    CHECK(cmp.witness_in_a);
}

TEST_CASE("cone equality and elimination of nothing") {
    Cone g = gamma3();
    CHECK(cone_equal(g, g).equal);
    Cone same = fm_eliminate(g, {});
    CHECK(cone_equal(reduce(same), reduce(g)).equal);
}

TEST_CASE("double description of simple cones") {
    Cone half(XYZ, {1});
    half.add_ineq({Integer(1)});
    Cone dd = double_description(half);
    REQUIRE(dd.rays.has_value());
    REQUIRE(dd.rays->size() == 1);
    CHECK((*dd.rays)[0] == IntVec{Integer(1)});

    Cone inner = gamma3();
    inner.add_ineq(graded(inner, {-1, -1, -1, 1, 1, 1, -1}));
    CHECK(double_description(inner).rays->size() == 7);
    CHECK(double_description(gamma3()).rays->size() == 8);
}

TEST_CASE("projection drops a coordinate") {
    // x + y >= 0, x - y >= 0: projecting out y leaves x >= 0.
    Cone c(XYZ, {1, 2});
    c.add_ineq({Integer(1), Integer(1)});
    c.add_ineq({Integer(1), Integer(-1)});
    Cone p = fm_eliminate(c, {2});
    REQUIRE(p.coords == std::vector<Mask>{1});
    Cone want(XYZ, {1});
    want.add_ineq({Integer(1)});
    CHECK(cone_equal(p, want).equal);
}

TEST_CASE("hull of rays and text round trip") {
    Cone g = gamma3();
    Cone dd = double_description(g);
    Cone h = hull_of_rays(XYZ, g.coords, *dd.rays);
    CHECK(cone_equal(h, g).equal);
    Cone back = Cone::parse(g.to_text());
    CHECK(back.ineqs == g.ineqs);
    CHECK(back.coords == g.coords);
}

TEST_CASE("budget exceeded carries the partial state") {
    VariableSet v({"A", "B", "C", "D"});
    Cone c = Cone::full_space(v);
    for (const auto& k : shannon_elemental(v)) c.add(k);
    FmOptions opt;
    opt.budget_ineqs = 5;
    try {
        fm_eliminate(c, coords_touching(c, 8), opt);
        FAIL("expected the budget to be exceeded");
    } catch (const FmBudgetExceeded& e) {
        CHECK_FALSE(e.pending().empty());
    }
}
