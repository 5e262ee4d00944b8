#pragma once

#include "entcone/entropy.hpp"
#include "entcone/rational.hpp"

#include <vector>

namespace entcone {

enum class LpStatus { Optimal, Unbounded, Infeasible };

// minimize c.x subject to A x = b, x >= 0
struct StandardForm {
    std::vector<RatVec> A;
    RatVec b;
    RatVec c;  // may be empty for a pure feasibility problem
};

struct StandardSolution {
    LpStatus status = LpStatus::Infeasible;
    Rational value;
    RatVec x;
    // Optimal: duals with c - A^T y >= 0.  Infeasible: Farkas vector, A^T y <= 0 and b.y > 0.
    RatVec y;
    RatVec ray;  // Unbounded: A r = 0, r >= 0, c.r < 0
    long pivots = 0;
};

StandardSolution solve_standard(const StandardForm& lp);

// General form over free variables: rows a.x >= b or a.x == b.
struct LpRow {
    RatVec a;
    Relation rel = Relation::Geq;
    Rational b;
};

struct LpProblem {
    std::size_t n = 0;
    std::vector<LpRow> rows;
    RatVec objective;  // empty: feasibility only
    bool maximize = true;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Rational value;
    RatVec x;
    // Optimal: multipliers with objective = sum m_i a_i and value = sum m_i b_i.
    // Infeasible: Farkas certificate, m_i >= 0 on >= rows, sum m_i a_i = 0, sum m_i b_i > 0.
    RatVec multipliers;
    RatVec ray;  // Unbounded: improving direction
};

LpResult lp_solve(const LpProblem& p);

// Decides whether target = sum lambda_i gens_i + sum mu_j free_j with lambda >= 0.
// Otherwise returns a separating point y: gens.y >= 0, free.y = 0, target.y < 0.
struct ConicResult {
    bool member = false;
    RatVec lambda;
    RatVec mu;
    IntVec separator;
};

ConicResult conic_combination(const std::vector<const IntVec*>& gens, const std::vector<const IntVec*>& free_gens,
                              const IntVec& target);

}  // namespace entcone
