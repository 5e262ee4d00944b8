#include "entcone/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entcone {

namespace {

// Dense tableau with the objective kept as a separate reduced-cost row.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_(rows, RatVec(cols + 1)), d_(cols + 1), basis_(rows) {}

    Rational& at(std::size_t i, std::size_t j) { return t_[i][j]; }
    Rational& rhs(std::size_t i) { return t_[i][n_]; }
    Rational& cost(std::size_t j) { return d_[j]; }
    Rational& objective() { return d_[n_]; }
    std::size_t& basic(std::size_t i) { return basis_[i]; }

    void pivot(std::size_t r, std::size_t e) {
        RatVec& pr = t_[r];
        Rational inv = 1 / pr[e];
        nz_.clear();
        for (std::size_t j = 0; j <= n_; ++j)
            if (sgn(pr[j]) != 0) {
                if (j != e) pr[j] *= inv;
                nz_.push_back(j);
            }
        pr[e] = 1;
        for (std::size_t i = 0; i < m_; ++i)
            if (i != r) eliminate(t_[i], e, pr);
        eliminate(d_, e, pr);
        basis_[r] = e;
        ++pivots_;
    }

    // One simplex phase; columns at or beyond `limit` never enter.
    LpStatus run(std::size_t limit, std::size_t& unbounded_col) {
        int degenerate = 0;
        bool bland = false;
        for (;;) {
            std::size_t e = limit;
            if (bland) {
                for (std::size_t j = 0; j < limit; ++j)
                    if (sgn(d_[j]) < 0) {
                        e = j;
                        break;
                    }
            } else {
                for (std::size_t j = 0; j < limit; ++j)
                    if (sgn(d_[j]) < 0 && (e == limit || d_[j] < d_[e])) e = j;
            }
            if (e == limit) return LpStatus::Optimal;
            std::size_t r = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                if (sgn(t_[i][e]) <= 0) continue;
                if (r == m_) {
                    r = i;
                    continue;
                }
                // ratio rhs_i / t_ie against rhs_r / t_re
                int c = cmp(t_[i][n_] * t_[r][e], t_[r][n_] * t_[i][e]);
                if (c < 0 || (c == 0 && basis_[i] < basis_[r])) r = i;
            }
            if (r == m_) {
                unbounded_col = e;
                return LpStatus::Unbounded;
            }
            bool degen = sgn(t_[r][n_]) == 0;
            pivot(r, e);
            if (degen) {
                if (++degenerate > 200) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    std::size_t rows() const { return m_; }
    long pivots() const { return pivots_; }

private:
    void eliminate(RatVec& row, std::size_t e, const RatVec& pr) {
        if (sgn(row[e]) == 0) return;
        f_ = row[e];
        for (std::size_t j : nz_) {
            mpq_mul(tmp_.get_mpq_t(), f_.get_mpq_t(), pr[j].get_mpq_t());
            mpq_sub(row[j].get_mpq_t(), row[j].get_mpq_t(), tmp_.get_mpq_t());
        }
    }

    std::size_t m_, n_;
    std::vector<RatVec> t_;
    RatVec d_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> nz_;
    Rational f_, tmp_;
    long pivots_ = 0;
};

}  // namespace

StandardSolution solve_standard(const StandardForm& lp) {
    const std::size_t m = lp.A.size();
    const std::size_t n = m ? lp.A[0].size() : lp.c.size();
    if (lp.b.size() != m) throw std::invalid_argument("lp: rhs size mismatch");
    if (!lp.c.empty() && lp.c.size() != n) throw std::invalid_argument("lp: objective size mismatch");
    for (const auto& row : lp.A)
        if (row.size() != n) throw std::invalid_argument("lp: ragged constraint matrix");

    StandardSolution sol;
    Tableau T(m, n + m);
    std::vector<int> flip(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        if (lp.b[i] < 0) flip[i] = -1;
        for (std::size_t j = 0; j < n; ++j)
            if (sgn(lp.A[i][j]) != 0) T.at(i, j) = flip[i] < 0 ? Rational(-lp.A[i][j]) : lp.A[i][j];
        T.at(i, n + i) = 1;
        T.rhs(i) = flip[i] < 0 ? Rational(-lp.b[i]) : lp.b[i];
        T.basic(i) = n + i;
    }
    // Phase 1: minimise the sum of artificials.
    for (std::size_t j = 0; j < n; ++j) {
        Rational s = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (sgn(T.at(i, j)) != 0) s += T.at(i, j);
        T.cost(j) = -s;
    }
    {
        Rational s = 0;
        for (std::size_t i = 0; i < m; ++i) s += T.rhs(i);
        T.objective() = -s;
    }
    std::size_t ucol = 0;
    T.run(n, ucol);
    if (sgn(T.objective()) != 0) {
        sol.status = LpStatus::Infeasible;
        sol.y.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            Rational yi = 1 - T.cost(n + i);
            sol.y[i] = flip[i] < 0 ? Rational(-yi) : yi;
        }
        sol.pivots = T.pivots();
        return sol;
    }
    // Drive artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
        if (T.basic(i) < n) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (sgn(T.at(i, j)) != 0) {
                T.pivot(i, j);
                break;
            }
    }
    // Phase 2 with the real objective.
    for (std::size_t j = 0; j < n + m; ++j) T.cost(j) = j < n && !lp.c.empty() ? lp.c[j] : Rational(0);
    T.objective() = 0;
    if (!lp.c.empty())
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t b = T.basic(i);
            if (b >= n || sgn(lp.c[b]) == 0) continue;
            Rational cb = lp.c[b];
            for (std::size_t j = 0; j < n + m; ++j)
                if (sgn(T.at(i, j)) != 0) T.cost(j) -= cb * T.at(i, j);
            T.objective() -= cb * T.rhs(i);
        }
    LpStatus st = T.run(n, ucol);
    sol.status = st;
    sol.x.assign(n, 0);
    for (std::size_t i = 0; i < m; ++i)
        if (T.basic(i) < n) sol.x[T.basic(i)] = T.rhs(i);
    sol.value = -T.objective();
    if (st == LpStatus::Unbounded) {
        sol.ray.assign(n, 0);
        sol.ray[ucol] = 1;
        for (std::size_t i = 0; i < m; ++i)
            if (T.basic(i) < n) sol.ray[T.basic(i)] = -T.at(i, ucol);
    } else {
        sol.y.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            Rational yi = -T.cost(n + i);
            sol.y[i] = flip[i] < 0 ? Rational(-yi) : yi;
        }
    }
    sol.pivots = T.pivots();
    return sol;
}

LpResult lp_solve(const LpProblem& p) {
    for (const auto& r : p.rows)
        if (r.a.size() != p.n) throw std::invalid_argument("lp: row dimension mismatch");
    if (!p.objective.empty() && p.objective.size() != p.n) throw std::invalid_argument("lp: objective dimension mismatch");

    // x = x+ - x-, one surplus column per >= row.
    std::size_t ngeq = 0;
    for (const auto& r : p.rows) ngeq += r.rel == Relation::Geq;
    const std::size_t cols = 2 * p.n + ngeq;
    StandardForm sf;
    sf.A.assign(p.rows.size(), RatVec(cols));
    sf.b.resize(p.rows.size());
    std::size_t s = 2 * p.n;
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        for (std::size_t j = 0; j < p.n; ++j) {
            sf.A[i][j] = p.rows[i].a[j];
            sf.A[i][p.n + j] = -p.rows[i].a[j];
        }
        if (p.rows[i].rel == Relation::Geq) sf.A[i][s++] = -1;
        sf.b[i] = p.rows[i].b;
    }
    if (!p.objective.empty()) {
        sf.c.assign(cols, 0);
        for (std::size_t j = 0; j < p.n; ++j) {
            Rational c = p.maximize ? Rational(-p.objective[j]) : p.objective[j];
            sf.c[j] = c;
            sf.c[p.n + j] = -c;
        }
    }
    StandardSolution ss = solve_standard(sf);
    LpResult out;
    out.status = ss.status;
    if (ss.status == LpStatus::Infeasible) {
        out.multipliers = ss.y;
        return out;
    }
    out.x.resize(p.n);
    for (std::size_t j = 0; j < p.n; ++j) out.x[j] = ss.x[j] - ss.x[p.n + j];
    if (ss.status == LpStatus::Unbounded) {
        out.ray.resize(p.n);
        for (std::size_t j = 0; j < p.n; ++j) out.ray[j] = ss.ray[j] - ss.ray[p.n + j];
        return out;
    }
    out.value = p.maximize ? Rational(-ss.value) : ss.value;
    out.multipliers.resize(p.rows.size());
    for (std::size_t i = 0; i < p.rows.size(); ++i)
        out.multipliers[i] = p.maximize ? Rational(-ss.y[i]) : ss.y[i];
    return out;
}

namespace {

// Floating-point phase 1 used only to guess a basis; every answer it suggests is re-checked exactly.
struct FloatGuess {
    bool ok = false;        // simplex terminated
    bool feasible = false;
    std::vector<double> x;  // structural columns
    std::vector<double> y;  // Farkas vector when infeasible
};

FloatGuess float_phase1(const std::vector<std::vector<double>>& A, const std::vector<double>& b, std::size_t n) {
    const double eps = 1e-9;
    const std::size_t m = A.size(), w = n + m;
    std::vector<std::vector<double>> t(m, std::vector<double>(w + 1, 0.0));
    std::vector<double> d(w + 1, 0.0);
    std::vector<std::size_t> basis(m);
    std::vector<int> flip(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        flip[i] = b[i] < 0 ? -1 : 1;
        for (std::size_t j = 0; j < n; ++j) t[i][j] = flip[i] * A[i][j];
        t[i][n + i] = 1;
        // A tiny deterministic rhs perturbation keeps the float pivots out of degenerate stalls.
        t[i][w] = flip[i] * b[i] + 1e-9 * (1.0 + static_cast<double>((i * 7919) % 101) / 101.0);
        basis[i] = n + i;
        for (std::size_t j = 0; j < n; ++j) d[j] -= t[i][j];
        d[w] -= t[i][w];
    }
    FloatGuess g;
    int degenerate = 0;
    bool bland = false;
    const long cap = 50 * static_cast<long>(m + n) + 1000;
    double scale = 1.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    for (long it = 0;; ++it) {
        if (it > cap) return g;
        if (-d[w] <= 1e-6 * scale) break;
        std::size_t e = n;
        for (std::size_t j = 0; j < n; ++j)
            if (d[j] < -eps && (e == n || (!bland && d[j] < d[e]))) {
                e = j;
                if (bland) break;
            }
        if (e == n) break;
        std::size_t r = m;
        double best = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][e] <= eps) continue;
            double ratio = t[i][w] / t[i][e];
            if (r == m || ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[r])) {
                r = i;
                best = ratio;
            }
        }
        if (r == m) return g;  // cannot happen in phase 1
        bool degen = t[r][w] <= eps;
        double inv = 1.0 / t[r][e];
        for (auto& v : t[r]) v *= inv;
        t[r][e] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || std::abs(t[i][e]) <= 1e-14) continue;
            double f = t[i][e];
            for (std::size_t j = 0; j <= w; ++j)
                if (t[r][j] != 0.0) t[i][j] -= f * t[r][j];
            t[i][e] = 0.0;
        }
        if (std::abs(d[e]) > 1e-14) {
            double f = d[e];
            for (std::size_t j = 0; j <= w; ++j)
                if (t[r][j] != 0.0) d[j] -= f * t[r][j];
            d[e] = 0.0;
        }
        basis[r] = e;
        if (degen) {
            if (++degenerate > 200) bland = true;
        } else {
            degenerate = 0;
            bland = false;
        }
    }
    g.ok = true;
    g.feasible = -d[w] <= 1e-6 * scale;
    g.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) g.x[basis[i]] = t[i][w];
    if (!g.feasible) {
        g.y.resize(m);
        for (std::size_t i = 0; i < m; ++i) g.y[i] = flip[i] * (1.0 - d[n + i]);
    }
    return g;
}

// Closest fraction with a small denominator (continued fractions).
Rational rationalize(double v) {
    if (std::abs(v) < 1e-12) return 0;
    const int s = v < 0 ? -1 : 1;
    double a = std::abs(v);
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = a;
    for (int k = 0; k < 40; ++k) {
        double fl = std::floor(x);
        if (fl > 1e12) break;
        long long ai = static_cast<long long>(fl);
        long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
        if (q2 > 10000000) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - a) < 1e-11 * std::max(1.0, a)) break;
        double frac = x - fl;
        if (frac < 1e-15) break;
        x = 1.0 / frac;
    }
    if (q1 == 0) return 0;
    Rational r(Integer(std::to_string(s * p1)), Integer(std::to_string(q1)));
    r.canonicalize();
    return r;
}

ConicResult conic_exact(const std::vector<const IntVec*>& gens, const std::vector<const IntVec*>& free_gens,
                        const IntVec& target);

// Tries the float guess; returns false when it cannot be certified.
bool conic_screened(const std::vector<const IntVec*>& gens, const std::vector<const IntVec*>& free_gens,
                    const IntVec& target, ConicResult& out) {
    const std::size_t d = target.size(), k = gens.size(), f = free_gens.size();
    const std::size_t n = k + 2 * f;
    std::vector<std::vector<double>> A(d, std::vector<double>(n, 0.0));
    std::vector<double> b(d);
    for (std::size_t i = 0; i < d; ++i) b[i] = target[i].get_d();
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < d; ++i)
            if ((*gens[j])[i] != 0) A[i][j] = (*gens[j])[i].get_d();
    for (std::size_t j = 0; j < f; ++j)
        for (std::size_t i = 0; i < d; ++i)
            if ((*free_gens[j])[i] != 0) {
                A[i][k + 2 * j] = (*free_gens[j])[i].get_d();
                A[i][k + 2 * j + 1] = -(*free_gens[j])[i].get_d();
            }
    FloatGuess g = float_phase1(A, b, n);
    if (!g.ok) return false;
    if (g.feasible) {
        std::vector<const IntVec*> sub;
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < k; ++j)
            if (g.x[j] > 1e-9) {
                sub.push_back(gens[j]);
                idx.push_back(j);
            }
        ConicResult r = conic_exact(sub, free_gens, target);
        if (!r.member) return false;
        out.member = true;
        out.lambda.assign(k, 0);
        for (std::size_t j = 0; j < idx.size(); ++j) out.lambda[idx[j]] = r.lambda[j];
        out.mu = r.mu;
        return true;
    }
    double mx = 0;
    for (double v : g.y) mx = std::max(mx, std::abs(v));
    if (mx == 0) return false;
    RatVec y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = rationalize(g.y[i] / mx);
    // Farkas: gens.y <= 0, free.y == 0, target.y > 0.
    if (sgn(dot(target, y)) <= 0) return false;
    for (std::size_t j = 0; j < k; ++j)
        if (sgn(dot(*gens[j], y)) > 0) return false;
    for (std::size_t j = 0; j < f; ++j)
        if (sgn(dot(*free_gens[j], y)) != 0) return false;
    for (auto& v : y) v = -v;
    out.member = false;
    out.separator = to_primitive(y);
    return true;
}

}  // namespace

ConicResult conic_combination(const std::vector<const IntVec*>& gens, const std::vector<const IntVec*>& free_gens,
                              const IntVec& target) {
    if (gens.size() + 2 * free_gens.size() >= 40) {
        for (const auto* g : gens)
            if (g->size() != target.size()) throw std::invalid_argument("conic_combination: dimension mismatch");
        for (const auto* g : free_gens)
            if (g->size() != target.size()) throw std::invalid_argument("conic_combination: dimension mismatch");
        ConicResult r;
        if (conic_screened(gens, free_gens, target, r)) return r;
    }
    return conic_exact(gens, free_gens, target);
}

namespace {

ConicResult conic_exact(const std::vector<const IntVec*>& gens, const std::vector<const IntVec*>& free_gens,
                        const IntVec& target) {
    const std::size_t d = target.size();
    const std::size_t k = gens.size(), f = free_gens.size();
    StandardForm sf;
    sf.A.assign(d, RatVec(k + 2 * f));
    sf.b.resize(d);
    for (std::size_t i = 0; i < d; ++i) sf.b[i] = Rational(target[i]);
    for (std::size_t j = 0; j < k; ++j) {
        if (gens[j]->size() != d) throw std::invalid_argument("conic_combination: dimension mismatch");
        for (std::size_t i = 0; i < d; ++i)
            if ((*gens[j])[i] != 0) sf.A[i][j] = Rational((*gens[j])[i]);
    }
    for (std::size_t j = 0; j < f; ++j) {
        if (free_gens[j]->size() != d) throw std::invalid_argument("conic_combination: dimension mismatch");
        for (std::size_t i = 0; i < d; ++i)
            if ((*free_gens[j])[i] != 0) {
                sf.A[i][k + 2 * j] = Rational((*free_gens[j])[i]);
                sf.A[i][k + 2 * j + 1] = Rational(-(*free_gens[j])[i]);
            }
    }
    StandardSolution ss = solve_standard(sf);
    ConicResult out;
    if (ss.status == LpStatus::Infeasible) {
        RatVec y(d);
        for (std::size_t i = 0; i < d; ++i) y[i] = -ss.y[i];
        out.separator = to_primitive(y);
        return out;
    }
    out.member = true;
    out.lambda.assign(ss.x.begin(), ss.x.begin() + static_cast<long>(k));
    out.mu.resize(f);
    for (std::size_t j = 0; j < f; ++j) out.mu[j] = ss.x[k + 2 * j] - ss.x[k + 2 * j + 1];
    return out;
}

}  // namespace

}  // namespace entcone
