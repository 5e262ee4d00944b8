#include "entcone/cone.hpp"

#include "entcone/lp.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace entcone {

namespace {

class Bits {
public:
    Bits() = default;
    explicit Bits(std::size_t n) : w_((n + 63) / 64, 0) {}
    void set(std::size_t i) {
        if (i / 64 >= w_.size()) w_.resize(i / 64 + 1, 0);
        w_[i / 64] |= 1ull << (i % 64);
    }
    bool test(std::size_t i) const { return i / 64 < w_.size() && (w_[i / 64] >> (i % 64) & 1ull); }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto x : w_) c += static_cast<std::size_t>(__builtin_popcountll(x));
        return c;
    }
    Bits operator|(const Bits& o) const {
        Bits r;
        r.w_.resize(std::max(w_.size(), o.w_.size()), 0);
        for (std::size_t i = 0; i < r.w_.size(); ++i) r.w_[i] = word(i) | o.word(i);
        return r;
    }
    Bits operator&(const Bits& o) const {
        Bits r;
        r.w_.resize(std::min(w_.size(), o.w_.size()), 0);
        for (std::size_t i = 0; i < r.w_.size(); ++i) r.w_[i] = w_[i] & o.w_[i];
        return r;
    }
    bool subset_of(const Bits& o) const {
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & ~o.word(i)) return false;
        return true;
    }

private:
    std::uint64_t word(std::size_t i) const { return i < w_.size() ? w_[i] : 0; }
    std::vector<std::uint64_t> w_;
};

void normalize_eq_sign(IntVec& v) {
    for (auto& x : v)
        if (x != 0) {
            if (x < 0)
                for (auto& y : v) y = -y;
            return;
        }
}

// Keeps the rows that increase the rank, in order.
std::vector<std::size_t> independent_rows(const std::vector<IntVec>& rows) {
    std::vector<RatVec> basis;
    std::vector<std::size_t> piv;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        RatVec v = to_rational(rows[r]);
        for (std::size_t b = 0; b < basis.size(); ++b)
            if (sgn(v[piv[b]]) != 0) {
                Rational f = v[piv[b]];
                for (std::size_t j = 0; j < v.size(); ++j)
                    if (sgn(basis[b][j]) != 0) v[j] -= f * basis[b][j];
            }
        std::size_t p = v.size();
        for (std::size_t j = 0; j < v.size(); ++j)
            if (sgn(v[j]) != 0) {
                p = j;
                break;
            }
        if (p == v.size()) continue;
        Rational inv = 1 / v[p];
        for (auto& x : v) x *= inv;
        for (auto& b : basis)
            if (sgn(b[p]) != 0) {
                Rational f = b[p];
                for (std::size_t j = 0; j < v.size(); ++j)
                    if (sgn(v[j]) != 0) b[j] -= f * v[j];
            }
        basis.push_back(std::move(v));
        piv.push_back(p);
        keep.push_back(r);
    }
    return keep;
}

std::vector<const IntVec*> ptrs(const std::vector<IntVec>& rows) {
    std::vector<const IntVec*> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(&r);
    return out;
}

// Sequential LP redundancy removal; keeps row order.
std::vector<bool> lp_redundancy(const std::vector<IntVec>& rows, const std::vector<IntVec>& eqs, std::size_t* lp_calls) {
    std::vector<bool> keep(rows.size(), true);
    auto free = ptrs(eqs);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        std::vector<const IntVec*> gens;
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (j != k && keep[j]) gens.push_back(&rows[j]);
        if (lp_calls) ++*lp_calls;
        if (conic_combination(gens, free, rows[k]).member) keep[k] = false;
    }
    return keep;
}

std::size_t nnz(const IntVec& v) {
    std::size_t c = 0;
    for (const auto& x : v) c += x != 0;
    return c;
}

bool row_less(const IntVec& a, const IntVec& b) {
    std::size_t na = nnz(a), nb = nnz(b);
    if (na != nb) return na < nb;
    return compare_lex(a, b) > 0;
}

template <class Tag>
void sort_rows(std::vector<IntVec>& rows, std::vector<Tag>& tags) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row_less(rows[a], rows[b]); });
    std::vector<IntVec> r2;
    std::vector<Tag> t2;
    for (auto i : idx) {
        r2.push_back(std::move(rows[i]));
        t2.push_back(i < tags.size() ? std::move(tags[i]) : Tag{});
    }
    rows = std::move(r2);
    tags = std::move(t2);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- Cone basics

Cone::Cone(VariableSet v, std::vector<Mask> c) : vars(std::move(v)), coords(std::move(c)) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i] == 0 || (coords[i] & ~vars.full())) throw std::invalid_argument("coordinate outside variable set");
        if (i && coords[i] <= coords[i - 1]) throw std::invalid_argument("coordinates must be strictly increasing");
    }
}

Cone Cone::full_space(const VariableSet& v) { return Cone(v, binary_order(v.size())); }

int Cone::index_of(Mask m) const {
    auto it = std::lower_bound(coords.begin(), coords.end(), m);
    if (it == coords.end() || *it != m) return -1;
    return static_cast<int>(it - coords.begin());
}

IntVec Cone::dense(const Expr& e) const {
    RatVec row(coords.size());
    for (const auto& [m, c] : e.terms) {
        int i = index_of(m);
        if (i < 0) throw std::invalid_argument("term " + vars.label(m) + " is not a coordinate of this cone");
        row[static_cast<std::size_t>(i)] = c;
    }
    return to_primitive(row);
}

IntVec Cone::dense(const LinearConstraint& c) const {
    if (c.vars == vars) return dense(c.expr());
    Expr e;
    for (const auto& [m, q] : c.coeffs) e.add(vars.embed(m, c.vars), q);
    return dense(e);
}

LinearConstraint Cone::constraint(const IntVec& row, Relation rel, std::string tag) const {
    Expr e;
    for (std::size_t i = 0; i < row.size(); ++i)
        if (row[i] != 0) e.add(coords[i], Rational(row[i]));
    LinearConstraint c(vars, e, rel, std::move(tag));
    return c.canonical();
}

std::vector<LinearConstraint> Cone::inequalities() const {
    std::vector<LinearConstraint> out;
    for (std::size_t i = 0; i < ineqs.size(); ++i)
        out.push_back(constraint(ineqs[i], Relation::Geq, i < ineq_tags.size() ? ineq_tags[i] : ""));
    return out;
}

std::vector<LinearConstraint> Cone::equalities() const {
    std::vector<LinearConstraint> out;
    for (std::size_t i = 0; i < eqs.size(); ++i)
        out.push_back(constraint(eqs[i], Relation::Eq, i < eq_tags.size() ? eq_tags[i] : ""));
    return out;
}

void Cone::add(const LinearConstraint& c) {
    if (c.rel == Relation::Geq)
        add_ineq(dense(c), c.provenance);
    else
        add_eq(dense(c), c.provenance);
}

void Cone::add_ineq(IntVec row, std::string tag) {
    if (row.size() != coords.size()) throw std::invalid_argument("row dimension mismatch");
    make_primitive(row);
    ineq_tags.resize(ineqs.size());
    ineqs.push_back(std::move(row));
    ineq_tags.push_back(std::move(tag));
}

void Cone::add_eq(IntVec row, std::string tag) {
    if (row.size() != coords.size()) throw std::invalid_argument("row dimension mismatch");
    make_primitive(row);
    normalize_eq_sign(row);
    eq_tags.resize(eqs.size());
    eqs.push_back(std::move(row));
    eq_tags.push_back(std::move(tag));
}

RatVec Cone::point(const EntropyVector& v) const {
    if (!v.is_exact()) throw std::invalid_argument("point() needs an exact vector");
    RatVec x;
    bool same = v.vars() == vars;
    for (Mask m : coords) x.push_back(v.q(same ? m : v.vars().embed(m, vars)));
    return x;
}

EntropyVector Cone::vector_of(const IntVec& x) const {
    if (coords.size() != vars.full()) throw std::invalid_argument("cone does not span every subset");
    RatVec q(vars.full());
    for (std::size_t i = 0; i < coords.size(); ++i) q[coords[i] - 1] = Rational(x[i]);
    return EntropyVector::exact(vars, std::move(q));
}

std::string Cone::to_text() const {
    std::ostringstream os;
    os << "vars:";
    for (const auto& n : vars.names()) os << ' ' << n;
    os << "\nspace:";
    for (Mask m : coords) os << ' ' << vars.label(m);
    auto rows = [&](const char* head, const std::vector<IntVec>& rs) {
        os << '\n' << head;
        for (const auto& r : rs) {
            os << '\n';
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << r[i].get_str();
        }
    };
    rows("ineq:", ineqs);
    rows("eq:", eqs);
    if (rays) rows("rays:", *rays);
    if (!lineality.empty()) rows("lineality:", lineality);
    os << '\n';
    return os.str();
}

Cone Cone::parse(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line, section;
    Cone c;
    bool have_vars = false, have_space = false;
    std::vector<IntVec>* target = nullptr;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "vars:") {
            c.vars = VariableSet(std::vector<std::string>(tok.begin() + 1, tok.end()));
            have_vars = true;
            continue;
        }
        if (tok[0] == "space:") {
            if (!have_vars) throw std::invalid_argument("cone file: vars: must precede space:");
            std::vector<Mask> cs;
            for (std::size_t i = 1; i < tok.size(); ++i) cs.push_back(c.vars.parse_subset(tok[i]));
            Cone fresh(c.vars, cs);
            c.coords = fresh.coords;
            have_space = true;
            continue;
        }
        if (tok[0] == "ineq:" || tok[0] == "eq:" || tok[0] == "rays:" || tok[0] == "lineality:" || tok[0] == "pending:") {
            section = tok[0];
            if (section == "ineq:") target = &c.ineqs;
            else if (section == "eq:") target = &c.eqs;
            else if (section == "rays:") {
                if (!c.rays) c.rays.emplace();
                target = &*c.rays;
            } else if (section == "lineality:") target = &c.lineality;
            else target = nullptr;
            if (tok.size() > 1) throw std::invalid_argument("cone file: section header must be alone on its line");
            continue;
        }
        if (!have_space) throw std::invalid_argument("cone file: space: line missing");
        if (section == "pending:") continue;
        if (!target) throw std::invalid_argument("cone file: data outside a section");
        if (tok.size() != c.coords.size()) throw std::invalid_argument("cone file: row has wrong length");
        IntVec row;
        for (const auto& t : tok) {
            Rational q = parse_rational(t);
            if (q.get_den() != 1) throw std::invalid_argument("cone file: rows must be integer");
            row.push_back(q.get_num());
        }
        target->push_back(std::move(row));
    }
    if (!have_space) throw std::invalid_argument("cone file: space: line missing");
    c.ineq_tags.assign(c.ineqs.size(), "");
    c.eq_tags.assign(c.eqs.size(), "");
    return c;
}

Cone read_cone_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return Cone::parse(ss.str());
}

void write_cone_file(const std::string& path, const Cone& c) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << c.to_text();
}

// ---------------------------------------------------------------- implication

Implication implies(const Cone& premises, const IntVec& target) {
    if (target.size() != premises.dim()) throw std::invalid_argument("implies: dimension mismatch");
    Implication out;
    out.certificate.target = target;
    ConicResult r = conic_combination(ptrs(premises.ineqs), ptrs(premises.eqs), target);
    if (r.member) {
        out.holds = true;
        for (std::size_t i = 0; i < r.lambda.size(); ++i)
            if (sgn(r.lambda[i]) != 0) out.certificate.ineq_multipliers.emplace_back(i, r.lambda[i]);
        for (std::size_t i = 0; i < r.mu.size(); ++i)
            if (sgn(r.mu[i]) != 0) out.certificate.eq_multipliers.emplace_back(i, r.mu[i]);
        return out;
    }
    out.counterexample = r.separator;
    out.counterexample_value = Rational(dot(target, r.separator));
    return out;
}

Implication implies(const Cone& premises, const LinearConstraint& target) {
    return implies(premises, premises.dense(target));
}

bool implies_equality(const Cone& premises, const IntVec& target, IntVec* counterexample) {
    Implication a = implies(premises, target);
    if (!a.holds) {
        if (counterexample) *counterexample = a.counterexample;
        return false;
    }
    IntVec neg = target;
    for (auto& x : neg) x = -x;
    Implication b = implies(premises, neg);
    if (!b.holds && counterexample) *counterexample = b.counterexample;
    return b.holds;
}

bool verify_certificate(const Cone& premises, const Certificate& cert) {
    RatVec sum(premises.dim());
    for (const auto& [i, m] : cert.ineq_multipliers) {
        if (sgn(m) < 0 || i >= premises.ineqs.size()) return false;
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += m * premises.ineqs[i][j];
    }
    for (const auto& [i, m] : cert.eq_multipliers) {
        if (i >= premises.eqs.size()) return false;
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += m * premises.eqs[i][j];
    }
    if (cert.target.size() != sum.size()) return false;
    for (std::size_t j = 0; j < sum.size(); ++j)
        if (sum[j] != cert.target[j]) return false;
    return true;
}

std::string describe_certificate(const Cone& premises, const Certificate& cert) {
    std::ostringstream os;
    os << "target: " << premises.constraint(cert.target, Relation::Geq).to_text() << '\n';
    for (const auto& [i, m] : cert.ineq_multipliers) {
        os << "  " << m.get_str() << " x [" << premises.constraint(premises.ineqs[i], Relation::Geq).to_text() << "]";
        if (i < premises.ineq_tags.size() && !premises.ineq_tags[i].empty()) os << "  (" << premises.ineq_tags[i] << ")";
        os << '\n';
    }
    for (const auto& [i, m] : cert.eq_multipliers) {
        os << "  " << m.get_str() << " x [" << premises.constraint(premises.eqs[i], Relation::Eq).to_text() << "]";
        if (i < premises.eq_tags.size() && !premises.eq_tags[i].empty()) os << "  (" << premises.eq_tags[i] << ")";
        os << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------- membership

Membership member(const Cone& c, const RatVec& x) {
    Membership out;
    for (std::size_t i = 0; i < c.ineqs.size(); ++i) {
        Rational v = dot(c.ineqs[i], x);
        if (sgn(v) < 0) {
            out.inside = false;
            out.violated = i;
            out.exact_value = v;
            out.value = v.get_d();
            return out;
        }
    }
    for (std::size_t i = 0; i < c.eqs.size(); ++i) {
        Rational v = dot(c.eqs[i], x);
        if (sgn(v) != 0) {
            out.inside = false;
            out.violated_equality = true;
            out.violated = i;
            out.exact_value = v;
            out.value = v.get_d();
            return out;
        }
    }
    return out;
}

Membership member(const Cone& c, const EntropyVector& v, double tol) {
    if (v.is_exact()) return member(c, c.point(v));
    Membership out;
    bool same = v.vars() == c.vars;
    std::vector<double> x;
    for (Mask m : c.coords) x.push_back(v.r(same ? m : v.vars().embed(m, c.vars)));
    auto eval = [&](const IntVec& row) {
        double s = 0;
        for (std::size_t i = 0; i < row.size(); ++i)
            if (row[i] != 0) s += row[i].get_d() * x[i];
        return s;
    };
    for (std::size_t i = 0; i < c.ineqs.size(); ++i) {
        double s = eval(c.ineqs[i]);
        if (s < -tol) {
            out.inside = false;
            out.violated = i;
            out.value = s;
            return out;
        }
    }
    for (std::size_t i = 0; i < c.eqs.size(); ++i) {
        double s = eval(c.eqs[i]);
        if (std::abs(s) > tol) {
            out.inside = false;
            out.violated_equality = true;
            out.violated = i;
            out.value = s;
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------- reduce

namespace {

void dedupe_ineqs(std::vector<IntVec>& rows, std::vector<std::string>& tags) {
    std::unordered_set<IntVec, IntVecHash> seen;
    std::vector<IntVec> r2;
    std::vector<std::string> t2;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        IntVec r = rows[i];
        make_primitive(r);
        if (is_zero(r)) continue;
        if (!seen.insert(r).second) continue;
        r2.push_back(std::move(r));
        t2.push_back(i < tags.size() ? tags[i] : "");
    }
    rows = std::move(r2);
    tags = std::move(t2);
}

void clean_eqs(std::vector<IntVec>& eqs, std::vector<std::string>& tags) {
    for (auto& e : eqs) {
        make_primitive(e);
        normalize_eq_sign(e);
    }
    auto keep = independent_rows(eqs);
    std::vector<IntVec> e2;
    std::vector<std::string> t2;
    for (auto i : keep) {
        e2.push_back(eqs[i]);
        t2.push_back(i < tags.size() ? tags[i] : "");
    }
    eqs = std::move(e2);
    tags = std::move(t2);
}

}  // namespace

Cone reduce(const Cone& in, bool implicit_equalities) {
    Cone c = in;
    c.ineq_tags.resize(c.ineqs.size());
    c.eq_tags.resize(c.eqs.size());
    dedupe_ineqs(c.ineqs, c.ineq_tags);
    clean_eqs(c.eqs, c.eq_tags);
    for (int round = 0; round < 8; ++round) {
        auto keep = lp_redundancy(c.ineqs, c.eqs, nullptr);
        std::vector<IntVec> r2;
        std::vector<std::string> t2;
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (keep[i]) {
                r2.push_back(c.ineqs[i]);
                t2.push_back(c.ineq_tags[i]);
            }
        c.ineqs = std::move(r2);
        c.ineq_tags = std::move(t2);
        if (!implicit_equalities) break;
        std::vector<std::size_t> implicit;
        auto gens = ptrs(c.ineqs);
        auto free = ptrs(c.eqs);
        for (std::size_t k = 0; k < c.ineqs.size(); ++k) {
            IntVec neg = c.ineqs[k];
            for (auto& x : neg) x = -x;
            if (conic_combination(gens, free, neg).member) implicit.push_back(k);
        }
        if (implicit.empty()) break;
        std::vector<IntVec> r3;
        std::vector<std::string> t3;
        std::size_t p = 0;
        for (std::size_t k = 0; k < c.ineqs.size(); ++k) {
            if (p < implicit.size() && implicit[p] == k) {
                c.eqs.push_back(c.ineqs[k]);
                c.eq_tags.push_back(c.ineq_tags[k]);
                ++p;
            } else {
                r3.push_back(c.ineqs[k]);
                t3.push_back(c.ineq_tags[k]);
            }
        }
        c.ineqs = std::move(r3);
        c.ineq_tags = std::move(t3);
        clean_eqs(c.eqs, c.eq_tags);
    }
    sort_rows(c.ineqs, c.ineq_tags);
    return c;
}

std::optional<IntVec> irredundancy_witness(const Cone& c, std::size_t k) {
    std::vector<const IntVec*> gens;
    for (std::size_t j = 0; j < c.ineqs.size(); ++j)
        if (j != k) gens.push_back(&c.ineqs[j]);
    ConicResult r = conic_combination(gens, ptrs(c.eqs), c.ineqs.at(k));
    if (r.member) return std::nullopt;
    return r.separator;
}

// ---------------------------------------------------------------- Fourier-Motzkin

std::vector<Mask> coords_touching(const Cone& c, Mask hidden) {
    std::vector<Mask> out;
    for (Mask m : c.coords)
        if (m & hidden) out.push_back(m);
    return out;
}

namespace {

void erase_column(std::vector<IntVec>& rows, std::size_t col) {
    for (auto& r : rows) r.erase(r.begin() + static_cast<long>(col));
}

}  // namespace

Cone fm_eliminate(const Cone& in, const std::vector<Mask>& drop, const FmOptions& opt, FmStats* stats) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    FmStats local;
    FmStats& st = stats ? *stats : local;
    auto say = [&](const std::string& s) {
        if (opt.log) opt.log(s);
    };

    std::vector<Mask> coords = in.coords;
    std::vector<IntVec> rows = in.ineqs;
    std::vector<IntVec> eqs = in.eqs;
    std::set<Mask> pending(drop.begin(), drop.end());
    for (Mask m : pending)
        if (in.index_of(m) < 0) throw std::invalid_argument("fm_eliminate: coordinate " + in.vars.label(m) + " not in space");
    auto col_of = [&](Mask m) {
        return static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), m) - coords.begin());
    };

    // Equalities first: Gaussian substitution on dropped coordinates.
    for (auto& e : eqs) make_primitive(e);
    for (;;) {
        std::size_t ei = eqs.size(), pc = 0;
        for (std::size_t i = 0; i < eqs.size() && ei == eqs.size(); ++i)
            for (Mask m : pending) {
                std::size_t c = col_of(m);
                if (eqs[i][c] != 0) {
                    ei = i;
                    pc = c;
                    break;
                }
            }
        if (ei == eqs.size()) break;
        IntVec e = eqs[ei];
        eqs.erase(eqs.begin() + static_cast<long>(ei));
        Integer ep = e[pc];
        Integer aep = abs(ep);
        int sep = sgn(ep);
        auto substitute = [&](IntVec& r) {
            if (r[pc] == 0) return;
            Integer f = r[pc];
            for (std::size_t j = 0; j < r.size(); ++j) r[j] = aep * r[j] - sep * f * e[j];
            make_primitive(r);
        };
        for (auto& r : rows) substitute(r);
        for (auto& r : eqs) substitute(r);
        pending.erase(coords[pc]);
        st.order.push_back(coords[pc]);
        coords.erase(coords.begin() + static_cast<long>(pc));
        erase_column(rows, pc);
        erase_column(eqs, pc);
    }
    {
        std::vector<std::string> tags(rows.size());
        dedupe_ineqs(rows, tags);
        std::vector<std::string> et(eqs.size());
        clean_eqs(eqs, et);
    }
    // Dropped coordinates that no longer appear anywhere.
    for (auto it = pending.begin(); it != pending.end();) {
        std::size_t c = col_of(*it);
        bool used = std::any_of(rows.begin(), rows.end(), [&](const IntVec& r) { return r[c] != 0; });
        if (!used) {
            st.order.push_back(*it);
            coords.erase(coords.begin() + static_cast<long>(c));
            erase_column(rows, c);
            erase_column(eqs, c);
            it = pending.erase(it);
        } else {
            ++it;
        }
    }

    const bool use_lp = opt.lp_every > 0;
    auto prune = [&]() {
        if (!use_lp) return;
        std::size_t calls = 0;
        auto keep = lp_redundancy(rows, eqs, &calls);
        st.lp_calls += calls;
        std::vector<IntVec> r2;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (keep[i]) r2.push_back(std::move(rows[i]));
        rows = std::move(r2);
    };
    prune();

    std::vector<Bits> anc(rows.size());
    auto reset_anc = [&]() {
        anc.assign(rows.size(), Bits());
        for (std::size_t i = 0; i < rows.size(); ++i) anc[i].set(i);
    };
    reset_anc();
    int since_reset = 0;

    while (!pending.empty()) {
        auto step_start = clock::now();
        // Column with the smallest net growth p*q - p - q.
        Mask best = 0;
        long best_score = 0;
        for (Mask m : pending) {
            std::size_t c = col_of(m);
            long p = 0, q = 0;
            for (const auto& r : rows) {
                int s = sgn(r[c]);
                p += s > 0;
                q += s < 0;
            }
            long score = p * q - p - q;
            if (best == 0 || score < best_score) {
                best = m;
                best_score = score;
            }
        }
        std::size_t c = col_of(best);
        pending.erase(best);
        st.order.push_back(best);
        ++since_reset;

        std::vector<std::size_t> pos, neg;
        std::vector<IntVec> next;
        std::vector<Bits> next_anc;
        std::unordered_map<IntVec, std::size_t, IntVecHash> index;
        auto push = [&](IntVec r, Bits a) {
            r.erase(r.begin() + static_cast<long>(c));
            make_primitive(r);
            if (is_zero(r)) return;
            auto it = index.find(r);
            if (it != index.end()) {
                if (a.count() < next_anc[it->second].count()) next_anc[it->second] = std::move(a);
                return;
            }
            index.emplace(r, next.size());
            next.push_back(std::move(r));
            next_anc.push_back(std::move(a));
        };
        for (std::size_t i = 0; i < rows.size(); ++i) {
            int s = sgn(rows[i][c]);
            if (s > 0) pos.push_back(i);
            else if (s < 0) neg.push_back(i);
            else push(rows[i], anc[i]);
        }
        const std::size_t limit = static_cast<std::size_t>(since_reset) + 1;
        std::size_t generated = 0;
        for (auto p : pos) {
            for (auto n : neg) {
                Bits a = anc[p] | anc[n];
                if (opt.cernikov && a.count() > limit) {
                    ++st.cernikov_dropped;
                    continue;
                }
                const IntVec& rp = rows[p];
                const IntVec& rn = rows[n];
                Integer fp = -rn[c], fn = rp[c];
                IntVec r(rp.size());
                for (std::size_t j = 0; j < r.size(); ++j) r[j] = fp * rp[j] + fn * rn[j];
                push(std::move(r), std::move(a));
                if (++generated % 4096 == 0) {
                    if (next.size() > opt.budget_ineqs ||
                        (opt.budget_seconds > 0 &&
                         std::chrono::duration<double>(clock::now() - step_start).count() > opt.budget_seconds)) {
                        // Report the system as it was before this step.
                        Cone partial(in.vars, coords);
                        partial.ineqs = rows;
                        partial.eqs = eqs;
                        std::vector<Mask> pend(pending.begin(), pending.end());
                        pend.insert(pend.begin(), best);
                        throw FmBudgetExceeded("budget exceeded while eliminating " + in.vars.label(best), partial, pend);
                    }
                }
            }
        }
        coords.erase(coords.begin() + static_cast<long>(c));
        erase_column(eqs, c);
        rows = std::move(next);
        anc = std::move(next_anc);
        st.max_rows = std::max(st.max_rows, rows.size());
        if (rows.size() > opt.budget_ineqs) {
            Cone partial(in.vars, coords);
            partial.ineqs = rows;
            partial.eqs = eqs;
            throw FmBudgetExceeded("inequality budget exceeded", partial, std::vector<Mask>(pending.begin(), pending.end()));
        }
        if (use_lp && (since_reset >= opt.lp_every || pending.empty())) {
            prune();
            reset_anc();
            since_reset = 0;
        }
        say("eliminated " + in.vars.label(best) + ": " + std::to_string(rows.size()) + " inequalities, " +
            std::to_string(pending.size()) + " coordinates left");
        if (opt.budget_seconds > 0 &&
            std::chrono::duration<double>(clock::now() - step_start).count() > opt.budget_seconds && !pending.empty()) {
            Cone partial(in.vars, coords);
            partial.ineqs = rows;
            partial.eqs = eqs;
            throw FmBudgetExceeded("time budget exceeded", partial, std::vector<Mask>(pending.begin(), pending.end()));
        }
    }
    Cone out(in.vars, coords);
    out.ineqs = std::move(rows);
    out.eqs = std::move(eqs);
    out.ineq_tags.assign(out.ineqs.size(), "fm");
    out.eq_tags.assign(out.eqs.size(), "fm");
    out = reduce(out, true);
    st.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return out;
}

void write_checkpoint(const std::string& path, const Cone& partial, const std::vector<Mask>& pending) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << partial.to_text() << "pending:\n";
    for (Mask m : pending) f << partial.vars.label(m) << '\n';
}

std::pair<Cone, std::vector<Mask>> read_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    Cone c = Cone::parse(text);
    std::vector<Mask> pending;
    auto pos = text.find("pending:");
    if (pos != std::string::npos) {
        std::istringstream is(text.substr(pos + 8));
        std::string t;
        while (is >> t) pending.push_back(c.vars.parse_subset(t));
    }
    return {c, pending};
}

// ---------------------------------------------------------------- double description

namespace {

struct DDResult {
    std::vector<IntVec> rays;
    std::vector<IntVec> lineality;
};

DDResult dd_enumerate(std::size_t d, const std::vector<IntVec>& ineqs, const std::vector<IntVec>& eqs) {
    std::vector<IntVec> lin;
    for (std::size_t i = 0; i < d; ++i) {
        IntVec e(d, 0);
        e[i] = 1;
        lin.push_back(std::move(e));
    }
    std::vector<IntVec> rays;
    std::vector<Bits> zero;
    std::vector<std::pair<const IntVec*, bool>> cons;
    for (const auto& e : eqs) cons.emplace_back(&e, true);
    for (const auto& a : ineqs) cons.emplace_back(&a, false);

    for (std::size_t k = 0; k < cons.size(); ++k) {
        const IntVec& a = *cons[k].first;
        const bool is_eq = cons[k].second;
        std::size_t li = lin.size();
        for (std::size_t i = 0; i < lin.size(); ++i)
            if (dot(a, lin[i]) != 0) {
                li = i;
                break;
            }
        if (li < lin.size()) {
            IntVec l0 = lin[li];
            Integer al0 = dot(a, l0);
            if (al0 < 0) {
                for (auto& x : l0) x = -x;
                al0 = -al0;
            }
            lin.erase(lin.begin() + static_cast<long>(li));
            for (auto& l : lin) {
                Integer al = dot(a, l);
                if (al == 0) continue;
                for (std::size_t j = 0; j < d; ++j) l[j] = al0 * l[j] - al * l0[j];
                make_primitive(l);
            }
            for (std::size_t r = 0; r < rays.size(); ++r) {
                Integer ar = dot(a, rays[r]);
                if (ar != 0) {
                    for (std::size_t j = 0; j < d; ++j) rays[r][j] = al0 * rays[r][j] - ar * l0[j];
                    make_primitive(rays[r]);
                }
                zero[r].set(k);
            }
            if (!is_eq) {
                Bits z;
                for (std::size_t j = 0; j < k; ++j) z.set(j);
                rays.push_back(l0);
                zero.push_back(z);
            }
            continue;
        }
        std::vector<Integer> val(rays.size());
        std::vector<std::size_t> P, N, Z;
        for (std::size_t r = 0; r < rays.size(); ++r) {
            val[r] = dot(a, rays[r]);
            int s = sgn(val[r]);
            (s > 0 ? P : s < 0 ? N : Z).push_back(r);
        }
        std::vector<IntVec> nrays;
        std::vector<Bits> nzero;
        if (!is_eq)
            for (auto r : P) {
                nrays.push_back(rays[r]);
                nzero.push_back(zero[r]);
            }
        for (auto r : Z) {
            nrays.push_back(rays[r]);
            Bits z = zero[r];
            z.set(k);
            nzero.push_back(z);
        }
        const std::size_t pointed_dim = d - lin.size();
        for (auto p : P)
            for (auto n : N) {
                Bits z = zero[p] & zero[n];
                if (pointed_dim >= 2 && z.count() + 2 < pointed_dim) continue;
                bool adjacent = true;
                for (std::size_t r = 0; r < rays.size() && adjacent; ++r)
                    if (r != p && r != n && z.subset_of(zero[r])) adjacent = false;
                if (!adjacent) continue;
                IntVec nr(d);
                for (std::size_t j = 0; j < d; ++j) nr[j] = val[p] * rays[n][j] - val[n] * rays[p][j];
                make_primitive(nr);
                z.set(k);
                nrays.push_back(std::move(nr));
                nzero.push_back(std::move(z));
            }
        rays = std::move(nrays);
        zero = std::move(nzero);
    }
    // Canonical lineality basis (reduced echelon form, primitive rows).
    if (!lin.empty()) {
        std::vector<RatVec> basis;
        std::vector<std::size_t> piv;
        for (const auto& l : lin) {
            RatVec v = to_rational(l);
            for (std::size_t b = 0; b < basis.size(); ++b)
                if (sgn(v[piv[b]]) != 0) {
                    Rational f = v[piv[b]];
                    for (std::size_t j = 0; j < d; ++j) v[j] -= f * basis[b][j];
                }
            std::size_t p = d;
            for (std::size_t j = 0; j < d; ++j)
                if (sgn(v[j]) != 0) {
                    p = j;
                    break;
                }
            if (p == d) continue;
            Rational inv = 1 / v[p];
            for (auto& x : v) x *= inv;
            for (auto& b : basis)
                if (sgn(b[p]) != 0) {
                    Rational f = b[p];
                    for (std::size_t j = 0; j < d; ++j) b[j] -= f * v[j];
                }
            basis.push_back(v);
            piv.push_back(p);
        }
        std::vector<std::size_t> order(basis.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return piv[x] < piv[y]; });
        lin.clear();
        for (auto i : order) lin.push_back(to_primitive(basis[i]));
    }
    std::sort(rays.begin(), rays.end(), [](const IntVec& x, const IntVec& y) { return compare_lex(x, y) < 0; });
    return {rays, lin};
}

}  // namespace

Cone double_description(const Cone& c) {
    DDResult r = dd_enumerate(c.dim(), c.ineqs, c.eqs);
    Cone out = c;
    out.rays = r.rays;
    out.lineality = r.lineality;
    return out;
}

Cone hull_of_rays(const VariableSet& vars, const std::vector<Mask>& coords, const std::vector<IntVec>& rays,
                  const std::vector<IntVec>& lineality) {
    Cone out(vars, coords);
    DDResult polar = dd_enumerate(coords.size(), rays, lineality);
    for (auto& f : polar.rays) out.add_ineq(f, "hull");
    for (auto& e : polar.lineality) out.add_eq(e, "hull");
    sort_rows(out.ineqs, out.ineq_tags);
    // Keep only the extremal generators.
    DDResult check = dd_enumerate(coords.size(), out.ineqs, out.eqs);
    out.rays = check.rays;
    out.lineality = check.lineality;
    return out;
}

// ---------------------------------------------------------------- comparison

Cone with_coords(const Cone& c, const std::vector<Mask>& coords) {
    Cone out(c.vars, coords);
    auto remap = [&](const IntVec& row) {
        IntVec r(coords.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] == 0) continue;
            int j = out.index_of(c.coords[i]);
            if (j < 0) throw std::invalid_argument("with_coords: coordinate " + c.vars.label(c.coords[i]) + " missing");
            r[static_cast<std::size_t>(j)] = row[i];
        }
        return r;
    };
    for (std::size_t i = 0; i < c.ineqs.size(); ++i) out.add_ineq(remap(c.ineqs[i]), i < c.ineq_tags.size() ? c.ineq_tags[i] : "");
    for (std::size_t i = 0; i < c.eqs.size(); ++i) out.add_eq(remap(c.eqs[i]), i < c.eq_tags.size() ? c.eq_tags[i] : "");
    return out;
}

ConeComparison cone_contains(const Cone& outer, const Cone& inner) {
    if (!(outer.vars == inner.vars) || outer.coords != inner.coords)
        throw std::invalid_argument("cone_contains: cones live in different spaces");
    ConeComparison res;
    res.equal = true;
    for (std::size_t i = 0; i < outer.ineqs.size(); ++i) {
        Implication imp = implies(inner, outer.ineqs[i]);
        if (!imp.holds) {
            res.equal = false;
            res.witness = imp.counterexample;
            res.detail = "not implied: " + outer.constraint(outer.ineqs[i], Relation::Geq).to_text();
            return res;
        }
    }
    for (std::size_t i = 0; i < outer.eqs.size(); ++i) {
        IntVec w;
        if (!implies_equality(inner, outer.eqs[i], &w)) {
            res.equal = false;
            res.witness = w;
            res.detail = "not implied: " + outer.constraint(outer.eqs[i], Relation::Eq).to_text();
            return res;
        }
    }
    return res;
}

ConeComparison cone_equal(const Cone& a, const Cone& b) {
    ConeComparison ab = cone_contains(a, b);
    if (!ab.equal) {
        ab.witness_in_a = false;
        ab.detail = "second cone is larger; " + ab.detail;
        return ab;
    }
    ConeComparison ba = cone_contains(b, a);
    if (!ba.equal) {
        ba.witness_in_a = true;
        ba.detail = "first cone is larger; " + ba.detail;
        return ba;
    }
    return ab;
}

}  // namespace entcone
