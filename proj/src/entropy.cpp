#include "entcone/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace entcone {

VariableSet::VariableSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw std::invalid_argument("variable set must not be empty");
    if (names_.size() > 30) throw std::invalid_argument("at most 30 variables are supported");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) throw std::invalid_argument("empty variable name");
        if (names_[i].find_first_of(" \t,*") != std::string::npos)
            throw std::invalid_argument("variable name contains a separator: " + names_[i]);
        for (std::size_t j = 0; j < i; ++j)
            if (names_[i] == names_[j]) throw std::invalid_argument("duplicate variable name: " + names_[i]);
        if (names_[i].size() != 1) single_char_ = false;
    }
}

int VariableSet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

Mask VariableSet::mask_of(const std::vector<std::string>& names) const {
    Mask m = 0;
    for (const auto& n : names) {
        int i = index_of(n);
        if (i < 0) throw std::invalid_argument("unknown variable: " + n);
        m |= Mask{1} << i;
    }
    return m;
}

Mask VariableSet::parse_subset(std::string_view label) const {
    if (label.empty()) throw std::invalid_argument("empty subset label");
    if (label.find(',') != std::string_view::npos) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : label) {
            if (c == ',') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        parts.push_back(cur);
        return mask_of(parts);
    }
    if (int i = index_of(label); i >= 0) return Mask{1} << i;
    if (single_char_) {
        Mask m = 0;
        for (char c : label) {
            int i = index_of(std::string(1, c));
            if (i < 0) throw std::invalid_argument("unknown variable in subset: " + std::string(label));
            m |= Mask{1} << i;
        }
        return m;
    }
    throw std::invalid_argument("unknown subset: " + std::string(label));
}

std::string VariableSet::label(Mask m) const {
    std::string out;
    for (int i = 0; i < size(); ++i) {
        if (!(m >> i & 1u)) continue;
        if (!out.empty() && !single_char_) out += ',';
        out += names_[static_cast<std::size_t>(i)];
    }
    return out;
}

Mask VariableSet::embed(Mask m, const VariableSet& from) const {
    Mask out = 0;
    for (int i = 0; i < from.size(); ++i) {
        if (!(m >> i & 1u)) continue;
        int j = index_of(from.name(i));
        if (j < 0) throw std::invalid_argument("variable " + from.name(i) + " not present");
        out |= Mask{1} << j;
    }
    return out;
}

bool VariableSet::contains_all(const VariableSet& other) const {
    for (const auto& n : other.names())
        if (index_of(n) < 0) return false;
    return true;
}

std::vector<Mask> binary_order(int n) {
    std::vector<Mask> out;
    for (Mask m = 1; m < (Mask{1} << n); ++m) out.push_back(m);
    return out;
}

std::vector<Mask> graded_order(int n) {
    std::vector<Mask> out = binary_order(n);
    auto key = [](Mask m) {
        std::vector<int> idx;
        for (int i = 0; i < 32; ++i)
            if (m >> i & 1u) idx.push_back(i);
        return idx;
    };
    std::stable_sort(out.begin(), out.end(), [&](Mask a, Mask b) {
        if (popcount(a) != popcount(b)) return popcount(a) < popcount(b);
        return key(a) < key(b);
    });
    return out;
}

// ---------------------------------------------------------------- vectors

EntropyVector EntropyVector::exact(VariableSet vars, RatVec values) {
    if (values.size() != vars.full()) throw std::invalid_argument("entropy vector has wrong length");
    EntropyVector v;
    v.vars_ = std::move(vars);
    v.exact_ = true;
    v.q_ = std::move(values);
    return v;
}

EntropyVector EntropyVector::real(VariableSet vars, std::vector<double> values) {
    if (values.size() != vars.full()) throw std::invalid_argument("entropy vector has wrong length");
    EntropyVector v;
    v.vars_ = std::move(vars);
    v.exact_ = false;
    v.r_ = std::move(values);
    return v;
}

EntropyVector EntropyVector::exact_graded(VariableSet vars, const RatVec& values) {
    auto order = graded_order(vars.size());
    if (values.size() != order.size()) throw std::invalid_argument("entropy vector has wrong length");
    RatVec q(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) q[order[i] - 1] = values[i];
    return exact(std::move(vars), std::move(q));
}

EntropyVector EntropyVector::real_graded(VariableSet vars, const std::vector<double>& values) {
    auto order = graded_order(vars.size());
    if (values.size() != order.size()) throw std::invalid_argument("entropy vector has wrong length");
    std::vector<double> r(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) r[order[i] - 1] = values[i];
    return real(std::move(vars), std::move(r));
}

Value EntropyVector::at(Mask m) const {
    Value out;
    out.exact = exact_;
    if (exact_)
        out.q = q_.at(m - 1);
    else
        out.r = r_.at(m - 1);
    return out;
}

std::vector<double> EntropyVector::real_values() const {
    if (!exact_) return r_;
    std::vector<double> out(q_.size());
    for (std::size_t i = 0; i < q_.size(); ++i) out[i] = q_[i].get_d();
    return out;
}

RatVec EntropyVector::exact_in(const std::vector<Mask>& order) const {
    if (!exact_) throw std::logic_error("entropy vector is not exact");
    RatVec out;
    for (Mask m : order) out.push_back(q_.at(m - 1));
    return out;
}

std::vector<double> EntropyVector::real_in(const std::vector<Mask>& order) const {
    std::vector<double> out;
    for (Mask m : order) out.push_back(r(m));
    return out;
}

EntropyVector EntropyVector::marginal(const VariableSet& keep) const {
    auto n = keep.full();
    if (exact_) {
        RatVec q(n);
        for (Mask m = 1; m <= n; ++m) q[m - 1] = q_.at(vars_.embed(m, keep) - 1);
        return exact(keep, std::move(q));
    }
    std::vector<double> r(n);
    for (Mask m = 1; m <= n; ++m) r[m - 1] = r_.at(vars_.embed(m, keep) - 1);
    return real(keep, std::move(r));
}

std::string EntropyVector::to_text() const {
    std::ostringstream os;
    os << "vars:";
    for (const auto& n : vars_.names()) os << ' ' << n;
    os << '\n';
    os.precision(17);
    for (Mask m = 1; m <= vars_.full(); ++m) {
        os << vars_.label(m) << ' ';
        if (exact_)
            os << q_[m - 1].get_str();
        else
            os << r_[m - 1];
        os << '\n';
    }
    return os.str();
}

EntropyVector EntropyVector::parse(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line;
    VariableSet vars;
    bool have_vars = false;
    std::vector<std::pair<Mask, std::string>> entries;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (head == "vars:") {
            std::vector<std::string> names;
            std::string n;
            while (ls >> n) names.push_back(n);
            vars = VariableSet(names);
            have_vars = true;
            continue;
        }
        if (!have_vars) throw std::invalid_argument("vector file must start with a vars: line");
        std::string val;
        if (!(ls >> val)) throw std::invalid_argument("missing value for " + head);
        entries.emplace_back(vars.parse_subset(head), val);
    }
    if (!have_vars) throw std::invalid_argument("vector file has no vars: line");
    if (entries.size() != vars.full()) throw std::invalid_argument("vector file must list every nonempty subset");
    bool exact = std::all_of(entries.begin(), entries.end(), [](const auto& e) {
        return e.second.find_first_of(".eE") == std::string::npos;
    });
    if (exact) {
        RatVec q(vars.full());
        std::vector<bool> seen(vars.full(), false);
        for (const auto& [m, s] : entries) {
            if (seen[m - 1]) throw std::invalid_argument("subset listed twice: " + vars.label(m));
            seen[m - 1] = true;
            q[m - 1] = parse_rational(s);
        }
        return EntropyVector::exact(vars, std::move(q));
    }
    std::vector<double> r(vars.full());
    std::vector<bool> seen(vars.full(), false);
    for (const auto& [m, s] : entries) {
        if (seen[m - 1]) throw std::invalid_argument("subset listed twice: " + vars.label(m));
        seen[m - 1] = true;
        r[m - 1] = parse_rational(s).get_d();
    }
    return EntropyVector::real(vars, std::move(r));
}

// ---------------------------------------------------------------- expressions

Expr& Expr::add(Mask m, const Rational& c) {
    if (m == 0 || c == 0) return *this;
    auto it = terms.find(m);
    if (it == terms.end()) {
        terms.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) terms.erase(it);
    }
    return *this;
}

Expr& Expr::operator+=(const Expr& o) {
    for (const auto& [m, c] : o.terms) add(m, c);
    return *this;
}

Expr& Expr::operator-=(const Expr& o) {
    for (const auto& [m, c] : o.terms) add(m, -c);
    return *this;
}

Expr Expr::operator-() const {
    Expr e;
    for (const auto& [m, c] : terms) e.terms.emplace(m, -c);
    return e;
}

Expr Expr::operator*(const Rational& k) const {
    Expr e;
    if (k == 0) return e;
    for (const auto& [m, c] : terms) e.terms.emplace(m, c * k);
    return e;
}

Mask Expr::support() const {
    Mask s = 0;
    for (const auto& [m, c] : terms) s |= m;
    return s;
}

Expr H(Mask s, Mask given) {
    Expr e;
    e.add(s | given, 1);
    e.add(given, -1);
    return e;
}

Expr I(Mask s, Mask t, Mask given) {
    Expr e;
    e.add(s | given, 1);
    e.add(t | given, 1);
    e.add(given, -1);
    e.add(s | t | given, -1);
    return e;
}

Expr interaction(Mask s, Mask t, Mask u) { return I(s, t) - I(s, t, u); }

Expr ingleton(Mask s, Mask t, Mask u, Mask v) { return I(s, t, u) + I(s, t, v) + I(u, v) - I(s, t); }

Expr derived_functional(Quantity kind, const std::vector<Mask>& subsets, const VariableSet* names) {
    std::size_t want = 0;
    switch (kind) {
        case Quantity::CondEntropy: want = 2; break;
        case Quantity::MutualInfo: want = 3; break;
        case Quantity::Interaction: want = 3; break;
        case Quantity::Ingleton: want = 4; break;
    }
    if (subsets.size() != want) throw std::invalid_argument("wrong number of subsets for derived functional");
    auto show = [&](std::size_t i) {
        if (names) return names->label(subsets[i]).empty() ? std::string("{}") : names->label(subsets[i]);
        return "#" + std::to_string(i);
    };
    for (std::size_t i = 0; i < subsets.size(); ++i)
        for (std::size_t j = i + 1; j < subsets.size(); ++j)
            if (subsets[i] & subsets[j])
                throw std::invalid_argument("overlapping subsets " + show(i) + " and " + show(j));
    // Arguments that may be empty: the conditioning set of H and I.
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        bool may_be_empty = (kind == Quantity::CondEntropy && i == 1) || (kind == Quantity::MutualInfo && i == 2);
        if (!may_be_empty && subsets[i] == 0) throw std::invalid_argument("subset " + show(i) + " must be nonempty");
    }
    switch (kind) {
        case Quantity::CondEntropy: return H(subsets[0], subsets[1]);
        case Quantity::MutualInfo: return I(subsets[0], subsets[1], subsets[2]);
        case Quantity::Interaction: return interaction(subsets[0], subsets[1], subsets[2]);
        case Quantity::Ingleton: return ingleton(subsets[0], subsets[1], subsets[2], subsets[3]);
    }
    return {};
}

// ---------------------------------------------------------------- constraints

LinearConstraint::LinearConstraint(VariableSet v, const Expr& e, Relation r, std::string prov)
    : vars(std::move(v)), coeffs(e.terms), rel(r), provenance(std::move(prov)) {
    for (const auto& [m, c] : coeffs)
        if (m == 0 || (m & ~vars.full())) throw std::invalid_argument("constraint term outside variable set");
}

LinearConstraint LinearConstraint::canonical() const {
    LinearConstraint out = *this;
    out.coeffs.clear();
    RatVec vals;
    std::vector<Mask> masks;
    for (const auto& [m, c] : coeffs)
        if (c != 0) {
            masks.push_back(m);
            vals.push_back(c);
        }
    if (vals.empty()) return out;
    IntVec iv = to_primitive(vals);
    if (rel == Relation::Eq && iv[0] < 0)
        for (auto& x : iv) x = -x;
    for (std::size_t i = 0; i < masks.size(); ++i) out.coeffs.emplace(masks[i], Rational(iv[i]));
    return out;
}

Expr LinearConstraint::expr() const {
    Expr e;
    e.terms = coeffs;
    return e;
}

bool LinearConstraint::same_constraint(const LinearConstraint& o) const {
    if (rel != o.rel || !(vars == o.vars)) return false;
    return canonical().coeffs == o.canonical().coeffs;
}

std::string LinearConstraint::to_text() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : coeffs) {
        if (!first) os << ' ';
        first = false;
        os << c.get_str() << '*' << vars.label(m);
    }
    if (first) os << '0';
    os << (rel == Relation::Geq ? " >= 0" : " == 0");
    return os.str();
}

LinearConstraint LinearConstraint::parse(const VariableSet& vars, std::string_view line) {
    std::istringstream is{std::string(line)};
    std::string tok;
    Expr e;
    Relation rel = Relation::Geq;
    bool have_rel = false;
    while (is >> tok) {
        if (tok == ">=" || tok == "==") {
            rel = tok == ">=" ? Relation::Geq : Relation::Eq;
            std::string zero;
            if (!(is >> zero) || zero != "0") throw std::invalid_argument("right-hand side must be 0");
            have_rel = true;
            break;
        }
        if (tok == "0") continue;
        auto star = tok.find('*');
        if (star == std::string::npos) throw std::invalid_argument("term must look like <coeff>*<subset>: " + tok);
        e.add(vars.parse_subset(tok.substr(star + 1)), parse_rational(tok.substr(0, star)));
    }
    if (!have_rel) throw std::invalid_argument("constraint needs '>= 0' or '== 0'");
    std::string rest;
    if (is >> rest) throw std::invalid_argument("trailing text after constraint: " + rest);
    return LinearConstraint(vars, e, rel);
}

LinearConstraint geq(const VariableSet& vars, const Expr& e, std::string prov) {
    return LinearConstraint(vars, e, Relation::Geq, std::move(prov)).canonical();
}

LinearConstraint eq(const VariableSet& vars, const Expr& e, std::string prov) {
    return LinearConstraint(vars, e, Relation::Eq, std::move(prov)).canonical();
}

Value evaluate(const Expr& f, const VariableSet& fvars, const EntropyVector& v) {
    Value out;
    out.exact = v.is_exact();
    bool same = fvars == v.vars();
    for (const auto& [m, c] : f.terms) {
        Mask vm = same ? m : v.vars().embed(m, fvars);
        if (out.exact)
            out.q += c * v.q(vm);
        else
            out.r += c.get_d() * v.r(vm);
    }
    return out;
}

Value evaluate(const LinearConstraint& c, const EntropyVector& v) { return evaluate(c.expr(), c.vars, v); }

bool satisfied(const LinearConstraint& c, const EntropyVector& v, double tol) {
    Value x = evaluate(c, v);
    if (x.exact) return c.rel == Relation::Geq ? x.q >= 0 : x.q == 0;
    return c.rel == Relation::Geq ? x.r >= -tol : std::fabs(x.r) <= tol;
}

}  // namespace entcone
