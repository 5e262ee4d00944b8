#pragma once

#include "entcone/rational.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace entcone {

using Mask = std::uint32_t;

inline int popcount(Mask m) { return __builtin_popcount(m); }

// Ordered, duplicate-free list of variable names. Bit i of a subset mask is name i.
class VariableSet {
public:
    VariableSet() = default;
    explicit VariableSet(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }
    int index_of(std::string_view name) const;
    Mask full() const { return names_.empty() ? 0 : static_cast<Mask>((1ull << names_.size()) - 1); }

    Mask mask_of(const std::vector<std::string>& names) const;
    // "XY", "X,Y" or a single multi-character name.
    Mask parse_subset(std::string_view label) const;
    std::string label(Mask m) const;

    // Re-express a mask over `from` in this set's bit order; throws if a name is missing.
    Mask embed(Mask m, const VariableSet& from) const;
    bool contains_all(const VariableSet& other) const;

    bool operator==(const VariableSet& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;
    bool single_char_ = true;
};

std::vector<Mask> binary_order(int n);
// Subsets by size, then lexicographically by variable index: X, Y, Z, XY, XZ, YZ, XYZ.
std::vector<Mask> graded_order(int n);

struct Value {
    bool exact = true;
    Rational q;
    double r = 0.0;
    double as_double() const { return exact ? q.get_d() : r; }
};

class EntropyVector {
public:
    EntropyVector() = default;
    // values indexed by mask-1
    static EntropyVector exact(VariableSet vars, RatVec values);
    static EntropyVector real(VariableSet vars, std::vector<double> values);
    // values listed in graded order (the usual printed order)
    static EntropyVector exact_graded(VariableSet vars, const RatVec& values);
    static EntropyVector real_graded(VariableSet vars, const std::vector<double>& values);

    const VariableSet& vars() const { return vars_; }
    bool is_exact() const { return exact_; }
    Value at(Mask m) const;
    const Rational& q(Mask m) const { return q_.at(m - 1); }
    double r(Mask m) const { return exact_ ? q_.at(m - 1).get_d() : r_.at(m - 1); }
    const RatVec& exact_values() const { return q_; }
    std::vector<double> real_values() const;
    RatVec exact_in(const std::vector<Mask>& order) const;
    std::vector<double> real_in(const std::vector<Mask>& order) const;

    // Entropy vector of the sub-collection `keep` (subset of this vector's variables).
    EntropyVector marginal(const VariableSet& keep) const;

    std::string to_text() const;
    static EntropyVector parse(std::string_view text);

private:
    VariableSet vars_;
    bool exact_ = true;
    RatVec q_;
    std::vector<double> r_;
};

// Sparse linear functional over subset coordinates; H(empty) terms are dropped.
struct Expr {
    std::map<Mask, Rational> terms;

    Expr& add(Mask m, const Rational& c);
    Expr& operator+=(const Expr& o);
    Expr& operator-=(const Expr& o);
    Expr operator+(const Expr& o) const { Expr e = *this; return e += o; }
    Expr operator-(const Expr& o) const { Expr e = *this; return e -= o; }
    Expr operator-() const;
    Expr operator*(const Rational& c) const;
    bool operator==(const Expr& o) const { return terms == o.terms; }
    Mask support() const;
};

Expr H(Mask s, Mask given = 0);
Expr I(Mask s, Mask t, Mask given = 0);
Expr interaction(Mask s, Mask t, Mask u);
Expr ingleton(Mask s, Mask t, Mask u, Mask v);

enum class Quantity { CondEntropy, MutualInfo, Interaction, Ingleton };
// Checks disjointness (and nonemptiness where required) and names the offending pair.
Expr derived_functional(Quantity kind, const std::vector<Mask>& subsets, const VariableSet* names = nullptr);

enum class Relation { Geq, Eq };

struct LinearConstraint {
    VariableSet vars;
    std::map<Mask, Rational> coeffs;
    Relation rel = Relation::Geq;
    std::string provenance;

    LinearConstraint() = default;
    LinearConstraint(VariableSet v, const Expr& e, Relation r, std::string prov = {});

    // Integer coefficients with gcd 1; equalities also get a positive leading coefficient.
    LinearConstraint canonical() const;
    bool is_zero() const { return coeffs.empty(); }
    Expr expr() const;
    bool same_constraint(const LinearConstraint& o) const;

    std::string to_text() const;
    static LinearConstraint parse(const VariableSet& vars, std::string_view line);
};

LinearConstraint geq(const VariableSet& vars, const Expr& e, std::string prov = {});
LinearConstraint eq(const VariableSet& vars, const Expr& e, std::string prov = {});

// Coordinates of the expression's variable set are matched to the vector's by name.
Value evaluate(const Expr& f, const VariableSet& fvars, const EntropyVector& v);
Value evaluate(const LinearConstraint& c, const EntropyVector& v);
bool satisfied(const LinearConstraint& c, const EntropyVector& v, double tol = 1e-9);

}  // namespace entcone
