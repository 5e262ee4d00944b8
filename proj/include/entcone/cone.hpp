#pragma once

#include "entcone/entropy.hpp"
#include "entcone/rational.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace entcone {

// Polyhedral cone {x : A x >= 0, E x = 0} over a list of subset coordinates.
struct Cone {
    VariableSet vars;
    std::vector<Mask> coords;  // strictly increasing
    std::vector<IntVec> ineqs;
    std::vector<IntVec> eqs;
    std::vector<std::string> ineq_tags;  // parallel to ineqs (may be empty strings)
    std::vector<std::string> eq_tags;
    std::optional<std::vector<IntVec>> rays;
    std::vector<IntVec> lineality;

    Cone() = default;
    Cone(VariableSet v, std::vector<Mask> c);
    // Full space of all nonempty subsets.
    static Cone full_space(const VariableSet& v);

    std::size_t dim() const { return coords.size(); }
    int index_of(Mask m) const;

    IntVec dense(const LinearConstraint& c) const;
    IntVec dense(const Expr& e) const;
    LinearConstraint constraint(const IntVec& row, Relation rel, std::string tag = {}) const;
    std::vector<LinearConstraint> inequalities() const;
    std::vector<LinearConstraint> equalities() const;

    void add(const LinearConstraint& c);
    void add_ineq(IntVec row, std::string tag = {});
    void add_eq(IntVec row, std::string tag = {});

    RatVec point(const EntropyVector& v) const;  // exact coordinates of v in this space
    EntropyVector vector_of(const IntVec& x) const;  // only when coords span every subset

    std::string to_text() const;
    static Cone parse(std::string_view text);
};

Cone read_cone_file(const std::string& path);
void write_cone_file(const std::string& path, const Cone& c);

// ---------------------------------------------------------------- queries

struct Certificate {
    IntVec target;
    std::vector<std::pair<std::size_t, Rational>> ineq_multipliers;  // nonnegative
    std::vector<std::pair<std::size_t, Rational>> eq_multipliers;    // any sign
};

struct Implication {
    bool holds = false;
    Certificate certificate;
    IntVec counterexample;  // point of the premise cone with negative target value
    Rational counterexample_value;
};

Implication implies(const Cone& premises, const IntVec& target);
Implication implies(const Cone& premises, const LinearConstraint& target);
// Target equality: both directions.
bool implies_equality(const Cone& premises, const IntVec& target, IntVec* counterexample = nullptr);
// Exact check that the multipliers reproduce the target coefficient by coefficient.
bool verify_certificate(const Cone& premises, const Certificate& cert);
std::string describe_certificate(const Cone& premises, const Certificate& cert);

struct Membership {
    bool inside = true;
    bool violated_equality = false;
    std::size_t violated = 0;
    double value = 0.0;       // constraint value at the point (real)
    Rational exact_value;     // when the point is exact
};

Membership member(const Cone& c, const EntropyVector& v, double tol = 1e-9);
Membership member(const Cone& c, const RatVec& x);

// Removes redundant inequalities (LP certified), duplicate and dependent equalities;
// optionally turns implicit equalities into equalities. Output rows are sorted.
Cone reduce(const Cone& c, bool implicit_equalities = true);
// Witness point for an irredundant inequality: satisfies all other constraints, violates this one.
std::optional<IntVec> irredundancy_witness(const Cone& c, std::size_t ineq_index);

// ---------------------------------------------------------------- elimination

struct FmOptions {
    int lp_every = 1;
    bool cernikov = true;
    std::size_t budget_ineqs = 500000;
    double budget_seconds = 0.0;  // per step, 0 = unlimited
    std::function<void(const std::string&)> log;
};

struct FmStats {
    std::vector<Mask> order;
    std::size_t max_rows = 0;
    std::size_t lp_calls = 0;
    std::size_t cernikov_dropped = 0;
    double seconds = 0.0;
};

class FmBudgetExceeded : public std::runtime_error {
public:
    FmBudgetExceeded(const std::string& what, Cone partial, std::vector<Mask> pending)
        : std::runtime_error(what), partial_(std::move(partial)), pending_(std::move(pending)) {}
    const Cone& partial() const { return partial_; }
    const std::vector<Mask>& pending() const { return pending_; }

private:
    Cone partial_;
    std::vector<Mask> pending_;
};

Cone fm_eliminate(const Cone& c, const std::vector<Mask>& drop, const FmOptions& opt = {}, FmStats* stats = nullptr);
// Coordinates whose subsets contain at least one `hidden` bit.
std::vector<Mask> coords_touching(const Cone& c, Mask hidden);

void write_checkpoint(const std::string& path, const Cone& partial, const std::vector<Mask>& pending);
std::pair<Cone, std::vector<Mask>> read_checkpoint(const std::string& path);

// ---------------------------------------------------------------- vertex side

// Extremal rays (coprime integers) and a lineality basis.
Cone double_description(const Cone& c);
// H-representation of cone(rays) + span(lineality).
Cone hull_of_rays(const VariableSet& vars, const std::vector<Mask>& coords, const std::vector<IntVec>& rays,
                  const std::vector<IntVec>& lineality = {});

struct ConeComparison {
    bool equal = false;
    IntVec witness;       // point in one cone but not the other
    bool witness_in_a = false;
    std::string detail;
};

// inner subset of outer?
ConeComparison cone_contains(const Cone& outer, const Cone& inner);
ConeComparison cone_equal(const Cone& a, const Cone& b);

// Restricts or reorders a cone to another coordinate list that covers its support.
Cone with_coords(const Cone& c, const std::vector<Mask>& coords);

}  // namespace entcone
