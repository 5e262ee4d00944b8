#pragma once

#include "entcone/causal.hpp"
#include "entcone/cone.hpp"
#include "entcone/entropy.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace entcone {

// Dense pmf over finite alphabets {0..k-1}; the last variable varies fastest.
class JointDistribution {
public:
    JointDistribution() = default;
    static JointDistribution exact(VariableSet vars, std::vector<int> alphabets, RatVec pmf);
    static JointDistribution real(VariableSet vars, std::vector<int> alphabets, std::vector<double> pmf);

    const VariableSet& vars() const { return vars_; }
    const std::vector<int>& alphabets() const { return alphabets_; }
    bool is_exact() const { return exact_; }
    std::size_t size() const { return size_; }

    std::vector<int> outcome(std::size_t index) const;
    std::size_t index(const std::vector<int>& outcome) const;
    double p(std::size_t index) const { return exact_ ? pq_[index].get_d() : pr_[index]; }
    const Rational& q(std::size_t index) const { return pq_.at(index); }

    // Throws unless the pmf is nonnegative and sums to 1 (exactly, or within 1e-12).
    void validate() const;
    JointDistribution marginal(const std::vector<std::string>& keep) const;

    std::string to_text() const;
    static JointDistribution parse(std::string_view text);
    static JointDistribution load(const std::string& path);

private:
    VariableSet vars_;
    std::vector<int> alphabets_;
    std::size_t size_ = 0;
    bool exact_ = true;
    RatVec pq_;
    std::vector<double> pr_;
};

// Entropies in bits. Exact whenever every marginal probability is a power of two.
EntropyVector entropy_vector(const JointDistribution& d);

// Dirichlet(1) pmf.
JointDistribution random_distribution(const VariableSet& vars, const std::vector<int>& alphabets,
                                      std::mt19937_64& rng);

// ---------------------------------------------------------------- post-processing

struct OutcomeMap {
    std::vector<int> table;  // input outcome -> output outcome
    int out_alphabet = 0;
};

// Named maps act on a two-bit value v = 2*hi + lo: and, or, xor, hi, lo; also identity,
// parity (1 on even outcomes, i.e. odd when counted from 1) and table:a,b,c,...
OutcomeMap parse_outcome_map(std::string_view spec, int in_alphabet);
// "X=and,Y=and,Z=or"; unnamed variables are left alone.
std::map<std::string, OutcomeMap> parse_map_spec(std::string_view spec, const JointDistribution& d);
JointDistribution postprocess(const JointDistribution& d, const std::map<std::string, OutcomeMap>& maps);

// ---------------------------------------------------------------- strategies

struct StrategyExpr {
    enum class Op { Ref, Const, Xor, And, Or, Copy, Pair, Table, Component } op = Op::Ref;
    std::string name;             // Ref
    int value = 0;                // Const, Component index
    std::vector<int> table;       // Table
    std::vector<StrategyExpr> args;
};

struct StrategyRecipe {
    struct Source {
        std::string name;
        int alphabet = 2;
    };
    struct Node {
        std::string name;
        StrategyExpr expr;
        std::string text;
    };
    std::vector<Source> sources;
    std::vector<Node> nodes;  // evaluation order

    static StrategyRecipe parse(std::string_view text);
    static StrategyRecipe load(const std::string& path);
};

// Names read by an expression.
std::vector<std::string> referenced_names(const StrategyExpr& e);

// Checks that each node reads only its parents and its own private sources; returns the
// offending description or an empty string.
std::string recipe_violation(const StrategyRecipe& r, const CausalStructure& dag);

// Exact pmf over every node of the dag (undefined hidden nodes are constant 0).
// Throws std::invalid_argument naming the first parent violation.
JointDistribution run_strategy(const StrategyRecipe& r, const CausalStructure& dag);

struct CompatibilityCheck {
    LinearConstraint constraint;
    double value = 0.0;
    bool pass = false;
};
std::vector<CompatibilityCheck> check_compatibility(const JointDistribution& d, const CausalStructure& dag,
                                                     double tol = 1e-9);

// ---------------------------------------------------------------- ray fixtures

// A listed ray (graded order over the observed variables) and the strategy meant to reach it.
struct RayFixture {
    int index = 0;
    IntVec values;
    int factor = 1;      // the strategy's vector is factor * values
    bool outer = false;  // listed as not achievable
};

struct FixtureSet {
    std::string scenario;
    std::vector<RayFixture> rays;
    std::map<std::string, StrategyRecipe> strategies;  // keyed by ray index or a free name

    static FixtureSet parse(std::string_view text);
    static FixtureSet load(const std::string& path);
};

struct FixtureCheck {
    int index = 0;
    bool has_strategy = false;
    bool reproduced = false;
    EntropyVector vector;  // observed marginal of the strategy
    std::string detail;
};

// Runs each ray's strategy and compares the observed entropy vector with factor * ray exactly.
std::vector<FixtureCheck> verify_fixtures(const FixtureSet& f, const CausalStructure& dag);

// ---------------------------------------------------------------- two-qubit construction

using Qubit = std::array<std::complex<double>, 2>;
using TwoQubit = std::array<std::complex<double>, 4>;

Qubit angle_state(double theta);  // cos(theta/2)|0> + sin(theta/2)|1>
TwoQubit singlet();
TwoQubit tensor(const Qubit& a, const Qubit& b);
double born(const TwoQubit& effect, const TwoQubit& state);

// p[a][b][x][y]: x from measuring the first half with angles {0, pi/2}[b] (outcome 1 = angle + pi),
// y from the second half with {pi/4, 3pi/4}[a].
using CHSHTable = std::array<std::array<std::array<std::array<double, 2>, 2>, 2>, 2>;
CHSHTable chsh_table();
double correlator(const CHSHTable& p, int a, int b);
// Largest |sum of the four correlators with one sign flipped|.
double chsh_value(const CHSHTable& p);

// Observed triangle variables X = (x, b), Y = (y, a), Z = (a, b), each encoded as 2*first + second.
// relabel_y swaps the two outcomes of the second measurement.
JointDistribution fritz_distribution(bool relabel_y = false);

// ---------------------------------------------------------------- solid angle

struct SolidAngleEstimate {
    std::uint64_t hits = 0;
    std::uint64_t samples = 0;
    std::uint64_t discarded = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    double standard_error = 0.0;
};

// Fraction of the positive sector of the unit sphere in the cone's coordinates lying in the cone.
// Shards use seeds derived from (seed, shard) so the result does not depend on `workers`.
SolidAngleEstimate solid_angle(const Cone& cone, std::uint64_t samples, std::uint64_t seed, int workers = 1,
                               int shards = 64);

}  // namespace entcone
