#pragma once

#include "entcone/causal.hpp"
#include "entcone/entropy.hpp"

#include <array>
#include <string>
#include <vector>

namespace entcone {

std::vector<LinearConstraint> shannon_elemental(const VariableSet& vars);
// Elemental inequalities of the subsets inside `within` only.
std::vector<LinearConstraint> shannon_elemental(const VariableSet& vars, Mask within);

enum class Family { ZhangYeung, Matus1, Matus2, Ingleton, Custom };

// Four-slot inequality template.
struct Template {
    Family family = Family::ZhangYeung;
    int s = 1;
    std::string source;          // file path for Custom
    LinearConstraint custom;     // over four formal variables (slot order = variable order)

    // "zy", "matus1:s=K", "matus2:s=K", "ingleton", "file:<path>"
    static Template parse(const std::string& spec);
    std::string name() const;
    // Left-hand side expanded on four disjoint subsets.
    Expr lhs(Mask x1, Mask x2, Mask x3, Mask x4) const;
};

std::vector<Template> parse_templates(const std::string& comma_list);

using Slots = std::array<int, 4>;

struct InstantiationPlan {
    Template tmpl;
    Slots slots{};
    bool relevant = true;
    std::string reason;
    LinearConstraint constraint;
};

LinearConstraint instantiate(const Template& t, const VariableSet& vars, const Slots& slots);
// Every assignment of distinct variables (from `within`) to the four slots.
std::vector<InstantiationPlan> all_instantiations(const Template& t, const VariableSet& vars, Mask within);
// Keeps assignments where none of I(1:2), I(1:3), I(1:4), I(2:3), I(2:4) is forced to vanish by d-separation.
// Pruned plans are returned too when `include_pruned`.
std::vector<InstantiationPlan> relevant_instantiations(const Template& t, const CausalStructure& c,
                                                       bool include_pruned = false);

// ---------------------------------------------------------------- symmetry

using Permutation = std::vector<int>;  // variable index -> variable index

std::vector<Permutation> group_closure(const std::vector<Permutation>& generators, int n);
Mask permute_mask(Mask m, const Permutation& p);
// Restricts node permutations to a variable subset (by name); every listed variable must map inside it.
std::vector<Permutation> restrict_group(const std::vector<Permutation>& node_perms, const VariableSet& nodes,
                                        const VariableSet& vars);

struct SymmetryClass {
    LinearConstraint representative;
    std::size_t orbit_size = 0;
    std::vector<std::size_t> members;  // indices into the deduplicated input
};

std::vector<SymmetryClass> symmetry_classes(const std::vector<LinearConstraint>& constraints,
                                            const std::vector<Permutation>& group);

struct RayClass {
    IntVec representative;
    std::vector<std::size_t> members;
};
// Orbits of vectors indexed by `coords`; the group must map coords onto themselves.
std::vector<RayClass> ray_classes(const std::vector<Mask>& coords, const std::vector<IntVec>& rays,
                                  const std::vector<Permutation>& group);

}  // namespace entcone
