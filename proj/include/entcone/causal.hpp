#pragma once

#include "entcone/entropy.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace entcone {

enum class NodeKind { Observed, Classical, Quantum };

using NodeMask = std::uint32_t;

// DAG over named nodes. Node order is the order of declaration.
class CausalStructure {
public:
    static CausalStructure parse(std::string_view text);
    static CausalStructure load(const std::string& path);

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }
    NodeKind kind(int i) const { return kinds_.at(static_cast<std::size_t>(i)); }
    int index_of(std::string_view name) const;  // -1 if absent
    int require(std::string_view name) const;

    NodeMask parents(int i) const { return parents_.at(static_cast<std::size_t>(i)); }
    NodeMask children(int i) const { return children_.at(static_cast<std::size_t>(i)); }
    NodeMask ancestors(int i) const;    // proper
    NodeMask descendants(int i) const;  // proper
    NodeMask roots_above(int i) const;  // parentless ancestors, or {i} if i is parentless
    NodeMask observed() const;
    NodeMask hidden() const { return all() & ~observed(); }
    NodeMask all() const { return names_.empty() ? 0 : static_cast<NodeMask>((1ull << names_.size()) - 1); }
    NodeMask mask_of(const std::vector<std::string>& names) const;

    // Same graph with some hidden nodes retagged (hybrid interpretations).
    CausalStructure retagged(const std::map<std::string, NodeKind>& kinds) const;

    // Variables: all nodes, in node order. Observed variables only: observed nodes in node order.
    VariableSet node_vars() const { return VariableSet(names_); }
    VariableSet observed_vars() const;

    bool d_separated(NodeMask s, NodeMask t, NodeMask given) const;
    // I(node : non-descendants | parents) = 0 for each node with a nonempty non-descendant set.
    std::vector<LinearConstraint> ci_constraints() const;

    // Each symmetry is a permutation of node indices (generators as declared).
    const std::vector<std::vector<int>>& symmetries() const { return symmetries_; }
    const std::vector<std::string>& post_selections() const { return post_select_; }
    const std::vector<NodeMask>& exclusive_groups() const { return exclusive_; }

    // Quantum mode shape: hidden nodes are parentless.
    void check_two_generation() const;

private:
    void add_node(const std::string& name, NodeKind kind);
    void add_edge(int from, int to);
    void finish();

    std::vector<std::string> names_;
    std::vector<NodeKind> kinds_;
    std::vector<NodeMask> parents_, children_;
    std::vector<NodeMask> anc_, desc_;
    std::vector<std::vector<int>> symmetries_;
    std::vector<std::string> post_select_;
    std::vector<NodeMask> exclusive_;
};

// Systems of a quantum or hybrid interpretation.
struct QuantumSystem {
    std::string name;
    bool classical = false;
    int node = -1;          // observed node, classical source, or the quantum source owning this subsystem
    NodeMask consumers = 0; // for a quantum subsystem: children that measure it
};

struct SubsystemLayout {
    std::vector<QuantumSystem> systems;
    VariableSet vars;  // one variable per system, in system order
    // Per observed node: its input systems (quantum subsystems, classical sources, observed parents).
    std::map<int, Mask> inputs;
    std::map<int, Mask> classical_inputs;
    Mask observed_mask = 0;
    Mask classical_mask = 0;
    int system_of_node(int node) const;  // -1 for quantum sources
};

SubsystemLayout subsystem_layout(const CausalStructure& c);

// Maximal sets of pairwise coexisting systems, sorted by mask.
std::vector<Mask> coexisting_sets(const CausalStructure& c, const SubsystemLayout& layout);
bool coexist(const CausalStructure& c, const SubsystemLayout& layout, int a, int b);

// Root nodes (sources) a system depends on.
NodeMask system_roots(const CausalStructure& c, const SubsystemLayout& layout, int sys);

struct IndependentPair {
    Mask first;
    Mask second;
    Mask given;  // classical sources conditioned on (0: unconditional)
};
// Within each coexisting set: maximal pairs (T,U) with no shared root outside `given`.
std::vector<IndependentPair> no_shared_ancestor_pairs(const CausalStructure& c, const SubsystemLayout& layout,
                                                      const std::vector<Mask>& sets, bool conditional = true);

}  // namespace entcone
