#pragma once

#include "entcone/catalog.hpp"
#include "entcone/causal.hpp"
#include "entcone/cone.hpp"

#include <array>
#include <string>
#include <vector>

namespace entcone {

struct ScenarioCone {
    CausalStructure structure;
    std::string mode;
    bool marginal = false;
    Cone cone;
    Mask observed = 0;           // observed systems in cone.vars (full stage)
    std::vector<Mask> sets;      // coexisting sets (quantum/hybrid only)
    std::vector<std::string> log;
};

ScenarioCone build_classical_outer(const CausalStructure& c, const std::vector<Template>& templates = {},
                                   bool filter = true);

enum class InnerMode { IngletonPre, IngletonPost, RayFilter };
InnerMode parse_inner_mode(const std::string& s);

// Returns the marginal stage. RayFilter keeps the outer marginal rays flagged achievable.
ScenarioCone build_classical_inner(const CausalStructure& c, InnerMode mode, const FmOptions& fm = {},
                                   const std::vector<bool>* achievable = nullptr);

// Node kinds decide the interpretation: quantum sources split into one subsystem per child,
// classical sources stay single systems. `templates` are instantiated on every all-classical
// coexisting four-set.
ScenarioCone build_quantum_outer(const CausalStructure& c, const std::vector<Template>& templates = {});

struct TemplateInstance {
    Template tmpl;
    std::array<std::string, 4> names;
};
// Parses "YZAX" (single-character names) or "Y,Z,A,X".
TemplateInstance parse_instance(const std::string& text, const Template& t = {});

// Adds instances on all-classical coexisting sets of a full-stage quantum/hybrid cone.
ScenarioCone augment_hybrid(const ScenarioCone& full, const std::vector<TemplateInstance>& instances);

// Eliminates every coordinate touching an unobserved system; the result lives on the observed variables.
ScenarioCone marginalize(const ScenarioCone& full, const FmOptions& fm = {}, FmStats* stats = nullptr);

// Re-expresses a cone whose coordinates avoid every variable outside `sub` over `sub`.
Cone restrict_to(const Cone& c, const VariableSet& sub);

// "classical": every hidden node classical. "quantum": every hidden node quantum.
// "hybrid:A=classical,B=classical": listed nodes as given, every other hidden node quantum.
CausalStructure interpret(const CausalStructure& c, const std::string& mode);

// Files under the shipped data directory (overridable through the ENTCONE_DATA environment variable).
std::string data_path(const std::string& relative);
// An existing file path, or a catalog name such as "triangle".
CausalStructure load_scenario(const std::string& name_or_path);

// Symmetry group of the observed variables induced by the declared node symmetries.
std::vector<Permutation> observed_group(const CausalStructure& c);

}  // namespace entcone
