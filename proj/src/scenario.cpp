#include "entcone/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace entcone {

namespace {

// Collects constraints, skipping repeats.
struct Builder {
    explicit Builder(Cone c) : cone(std::move(c)) {}
    Cone cone;
    std::unordered_set<IntVec, IntVecHash> seen_ineq, seen_eq;
    std::size_t added = 0;

    void add(const Expr& e, Relation rel, const std::string& tag) {
        IntVec row = cone.dense(e);
        if (is_zero(row)) return;
        if (rel == Relation::Geq) {
            if (seen_ineq.insert(row).second) cone.add_ineq(std::move(row), tag);
        } else {
            IntVec neg = row;
            for (auto& x : neg) x = -x;
            if (seen_eq.count(neg)) return;
            if (seen_eq.insert(row).second) cone.add_eq(std::move(row), tag);
        }
        ++added;
    }
};

template <class F>
void for_each_submask(Mask m, F f) {
    for (Mask s = m; s; s = (s - 1) & m) f(s);
}

std::vector<int> bits_of(Mask m) {
    std::vector<int> out;
    for (int i = 0; m; ++i, m >>= 1)
        if (m & 1) out.push_back(i);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- classical

ScenarioCone build_classical_outer(const CausalStructure& c, const std::vector<Template>& templates, bool filter) {
    for (int i = 0; i < c.size(); ++i)
        if (c.kind(i) == NodeKind::Quantum)
            throw std::invalid_argument("classical builder given quantum node " + c.name(i));
    ScenarioCone sc;
    sc.structure = c;
    sc.mode = "classical-outer";
    VariableSet vars = c.node_vars();
    Builder b{Cone::full_space(vars)};
    for (const auto& k : shannon_elemental(vars)) b.add(k.expr(), Relation::Geq, k.provenance);
    auto ci = c.ci_constraints();
    for (const auto& k : ci) b.add(k.expr(), Relation::Eq, k.provenance);
    sc.log.push_back(std::to_string(b.cone.ineqs.size()) + " Shannon inequalities, " + std::to_string(ci.size()) +
                     " independence equalities");
    for (const auto& t : templates) {
        auto plans = filter ? relevant_instantiations(t, c) : all_instantiations(t, vars, vars.full());
        std::size_t before = b.cone.ineqs.size();
        for (const auto& p : plans) b.add(p.constraint.expr(), Relation::Geq, p.constraint.provenance);
        sc.log.push_back(t.name() + ": " + std::to_string(b.cone.ineqs.size() - before) + " instances" +
                         (filter ? "" : " (unfiltered)"));
        sc.mode = "classical-outer+templates";
    }
    sc.cone = std::move(b.cone);
    for (int i = 0; i < c.size(); ++i)
        if (c.kind(i) == NodeKind::Observed) sc.observed |= Mask{1} << i;
    return sc;
}

InnerMode parse_inner_mode(const std::string& s) {
    if (s == "ingleton-pre") return InnerMode::IngletonPre;
    if (s == "ingleton-post") return InnerMode::IngletonPost;
    if (s == "ray-filter") return InnerMode::RayFilter;
    throw std::invalid_argument("unknown inner mode " + s);
}

ScenarioCone build_classical_inner(const CausalStructure& c, InnerMode mode, const FmOptions& fm,
                                   const std::vector<bool>* achievable) {
    Template ing = Template::parse("ingleton");
    if (mode == InnerMode::IngletonPre) {
        ScenarioCone full = build_classical_outer(c, {ing}, false);
        full.mode = "classical-inner:ingleton-pre";
        ScenarioCone m = marginalize(full, fm);
        m.mode = full.mode;
        return m;
    }
    ScenarioCone m = marginalize(build_classical_outer(c), fm);
    if (mode == InnerMode::IngletonPost) {
        m.mode = "classical-inner:ingleton-post";
        VariableSet obs = m.cone.vars;
        for (const auto& p : all_instantiations(ing, obs, obs.full())) m.cone.add(p.constraint);
        m.cone = reduce(m.cone);
        m.log.push_back("intersected with the Ingleton cone of the observed variables");
        return m;
    }
    m.mode = "classical-inner:ray-filter";
    Cone withrays = double_description(m.cone);
    if (!achievable || achievable->size() != withrays.rays->size())
        throw std::invalid_argument("ray-filter needs one achievability flag per outer ray (" +
                                    std::to_string(withrays.rays->size()) + ")");
    std::vector<IntVec> keep;
    for (std::size_t i = 0; i < withrays.rays->size(); ++i)
        if ((*achievable)[i]) keep.push_back((*withrays.rays)[i]);
    m.cone = hull_of_rays(m.cone.vars, m.cone.coords, keep, withrays.lineality);
    m.log.push_back("hull of " + std::to_string(keep.size()) + " achievable rays");
    return m;
}

// ---------------------------------------------------------------- quantum / hybrid

ScenarioCone build_quantum_outer(const CausalStructure& c, const std::vector<Template>& templates) {
    ScenarioCone sc;
    sc.structure = c;
    bool any_classical = false, any_quantum = false;
    for (int i = 0; i < c.size(); ++i) {
        any_classical |= c.kind(i) == NodeKind::Classical;
        any_quantum |= c.kind(i) == NodeKind::Quantum;
    }
    sc.mode = any_classical && any_quantum ? "hybrid-outer" : any_quantum ? "quantum-outer" : "classical-as-quantum";
    SubsystemLayout L = subsystem_layout(c);
    sc.sets = coexisting_sets(c, L);
    std::set<Mask> cs;
    for (Mask S : sc.sets) for_each_submask(S, [&](Mask t) { cs.insert(t); });
    std::vector<Mask> coords(cs.begin(), cs.end());
    Builder b{Cone(L.vars, coords)};
    auto within_some = [&](Mask m) {
        return std::any_of(sc.sets.begin(), sc.sets.end(), [&](Mask S) { return (m & ~S) == 0; });
    };

    for (Mask S : sc.sets) {
        auto el = bits_of(S);
        for_each_submask(S, [&](Mask t) { b.add(H(t), Relation::Geq, "positivity"); });
        for (std::size_t x = 0; x < el.size(); ++x)
            for (std::size_t y = x + 1; y < el.size(); ++y) {
                Mask i = Mask{1} << el[x], j = Mask{1} << el[y];
                Mask rest = S & ~i & ~j;
                b.add(I(i, j), Relation::Geq, "submodularity");
                for_each_submask(rest, [&](Mask k) { b.add(I(i, j, k), Relation::Geq, "submodularity"); });
            }
        for (int e : el) {
            Mask i = Mask{1} << e;
            Mask rest = S & ~i;
            // H(i|K) + H(i|L) >= 0 over bipartitions of the rest.
            b.add(H(i) + H(i, rest), Relation::Geq, "weak-monotonicity");
            for_each_submask(rest, [&](Mask k) { b.add(H(i, k) + H(i, rest & ~k), Relation::Geq, "weak-monotonicity"); });
            if (L.classical_mask & i) b.add(H(i, rest), Relation::Geq, "classical");
        }
    }
    for (const auto& p : no_shared_ancestor_pairs(c, L, sc.sets, true))
        b.add(I(p.first, p.second, p.given), Relation::Eq, p.given ? "independence:conditional" : "independence");
    // Data processing across measurements.
    for (const auto& [v, Q] : L.inputs) {
        if (!Q) continue;
        int vs = L.system_of_node(v);
        Mask V = Mask{1} << vs;
        Mask Cl = L.classical_inputs.at(v);
        for (Mask W : coords) {
            if (W & (Q | V)) continue;
            if (!within_some(W | Q) || !within_some(W | V | Cl)) continue;
            b.add(I(W, Q) - I(W, V | Cl), Relation::Geq, "dpi:" + c.name(v));
        }
    }
    std::size_t nt = 0;
    for (const auto& t : templates) {
        std::set<Mask> done;
        for (Mask S : sc.sets) {
            Mask cl = S & L.classical_mask;
            if (popcount(cl) < 4) continue;
            for (const auto& p : all_instantiations(t, L.vars, cl)) {
                b.add(p.constraint.expr(), Relation::Geq, p.constraint.provenance);
                ++nt;
            }
        }
    }
    sc.cone = std::move(b.cone);
    sc.observed = L.observed_mask;
    std::ostringstream os;
    os << sc.sets.size() << " coexisting sets, " << coords.size() << " coordinates, " << sc.cone.ineqs.size()
       << " inequalities, " << sc.cone.eqs.size() << " equalities";
    if (nt) os << ", " << nt << " template instances";
    sc.log.push_back(os.str());
    return sc;
}

TemplateInstance parse_instance(const std::string& text, const Template& t) {
    TemplateInstance in;
    in.tmpl = t;
    std::vector<std::string> parts;
    if (text.find(',') != std::string::npos) {
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ',')) parts.push_back(p);
    } else {
        for (char ch : text) parts.emplace_back(1, ch);
    }
    if (parts.size() != 4) throw std::invalid_argument("template instance needs four variables: " + text);
    for (int i = 0; i < 4; ++i) in.names[static_cast<std::size_t>(i)] = parts[static_cast<std::size_t>(i)];
    return in;
}

ScenarioCone augment_hybrid(const ScenarioCone& full, const std::vector<TemplateInstance>& instances) {
    if (full.marginal) throw std::invalid_argument("augment_hybrid needs the full-stage cone");
    ScenarioCone sc = full;
    const VariableSet& vars = sc.cone.vars;
    SubsystemLayout L = subsystem_layout(sc.structure);
    for (const auto& in : instances) {
        Slots slots;
        Mask m = 0;
        for (int i = 0; i < 4; ++i) {
            int k = vars.index_of(in.names[static_cast<std::size_t>(i)]);
            if (k < 0) throw std::invalid_argument("instance variable " + in.names[static_cast<std::size_t>(i)] + " is not a system");
            slots[static_cast<std::size_t>(i)] = k;
            m |= Mask{1} << k;
        }
        if (m & ~L.classical_mask) throw std::invalid_argument("instance spans a non-classical system");
        if (!std::any_of(sc.sets.begin(), sc.sets.end(), [&](Mask S) { return (m & ~S) == 0; }))
            throw std::invalid_argument("instance spans systems that do not coexist");
        LinearConstraint k = instantiate(in.tmpl, vars, slots);
        sc.cone.add(k);
        sc.log.push_back("added " + k.provenance);
    }
    return sc;
}

// ---------------------------------------------------------------- marginals

Cone restrict_to(const Cone& c, const VariableSet& sub) {
    std::vector<std::pair<Mask, std::size_t>> map;
    for (std::size_t i = 0; i < c.coords.size(); ++i) map.emplace_back(sub.embed(c.coords[i], c.vars), i);
    std::sort(map.begin(), map.end());
    std::vector<Mask> coords;
    for (const auto& [m, i] : map) coords.push_back(m);
    Cone out(sub, coords);
    auto remap = [&](const IntVec& r) {
        IntVec o(r.size());
        for (std::size_t j = 0; j < map.size(); ++j) o[j] = r[map[j].second];
        return o;
    };
    for (std::size_t i = 0; i < c.ineqs.size(); ++i) out.add_ineq(remap(c.ineqs[i]), i < c.ineq_tags.size() ? c.ineq_tags[i] : "");
    for (std::size_t i = 0; i < c.eqs.size(); ++i) out.add_eq(remap(c.eqs[i]), i < c.eq_tags.size() ? c.eq_tags[i] : "");
    if (c.rays) {
        out.rays.emplace();
        for (const auto& r : *c.rays) out.rays->push_back(remap(r));
    }
    for (const auto& l : c.lineality) out.lineality.push_back(remap(l));
    return out;
}

ScenarioCone marginalize(const ScenarioCone& full, const FmOptions& fm, FmStats* stats) {
    if (full.marginal) return full;
    ScenarioCone sc = full;
    std::vector<Mask> drop;
    for (Mask m : full.cone.coords)
        if (m & ~full.observed) drop.push_back(m);
    FmStats local;
    FmStats& st = stats ? *stats : local;
    Cone m = fm_eliminate(full.cone, drop, fm, &st);
    std::vector<std::string> names;
    for (int i = 0; i < full.cone.vars.size(); ++i)
        if (full.observed >> i & 1) names.push_back(full.cone.vars.name(i));
    sc.cone = restrict_to(m, VariableSet(names));
    sc.marginal = true;
    sc.observed = sc.cone.vars.full();
    std::ostringstream os;
    os << "eliminated " << drop.size() << " coordinates in " << st.seconds << " s (" << st.lp_calls
       << " LPs, peak " << st.max_rows << " rows): " << sc.cone.ineqs.size() << " inequalities, " << sc.cone.eqs.size()
       << " equalities";
    sc.log.push_back(os.str());
    return sc;
}

CausalStructure interpret(const CausalStructure& c, const std::string& mode) {
    std::map<std::string, NodeKind> kinds;
    auto all_hidden = [&](NodeKind k) {
        for (int i = 0; i < c.size(); ++i)
            if (c.kind(i) != NodeKind::Observed) kinds[c.name(i)] = k;
    };
    if (mode == "classical") {
        all_hidden(NodeKind::Classical);
    } else if (mode == "quantum") {
        all_hidden(NodeKind::Quantum);
    } else if (mode.rfind("hybrid:", 0) == 0) {
        all_hidden(NodeKind::Quantum);
        std::stringstream ss(mode.substr(7));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto eqp = item.find('=');
            if (eqp == std::string::npos) throw std::invalid_argument("hybrid tag needs NAME=classical|quantum: " + item);
            std::string name = item.substr(0, eqp), kind = item.substr(eqp + 1);
            if (kind == "classical") kinds[name] = NodeKind::Classical;
            else if (kind == "quantum") kinds[name] = NodeKind::Quantum;
            else throw std::invalid_argument("unknown kind " + kind);
        }
    } else {
        throw std::invalid_argument("unknown interpretation " + mode);
    }
    return c.retagged(kinds);
}

std::vector<Permutation> observed_group(const CausalStructure& c) {
    VariableSet obs = c.observed_vars();
    auto gens = restrict_group(c.symmetries(), c.node_vars(), obs);
    return group_closure(gens, obs.size());
}

std::string data_path(const std::string& relative) {
    const char* env = std::getenv("ENTCONE_DATA");
    std::string root = env && *env ? env : ENTCONE_DATA_DIR;
    return root + "/" + relative;
}

CausalStructure load_scenario(const std::string& name_or_path) {
    if (std::filesystem::exists(name_or_path)) return CausalStructure::load(name_or_path);
    std::string p = data_path("scenarios/" + name_or_path + ".txt");
    if (std::filesystem::exists(p)) return CausalStructure::load(p);
    throw std::invalid_argument("no scenario file or catalog entry named " + name_or_path);
}

}  // namespace entcone
