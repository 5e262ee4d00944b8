#include "entcone/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace entcone {

std::vector<LinearConstraint> shannon_elemental(const VariableSet& vars) { return shannon_elemental(vars, vars.full()); }

std::vector<LinearConstraint> shannon_elemental(const VariableSet& vars, Mask within) {
    std::vector<LinearConstraint> out;
    std::vector<int> el;
    for (int i = 0; i < vars.size(); ++i)
        if (within >> i & 1) el.push_back(i);
    for (int i : el) out.push_back(geq(vars, H(Mask{1} << i, within & ~(Mask{1} << i)), "shannon:elemental"));
    for (std::size_t a = 0; a < el.size(); ++a)
        for (std::size_t b = a + 1; b < el.size(); ++b) {
            Mask pair = (Mask{1} << el[a]) | (Mask{1} << el[b]);
            Mask rest = within & ~pair;
            // Every K inside rest, smallest first.
            std::vector<Mask> ks;
            for (Mask k = rest;; k = (k - 1) & rest) {
                ks.push_back(k);
                if (!k) break;
            }
            std::sort(ks.begin(), ks.end(), [](Mask x, Mask y) {
                return popcount(x) != popcount(y) ? popcount(x) < popcount(y) : x < y;
            });
            for (Mask k : ks)
                out.push_back(geq(vars, I(Mask{1} << el[a], Mask{1} << el[b], k), "shannon:elemental"));
        }
    return out;
}

// ---------------------------------------------------------------- templates

Template Template::parse(const std::string& spec) {
    Template t;
    auto s_of = [&](const std::string& rest) {
        if (rest.empty()) return 1;
        if (rest.rfind(":s=", 0) != 0) throw std::invalid_argument("bad template " + spec + " (expected :s=K)");
        int v = std::stoi(rest.substr(3));
        if (v < 1) throw std::invalid_argument("template parameter s must be >= 1");
        return v;
    };
    if (spec == "zy") {
        t.family = Family::ZhangYeung;
    } else if (spec == "ingleton") {
        t.family = Family::Ingleton;
    } else if (spec.rfind("matus1", 0) == 0) {
        t.family = Family::Matus1;
        t.s = s_of(spec.substr(6));
    } else if (spec.rfind("matus2", 0) == 0) {
        t.family = Family::Matus2;
        t.s = s_of(spec.substr(6));
    } else if (spec.rfind("file:", 0) == 0) {
        t.family = Family::Custom;
        t.source = spec.substr(5);
        std::ifstream f(t.source);
        if (!f) throw std::runtime_error("cannot open template file " + t.source);
        std::string line;
        VariableSet formal;
        bool have_vars = false, have_body = false;
        while (std::getline(f, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (line.rfind("vars:", 0) == 0) {
                std::istringstream is(line.substr(5));
                std::vector<std::string> names;
                std::string n;
                while (is >> n) names.push_back(n);
                if (names.size() != 4) throw std::invalid_argument("template file needs exactly four formal variables");
                formal = VariableSet(names);
                have_vars = true;
            } else {
                if (!have_vars) throw std::invalid_argument("template file: vars: line first");
                if (have_body) throw std::invalid_argument("template file holds a single inequality");
                t.custom = LinearConstraint::parse(formal, line);
                if (t.custom.rel != Relation::Geq) throw std::invalid_argument("template must be an inequality");
                have_body = true;
            }
        }
        if (!have_body) throw std::invalid_argument("template file has no inequality");
    } else {
        throw std::invalid_argument("unknown template " + spec);
    }
    return t;
}

std::string Template::name() const {
    switch (family) {
        case Family::ZhangYeung: return "zy";
        case Family::Matus1: return "matus1:s=" + std::to_string(s);
        case Family::Matus2: return "matus2:s=" + std::to_string(s);
        case Family::Ingleton: return "ingleton";
        case Family::Custom: return "file:" + source;
    }
    return "?";
}

Expr Template::lhs(Mask x1, Mask x2, Mask x3, Mask x4) const {
    const Rational S(s);
    switch (family) {
        case Family::ZhangYeung:
            return I(x1, x2, x3) + I(x1, x2, x4) + I(x3, x4) - I(x1, x2) + I(x1, x3, x2) + I(x2, x3, x1) + I(x1, x2, x3);
        case Family::Matus1: {
            Rational tri = S * (S + 1) / 2;
            return ingleton(x1, x2, x3, x4) * S + I(x1, x3, x2) + (I(x2, x3, x1) + I(x1, x2, x3)) * tri;
        }
        case Family::Matus2: {
            Rational tri = S * (S - 1) / 2;
            return ingleton(x1, x2, x3, x4) * S + (I(x2, x3, x1) + I(x1, x2, x3)) * S + I(x1, x3, x2) +
                   (I(x2, x4, x1) + I(x1, x2, x4)) * tri;
        }
        case Family::Ingleton:
            return ingleton(x1, x2, x3, x4);
        case Family::Custom: {
            const Mask slot[4] = {x1, x2, x3, x4};
            Expr e;
            for (const auto& [m, c] : custom.coeffs) {
                Mask img = 0;
                for (int i = 0; i < 4; ++i)
                    if (m >> i & 1) img |= slot[i];
                e.add(img, c);
            }
            return e;
        }
    }
    return {};
}

std::vector<Template> parse_templates(const std::string& list) {
    std::vector<Template> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(Template::parse(item));
    }
    return out;
}

LinearConstraint instantiate(const Template& t, const VariableSet& vars, const Slots& slots) {
    for (int i = 0; i < 4; ++i) {
        if (slots[static_cast<std::size_t>(i)] < 0 || slots[static_cast<std::size_t>(i)] >= vars.size())
            throw std::invalid_argument("template slot out of range");
        for (int j = 0; j < i; ++j)
            if (slots[static_cast<std::size_t>(i)] == slots[static_cast<std::size_t>(j)])
                throw std::invalid_argument("repeated variable " + vars.name(slots[static_cast<std::size_t>(i)]) +
                                            " in template assignment");
    }
    Mask m[4];
    std::string tag = t.name() + ":";
    for (int i = 0; i < 4; ++i) {
        m[i] = Mask{1} << slots[static_cast<std::size_t>(i)];
        tag += (i ? "," : "") + vars.name(slots[static_cast<std::size_t>(i)]);
    }
    return geq(vars, t.lhs(m[0], m[1], m[2], m[3]), tag).canonical();
}

std::vector<InstantiationPlan> all_instantiations(const Template& t, const VariableSet& vars, Mask within) {
    std::vector<InstantiationPlan> out;
    std::vector<int> el;
    for (int i = 0; i < vars.size(); ++i)
        if (within >> i & 1) el.push_back(i);
    for (int a : el)
        for (int b : el)
            for (int c : el)
                for (int d : el) {
                    if (a == b || a == c || a == d || b == c || b == d || c == d) continue;
                    InstantiationPlan p;
                    p.tmpl = t;
                    p.slots = {a, b, c, d};
                    p.constraint = instantiate(t, vars, p.slots);
                    out.push_back(std::move(p));
                }
    return out;
}

std::vector<InstantiationPlan> relevant_instantiations(const Template& t, const CausalStructure& c, bool include_pruned) {
    VariableSet vars = c.node_vars();
    auto plans = all_instantiations(t, vars, vars.full());
    std::vector<InstantiationPlan> out;
    static const int pairs[5][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}};
    for (auto& p : plans) {
        for (const auto& pr : pairs) {
            int a = p.slots[static_cast<std::size_t>(pr[0])], b = p.slots[static_cast<std::size_t>(pr[1])];
            if (c.d_separated(NodeMask{1} << a, NodeMask{1} << b, 0)) {
                p.relevant = false;
                p.reason = "I(" + vars.name(a) + ":" + vars.name(b) + ")=0";
                break;
            }
        }
        if (p.relevant || include_pruned) out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------- symmetry

std::vector<Permutation> group_closure(const std::vector<Permutation>& gens, int n) {
    Permutation id(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i)] = i;
    std::set<Permutation> seen{id};
    std::vector<Permutation> out{id};
    for (std::size_t k = 0; k < out.size(); ++k)
        for (const auto& g : gens) {
            if (static_cast<int>(g.size()) != n) throw std::invalid_argument("permutation has wrong size");
            Permutation h(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) h[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(out[k][static_cast<std::size_t>(i)])];
            if (seen.insert(h).second) out.push_back(h);
        }
    return out;
}

Mask permute_mask(Mask m, const Permutation& p) {
    Mask r = 0;
    while (m) {
        int i = __builtin_ctz(m);
        r |= Mask{1} << p.at(static_cast<std::size_t>(i));
        m &= m - 1;
    }
    return r;
}

std::vector<Permutation> restrict_group(const std::vector<Permutation>& node_perms, const VariableSet& nodes,
                                        const VariableSet& vars) {
    std::vector<Permutation> out;
    for (const auto& p : node_perms) {
        Permutation q(static_cast<std::size_t>(vars.size()));
        for (int i = 0; i < vars.size(); ++i) {
            int ni = nodes.index_of(vars.name(i));
            if (ni < 0) throw std::invalid_argument("restrict_group: unknown variable " + vars.name(i));
            int j = vars.index_of(nodes.name(p.at(static_cast<std::size_t>(ni))));
            if (j < 0) throw std::invalid_argument("permutation moves " + vars.name(i) + " outside the variable set");
            q[static_cast<std::size_t>(i)] = j;
        }
        out.push_back(q);
    }
    return out;
}

namespace {

IntVec dense_all(const LinearConstraint& c) {
    LinearConstraint k = c.canonical();
    IntVec v(k.vars.full(), 0);
    for (const auto& [m, q] : k.coeffs) v[m - 1] = q.get_num();
    return v;
}

LinearConstraint permuted(const LinearConstraint& c, const Permutation& p) {
    Expr e;
    for (const auto& [m, q] : c.coeffs) e.add(permute_mask(m, p), q);
    return LinearConstraint(c.vars, e, c.rel, c.provenance).canonical();
}

}  // namespace

std::vector<SymmetryClass> symmetry_classes(const std::vector<LinearConstraint>& constraints,
                                            const std::vector<Permutation>& group) {
    std::vector<SymmetryClass> out;
    std::map<std::pair<int, IntVec>, std::size_t> by_rep;
    std::set<std::pair<int, IntVec>> seen_inputs;
    std::size_t idx = 0;
    for (const auto& c0 : constraints) {
        LinearConstraint c = c0.canonical();
        if (c.is_zero()) continue;
        auto key_in = std::make_pair(static_cast<int>(c.rel), dense_all(c));
        if (!seen_inputs.insert(key_in).second) continue;
        for (const auto& g : group)
            if (static_cast<int>(g.size()) != c.vars.size())
                throw std::invalid_argument("symmetry permutation touches variables outside the constraint's set");
        std::set<IntVec> orbit;
        IntVec best;
        LinearConstraint best_c;
        for (const auto& g : group) {
            LinearConstraint pc = permuted(c, g);
            IntVec d = dense_all(pc);
            if (orbit.empty() || compare_lex(d, best) < 0) {
                best = d;
                best_c = pc;
            }
            orbit.insert(std::move(d));
        }
        if (group.empty()) {
            best = key_in.second;
            best_c = c;
            orbit.insert(best);
        }
        auto key = std::make_pair(static_cast<int>(c.rel), best);
        auto it = by_rep.find(key);
        if (it == by_rep.end()) {
            best_c.provenance = c.provenance;
            by_rep.emplace(key, out.size());
            out.push_back({best_c, orbit.size(), {idx}});
        } else {
            out[it->second].members.push_back(idx);
        }
        ++idx;
    }
    return out;
}

std::vector<RayClass> ray_classes(const std::vector<Mask>& coords, const std::vector<IntVec>& rays,
                                  const std::vector<Permutation>& group) {
    std::map<Mask, std::size_t> pos;
    for (std::size_t i = 0; i < coords.size(); ++i) pos[coords[i]] = i;
    std::vector<RayClass> out;
    std::map<IntVec, std::size_t> by_rep;
    for (std::size_t r = 0; r < rays.size(); ++r) {
        IntVec best = rays[r];
        for (const auto& g : group) {
            IntVec img(coords.size());
            for (std::size_t i = 0; i < coords.size(); ++i) {
                auto it = pos.find(permute_mask(coords[i], g));
                if (it == pos.end()) throw std::invalid_argument("ray_classes: group does not preserve the coordinates");
                img[it->second] = rays[r][i];
            }
            if (compare_lex(img, best) < 0) best = img;
        }
        auto it = by_rep.find(best);
        if (it == by_rep.end()) {
            by_rep.emplace(best, out.size());
            out.push_back({best, {r}});
        } else {
            out[it->second].members.push_back(r);
        }
    }
    return out;
}

}  // namespace entcone
