#include "entcone/causal.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace entcone {

namespace {

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

int bit_count(NodeMask m) { return __builtin_popcount(m); }

template <class F>
void for_each_bit(std::uint32_t m, F f) {
    while (m) {
        int i = __builtin_ctz(m);
        f(i);
        m &= m - 1;
    }
}

template <class F>
void for_each_submask(std::uint32_t m, F f) {
    for (std::uint32_t s = m; s; s = (s - 1) & m) f(s);
}

}  // namespace

// ---------------------------------------------------------------- DSL

void CausalStructure::add_node(const std::string& name, NodeKind kind) {
    if (index_of(name) >= 0) throw std::invalid_argument("duplicate node " + name);
    if (names_.size() >= 30) throw std::invalid_argument("at most 30 nodes are supported");
    names_.push_back(name);
    kinds_.push_back(kind);
    parents_.push_back(0);
    children_.push_back(0);
}

void CausalStructure::add_edge(int from, int to) {
    if (from == to) throw std::invalid_argument("self loop on " + names_[static_cast<std::size_t>(from)]);
    parents_[static_cast<std::size_t>(to)] |= NodeMask{1} << from;
    children_[static_cast<std::size_t>(from)] |= NodeMask{1} << to;
}

void CausalStructure::finish() {
    const std::size_t n = names_.size();
    // Kahn order doubles as the cycle check.
    std::vector<int> indeg(n), order;
    for (std::size_t i = 0; i < n; ++i) indeg[i] = bit_count(parents_[i]);
    std::vector<int> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (!indeg[i]) ready.push_back(static_cast<int>(i));
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for_each_bit(children_[static_cast<std::size_t>(v)], [&](int c) {
            if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
        });
    }
    if (order.size() != n) throw std::invalid_argument("causal structure contains a directed cycle");
    anc_.assign(n, 0);
    desc_.assign(n, 0);
    for (int v : order)
        for_each_bit(parents_[static_cast<std::size_t>(v)],
                     [&](int p) { anc_[static_cast<std::size_t>(v)] |= anc_[static_cast<std::size_t>(p)] | (NodeMask{1} << p); });
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for_each_bit(children_[static_cast<std::size_t>(*it)], [&](int c) {
            desc_[static_cast<std::size_t>(*it)] |= desc_[static_cast<std::size_t>(c)] | (NodeMask{1} << c);
        });
}

CausalStructure CausalStructure::parse(std::string_view text) {
    CausalStructure c;
    std::istringstream is{std::string(text)};
    std::string line;
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::string> sym_lines;
    std::vector<std::vector<std::string>> excl;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto tok = tokens(line);
        if (tok.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": " + why);
        };
        if (tok[0] == "node") {
            if (tok.size() != 3) fail("expected: node <name> <observed|classical|quantum>");
            NodeKind k;
            if (tok[2] == "observed") k = NodeKind::Observed;
            else if (tok[2] == "classical") k = NodeKind::Classical;
            else if (tok[2] == "quantum") k = NodeKind::Quantum;
            else fail("unknown node kind " + tok[2]);
            c.add_node(tok[1], k);
        } else if (tok[0] == "edge") {
            if (tok.size() != 4 || tok[2] != "->") fail("expected: edge <A> -> <B>");
            edges.emplace_back(tok[1], tok[3]);
        } else if (tok[0] == "symmetry") {
            sym_lines.push_back(line.substr(line.find("symmetry") + 8));
        } else if (tok[0] == "post_select") {
            for (std::size_t i = 1; i < tok.size(); ++i) c.post_select_.push_back(tok[i]);
        } else if (tok[0] == "exclusive") {
            if (tok.size() < 3) fail("exclusive needs at least two nodes");
            excl.emplace_back(tok.begin() + 1, tok.end());
        } else {
            fail("unknown directive " + tok[0]);
        }
    }
    if (c.names_.empty()) throw std::invalid_argument("scenario has no nodes");
    for (const auto& [a, b] : edges) c.add_edge(c.require(a), c.require(b));
    c.finish();
    for (const auto& s : sym_lines) {
        std::vector<int> perm(c.names_.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
        std::string body = s;
        std::size_t pos = 0;
        while ((pos = body.find('(', pos)) != std::string::npos) {
            auto end = body.find(')', pos);
            if (end == std::string::npos) throw std::invalid_argument("unbalanced parenthesis in symmetry");
            auto cyc = tokens(body.substr(pos + 1, end - pos - 1));
            std::vector<int> idx;
            for (const auto& n : cyc) idx.push_back(c.require(n));
            for (std::size_t i = 0; i < idx.size(); ++i) perm[static_cast<std::size_t>(idx[i])] = idx[(i + 1) % idx.size()];
            pos = end + 1;
        }
        // Kinds must be preserved. The graph itself need not be: an edge X0 -> X1 between
        // two observed roots still leaves their marginal cone symmetric.
        for (int i = 0; i < c.size(); ++i)
            if (c.kind(i) != c.kind(perm[static_cast<std::size_t>(i)]))
                throw std::invalid_argument("symmetry maps " + c.name(i) + " to a node of another kind");
        c.symmetries_.push_back(perm);
    }
    for (const auto& g : excl) {
        NodeMask m = 0;
        for (const auto& n : g) {
            int i = c.require(n);
            if (c.kind(i) != NodeKind::Observed) throw std::invalid_argument("exclusive nodes must be observed: " + n);
            m |= NodeMask{1} << i;
        }
        c.exclusive_.push_back(m);
    }
    return c;
}

CausalStructure CausalStructure::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

int CausalStructure::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

int CausalStructure::require(std::string_view name) const {
    int i = index_of(name);
    if (i < 0) throw std::invalid_argument("unknown node " + std::string(name));
    return i;
}

NodeMask CausalStructure::ancestors(int i) const { return anc_.at(static_cast<std::size_t>(i)); }
NodeMask CausalStructure::descendants(int i) const { return desc_.at(static_cast<std::size_t>(i)); }

NodeMask CausalStructure::roots_above(int i) const {
    NodeMask m = ancestors(i) | (NodeMask{1} << i);
    NodeMask r = 0;
    for_each_bit(m, [&](int j) {
        if (!parents(j)) r |= NodeMask{1} << j;
    });
    return r;
}

NodeMask CausalStructure::observed() const {
    NodeMask m = 0;
    for (int i = 0; i < size(); ++i)
        if (kind(i) == NodeKind::Observed) m |= NodeMask{1} << i;
    return m;
}

NodeMask CausalStructure::mask_of(const std::vector<std::string>& names) const {
    NodeMask m = 0;
    for (const auto& n : names) m |= NodeMask{1} << require(n);
    return m;
}

VariableSet CausalStructure::observed_vars() const {
    std::vector<std::string> v;
    for (int i = 0; i < size(); ++i)
        if (kind(i) == NodeKind::Observed) v.push_back(name(i));
    return VariableSet(v);
}

CausalStructure CausalStructure::retagged(const std::map<std::string, NodeKind>& kinds) const {
    CausalStructure c = *this;
    for (const auto& [n, k] : kinds) {
        int i = require(n);
        if ((kind(i) == NodeKind::Observed) != (k == NodeKind::Observed))
            throw std::invalid_argument("cannot change whether " + n + " is observed");
        c.kinds_[static_cast<std::size_t>(i)] = k;
    }
    return c;
}

void CausalStructure::check_two_generation() const {
    for (int i = 0; i < size(); ++i)
        if (kind(i) != NodeKind::Observed && parents(i))
            throw std::invalid_argument("hidden node " + name(i) + " has parents; quantum mode needs parentless sources");
}

// Moralized ancestral graph, then plain reachability avoiding `given`.
bool CausalStructure::d_separated(NodeMask s, NodeMask t, NodeMask given) const {
    if ((s & t) || (s & given) || (t & given)) throw std::invalid_argument("d_separated: sets must be disjoint");
    NodeMask keep = s | t | given;
    for_each_bit(s | t | given, [&](int i) { keep |= ancestors(i); });
    const std::size_t n = names_.size();
    std::vector<NodeMask> adj(n, 0);
    for_each_bit(keep, [&](int v) {
        NodeMask pa = parents(v) & keep;
        adj[static_cast<std::size_t>(v)] |= pa;
        for_each_bit(pa, [&](int p) {
            adj[static_cast<std::size_t>(p)] |= NodeMask{1} << v;
            adj[static_cast<std::size_t>(p)] |= pa & ~(NodeMask{1} << p);
        });
    });
    NodeMask seen = s, frontier = s;
    while (frontier) {
        NodeMask next = 0;
        for_each_bit(frontier, [&](int v) { next |= adj[static_cast<std::size_t>(v)]; });
        next &= keep & ~given & ~seen;
        if (next & t) return false;
        seen |= next;
        frontier = next;
    }
    return true;
}

std::vector<LinearConstraint> CausalStructure::ci_constraints() const {
    std::vector<LinearConstraint> out;
    VariableSet vars = node_vars();
    for (int i = 0; i < size(); ++i) {
        NodeMask self = NodeMask{1} << i;
        NodeMask nd = all() & ~descendants(i) & ~self & ~parents(i);
        if (!nd) continue;
        out.push_back(eq(vars, I(self, nd, parents(i)), "ci:" + name(i)).canonical());
    }
    return out;
}

// ---------------------------------------------------------------- quantum layout

int SubsystemLayout::system_of_node(int node) const {
    for (std::size_t s = 0; s < systems.size(); ++s)
        if (systems[s].node == node && systems[s].consumers == 0) return static_cast<int>(s);
    return -1;
}

SubsystemLayout subsystem_layout(const CausalStructure& c) {
    c.check_two_generation();
    SubsystemLayout L;
    for (int i = 0; i < c.size(); ++i) {
        if (c.kind(i) == NodeKind::Quantum) {
            // Alternative measurements (exclusive children) act on one shared subsystem.
            NodeMask left = c.children(i);
            while (left) {
                int ch = __builtin_ctz(left);
                NodeMask group = NodeMask{1} << ch;
                for (NodeMask g : c.exclusive_groups())
                    if (g >> ch & 1) group |= g & c.children(i);
                left &= ~group;
                L.systems.push_back({c.name(i) + "_" + c.name(ch), false, i, group});
            }
        } else {
            L.systems.push_back({c.name(i), true, i, 0});
        }
    }
    std::vector<std::string> names;
    for (const auto& s : L.systems) names.push_back(s.name);
    L.vars = VariableSet(names);
    for (std::size_t s = 0; s < L.systems.size(); ++s) {
        const auto& sys = L.systems[s];
        if (sys.consumers) continue;
        if (c.kind(sys.node) == NodeKind::Observed) L.observed_mask |= Mask{1} << s;
        L.classical_mask |= Mask{1} << s;
    }
    for (int v = 0; v < c.size(); ++v) {
        if (c.kind(v) != NodeKind::Observed) continue;
        Mask in = 0, cl = 0;
        for (std::size_t s = 0; s < L.systems.size(); ++s) {
            const auto& sys = L.systems[s];
            bool feeds = sys.consumers ? (sys.consumers >> v & 1) : (c.parents(v) >> sys.node & 1);
            if (!feeds) continue;
            in |= Mask{1} << s;
            if (sys.classical) cl |= Mask{1} << s;
        }
        L.inputs[v] = in;
        L.classical_inputs[v] = cl;
    }
    return L;
}

namespace {

// Quantum subsystems consumed on the way to a system.
Mask quantum_ancestors(const CausalStructure& c, const SubsystemLayout& L, int sys) {
    const auto& s = L.systems[static_cast<std::size_t>(sys)];
    if (s.consumers || c.kind(s.node) != NodeKind::Observed) return 0;
    NodeMask nodes = c.ancestors(s.node) | (NodeMask{1} << s.node);
    Mask q = 0;
    for (std::size_t t = 0; t < L.systems.size(); ++t)
        if (L.systems[t].consumers & nodes) q |= Mask{1} << t;
    return q;
}

}  // namespace

bool coexist(const CausalStructure& c, const SubsystemLayout& L, int a, int b) {
    if (a == b) return true;
    if (quantum_ancestors(c, L, a) >> b & 1) return false;
    if (quantum_ancestors(c, L, b) >> a & 1) return false;
    const auto& sa = L.systems[static_cast<std::size_t>(a)];
    const auto& sb = L.systems[static_cast<std::size_t>(b)];
    if (!sa.consumers && !sb.consumers)
        for (NodeMask g : c.exclusive_groups())
            if ((g >> sa.node & 1) && (g >> sb.node & 1)) return false;
    return true;
}

std::vector<Mask> coexisting_sets(const CausalStructure& c, const SubsystemLayout& L) {
    const int n = L.vars.size();
    std::vector<Mask> adj(static_cast<std::size_t>(n), 0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b && coexist(c, L, a, b)) adj[static_cast<std::size_t>(a)] |= Mask{1} << b;
    // Bron-Kerbosch with pivoting.
    std::vector<Mask> out;
    auto bk = [&](auto&& self, Mask r, Mask p, Mask x) -> void {
        if (!p && !x) {
            out.push_back(r);
            return;
        }
        int u = __builtin_ctz(p | x);
        Mask cand = p & ~adj[static_cast<std::size_t>(u)];
        for_each_bit(cand, [&](int v) {
            Mask bit = Mask{1} << v;
            if (!(p & bit)) return;
            self(self, r | bit, p & adj[static_cast<std::size_t>(v)], x & adj[static_cast<std::size_t>(v)]);
            p &= ~bit;
            x |= bit;
        });
    };
    bk(bk, 0, L.vars.full(), 0);
    std::sort(out.begin(), out.end());
    return out;
}

NodeMask system_roots(const CausalStructure& c, const SubsystemLayout& L, int sys) {
    const auto& s = L.systems[static_cast<std::size_t>(sys)];
    if (s.consumers) return NodeMask{1} << s.node;
    return c.roots_above(s.node);
}

std::vector<IndependentPair> no_shared_ancestor_pairs(const CausalStructure& c, const SubsystemLayout& L,
                                                      const std::vector<Mask>& sets, bool conditional) {
    std::vector<IndependentPair> out;
    std::set<std::tuple<Mask, Mask, Mask>> seen;
    const int n = L.vars.size();
    std::vector<NodeMask> roots(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) roots[static_cast<std::size_t>(s)] = system_roots(c, L, s);
    for (Mask S : sets) {
        // Classical hidden sources in S may be conditioned on.
        Mask sources = 0;
        for_each_bit(S, [&](int s) {
            const auto& sys = L.systems[static_cast<std::size_t>(s)];
            if (sys.classical && c.kind(sys.node) == NodeKind::Classical) sources |= Mask{1} << s;
        });
        Mask V = 0;
        do {
            NodeMask vroots = 0;
            for_each_bit(V, [&](int s) { vroots |= NodeMask{1} << L.systems[static_cast<std::size_t>(s)].node; });
            // Removing systems can split a component, so every subset of S \ V is examined.
            for_each_submask(S & ~V, [&](Mask R) {
            if (popcount(R) < 2) return;
            std::vector<Mask> comps;
            Mask left = R;
            while (left) {
                Mask comp = Mask{1} << __builtin_ctz(left);
                NodeMask cr = roots[static_cast<std::size_t>(__builtin_ctz(left))] & ~vroots;
                bool grew = true;
                while (grew) {
                    grew = false;
                    for_each_bit(left & ~comp, [&](int s) {
                        if (roots[static_cast<std::size_t>(s)] & cr) {
                            comp |= Mask{1} << s;
                            cr |= roots[static_cast<std::size_t>(s)] & ~vroots;
                            grew = true;
                        }
                    });
                }
                comps.push_back(comp);
                left &= ~comp;
            }
            const std::size_t k = comps.size();
            if (k >= 2 && k < 20) {
                // Bipartitions with the last component fixed on the second side.
                for (std::uint32_t pick = 1; pick < (1u << (k - 1)); ++pick) {
                    Mask T = 0, U = 0;
                    for (std::size_t i = 0; i < k; ++i) ((pick >> i & 1) ? T : U) |= comps[i];
                    if (T > U) std::swap(T, U);
                    if (seen.insert({T, U, V}).second) out.push_back({T, U, V});
                }
            }
            });
            if (!conditional) break;
            V = (V - sources) & sources;
        } while (V);
    }
    return out;
}

}  // namespace entcone
