#include "report.hpp"

#include "entcone/catalog.hpp"
#include "entcone/distribution.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>

namespace entcone::cli {

namespace {

std::vector<std::string> strings(const json& j) {
    std::vector<std::string> out;
    if (j.is_array())
        for (const auto& s : j) out.push_back(s.get<std::string>());
    return out;
}

IntVec from_graded(const Cone& c, const IntVec& g) {
    IntVec r(c.dim(), 0);
    auto order = graded_order(c.vars.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        int k = c.index_of(order[i]);
        if (k < 0) throw std::invalid_argument("graded vector does not fit the cone space");
        r[static_cast<std::size_t>(k)] = g[i];
    }
    return r;
}

std::vector<double> graded_real(const EntropyVector& h) { return h.real_in(graded_order(h.vars().size())); }

std::string show(const std::vector<double>& g, int prec = 3) {
    std::vector<std::string> s;
    for (double x : g) s.push_back(fmt(x, prec));
    return "(" + join(s, ", ") + ")";
}

// Non-elemental rows of a reduced marginal, grouped into symmetry classes.
std::vector<SymmetryClass> classes_of(const Cone& reduced, const std::vector<Permutation>& group) {
    return symmetry_classes(reduced.inequalities(), group);
}

std::string orbit_sizes(const std::vector<SymmetryClass>& cs) {
    std::multiset<std::size_t> s;
    for (const auto& c : cs) s.insert(c.orbit_size);
    std::vector<std::string> parts;
    for (auto x : s) parts.push_back(std::to_string(x));
    return join(parts, ",");
}

// Inequalities of `c` that are not implied by the elemental Shannon inequalities.
std::vector<LinearConstraint> beyond_shannon(const Cone& c) {
    Cone base = with_coords(shannon_plus(c.vars, {}), c.coords);
    for (const auto& e : c.eqs) base.add_eq(e);
    std::vector<LinearConstraint> out;
    for (const auto& row : reduce(c).ineqs)
        if (!implies(base, row).holds) out.push_back(c.constraint(row, Relation::Geq));
    return out;
}

bool same_rows(const std::vector<LinearConstraint>& a, const std::vector<LinearConstraint>& b) {
    std::set<std::string> x, y;
    for (const auto& k : a) x.insert(k.canonical().to_text());
    for (const auto& k : b) y.insert(k.canonical().to_text());
    return x == y;
}

std::vector<std::string> texts(const std::vector<LinearConstraint>& ks) {
    std::vector<std::string> out;
    for (const auto& k : ks) out.push_back(k.to_text());
    return out;
}

// Expected cone over the observed variables: Shannon plus listed orbits and single rows.
Cone expected_cone(const CausalStructure& c, const json& spec) {
    VariableSet v = c.observed_vars();
    auto extra = parse_rows(v, strings(spec.value("orbits", json::array())), observed_group(c));
    for (const auto& k : parse_rows(v, strings(spec.value("rows", json::array())))) extra.push_back(k);
    return shannon_plus(v, extra);
}

void compare_cone(Report& r, const std::string& label, const std::string& anchor, const Cone& got0,
                  const Cone& want) {
    Cone got = with_coords(got0, want.coords);
    std::string why;
    bool eq = certified_equal(got, want, &why);
    auto extra = beyond_shannon(got);
    auto listed = beyond_shannon(want);
    r.check(eq && same_rows(extra, listed), label, anchor,
            std::to_string(extra.size()) + " non-Shannon inequalities" + (why.empty() ? "" : "; " + why));
    r.data[label] = texts(extra);
}

std::size_t fixture_report(Report& r, const std::string& label, const std::string& anchor, const FixtureSet& fx,
                           const CausalStructure& dag) {
    std::size_t ok = 0, total = 0;
    for (const auto& k : verify_fixtures(fx, dag)) {
        if (!k.has_strategy) continue;
        ++total;
        ok += k.reproduced;
        if (!k.reproduced) r.note("ray " + std::to_string(k.index) + ": " + k.detail);
    }
    r.check(ok == total, label, anchor,
            std::to_string(ok) + "/" + std::to_string(total) + " strategies reproduce their ray exactly");
    return ok;
}

// ------------------------------------------------------------ suites

void triangle_shannon(Report& r, const Context& ctx, const json& spec) {
    auto tri = load_scenario(spec["scenario"]);
    auto m = reduce(marginalize_with(build_classical_outer(tri), ctx, "triangle-shannon").cone);
    std::string anchor = spec["anchor"];
    compare_cone(r, "classical outer marginal", anchor, m, expected_cone(tri, spec));
    Cone extra_only(m.vars, m.coords);
    for (const auto& k : beyond_shannon(m)) extra_only.add(k);
    auto cs = classes_of(extra_only, observed_group(tri));
    std::vector<std::size_t> sizes;
    for (const auto& c : cs) sizes.push_back(c.orbit_size);
    std::sort(sizes.begin(), sizes.end());
    auto want = spec["orbit_sizes"].get<std::vector<std::size_t>>();
    r.check(sizes == want && m.eqs.empty(), "non-Shannon classes", anchor,
            std::to_string(cs.size()) + " classes (orbit sizes " + orbit_sizes(cs) + "), " +
                std::to_string(extra_only.ineqs.size()) + " inequalities");
}

void triangle_inner(Report& r, const Context& ctx, const json& spec) {
    auto tri = load_scenario(spec["scenario"]);
    std::string anchor = spec["anchor"];
    auto inner = build_classical_inner(tri, InnerMode::IngletonPre, ctx.fm()).cone;
    compare_cone(r, "Ingleton inner cone", anchor, inner, expected_cone(tri, spec));
    Cone dd = double_description(inner);
    auto fx = FixtureSet::load(data_path(spec["fixtures"]));
    std::set<IntVec> got(dd.rays->begin(), dd.rays->end()), listed;
    for (const auto& f : fx.rays) listed.insert(from_graded(dd, f.values));
    r.check(got == listed && got.size() == spec["rays"].get<std::size_t>(), "extremal rays", anchor,
            std::to_string(got.size()) + " rays, listed ones " + (got == listed ? "matched" : "not matched"));
    fixture_report(r, "achieving strategies", anchor, fx, tri);
}

void triangle_families(Report& r, const Context&, const json& spec) {
    auto tri = load_scenario(spec["scenario"]);
    VariableSet nodes = tri.node_vars();
    VariableSet obs = tri.observed_vars();
    auto group = observed_group(tri);
    std::string anchor = spec["anchor"];
    auto base = build_classical_outer(tri).cone;
    for (const auto& [fam, by_s] : spec["rows"].items()) {
        std::size_t ok = 0, total = 0;
        for (const auto& [s, text] : by_s.items()) {
            std::vector<Template> ts;
            for (const auto& name : spec["templates"][fam]) ts.push_back(Template::parse(name.get<std::string>() + ":s=" + s));
            auto full = build_classical_outer(tri, ts).cone;
            for (const auto& k : parse_rows(obs, {text.get<std::string>()}, group)) {
                Expr e;
                for (const auto& [m, c] : k.coeffs) e.add(nodes.embed(m, obs), c);
                auto imp = implies(full, LinearConstraint(nodes, e, Relation::Geq));
                ++total;
                ok += imp.holds && verify_certificate(full, imp.certificate);
            }
        }
        r.check(ok == total, fam + " for s = 1..4 and every relabelling", anchor,
                std::to_string(ok) + "/" + std::to_string(total) + " implied with verified certificates");
    }
    auto k1 = LinearConstraint::parse(obs, spec["rows"]["family1"]["1"].get<std::string>());
    Expr e;
    for (const auto& [m, c] : k1.coeffs) e.add(nodes.embed(m, obs), c);
    r.check(!implies(base, LinearConstraint(nodes, e, Relation::Geq)).holds, "first family is beyond Shannon",
            anchor, "s=1 is not implied by Shannon and the independences alone");
}

void fig3(Report& r, const Context& ctx, const json& spec) {
    std::string anchor = spec["anchor"];
    for (const auto& [name, s] : spec["structures"].items()) {
        auto dag = load_scenario(name);
        auto cl = reduce(marginalize_with(build_classical_outer(dag), ctx, "fig3-" + name).cone);
        auto q = marginalize_with(build_quantum_outer(interpret(dag, "quantum")), ctx, "fig3-q-" + name).cone;
        auto inner = build_classical_inner(dag, InnerMode::IngletonPre, ctx.fm()).cone;
        VariableSet v = dag.observed_vars();
        Cone want;
        if (s.contains("fixtures")) {
            auto fx = FixtureSet::load(data_path(s["fixtures"]));
            std::vector<IntVec> rays;
            Cone probe(v, cl.coords);
            for (const auto& f : fx.rays) rays.push_back(from_graded(probe, f.values));
            want = hull_of_rays(v, cl.coords, rays);
            fixture_report(r, name + ": achieving strategies", anchor, fx, dag);
            r.check(rays.size() == s["rays"].get<std::size_t>(), name + ": listed rays", anchor,
                    std::to_string(rays.size()) + " rays");
        } else {
            auto extra = parse_rows(v, strings(s.value("ineq", json::array())));
            for (const auto& k : parse_rows(v, strings(s.value("eq", json::array())))) extra.push_back(k);
            want = with_coords(shannon_plus(v, extra), cl.coords);
        }
        std::string w1, w2, w3;
        bool a = certified_equal(cl, want, &w1);
        bool b = certified_equal(with_coords(q, cl.coords), want, &w2);
        bool c = certified_equal(with_coords(inner, cl.coords), want, &w3);
        std::vector<std::string> why;
        for (const auto& w : {w1, w2, w3})
            if (!w.empty()) why.push_back(w);
        r.check(a && b && c, name + ": classical outer = quantum outer = Ingleton inner = expected", anchor,
                join(why, "; "));
    }
}

void ic_shannon(Report& r, const Context& ctx, const json& spec) {
    auto ic = load_scenario(spec["scenario"]);
    std::string anchor = spec["anchor"];
    auto group = observed_group(ic);
    auto sh = reduce(marginalize_with(build_classical_outer(ic), ctx, "ic-shannon").cone);
    Cone sdd = double_description(sh);
    r.check(sh.ineqs.size() == spec["shannon_inequalities"].get<std::size_t>() &&
                sdd.rays->size() == spec["shannon_rays"].get<std::size_t>(),
            "Shannon marginal", anchor,
            std::to_string(sh.ineqs.size()) + " inequalities, " + std::to_string(sdd.rays->size()) + " rays");
    auto inner = build_classical_inner(ic, InnerMode::IngletonPre, ctx.fm()).cone;
    Cone dd = double_description(inner);
    auto classes = ray_classes(dd.coords, *dd.rays, group);
    r.check(dd.rays->size() == spec["inner_rays"].get<std::size_t>() &&
                classes.size() == spec["inner_orbits"].get<std::size_t>(),
            "Ingleton inner cone", anchor,
            std::to_string(dd.rays->size()) + " rays in " + std::to_string(classes.size()) + " orbits");
    auto fx = FixtureSet::load(data_path(spec["fixtures"]));
    fixture_report(r, "achieving strategies", anchor, fx, ic);
    std::size_t outer = 0, outside = 0;
    for (const auto& f : fx.rays) {
        if (!f.outer) continue;
        ++outer;
        outside += !member(inner, to_rational(from_graded(inner, f.values))).inside;
    }
    r.check(outer == outside, "rays listed as not achievable lie outside the inner cone", anchor,
            std::to_string(outside) + "/" + std::to_string(outer));
}

std::pair<Cone, CausalStructure> hybrid_cone(const Context& ctx, const CausalStructure& tri, const std::string& mode,
                                             const std::vector<std::string>& instances, const std::string& tag) {
    auto dag = interpret(tri, mode);
    auto full = build_quantum_outer(dag);
    if (!instances.empty()) {
        std::vector<TemplateInstance> ti;
        for (const auto& s : instances) ti.push_back(parse_instance(s, Template::parse("zy")));
        full = augment_hybrid(full, ti);
    }
    return {marginalize_with(full, ctx, tag).cone, dag};
}

void quantum_triangle(Report& r, const Context& ctx, const json& spec) {
    auto tri = load_scenario(spec["scenario"]);
    auto [q, dag] = hybrid_cone(ctx, tri, "quantum", {}, "quantum-triangle");
    compare_cone(r, "quantum triangle marginal", spec["anchor"], q, expected_cone(tri, spec));
}

void hybrid(Report& r, const Context& ctx, const json& spec) {
    auto tri = load_scenario(spec["scenario"]);
    std::string anchor = spec["anchor"];
    int n = 0;
    for (const auto& cs : spec["cases"]) {
        std::string mode = cs["mode"];
        auto inst = strings(cs["instances"]);
        std::string label = mode + (inst.empty() ? "" : " + ZY(" + join(inst, "), ZY(") + ")");
        auto [got, dag] = hybrid_cone(ctx, tri, mode, inst, "hybrid-" + std::to_string(n++));
        Cone want = expected_cone(tri, cs);
        compare_cone(r, label, anchor, got, want);
        if (cs.contains("redundant")) {
            Cone red = reduce(with_coords(got, want.coords));
            std::set<IntVec> kept(red.ineqs.begin(), red.ineqs.end());
            bool ok = true;
            for (const auto& k : parse_rows(tri.observed_vars(), strings(cs["redundant"]))) {
                IntVec row = red.dense(k);
                ok = ok && !kept.count(row) && implies(red, row).holds;
            }
            r.check(ok, label + ": earlier pair is implied and redundant", anchor);
        }
    }
}

void appendix_a(Report& r, const Context&, const json& spec) {
    auto tri = load_scenario(spec["scenario"]);
    std::string anchor = spec["anchor"];
    auto d = JointDistribution::load(data_path(spec["distribution"]));
    auto h = entropy_vector(d);
    RatVec want;
    for (const auto& x : spec["vector"]) want.push_back(Rational(x.get<long>()));
    r.check(h.is_exact() && h.exact_in(graded_order(3)) == want, "entropy vector", anchor,
            show(graded_real(h), 6));
    auto p = postprocess(d, parse_map_spec(spec["post"].get<std::string>(), d));
    auto hp = entropy_vector(p);
    bool perfect = hp.is_exact();
    for (Mask m = 1; m < 8 && perfect; ++m) perfect = hp.q(m) == 1;
    for (std::size_t i = 0; i < p.size() && perfect; ++i) {
        auto o = p.outcome(i);
        perfect = p.q(i) == ((o[0] == o[1] && o[1] == o[2]) ? Rational(1, 2) : Rational(0));
    }
    r.check(perfect, "parity map gives perfect correlations", anchor, show(graded_real(hp), 6));
    auto cat = load_catalog();
    Cone shannon = expected_cone(tri, cat["triangle-shannon"]);
    auto k = LinearConstraint::parse(h.vars(), spec["excluded_by"].get<std::string>());
    auto val = evaluate(k, h);
    r.check(member(shannon, h, 0.0).inside && val.q < 0, "inside the Shannon marginal, cut off by the first family",
            anchor, "family value " + val.q.get_str());
}

void fritz(Report& r, const Context&, const json& spec) {
    std::string anchor = spec["anchor"];
    double tol = spec["tolerance"];
    std::vector<double> v1 = spec["v1"];
    double target = spec["interaction"];
    double chsh = chsh_value(chsh_table());
    r.check(std::fabs(chsh - spec["chsh"].get<double>()) <= 1e-9, "CHSH value", anchor, fmt(chsh, 12));
    auto tri = load_scenario(spec["scenario"]);
    auto cat = load_catalog();
    Cone gi = expected_cone(tri, cat["triangle-inner"]);
    auto base = fritz_distribution();
    base.validate();
    auto hb = entropy_vector(base);
    r.check(member(gi, hb, 1e-9).inside, "base construction inside the Ingleton inner cone", anchor,
            show(graded_real(hb)));
    auto inter = [](const std::vector<double>& g) { return g[0] + g[1] + g[2] - g[3] - g[4] - g[5] + g[6]; };
    auto near = [&](const std::vector<double>& g) {
        bool ok = std::fabs(inter(g) - target) <= tol;
        for (std::size_t i = 0; i < g.size(); ++i) ok = ok && std::fabs(g[i] - v1[i]) <= tol;
        return ok;
    };
    for (bool relabel : {false, true}) {
        auto d = fritz_distribution(relabel);
        auto g = graded_real(entropy_vector(postprocess(d, parse_map_spec(spec["post"].get<std::string>(), d))));
        r.check(near(g), std::string("quantum post-processing") + (relabel ? " (relabelled second outcome)" : ""),
                anchor, show(g) + ", I(X:Y:Z) = " + fmt(inter(g), 3));
    }
    std::string ref = spec["classical"];
    auto hash = ref.find('#');
    auto fx = FixtureSet::load(data_path(ref.substr(0, hash)));
    auto joint = run_strategy(fx.strategies.at(ref.substr(hash + 1)), tri);
    auto hv = entropy_vector(joint.marginal({"X", "Y", "Z"}));
    auto g = graded_real(hv);
    r.check(near(g) && !member(gi, hv, 1e-9).inside, "classical AND/AND/OR strategy outside the inner cone", anchor,
            show(g) + ", I(X:Y:Z) = " + fmt(inter(g), 3));
}

void solid_angles(Report& r, const Context& ctx, const json& spec) {
    auto tri = load_scenario(spec["scenario"]);
    std::string anchor = spec["anchor"];
    std::uint64_t n = ctx.samples ? ctx.samples : spec["samples"].get<std::uint64_t>();
    Cone outer = marginalize_with(build_classical_outer(tri), ctx, "solid-angle").cone;
    Cone inner = build_classical_inner(tri, InnerMode::IngletonPre, ctx.fm()).cone;
    for (const auto& [label, cone, key] : {std::tuple{"Shannon outer", &outer, "outer"},
                                           std::tuple{"Ingleton inner", &inner, "inner"}}) {
        auto e = solid_angle(*cone, n, ctx.seed, ctx.workers);
        auto band = spec[key].get<std::vector<double>>();
        r.check(std::fabs(e.alpha - band[0]) <= band[1], label, anchor,
                "(" + fmt(e.alpha * 1e5, 5) + " +- " + fmt(e.standard_error * 1e5, 2) + ")e-5 from " +
                    std::to_string(e.hits) + "/" + std::to_string(e.samples) + ", expected (" +
                    fmt(band[0] * 1e5, 4) + " +- " + fmt(band[1] * 1e5, 2) + ")e-5");
        r.data[key] = {{"hits", e.hits}, {"samples", e.samples}, {"alpha", e.alpha}, {"se", e.standard_error}};
    }
}

// Long runs: class counts of a template-tightened marginal.
void stretch(Report& r, const Context& ctx, const json& spec, const std::string& suite) {
    auto dag = load_scenario(spec["scenario"]);
    std::string anchor = spec["anchor"];
    std::string list = spec["templates"];
    if (!ctx.templates.empty()) list += "," + ctx.templates;
    if (spec.contains("note")) r.note(spec["note"].get<std::string>());
    std::cerr << "warning: " << suite << " is a long run (hours or more); use --checkpoint to resume\n";
    auto group = observed_group(dag);
    auto shannon = reduce(marginalize_with(build_classical_outer(dag), ctx, suite + "-shannon").cone);
    auto tight = reduce(marginalize_with(build_classical_outer(dag, parse_templates(list)), ctx, suite).cone);
    auto classes = classes_of(tight, group);
    std::size_t fresh = 0;
    for (const auto& c : classes) fresh += !implies(shannon, c.representative).holds;
    r.check(classes.size() == spec["classes"].get<std::size_t>(), "inequality classes", anchor,
            std::to_string(classes.size()) + " classes, " + std::to_string(fresh) + " beyond the Shannon marginal");
    if (spec.contains("new_classes"))
        r.check(fresh == spec["new_classes"].get<std::size_t>(), "classes beyond the Shannon marginal", anchor,
                std::to_string(fresh));
    if (spec.contains("shannon_classes")) {
        auto sc = classes_of(shannon, group);
        r.check(sc.size() == spec["shannon_classes"].get<std::size_t>(), "Shannon-only classes", anchor,
                std::to_string(sc.size()));
    }
    if (spec.contains("implies")) {
        auto k = LinearConstraint::parse(tight.vars, spec["implies"].get<std::string>());
        auto imp = implies(tight, k);
        r.check(imp.holds && verify_certificate(tight, imp.certificate), "implies " + k.to_text(), anchor);
    }
}

}  // namespace

int run_suite(const std::string& suite, const Context& ctx) {
    static const std::map<std::string, std::function<void(Report&, const Context&, const json&)>> suites = {
        {"triangle-shannon", triangle_shannon}, {"triangle-inner", triangle_inner},
        {"triangle-families", triangle_families}, {"fig3", fig3},
        {"ic-shannon", ic_shannon}, {"quantum-triangle", quantum_triangle},
        {"hybrid", hybrid}, {"appendixA", appendix_a},
        {"fritz", fritz}, {"solid-angle", solid_angles},
    };
    static const std::set<std::string> long_runs = {"case1", "case2", "ic-zy"};
    auto cat = load_catalog();
    Report r;
    r.command = "verify-paper " + suite;
    if (auto it = suites.find(suite); it != suites.end()) {
        it->second(r, ctx, cat.at(suite));
    } else if (long_runs.count(suite)) {
        if (!ctx.stretch) throw std::invalid_argument(suite + " runs for hours or days; pass --stretch to start it");
        stretch(r, ctx, cat.at(suite), suite);
    } else {
        std::vector<std::string> names;
        for (const auto& [k, _] : suites) names.push_back(k);
        for (const auto& k : long_runs) names.push_back(k);
        throw std::invalid_argument("unknown suite '" + suite + "'; known: " + join(names, ", "));
    }
    return emit(r, ctx);
}

}  // namespace entcone::cli
