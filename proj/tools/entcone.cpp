#include "report.hpp"

#include "entcone/catalog.hpp"
#include "entcone/distribution.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace entcone;
using namespace entcone::cli;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string show_row(const IntVec& r) {
    std::vector<std::string> s;
    for (const auto& x : r) s.push_back(x.get_str());
    return join(s, " ");
}

// Graded order when every subset is a coordinate, otherwise the cone's own order.
std::vector<Mask> print_order(const Cone& c) {
    if (c.coords.size() == static_cast<std::size_t>(c.vars.full())) return graded_order(c.vars.size());
    return c.coords;
}

IntVec reorder(const Cone& c, const IntVec& x) {
    IntVec out;
    for (Mask m : print_order(c)) out.push_back(x[static_cast<std::size_t>(c.index_of(m))]);
    return out;
}

std::string space_of(const Cone& c) {
    std::vector<std::string> s;
    for (Mask m : print_order(c)) s.push_back(c.vars.label(m));
    return join(s, " ");
}

std::string point_text(const Cone& c, const IntVec& x) {
    return "(" + space_of(c) + ") = (" + show_row(reorder(c, x)) + ")";
}

std::vector<Permutation> group_for(const Cone& c, const std::string& scenario) {
    if (scenario.empty()) return {};
    auto dag = load_scenario(scenario);
    if (!(dag.observed_vars() == c.vars))
        throw std::invalid_argument("cone variables do not match the observed variables of " + scenario);
    return observed_group(dag);
}

void summarize(Report& r, const Cone& c, const std::vector<Permutation>& group) {
    r.data["vars"] = c.vars.names();
    r.data["inequalities"] = c.ineqs.size();
    r.data["equalities"] = c.eqs.size();
    r.note(std::to_string(c.vars.size()) + " variables, " + std::to_string(c.dim()) + " coordinates, " +
           std::to_string(c.ineqs.size()) + " inequalities, " + std::to_string(c.eqs.size()) + " equalities");
    if (!group.empty()) {
        auto cs = symmetry_classes(c.inequalities(), group);
        std::vector<std::string> sizes;
        for (const auto& k : cs) sizes.push_back(std::to_string(k.orbit_size));
        r.note(std::to_string(cs.size()) + " classes (orbit sizes " + join(sizes, ",") + ")");
        r.data["orbit_sizes"] = sizes;
    }
}

// ------------------------------------------------------------ cone commands

struct BuildArgs {
    std::string scenario, mode = "classical", templates, out;
    bool no_filter = false, marginal = false;
};

int cone_build(const BuildArgs& a, const Context& ctx) {
    auto dag = load_scenario(a.scenario);
    auto templates = a.templates.empty() ? std::vector<Template>{} : parse_templates(a.templates);
    ScenarioCone sc;
    if (a.mode.rfind("inner:", 0) == 0) {
        sc = build_classical_inner(dag, parse_inner_mode(a.mode.substr(6)), ctx.fm());
    } else if (a.mode == "classical") {
        sc = build_classical_outer(interpret(dag, "classical"), templates, !a.no_filter);
    } else {
        sc = build_quantum_outer(interpret(dag, a.mode), templates);
    }
    if (a.marginal) sc = marginalize_with(sc, ctx, "build-" + dag.observed_vars().label(dag.observed_vars().full()));
    Report r;
    r.command = "cone build " + a.scenario + " --mode " + a.mode;
    for (const auto& l : sc.log) r.note(l);
    Cone out = sc.marginal ? reduce(sc.cone) : sc.cone;
    summarize(r, out, sc.marginal ? observed_group(dag) : std::vector<Permutation>{});
    if (!a.out.empty()) {
        write_cone_file(a.out, out);
        r.note("wrote " + a.out);
    } else if (!ctx.json_out) {
        std::cout << out.to_text();
    }
    return emit(r, ctx);
}

int cone_marginalize(const std::string& in, const std::string& keep, const std::string& out, const Context& ctx) {
    Cone c = read_cone_file(in);
    ScenarioCone sc;
    sc.cone = c;
    sc.observed = c.vars.parse_subset(keep);
    auto m = marginalize_with(sc, ctx, "marginalize");
    Cone red = reduce(m.cone);
    Report r;
    r.command = "cone marginalize " + in + " --keep " + keep;
    summarize(r, red, {});
    if (!out.empty()) {
        write_cone_file(out, red);
        r.note("wrote " + out);
    } else if (!ctx.json_out) {
        std::cout << red.to_text();
    }
    return emit(r, ctx);
}

int cone_rays(const std::string& in, const std::string& scenario, const Context& ctx) {
    Cone c = read_cone_file(in);
    if (c.dim() == 0) throw std::invalid_argument("zero-dimensional cone: no coordinates to enumerate");
    Cone dd = double_description(c);
    Report r;
    r.command = "cone rays " + in;
    r.note("space: " + space_of(dd));
    json rays = json::array();
    for (const auto& x : *dd.rays) {
        r.note("ray " + show_row(reorder(dd, x)));
        rays.push_back(show_row(reorder(dd, x)));
    }
    for (const auto& x : dd.lineality) r.note("line " + show_row(reorder(dd, x)));
    r.data["rays"] = rays;
    std::string head = std::to_string(dd.rays->size()) + " extremal rays";
    auto group = group_for(c, scenario);
    if (!group.empty()) head += " in " + std::to_string(ray_classes(dd.coords, *dd.rays, group).size()) + " orbits";
    r.notes.insert(r.notes.begin(), head);
    return emit(r, ctx);
}

int cone_classes(const std::string& in, const std::string& scenario, const Context& ctx) {
    Cone c = reduce(read_cone_file(in));
    auto group = group_for(c, scenario);
    auto cs = symmetry_classes(c.inequalities(), group);
    Report r;
    r.command = "cone classes " + in;
    summarize(r, c, group);
    for (const auto& k : cs) r.note("[" + std::to_string(k.orbit_size) + "] " + k.representative.to_text());
    return emit(r, ctx);
}

int cone_check(const std::string& cone_file, const std::string& vec_file, double tol, const Context& ctx) {
    Cone c = read_cone_file(cone_file);
    auto v = EntropyVector::parse(slurp(vec_file));
    auto m = member(c, v, tol);
    Report r;
    r.command = "cone check " + vec_file;
    std::string detail;
    if (!m.inside) {
        const auto& row = m.violated_equality ? c.eqs[m.violated] : c.ineqs[m.violated];
        detail = "violates " + c.constraint(row, m.violated_equality ? Relation::Eq : Relation::Geq).to_text() +
                 " (value " + (v.is_exact() ? m.exact_value.get_str() : fmt(m.value, 6)) + ")";
    }
    r.check(m.inside, "vector lies in the cone", {}, detail);
    return emit(r, ctx);
}

int cone_implies(const std::string& premises, const std::string& target, const Context& ctx) {
    Cone p = read_cone_file(premises);
    std::vector<LinearConstraint> targets;
    std::string text = slurp(target);
    if (text.find("space:") != std::string::npos) {
        Cone t = with_coords(Cone::parse(text), p.coords);
        targets = t.inequalities();
        for (const auto& e : t.equalities()) targets.push_back(e);
    } else {
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            targets.push_back(LinearConstraint::parse(p.vars, line));
        }
    }
    Report r;
    r.command = "cone implies " + premises + " " + target;
    for (const auto& k : targets) {
        if (k.rel == Relation::Eq) {
            IntVec cex;
            bool ok = implies_equality(p, p.dense(k), &cex);
            r.check(ok, k.to_text(), {}, ok ? "" : "counterexample " + point_text(p, cex));
            continue;
        }
        auto imp = implies(p, k);
        bool ok = imp.holds && verify_certificate(p, imp.certificate);
        r.check(ok, k.to_text(), {},
                imp.holds ? describe_certificate(p, imp.certificate)
                          : "counterexample " + point_text(p, imp.counterexample) + " gives " +
                                imp.counterexample_value.get_str());
    }
    return emit(r, ctx);
}

int cone_equal_cmd(const std::string& a, const std::string& b, const Context& ctx) {
    Cone x = read_cone_file(a), y = read_cone_file(b);
    if (!(x.vars == y.vars)) throw std::invalid_argument("cones live on different variables");
    auto cmp = cone_equal(x, with_coords(y, x.coords));
    Report r;
    r.command = "cone equal " + a + " " + b;
    std::string detail = cmp.detail;
    if (!cmp.equal && !cmp.witness.empty())
        detail += (detail.empty() ? "" : "; ") + std::string("witness in ") + (cmp.witness_in_a ? a : b) + " only: " +
                  point_text(x, cmp.witness);
    r.check(cmp.equal, "cones are equal", {}, detail);
    return emit(r, ctx);
}

// ------------------------------------------------------------ distributions

void vector_report(Report& r, const EntropyVector& h) {
    std::vector<std::string> labels, vals;
    for (Mask m : graded_order(h.vars().size())) {
        labels.push_back(h.vars().label(m));
        vals.push_back(h.is_exact() ? h.q(m).get_str() : fmt(h.r(m), 6));
    }
    r.note("H(" + join(labels, "), H(") + ")");
    r.note("(" + join(vals, ", ") + ")" + (h.is_exact() ? " exact" : ""));
    r.data["labels"] = labels;
    r.data["entropies"] = h.real_in(graded_order(h.vars().size()));
}

int dist_entropy(const std::string& file, const Context& ctx) {
    auto d = JointDistribution::load(file);
    d.validate();
    Report r;
    r.command = "dist entropy " + file;
    vector_report(r, entropy_vector(d));
    return emit(r, ctx);
}

int dist_strategy(const std::string& file, const std::string& dag_name, const std::string& name, const Context& ctx) {
    auto dag = load_scenario(dag_name);
    StrategyRecipe recipe = name.empty() ? StrategyRecipe::load(file) : FixtureSet::load(file).strategies.at(name);
    auto d = run_strategy(recipe, dag);
    Report r;
    r.command = "dist strategy " + file + (name.empty() ? "" : "#" + name) + " --dag " + dag_name;
    auto obs = dag.observed_vars().names();
    vector_report(r, entropy_vector(d.marginal(obs)));
    std::size_t ok = 0;
    auto checks = check_compatibility(d, dag);
    for (const auto& c : checks) {
        ok += c.pass;
        if (!c.pass) r.check(false, c.constraint.to_text(), {}, "value " + fmt(c.value, 6));
    }
    r.check(ok == checks.size(), "independences of the graph hold", {},
            std::to_string(ok) + "/" + std::to_string(checks.size()));
    return emit(r, ctx);
}

int dist_fritz(const std::string& post, bool relabel, const Context& ctx) {
    auto d = fritz_distribution(relabel);
    d.validate();
    Report r;
    r.command = "dist fritz" + (post.empty() ? "" : " --post " + post);
    r.note("CHSH " + fmt(chsh_value(chsh_table()), 12));
    if (!post.empty()) d = postprocess(d, parse_map_spec(post, d));
    vector_report(r, entropy_vector(d));
    return emit(r, ctx);
}

int solid_angle_cmd(const std::string& file, std::uint64_t samples, const Context& ctx) {
    Cone c = read_cone_file(file);
    auto e = solid_angle(c, samples, ctx.seed, ctx.workers);
    Report r;
    r.command = "solid-angle " + file;
    r.note("alpha = " + fmt(e.alpha, 6) + " +- " + fmt(e.standard_error, 3) + " (" + std::to_string(e.hits) + "/" +
           std::to_string(e.samples) + " hits, seed " + std::to_string(e.seed) + ")");
    r.data = {{"hits", e.hits}, {"samples", e.samples}, {"alpha", e.alpha}, {"se", e.standard_error},
              {"seed", e.seed}, {"discarded", e.discarded}};
    return emit(r, ctx);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy cones of causal structures"};
    app.require_subcommand(1);
    app.fallthrough();
    Context ctx;
    app.add_option("--seed", ctx.seed, "random seed")->capture_default_str();
    app.add_option("--workers", ctx.workers, "worker threads for sampling")->capture_default_str();
    app.add_option("--budget-ineqs", ctx.budget_ineqs, "stop elimination above this many rows")->capture_default_str();
    app.add_option("--budget-seconds", ctx.budget_seconds, "stop an elimination step after this long (0: none)");
    app.add_option("--checkpoint", ctx.checkpoint_dir, "directory for resumable elimination state");
    app.add_flag("--json", ctx.json_out, "machine-readable output");
    app.add_flag("-v,--verbose", ctx.verbose, "progress on stderr");

    std::function<int()> action;

    auto* cone = app.add_subcommand("cone", "build and query cones")->require_subcommand(1);
    BuildArgs ba;
    auto* build = cone->add_subcommand("build", "cone of a causal structure");
    build->add_option("scenario", ba.scenario, "catalog name or scenario file")->required();
    build->add_option("--mode", ba.mode, "classical | quantum | hybrid:A=classical,... | inner:ingleton-pre|ingleton-post|ray-filter")
        ->capture_default_str();
    build->add_option("--templates", ba.templates, "zy, matus1:s=K, matus2:s=K, ingleton, file:<path>");
    build->add_flag("--no-filter", ba.no_filter, "instantiate templates on every four-set");
    build->add_flag("--marginal", ba.marginal, "eliminate unobserved coordinates");
    build->add_option("--out", ba.out, "cone file to write");
    build->callback([&] { action = [&] { return cone_build(ba, ctx); }; });

    std::string in, in2, keep, out, scenario, vec;
    double tol = 1e-9;
    auto* marg = cone->add_subcommand("marginalize", "project onto a subset of the variables");
    marg->add_option("cone", in)->required();
    marg->add_option("--keep", keep, "variables to keep, e.g. X,Y,Z")->required();
    marg->add_option("--out", out);
    marg->callback([&] { action = [&] { return cone_marginalize(in, keep, out, ctx); }; });

    auto* rays = cone->add_subcommand("rays", "extremal rays");
    rays->add_option("cone", in)->required();
    rays->add_option("--scenario", scenario, "count orbits under the scenario's symmetry");
    rays->callback([&] { action = [&] { return cone_rays(in, scenario, ctx); }; });

    auto* classes = cone->add_subcommand("classes", "irredundant inequalities up to symmetry");
    classes->add_option("cone", in)->required();
    classes->add_option("--scenario", scenario)->required();
    classes->callback([&] { action = [&] { return cone_classes(in, scenario, ctx); }; });

    auto* check = cone->add_subcommand("check", "membership of an entropy vector");
    check->add_option("cone", in)->required();
    check->add_option("vector", vec)->required();
    check->add_option("--tol", tol)->capture_default_str();
    check->callback([&] { action = [&] { return cone_check(in, vec, tol, ctx); }; });

    auto* imp = cone->add_subcommand("implies", "certificates for each target constraint");
    imp->add_option("premises", in)->required();
    imp->add_option("target", in2, "cone file or constraint lines")->required();
    imp->callback([&] { action = [&] { return cone_implies(in, in2, ctx); }; });

    auto* eqc = cone->add_subcommand("equal", "compare two cones");
    eqc->add_option("a", in)->required();
    eqc->add_option("b", in2)->required();
    eqc->callback([&] { action = [&] { return cone_equal_cmd(in, in2, ctx); }; });

    auto* dist = app.add_subcommand("dist", "distributions and strategies")->require_subcommand(1);
    auto* ent = dist->add_subcommand("entropy", "entropy vector of a distribution file");
    ent->add_option("file", in)->required();
    ent->callback([&] { action = [&] { return dist_entropy(in, ctx); }; });

    std::string strategy_name;
    auto* strat = dist->add_subcommand("strategy", "run a strategy on a causal structure");
    strat->add_option("file", in)->required();
    strat->add_option("--dag", scenario)->required();
    strat->add_option("--name", strategy_name, "strategy inside a fixture file");
    strat->callback([&] { action = [&] { return dist_strategy(in, scenario, strategy_name, ctx); }; });

    std::string post;
    bool relabel = false;
    auto* fr = dist->add_subcommand("fritz", "two-singlet triangle construction");
    fr->add_option("--post", post, "e.g. X=and,Y=and,Z=or");
    fr->add_flag("--relabel", relabel, "swap the outcome order of the second measurement");
    fr->callback([&] { action = [&] { return dist_fritz(post, relabel, ctx); }; });

    std::uint64_t samples = 1000000;
    auto* sa = app.add_subcommand("solid-angle", "fraction of the positive sector inside a cone");
    sa->add_option("cone", in)->required();
    sa->add_option("--samples", samples)->capture_default_str();
    sa->callback([&] { action = [&] { return solid_angle_cmd(in, samples, ctx); }; });

    std::string suite;
    auto* vp = app.add_subcommand("verify-paper", "reproduce a published result");
    vp->add_option("suite", suite)->required();
    vp->add_option("--samples", ctx.samples, "override the sample count");
    vp->add_option("--templates", ctx.templates, "extra templates for long runs");
    vp->add_flag("--stretch", ctx.stretch, "allow the long runs (case1, case2, ic-zy)");
    vp->callback([&] { action = [&] { return run_suite(suite, ctx); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return action();
    } catch (const FmBudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << " (" << e.pending().size() << " coordinates left";
        if (!ctx.checkpoint_dir.empty()) std::cerr << ", state saved under " << ctx.checkpoint_dir;
        std::cerr << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
