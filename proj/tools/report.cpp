#include "report.hpp"

#include "entcone/catalog.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace entcone::cli {

FmOptions Context::fm() const {
    FmOptions o;
    o.budget_ineqs = budget_ineqs;
    o.budget_seconds = budget_seconds;
    if (verbose) o.log = [](const std::string& s) { std::cerr << "  fm: " << s << '\n'; };
    return o;
}

json Context::config() const {
    return {{"seed", seed},       {"workers", workers},       {"budget_ineqs", budget_ineqs},
            {"budget_seconds", budget_seconds}, {"checkpoint", checkpoint_dir}, {"samples", samples},
            {"templates", templates}};
}

bool Report::check(bool ok, std::string name, std::string anchor, std::string detail) {
    checks.push_back({std::move(name), std::move(anchor), ok, std::move(detail)});
    return ok;
}

bool Report::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

int emit(const Report& r, const Context& ctx) {
    if (ctx.json_out) {
        json j;
        j["command"] = r.command;
        j["config"] = ctx.config();
        j["pass"] = r.pass();
        j["checks"] = json::array();
        for (const auto& c : r.checks)
            j["checks"].push_back({{"name", c.name}, {"anchor", c.anchor}, {"pass", c.pass}, {"detail", c.detail}});
        j["notes"] = r.notes;
        j["data"] = r.data;
        std::cout << j.dump(1) << '\n';
    } else {
        std::cout << r.command << " (seed " << ctx.seed << ", workers " << ctx.workers << ")\n";
        for (const auto& c : r.checks) {
            std::cout << (c.pass ? "  ok   " : "  FAIL ") << c.name;
            if (!c.anchor.empty()) std::cout << " [" << c.anchor << ']';
            if (!c.detail.empty()) std::cout << ": " << c.detail;
            std::cout << '\n';
        }
        for (const auto& n : r.notes) std::cout << "       " << n << '\n';
        if (!r.checks.empty()) std::cout << (r.pass() ? "PASS" : "FAIL") << '\n';
    }
    return r.pass() ? 0 : 1;
}

ScenarioCone marginalize_with(const ScenarioCone& full, const Context& ctx, const std::string& tag) {
    if (full.marginal) return full;
    std::string path;
    if (!ctx.checkpoint_dir.empty()) {
        std::filesystem::create_directories(ctx.checkpoint_dir);
        path = (std::filesystem::path(ctx.checkpoint_dir) / (tag + ".ckpt")).string();
    }
    Cone start = full.cone;
    std::vector<Mask> drop;
    for (Mask m : full.cone.coords)
        if (m & ~full.observed) drop.push_back(m);
    if (!path.empty() && std::filesystem::exists(path)) {
        auto [partial, pending] = read_checkpoint(path);
        start = std::move(partial);
        drop = std::move(pending);
        if (ctx.verbose) std::cerr << "resuming " << path << " with " << drop.size() << " coordinates left\n";
    }
    Cone m;
    try {
        m = fm_eliminate(start, drop, ctx.fm());
    } catch (const FmBudgetExceeded& e) {
        if (!path.empty()) write_checkpoint(path, e.partial(), e.pending());
        throw;
    }
    if (!path.empty()) std::filesystem::remove(path);
    std::vector<std::string> names;
    for (int i = 0; i < full.cone.vars.size(); ++i)
        if (full.observed >> i & 1) names.push_back(full.cone.vars.name(i));
    ScenarioCone sc = full;
    sc.cone = restrict_to(m, VariableSet(names));
    sc.marginal = true;
    sc.observed = sc.cone.vars.full();
    return sc;
}

namespace {

bool contains_certified(const Cone& outer, const Cone& inner, std::string* why) {
    for (std::size_t i = 0; i < inner.ineqs.size(); ++i) {
        auto r = implies(outer, inner.ineqs[i]);
        if (!r.holds || !verify_certificate(outer, r.certificate)) {
            if (why) *why = "not implied: " + inner.constraint(inner.ineqs[i], Relation::Geq).to_text();
            return false;
        }
    }
    for (const auto& e : inner.eqs)
        if (!implies_equality(outer, e)) {
            if (why) *why = "equality not implied: " + inner.constraint(e, Relation::Eq).to_text();
            return false;
        }
    return true;
}

}  // namespace

bool certified_equal(const Cone& a, const Cone& b0, std::string* why) {
    Cone b = with_coords(b0, a.coords);
    return contains_certified(a, b, why) && contains_certified(b, a, why);
}

std::vector<LinearConstraint> parse_rows(const VariableSet& v, const std::vector<std::string>& rows,
                                         const std::vector<Permutation>& group) {
    std::vector<LinearConstraint> out;
    std::set<std::string> seen;
    auto push = [&](const LinearConstraint& k) {
        auto c = k.canonical();
        if (seen.insert(c.to_text()).second) out.push_back(c);
    };
    for (const auto& text : rows) {
        auto k = LinearConstraint::parse(v, text);
        push(k);
        for (const auto& p : group) {
            Expr e;
            for (const auto& [m, c] : k.coeffs) e.add(permute_mask(m, p), c);
            push(LinearConstraint(v, e, k.rel));
        }
    }
    return out;
}

Cone shannon_plus(const VariableSet& v, const std::vector<LinearConstraint>& extra) {
    Cone c = Cone::full_space(v);
    for (const auto& k : shannon_elemental(v)) c.add(k);
    for (const auto& k : extra) c.add(k);
    return c;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
    return s;
}

std::string fmt(double x, int prec) {
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

json load_catalog() {
    std::ifstream f(data_path("expected/catalog.json"));
    if (!f) throw std::runtime_error("cannot open " + data_path("expected/catalog.json"));
    return json::parse(f);
}

}  // namespace entcone::cli
