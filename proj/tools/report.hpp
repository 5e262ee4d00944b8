#pragma once

#include "entcone/cone.hpp"
#include "entcone/scenario.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace entcone::cli {

using nlohmann::json;

// Settings shared by every command; logged with each report so a run can be repeated.
struct Context {
    std::uint64_t seed = 7;
    int workers = 1;
    std::size_t budget_ineqs = 500000;
    double budget_seconds = 0.0;
    std::string checkpoint_dir;
    bool json_out = false;
    bool verbose = false;
    bool stretch = false;
    std::uint64_t samples = 0;  // 0: suite default
    std::string templates;      // extra templates for stretch suites

    FmOptions fm() const;
    json config() const;
};

struct Check {
    std::string name;
    std::string anchor;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string command;
    std::vector<Check> checks;
    std::vector<std::string> notes;
    json data = json::object();

    bool check(bool ok, std::string name, std::string anchor = {}, std::string detail = {});
    void note(std::string text) { notes.push_back(std::move(text)); }
    bool pass() const;
};

// Prints the report (text or json) and returns the exit code.
int emit(const Report& r, const Context& ctx);

// Eliminates the unobserved coordinates of a full-stage cone under the context's budget.
// With a checkpoint directory the partial state is saved as <dir>/<tag>.ckpt on a budget stop and
// picked up again on the next run.
ScenarioCone marginalize_with(const ScenarioCone& full, const Context& ctx, const std::string& tag);

// Both inclusions, each row backed by a verified implication certificate.
bool certified_equal(const Cone& a, const Cone& b, std::string* why = nullptr);

// Constraint text ("1*X -1*XY >= 0") parsed over `v`, optionally closed under a group.
std::vector<LinearConstraint> parse_rows(const VariableSet& v, const std::vector<std::string>& rows,
                                         const std::vector<Permutation>& group = {});
Cone shannon_plus(const VariableSet& v, const std::vector<LinearConstraint>& extra);

std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::string fmt(double x, int prec = 4);

json load_catalog();
int run_suite(const std::string& suite, const Context& ctx);

}  // namespace entcone::cli
