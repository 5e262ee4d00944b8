#include "entcone/distribution.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace entcone {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t product(const std::vector<int>& alphabets) {
    std::size_t n = 1;
    for (int k : alphabets) {
        if (k <= 0) throw std::invalid_argument("alphabet sizes must be positive");
        n *= static_cast<std::size_t>(k);
    }
    return n;
}

bool power_of_two(const Rational& p, int& log2_inverse) {
    if (p.get_num() != 1) return false;
    const mpz_class& den = p.get_den();
    if (mpz_popcount(den.get_mpz_t()) != 1) return false;
    log2_inverse = static_cast<int>(mpz_sizeinbase(den.get_mpz_t(), 2)) - 1;
    return true;
}

}  // namespace

// ---------------------------------------------------------------- JointDistribution

JointDistribution JointDistribution::exact(VariableSet vars, std::vector<int> alphabets, RatVec pmf) {
    JointDistribution d;
    if (static_cast<int>(alphabets.size()) != vars.size()) throw std::invalid_argument("one alphabet per variable");
    d.size_ = product(alphabets);
    if (pmf.size() != d.size_) throw std::invalid_argument("pmf size does not match the alphabets");
    d.vars_ = std::move(vars);
    d.alphabets_ = std::move(alphabets);
    d.exact_ = true;
    d.pq_ = std::move(pmf);
    for (auto& q : d.pq_) q.canonicalize();
    d.validate();
    return d;
}

JointDistribution JointDistribution::real(VariableSet vars, std::vector<int> alphabets, std::vector<double> pmf) {
    JointDistribution d;
    if (static_cast<int>(alphabets.size()) != vars.size()) throw std::invalid_argument("one alphabet per variable");
    d.size_ = product(alphabets);
    if (pmf.size() != d.size_) throw std::invalid_argument("pmf size does not match the alphabets");
    d.vars_ = std::move(vars);
    d.alphabets_ = std::move(alphabets);
    d.exact_ = false;
    d.pr_ = std::move(pmf);
    d.validate();
    return d;
}

std::vector<int> JointDistribution::outcome(std::size_t index) const {
    std::vector<int> o(alphabets_.size());
    for (std::size_t i = alphabets_.size(); i-- > 0;) {
        o[i] = static_cast<int>(index % static_cast<std::size_t>(alphabets_[i]));
        index /= static_cast<std::size_t>(alphabets_[i]);
    }
    return o;
}

std::size_t JointDistribution::index(const std::vector<int>& outcome) const {
    if (outcome.size() != alphabets_.size()) throw std::invalid_argument("outcome length mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < alphabets_.size(); ++i) {
        if (outcome[i] < 0 || outcome[i] >= alphabets_[i])
            throw std::invalid_argument("outcome " + std::to_string(outcome[i]) + " outside the alphabet of " +
                                        vars_.name(static_cast<int>(i)));
        idx = idx * static_cast<std::size_t>(alphabets_[i]) + static_cast<std::size_t>(outcome[i]);
    }
    return idx;
}

void JointDistribution::validate() const {
    if (exact_) {
        Rational s = 0;
        for (const auto& q : pq_) {
            if (sgn(q) < 0) throw std::invalid_argument("negative probability");
            s += q;
        }
        if (s != 1) throw std::invalid_argument("probabilities sum to " + to_string(s) + ", not 1");
    } else {
        double s = 0;
        for (double v : pr_) {
            if (!(v >= 0)) throw std::invalid_argument("negative or undefined probability");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("probabilities do not sum to 1");
    }
}

JointDistribution JointDistribution::marginal(const std::vector<std::string>& keep) const {
    std::vector<int> pos, alph;
    for (const auto& n : keep) {
        int i = vars_.index_of(n);
        if (i < 0) throw std::invalid_argument("unknown variable " + n);
        pos.push_back(i);
        alph.push_back(alphabets_[static_cast<std::size_t>(i)]);
    }
    JointDistribution m;
    m.vars_ = VariableSet(keep);
    m.alphabets_ = alph;
    m.size_ = product(alph);
    m.exact_ = exact_;
    if (exact_)
        m.pq_.assign(m.size_, 0);
    else
        m.pr_.assign(m.size_, 0.0);
    std::vector<int> sub(pos.size());
    for (std::size_t i = 0; i < size_; ++i) {
        if (exact_ ? sgn(pq_[i]) == 0 : pr_[i] == 0.0) continue;
        auto o = outcome(i);
        for (std::size_t k = 0; k < pos.size(); ++k) sub[k] = o[static_cast<std::size_t>(pos[k])];
        std::size_t j = m.index(sub);
        if (exact_)
            m.pq_[j] += pq_[i];
        else
            m.pr_[j] += pr_[i];
    }
    return m;
}

std::string JointDistribution::to_text() const {
    std::ostringstream os;
    os << "vars:";
    for (const auto& n : vars_.names()) os << ' ' << n;
    os << "\nalphabets:";
    for (int k : alphabets_) os << ' ' << k;
    os << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < size_; ++i) {
        if (exact_ ? sgn(pq_[i]) == 0 : pr_[i] == 0.0) continue;
        for (int v : outcome(i)) os << v << ' ';
        if (exact_)
            os << to_string(pq_[i]) << '\n';
        else
            os << pr_[i] << '\n';
    }
    return os.str();
}

JointDistribution JointDistribution::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> names;
    std::vector<int> alph;
    std::vector<std::pair<std::vector<int>, Rational>> rows;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line.rfind("vars:", 0) == 0) {
            ls.ignore(5);
            for (std::string n; ls >> n;) names.push_back(n);
        } else if (line.rfind("alphabets:", 0) == 0) {
            ls.ignore(10);
            for (int k; ls >> k;) alph.push_back(k);
        } else {
            if (names.empty() || alph.size() != names.size())
                throw std::invalid_argument("distribution: vars: and alphabets: must precede outcomes");
            std::vector<int> o(names.size());
            for (auto& v : o)
                if (!(ls >> v)) throw std::invalid_argument("distribution: short outcome line: " + line);
            std::string p;
            if (!(ls >> p)) throw std::invalid_argument("distribution: missing probability: " + line);
            rows.emplace_back(o, parse_rational(p));
        }
    }
    VariableSet vars(names);
    std::size_t n = product(alph);
    RatVec pmf(n, 0);
    JointDistribution shape;
    shape.vars_ = vars;
    shape.alphabets_ = alph;
    shape.size_ = n;
    Rational total = 0;
    for (const auto& [o, q] : rows) {
        pmf[shape.index(o)] += q;
        total += q;
    }
    if (total == 1) return exact(vars, alph, pmf);
    std::vector<double> pr(n);
    for (std::size_t i = 0; i < n; ++i) pr[i] = pmf[i].get_d();
    return real(vars, alph, pr);
}

JointDistribution JointDistribution::load(const std::string& path) { return parse(read_file(path)); }

EntropyVector entropy_vector(const JointDistribution& d) {
    const int n = d.vars().size();
    const Mask full = d.vars().full();
    std::vector<std::vector<int>> outcomes;
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.p(i) > 0 || (d.is_exact() && sgn(d.q(i)) > 0)) {
            support.push_back(i);
            outcomes.push_back(d.outcome(i));
        }
    bool exact = d.is_exact();
    RatVec hq;
    std::vector<double> hr;
    for (Mask m = 1; m <= full; ++m) {
        std::map<std::vector<int>, Rational> mq;
        std::map<std::vector<int>, double> mr;
        for (std::size_t k = 0; k < support.size(); ++k) {
            std::vector<int> key;
            for (int v = 0; v < n; ++v)
                if (m >> v & 1) key.push_back(outcomes[k][static_cast<std::size_t>(v)]);
            if (d.is_exact())
                mq[key] += d.q(support[k]);
            else
                mr[key] += d.p(support[k]);
        }
        double h = 0;
        if (d.is_exact()) {
            Rational hx = 0;
            for (const auto& [key, p] : mq) {
                (void)key;
                int l = 0;
                if (exact && power_of_two(p, l))
                    hx += p * l;
                else
                    exact = false;
                double pd = p.get_d();
                h -= pd * std::log2(pd);
            }
            hq.push_back(hx);
        } else {
            for (const auto& [key, p] : mr) {
                (void)key;
                if (p > 0) h -= p * std::log2(p);
            }
        }
        hr.push_back(h);
    }
    if (exact) return EntropyVector::exact(d.vars(), hq);
    return EntropyVector::real(d.vars(), hr);
}

JointDistribution random_distribution(const VariableSet& vars, const std::vector<int>& alphabets,
                                      std::mt19937_64& rng) {
    std::size_t n = product(alphabets);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(n);
    double s = 0;
    for (auto& v : p) s += v = e(rng);
    for (auto& v : p) v /= s;
    return JointDistribution::real(vars, alphabets, p);
}

// ---------------------------------------------------------------- post-processing

OutcomeMap parse_outcome_map(std::string_view spec, int in_alphabet) {
    std::string s = trim(spec);
    OutcomeMap m;
    auto two_bit = [&](auto f) {
        if (in_alphabet != 4) throw std::invalid_argument("map '" + s + "' needs a two-bit (4-outcome) input");
        for (int v = 0; v < 4; ++v) m.table.push_back(f(v >> 1, v & 1));
        m.out_alphabet = 2;
    };
    if (s == "identity") {
        for (int v = 0; v < in_alphabet; ++v) m.table.push_back(v);
        m.out_alphabet = in_alphabet;
    } else if (s == "and") {
        two_bit([](int a, int b) { return a & b; });
    } else if (s == "or") {
        two_bit([](int a, int b) { return a | b; });
    } else if (s == "xor") {
        two_bit([](int a, int b) { return a ^ b; });
    } else if (s == "hi") {
        two_bit([](int a, int) { return a; });
    } else if (s == "lo") {
        two_bit([](int, int b) { return b; });
    } else if (s == "parity") {
        for (int v = 0; v < in_alphabet; ++v) m.table.push_back(v % 2 == 0 ? 1 : 0);
        m.out_alphabet = 2;
    } else if (s.rfind("table:", 0) == 0) {
        std::string body = s.substr(6);
        std::replace(body.begin(), body.end(), ',', ' ');
        std::replace(body.begin(), body.end(), '/', ' ');
        std::istringstream is(body);
        for (int v; is >> v;) {
            if (v < 0) throw std::invalid_argument("table entries must be nonnegative");
            m.table.push_back(v);
        }
        if (static_cast<int>(m.table.size()) != in_alphabet)
            throw std::invalid_argument("table has " + std::to_string(m.table.size()) + " entries for an alphabet of " +
                                        std::to_string(in_alphabet));
        m.out_alphabet = *std::max_element(m.table.begin(), m.table.end()) + 1;
    } else {
        throw std::invalid_argument("unknown outcome map '" + s + "'");
    }
    return m;
}

std::map<std::string, OutcomeMap> parse_map_spec(std::string_view spec, const JointDistribution& d) {
    std::map<std::string, OutcomeMap> maps;
    std::string s(spec);
    // Entries are separated by ';' or by ',' followed by NAME=.
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        bool split = c == ';';
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            split = j < s.size() && j > i + 1 && s[j] == '=';
        }
        if (split) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    for (const auto& p : parts) {
        std::string t = trim(p);
        if (t.empty()) continue;
        auto eqpos = t.find('=');
        if (eqpos == std::string::npos) throw std::invalid_argument("map entry '" + t + "' lacks '='");
        std::string name = trim(t.substr(0, eqpos));
        int i = d.vars().index_of(name);
        if (i < 0) throw std::invalid_argument("map names unknown variable " + name);
        maps[name] = parse_outcome_map(t.substr(eqpos + 1), d.alphabets()[static_cast<std::size_t>(i)]);
    }
    return maps;
}

JointDistribution postprocess(const JointDistribution& d, const std::map<std::string, OutcomeMap>& maps) {
    const int n = d.vars().size();
    std::vector<const OutcomeMap*> per(static_cast<std::size_t>(n), nullptr);
    std::vector<int> alph = d.alphabets();
    for (const auto& [name, m] : maps) {
        int i = d.vars().index_of(name);
        if (i < 0) throw std::invalid_argument("map names unknown variable " + name);
        if (static_cast<int>(m.table.size()) != alph[static_cast<std::size_t>(i)])
            throw std::invalid_argument("map for " + name + " does not match its alphabet");
        per[static_cast<std::size_t>(i)] = &m;
        alph[static_cast<std::size_t>(i)] = m.out_alphabet;
    }
    std::size_t size = product(alph);
    RatVec q(d.is_exact() ? size : 0, 0);
    std::vector<double> r(d.is_exact() ? 0 : size, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto o = d.outcome(i);
        std::size_t j = 0;
        for (std::size_t v = 0; v < o.size(); ++v) {
            int x = per[v] ? per[v]->table[static_cast<std::size_t>(o[v])] : o[v];
            j = j * static_cast<std::size_t>(alph[v]) + static_cast<std::size_t>(x);
        }
        if (d.is_exact())
            q[j] += d.q(i);
        else
            r[j] += d.p(i);
    }
    if (d.is_exact()) return JointDistribution::exact(d.vars(), alph, q);
    return JointDistribution::real(d.vars(), alph, r);
}

// ---------------------------------------------------------------- strategies

namespace {

struct Lexer {
    std::string_view s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) throw std::invalid_argument("expected '" + std::string(1, c) + "' in '" + std::string(s) + "'");
    }
    bool at_ident() {
        skip();
        return i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_');
    }
    bool at_number() {
        skip();
        return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
    }
    std::string ident() {
        skip();
        std::size_t a = i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
        if (a == i) throw std::invalid_argument("expected a name in '" + std::string(s) + "'");
        return std::string(s.substr(a, i - a));
    }
    int number() {
        skip();
        std::size_t a = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (a == i) throw std::invalid_argument("expected a number in '" + std::string(s) + "'");
        return std::stoi(std::string(s.substr(a, i - a)));
    }
};

StrategyExpr parse_expr(Lexer& lx);

std::vector<StrategyExpr> parse_args(Lexer& lx) {
    std::vector<StrategyExpr> args;
    lx.expect('(');
    if (lx.eat(')')) return args;
    do args.push_back(parse_expr(lx));
    while (lx.eat(','));
    lx.expect(')');
    return args;
}

StrategyExpr parse_primary(Lexer& lx) {
    StrategyExpr e;
    if (lx.eat('(')) {
        // Bare tuple: (a, b) is pair(a, b).
        e.op = StrategyExpr::Op::Pair;
        do e.args.push_back(parse_expr(lx));
        while (lx.eat(','));
        lx.expect(')');
        if (e.args.size() == 1) return e.args[0];
        return e;
    }
    if (lx.at_number()) {
        e.op = StrategyExpr::Op::Const;
        e.value = lx.number();
        return e;
    }
    std::string id = lx.ident();
    if (id == "const") {
        lx.expect(':');
        e.op = StrategyExpr::Op::Const;
        e.value = lx.number();
        lx.skip();
        if (lx.i < lx.s.size() && lx.s[lx.i] == '(') {
            if (!parse_args(lx).empty()) throw std::invalid_argument("const takes no arguments");
        }
        return e;
    }
    if (id == "table") {
        lx.expect(':');
        e.op = StrategyExpr::Op::Table;
        do e.table.push_back(lx.number());
        while (lx.eat(','));
        e.args = parse_args(lx);
        if (e.args.size() != 1) throw std::invalid_argument("table takes one argument");
        return e;
    }
    lx.skip();
    bool call = lx.i < lx.s.size() && lx.s[lx.i] == '(';
    if (!call) {
        e.op = StrategyExpr::Op::Ref;
        e.name = id;
        return e;
    }
    static const std::map<std::string, StrategyExpr::Op> ops = {{"xor", StrategyExpr::Op::Xor},
                                                                {"and", StrategyExpr::Op::And},
                                                                {"or", StrategyExpr::Op::Or},
                                                                {"copy", StrategyExpr::Op::Copy},
                                                                {"pair", StrategyExpr::Op::Pair}};
    auto it = ops.find(id);
    if (it == ops.end()) throw std::invalid_argument("unknown function " + id);
    e.op = it->second;
    e.args = parse_args(lx);
    if (e.args.empty()) throw std::invalid_argument(id + " needs arguments");
    if (e.op == StrategyExpr::Op::Copy && e.args.size() != 1) throw std::invalid_argument("copy takes one argument");
    return e;
}

StrategyExpr parse_expr(Lexer& lx) {
    StrategyExpr e = parse_primary(lx);
    while (lx.eat('[')) {
        StrategyExpr c;
        c.op = StrategyExpr::Op::Component;
        c.value = lx.number();
        lx.expect(']');
        c.args.push_back(std::move(e));
        e = std::move(c);
    }
    return e;
}

void collect(const StrategyExpr& e, std::vector<std::string>& out) {
    if (e.op == StrategyExpr::Op::Ref && std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
    for (const auto& a : e.args) collect(a, out);
}

// Tuple of components with their alphabets.
struct Val {
    std::vector<int> v;
    std::vector<int> k;

    int flat() const {
        int x = 0;
        for (std::size_t i = 0; i < v.size(); ++i) x = x * k[i] + v[i];
        return x;
    }
    int alphabet() const {
        int n = 1;
        for (int a : k) n *= a;
        return n;
    }
};

Val scalar(int v, int k) { return Val{{v}, {k}}; }

Val eval(const StrategyExpr& e, const std::map<std::string, Val>& env) {
    switch (e.op) {
        case StrategyExpr::Op::Ref: {
            auto it = env.find(e.name);
            if (it == env.end()) throw std::invalid_argument(e.name + " is used before it is defined");
            return it->second;
        }
        case StrategyExpr::Op::Const:
            return scalar(e.value, e.value + 1);
        case StrategyExpr::Op::Copy:
            return eval(e.args[0], env);
        case StrategyExpr::Op::Pair: {
            Val out;
            for (const auto& a : e.args) {
                Val x = eval(a, env);
                out.v.insert(out.v.end(), x.v.begin(), x.v.end());
                out.k.insert(out.k.end(), x.k.begin(), x.k.end());
            }
            return out;
        }
        case StrategyExpr::Op::Component: {
            Val x = eval(e.args[0], env);
            if (e.value < 0 || e.value >= static_cast<int>(x.v.size()))
                throw std::invalid_argument("component index " + std::to_string(e.value) + " out of range");
            return scalar(x.v[static_cast<std::size_t>(e.value)], x.k[static_cast<std::size_t>(e.value)]);
        }
        case StrategyExpr::Op::Table: {
            Val x = eval(e.args[0], env);
            if (static_cast<int>(e.table.size()) < x.alphabet())
                throw std::invalid_argument("table shorter than its input alphabet");
            int k = *std::max_element(e.table.begin(), e.table.end()) + 1;
            return scalar(e.table[static_cast<std::size_t>(x.flat())], k);
        }
        case StrategyExpr::Op::Xor:
        case StrategyExpr::Op::And:
        case StrategyExpr::Op::Or: {
            // Bits use the usual Boolean operations; larger alphabets use sum mod k, min and max.
            int k = 1;
            std::vector<int> xs;
            for (const auto& a : e.args) {
                Val x = eval(a, env);
                k = std::max(k, x.alphabet());
                xs.push_back(x.flat());
            }
            int r = xs[0];
            for (std::size_t i = 1; i < xs.size(); ++i) {
                if (e.op == StrategyExpr::Op::Xor) r = (r + xs[i]) % k;
                if (e.op == StrategyExpr::Op::And) r = std::min(r, xs[i]);
                if (e.op == StrategyExpr::Op::Or) r = std::max(r, xs[i]);
            }
            return scalar(r, std::max(k, 2));
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

StrategyRecipe StrategyRecipe::parse(std::string_view text) {
    StrategyRecipe r;
    std::istringstream in{std::string(text)};
    std::string line;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "source") {
            Source s;
            std::string kind;
            if (!(ls >> s.name >> kind >> s.alphabet) || kind != "uniform" || s.alphabet < 1)
                throw std::invalid_argument("expected 'source <name> uniform <k>': " + line);
            if (!seen.insert(s.name).second) throw std::invalid_argument(s.name + " defined twice");
            r.sources.push_back(s);
        } else if (kw == "node") {
            auto eqpos = line.find('=');
            if (eqpos == std::string::npos) throw std::invalid_argument("expected 'node <name> = <expr>': " + line);
            Node n;
            n.name = trim(line.substr(4, eqpos - 4));
            n.text = trim(line.substr(eqpos + 1));
            Lexer lx{n.text};
            n.expr = parse_expr(lx);
            lx.skip();
            if (lx.i != n.text.size()) throw std::invalid_argument("trailing text in '" + n.text + "'");
            if (!seen.insert(n.name).second) throw std::invalid_argument(n.name + " defined twice");
            r.nodes.push_back(std::move(n));
        } else {
            throw std::invalid_argument("unknown strategy line: " + line);
        }
    }
    return r;
}

StrategyRecipe StrategyRecipe::load(const std::string& path) { return parse(read_file(path)); }

std::vector<std::string> referenced_names(const StrategyExpr& e) {
    std::vector<std::string> out;
    collect(e, out);
    return out;
}

std::string recipe_violation(const StrategyRecipe& r, const CausalStructure& dag) {
    std::set<std::string> source_names;
    for (const auto& s : r.sources) source_names.insert(s.name);
    std::map<std::string, std::string> owner;  // private source -> the node reading it
    for (const auto& n : r.nodes) {
        int i = dag.index_of(n.name);
        if (i < 0) return "node " + n.name + " is not in the causal structure";
        for (const auto& ref : referenced_names(n.expr)) {
            int j = dag.index_of(ref);
            if (j >= 0) {
                if (!(dag.parents(i) >> j & 1)) return "node " + n.name + " reads " + ref + ", which is not a parent";
                continue;
            }
            if (!source_names.count(ref)) return "node " + n.name + " reads undefined name " + ref;
            auto [it, fresh] = owner.emplace(ref, n.name);
            if (!fresh && it->second != n.name)
                return "source " + ref + " is read by both " + it->second + " and " + n.name;
        }
    }
    for (const auto& s : r.sources) {
        int j = dag.index_of(s.name);
        if (j >= 0 && dag.parents(j) != 0) return "source " + s.name + " names a node that has parents";
    }
    return {};
}

JointDistribution run_strategy(const StrategyRecipe& r, const CausalStructure& dag) {
    if (auto v = recipe_violation(r, dag); !v.empty()) throw std::invalid_argument(v);
    std::vector<int> salph;
    std::size_t combos = 1;
    for (const auto& s : r.sources) {
        salph.push_back(s.alphabet);
        combos *= static_cast<std::size_t>(s.alphabet);
    }
    const int n = dag.size();
    std::map<std::vector<int>, std::size_t> counts;
    std::vector<int> node_alph(static_cast<std::size_t>(n), 1);
    std::vector<int> assign(salph.size(), 0);
    for (std::size_t c = 0; c < combos; ++c) {
        std::size_t rest = c;
        for (std::size_t i = salph.size(); i-- > 0;) {
            assign[i] = static_cast<int>(rest % static_cast<std::size_t>(salph[i]));
            rest /= static_cast<std::size_t>(salph[i]);
        }
        std::map<std::string, Val> env;
        for (std::size_t i = 0; i < salph.size(); ++i) env[r.sources[i].name] = scalar(assign[i], salph[i]);
        for (const auto& nd : r.nodes) env[nd.name] = eval(nd.expr, env);
        std::vector<int> o(static_cast<std::size_t>(n), 0);
        for (int v = 0; v < n; ++v) {
            auto it = env.find(dag.name(v));
            if (it == env.end()) continue;
            o[static_cast<std::size_t>(v)] = it->second.flat();
            node_alph[static_cast<std::size_t>(v)] = it->second.alphabet();
        }
        ++counts[o];
    }
    JointDistribution shape = JointDistribution::exact(dag.node_vars(), node_alph,
                                                       [&] {
                                                           RatVec p(product(node_alph), 0);
                                                           p[0] = 1;
                                                           return p;
                                                       }());
    RatVec pmf(shape.size(), 0);
    for (const auto& [o, k] : counts) pmf[shape.index(o)] += Rational(static_cast<long>(k), static_cast<long>(combos));
    return JointDistribution::exact(dag.node_vars(), node_alph, pmf);
}

std::vector<CompatibilityCheck> check_compatibility(const JointDistribution& d, const CausalStructure& dag,
                                                     double tol) {
    for (const auto& n : dag.names())
        if (d.vars().index_of(n) < 0) throw std::invalid_argument("distribution lacks node " + n);
    EntropyVector h = entropy_vector(d);
    std::vector<CompatibilityCheck> out;
    for (const auto& c : dag.ci_constraints()) {
        CompatibilityCheck k;
        k.constraint = c;
        k.value = evaluate(c, h).as_double();
        k.pass = std::abs(k.value) < tol;
        out.push_back(k);
    }
    return out;
}

// ---------------------------------------------------------------- ray fixtures

FixtureSet FixtureSet::parse(std::string_view text) {
    FixtureSet f;
    std::istringstream in{std::string(text)};
    std::string line, current, block;
    auto flush = [&] {
        if (!current.empty()) f.strategies[current] = StrategyRecipe::parse(block);
        current.clear();
        block.clear();
    };
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        std::istringstream ls(t);
        std::string kw;
        ls >> kw;
        if (kw == "scenario") {
            flush();
            ls >> f.scenario;
        } else if (kw == "ray") {
            flush();
            auto colon = t.find(':');
            if (colon == std::string::npos) throw std::invalid_argument("ray line lacks ':': " + t);
            std::istringstream head(t.substr(3, colon - 3));
            RayFixture r;
            if (!(head >> r.index)) throw std::invalid_argument("ray line lacks an index: " + t);
            for (std::string w; head >> w;) {
                if (w == "factor") {
                    if (!(head >> r.factor) || r.factor < 1) throw std::invalid_argument("bad factor: " + t);
                } else if (w == "outer") {
                    r.outer = true;
                } else {
                    throw std::invalid_argument("unknown ray attribute " + w);
                }
            }
            std::istringstream vals(t.substr(colon + 1));
            for (std::string v; vals >> v;) r.values.emplace_back(v);
            f.rays.push_back(std::move(r));
        } else if (kw == "strategy") {
            flush();
            ls >> current;
            if (current.empty()) throw std::invalid_argument("strategy needs a name");
        } else {
            if (current.empty()) throw std::invalid_argument("line outside a strategy block: " + t);
            block += t + "\n";
        }
    }
    flush();
    return f;
}

FixtureSet FixtureSet::load(const std::string& path) { return parse(read_file(path)); }

std::vector<FixtureCheck> verify_fixtures(const FixtureSet& f, const CausalStructure& dag) {
    const VariableSet obs = dag.observed_vars();
    const auto order = graded_order(obs.size());
    std::vector<FixtureCheck> out;
    for (const auto& r : f.rays) {
        FixtureCheck k;
        k.index = r.index;
        auto it = f.strategies.find(std::to_string(r.index));
        if (it == f.strategies.end()) {
            k.detail = "no strategy";
            out.push_back(std::move(k));
            continue;
        }
        k.has_strategy = true;
        if (r.values.size() != order.size()) {
            k.detail = "ray has " + std::to_string(r.values.size()) + " entries, expected " + std::to_string(order.size());
            out.push_back(std::move(k));
            continue;
        }
        try {
            JointDistribution d = run_strategy(it->second, dag).marginal(obs.names());
            k.vector = entropy_vector(d);
            if (!k.vector.is_exact()) {
                k.detail = "entropy vector is not exact";
            } else {
                RatVec got = k.vector.exact_in(order);
                k.reproduced = true;
                for (std::size_t i = 0; i < order.size(); ++i)
                    if (got[i] != Rational(r.values[i] * r.factor)) k.reproduced = false;
                if (!k.reproduced) {
                    std::ostringstream os;
                    os << "got";
                    for (const auto& q : got) os << ' ' << to_string(q);
                    k.detail = os.str();
                }
            }
        } catch (const std::exception& e) {
            k.detail = e.what();
        }
        out.push_back(std::move(k));
    }
    return out;
}

// ---------------------------------------------------------------- two-qubit construction

Qubit angle_state(double theta) { return {std::cos(theta / 2), std::sin(theta / 2)}; }

TwoQubit singlet() {
    const double s = 1.0 / std::sqrt(2.0);
    return {0.0, s, -s, 0.0};  // (|01> - |10>)/sqrt(2)
}

TwoQubit tensor(const Qubit& a, const Qubit& b) { return {a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]}; }

double born(const TwoQubit& effect, const TwoQubit& state) {
    std::complex<double> amp = 0;
    for (std::size_t i = 0; i < 4; ++i) amp += std::conj(effect[i]) * state[i];
    return std::norm(amp);
}

CHSHTable chsh_table() {
    const double pi = std::numbers::pi;
    const double first[2] = {0.0, pi / 2};
    const double second[2] = {pi / 4, 3 * pi / 4};
    const TwoQubit psi = singlet();
    CHSHTable p{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y)
                    p[a][b][x][y] = born(tensor(angle_state(first[b] + x * pi), angle_state(second[a] + y * pi)), psi);
    return p;
}

double correlator(const CHSHTable& p, int a, int b) {
    const auto& t = p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    return t[0][0] + t[1][1] - t[0][1] - t[1][0];
}

double chsh_value(const CHSHTable& p) {
    double best = 0;
    for (int flip = 0; flip < 4; ++flip) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += (k == flip ? -1.0 : 1.0) * correlator(p, k >> 1, k & 1);
        best = std::max(best, std::abs(s));
    }
    return best;
}

JointDistribution fritz_distribution(bool relabel_y) {
    CHSHTable t = chsh_table();
    std::vector<double> pmf(64, 0.0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) {
                    int X = 2 * x + b, Y = 2 * (relabel_y ? 1 - y : y) + a, Z = 2 * a + b;
                    pmf[static_cast<std::size_t>(16 * X + 4 * Y + Z)] += 0.25 * t[a][b][x][y];
                }
    return JointDistribution::real(VariableSet({"X", "Y", "Z"}), {4, 4, 4}, pmf);
}

// ---------------------------------------------------------------- solid angle

namespace {

struct ShardResult {
    std::uint64_t hits = 0, discarded = 0;
};

// Rows are small integers and samples lie on the unit sphere, so a double evaluation is off by
// far less than the guard band; outside the band its sign is the exact sign on the sample's
// own (dyadic rational) coordinates.
ShardResult run_shard(const std::vector<std::vector<double>>& ineqs, const std::vector<std::vector<double>>& eqs,
                      std::size_t dim, std::uint64_t count, std::uint64_t seed, std::uint64_t shard) {
    const double guard = 1e-12;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(dim);
    ShardResult r;
    std::uint64_t done = 0;
    while (done < count) {
        double norm = 0;
        for (auto& v : x) {
            v = std::abs(normal(rng));
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : x) v /= norm;
        bool outside = false, near = false;
        auto check = [&](const std::vector<double>& row, bool equality) {
            double s = 0;
            for (std::size_t i = 0; i < dim; ++i) s += row[i] * x[i];
            if (std::abs(s) < guard)
                near = true;
            else if (s < 0 || equality)
                outside = true;
        };
        for (const auto& row : ineqs) {
            check(row, false);
            if (outside) break;
        }
        if (!outside)
            for (const auto& row : eqs) {
                check(row, true);
                if (outside) break;
            }
        if (!outside && near) {
            ++r.discarded;
            continue;
        }
        ++done;
        if (!outside) ++r.hits;
    }
    return r;
}

}  // namespace

SolidAngleEstimate solid_angle(const Cone& cone, std::uint64_t samples, std::uint64_t seed, int workers, int shards) {
    if (samples == 0) throw std::invalid_argument("solid_angle: samples must be positive");
    if (cone.dim() == 0) throw std::invalid_argument("solid_angle: zero-dimensional cone");
    if (shards < 1) shards = 1;
    if (workers < 1) workers = 1;
    auto to_double = [](const IntVec& row) {
        std::vector<double> out;
        for (const auto& z : row) out.push_back(z.get_d());
        return out;
    };
    std::vector<std::vector<double>> ineqs, eqs;
    for (const auto& r : cone.ineqs) ineqs.push_back(to_double(r));
    for (const auto& r : cone.eqs) eqs.push_back(to_double(r));
    const auto n = static_cast<std::uint64_t>(shards);
    std::vector<ShardResult> results(static_cast<std::size_t>(shards));
    auto work = [&](int w) {
        for (int s = w; s < shards; s += workers) {
            auto us = static_cast<std::uint64_t>(s);
            std::uint64_t count = samples / n + (us < samples % n ? 1 : 0);
            results[static_cast<std::size_t>(s)] = run_shard(ineqs, eqs, cone.dim(), count, seed, us);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    SolidAngleEstimate e;
    e.samples = samples;
    e.seed = seed;
    for (const auto& r : results) {
        e.hits += r.hits;
        e.discarded += r.discarded;
    }
    e.alpha = static_cast<double>(e.hits) / static_cast<double>(samples);
    e.standard_error = std::sqrt(e.alpha * (1 - e.alpha) / static_cast<double>(samples));
    return e;
}

}  // namespace entcone
