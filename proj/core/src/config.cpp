#include "powvar/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace powvar {

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::VariationLadder: return "variation_ladder";
        case ExperimentKind::RateFit: return "rate_fit";
        case ExperimentKind::CriticalH16: return "critical_h16";
        case ExperimentKind::ItoCheck: return "ito_check";
        case ExperimentKind::Conditions: return "conditions";
        case ExperimentKind::MartingaleCase: return "martingale_case";
        case ExperimentKind::MuMass: return "mu_mass";
    }
    return "?";
}

namespace {

struct Value {
    enum class Type { String, Number, Bool, Array, Table };
    Type type = Type::Number;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<Value> array;
    std::vector<std::pair<std::string, Value>> table;
    int line = 0;
};

struct Parser {
    const std::string& src;
    std::size_t pos = 0;
    int line;
    std::vector<Diagnostic>& diags;

    void skipSpace() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
    }
    bool fail(const std::string& msg) {
        diags.push_back({line, "", msg});
        return false;
    }
    bool parseValue(Value& v) {
        skipSpace();
        v.line = line;
        if (pos >= src.size()) return fail("missing value");
        char c = src[pos];
        if (c == '"') return parseString(v);
        if (c == '[') return parseArray(v);
        if (c == '{') return parseTable(v);
        return parseScalar(v);
    }
    bool parseString(Value& v) {
        ++pos;
        std::string out;
        while (pos < src.size() && src[pos] != '"') out += src[pos++];
        if (pos >= src.size()) return fail("unterminated string");
        ++pos;
        v.type = Value::Type::String;
        v.str = out;
        return true;
    }
    bool parseScalar(Value& v) {
        std::size_t start = pos;
        while (pos < src.size() && src[pos] != ',' && src[pos] != ']' &&
               src[pos] != '}' && src[pos] != ' ' && src[pos] != '\t')
            ++pos;
        std::string tok = src.substr(start, pos - start);
        if (tok == "true" || tok == "false") {
            v.type = Value::Type::Bool;
            v.boolean = tok == "true";
            return true;
        }
        try {
            std::size_t used = 0;
            v.num = std::stod(tok, &used);
            if (used != tok.size()) return fail("malformed number '" + tok + "'");
            v.type = Value::Type::Number;
            return true;
        } catch (...) {
            return fail("malformed value '" + tok + "'");
        }
    }
    bool parseArray(Value& v) {
        ++pos;
        v.type = Value::Type::Array;
        skipSpace();
        if (pos < src.size() && src[pos] == ']') { ++pos; return true; }
        while (true) {
            Value item;
            if (!parseValue(item)) return false;
            v.array.push_back(std::move(item));
            skipSpace();
            if (pos < src.size() && src[pos] == ',') { ++pos; continue; }
            if (pos < src.size() && src[pos] == ']') { ++pos; return true; }
            return fail("expected ',' or ']' in array");
        }
    }
    bool parseTable(Value& v) {
        ++pos;
        v.type = Value::Type::Table;
        skipSpace();
        if (pos < src.size() && src[pos] == '}') { ++pos; return true; }
        while (true) {
            skipSpace();
            std::size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum((unsigned char)src[pos]) || src[pos] == '_'))
                ++pos;
            std::string key = src.substr(start, pos - start);
            if (key.empty()) return fail("expected key in inline table");
            skipSpace();
            if (pos >= src.size() || src[pos] != '=')
                return fail("expected '=' after key '" + key + "'");
            ++pos;
            Value item;
            if (!parseValue(item)) return false;
            v.table.emplace_back(key, std::move(item));
            skipSpace();
            if (pos < src.size() && src[pos] == ',') { ++pos; continue; }
            if (pos < src.size() && src[pos] == '}') { ++pos; return true; }
            return fail("expected ',' or '}' in table");
        }
    }
};

/// Wraps a parsed table and records which keys the schema consumed;
/// leftovers become hard errors.
struct TableReader {
    const Value* tbl;
    std::vector<Diagnostic>& diags;
    std::set<std::string> used;
    std::string scope;

    const Value* find(const std::string& key) {
        used.insert(key);
        for (auto& [k, v] : tbl->table)
            if (k == key) return &v;
        return nullptr;
    }
    bool number(const std::string& key, double& out, bool required = false) {
        const Value* v = find(key);
        if (!v) {
            if (required)
                diags.push_back({tbl->line, scope + key, "missing required key"});
            return false;
        }
        if (v->type != Value::Type::Number) {
            diags.push_back({v->line, scope + key, "expected a number"});
            return false;
        }
        out = v->num;
        return true;
    }
    bool integer(const std::string& key, int& out, bool required = false) {
        double d;
        if (!number(key, d, required)) return false;
        out = (int)std::llround(d);
        if ((double)out != d) {
            diags.push_back({tbl->line, scope + key, "expected an integer"});
            return false;
        }
        return true;
    }
    bool string(const std::string& key, std::string& out, bool required = false) {
        const Value* v = find(key);
        if (!v) {
            if (required)
                diags.push_back({tbl->line, scope + key, "missing required key"});
            return false;
        }
        if (v->type != Value::Type::String) {
            diags.push_back({v->line, scope + key, "expected a string"});
            return false;
        }
        out = v->str;
        return true;
    }
    bool boolean(const std::string& key, bool& out) {
        const Value* v = find(key);
        if (!v) return false;
        if (v->type != Value::Type::Bool) {
            diags.push_back({v->line, scope + key, "expected true/false"});
            return false;
        }
        out = v->boolean;
        return true;
    }
    void finish() {
        for (auto& [k, v] : tbl->table)
            if (!used.count(k))
                diags.push_back({v.line, scope + k, "unknown key"});
    }
};

KernelSpec readKernel(const Value& v, std::vector<Diagnostic>& diags,
                      const std::string& scope) {
    KernelSpec spec;
    if (v.type != Value::Type::Table) {
        diags.push_back({v.line, scope, "kernel must be an inline table"});
        return spec;
    }
    TableReader t{&v, diags, {}, scope + "."};
    std::string family;
    t.string("family", family, true);
    double horizon = 1.0;
    t.number("horizon", horizon);
    spec.horizon = horizon;
    if (family == "fbm_exact" || family == "rl_fbm") {
        spec.family = family == "fbm_exact" ? KernelFamily::FbmExact
                                            : KernelFamily::RLfBm;
        double h = 0.5;
        t.number("hurst", h, true);
        spec.hurst = h;
    } else if (family == "volterra_concave") {
        spec.family = KernelFamily::VolterraConcave;
        const Value* g2 = t.find("gamma2");
        if (!g2 || g2->type != Value::Type::Table) {
            diags.push_back({v.line, scope + ".gamma2", "missing gamma2 table"});
        } else {
            TableReader g{g2, diags, {}, scope + ".gamma2."};
            std::string kind;
            g.string("kind", kind, true);
            if (kind == "power") {
                spec.gamma2.kind = Gamma2Spec::Kind::Power;
                double h = 0.25;
                g.number("hurst", h, true);
                spec.gamma2.hurst = h;
                spec.hurst = h;
            } else if (kind == "power_log") {
                spec.gamma2.kind = Gamma2Spec::Kind::PowerLog;
                int m = 3;
                g.integer("m", m, true);
                spec.gamma2.m = m;
                spec.hurst = 1.0 / (4.0 * m);
            } else if (!kind.empty()) {
                diags.push_back({g2->line, scope + ".gamma2.kind",
                                 "unknown gamma2 kind '" + kind + "'"});
            }
            g.finish();
        }
    } else if (family == "scaled_martingale") {
        spec.family = KernelFamily::ScaledMartingale;
        const Value* base = t.find("base");
        if (!base)
            diags.push_back({v.line, scope + ".base", "missing base kernel"});
        else
            spec.base = std::make_shared<KernelSpec>(
                readKernel(*base, diags, scope + ".base"));
        if (spec.base) {
            spec.hurst = spec.base->hurst;
            spec.horizon = spec.base->horizon;
        }
        const Value* gv = t.find("gamma");
        if (!gv || gv->type != Value::Type::Table) {
            diags.push_back({v.line, scope + ".gamma", "missing gamma table"});
        } else {
            TableReader g{gv, diags, {}, scope + ".gamma."};
            std::string kind;
            g.string("kind", kind, true);
            double c = 1.0;
            g.number("c", c);
            int mm = 3;
            g.integer("m", mm);
            if (kind == "constant")
                spec.gamma = GammaScale{GammaScale::Kind::Constant, c, mm};
            else if (kind == "sqrt_linear")
                spec.gamma = GammaScale{GammaScale::Kind::SqrtLinear, c, mm};
            else if (kind == "sin_moment")
                spec.gamma = GammaScale{GammaScale::Kind::SinMoment, c, mm};
            else if (!kind.empty())
                diags.push_back({gv->line, scope + ".gamma.kind",
                                 "unknown gamma kind '" + kind + "'"});
            g.finish();
        }
    } else if (!family.empty()) {
        diags.push_back(
            {v.line, scope + ".family", "unknown kernel family '" + family + "'"});
    }
    t.finish();
    return spec;
}

}  // namespace

std::vector<Diagnostic> parse_config(const std::string& text,
                                     ExperimentConfig& out) {
    std::vector<Diagnostic> diags;
    Value root;
    root.type = Value::Type::Table;
    root.line = 0;

    std::istringstream in(text);
    std::string rawline;
    int lineno = 0;
    while (std::getline(in, rawline)) {
        ++lineno;
        // Strip comments outside strings.
        std::string stripped;
        bool instr = false;
        for (char c : rawline) {
            if (c == '"') instr = !instr;
            if (c == '#' && !instr) break;
            stripped += c;
        }
        std::size_t first = stripped.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            diags.push_back({lineno, "", "expected 'key = value'"});
            continue;
        }
        std::string key = stripped.substr(first, eq - first);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t'))
            key.pop_back();
        bool ident = !key.empty();
        for (char c : key)
            if (!std::isalnum((unsigned char)c) && c != '_') ident = false;
        if (!ident) {
            diags.push_back({lineno, key, "malformed key"});
            continue;
        }
        std::string rest = stripped.substr(eq + 1);
        Parser p{rest, 0, lineno, diags};
        Value v;
        if (!p.parseValue(v)) continue;
        p.skipSpace();
        if (p.pos != rest.size() && rest.find_first_not_of(" \t\r", p.pos) !=
                                        std::string::npos) {
            diags.push_back({lineno, key, "trailing characters after value"});
            continue;
        }
        root.table.emplace_back(key, std::move(v));
    }

    TableReader t{&root, diags, {}, ""};
    std::string exp;
    t.string("experiment", exp, true);
    if (exp == "variation_ladder") out.experiment = ExperimentKind::VariationLadder;
    else if (exp == "rate_fit") out.experiment = ExperimentKind::RateFit;
    else if (exp == "critical_h16") out.experiment = ExperimentKind::CriticalH16;
    else if (exp == "ito_check") out.experiment = ExperimentKind::ItoCheck;
    else if (exp == "conditions") out.experiment = ExperimentKind::Conditions;
    else if (exp == "martingale_case") out.experiment = ExperimentKind::MartingaleCase;
    else if (exp == "mu_mass") out.experiment = ExperimentKind::MuMass;
    else if (!exp.empty())
        diags.push_back({root.line, "experiment", "unknown experiment '" + exp + "'"});

    t.integer("m", out.m);
    double seed = 1;
    if (t.number("seed", seed)) out.seed = (std::uint64_t)seed;
    t.integer("n_paths", out.n_paths);
    t.string("output_dir", out.output_dir);
    t.integer("inner_refine", out.inner_refine);
    t.integer("mu_grid_n", out.mu_grid_n);

    if (const Value* v = t.find("kernel")) out.kernel = readKernel(*v, diags, "kernel");
    else diags.push_back({0, "kernel", "missing required key"});

    if (const Value* v = t.find("grid")) {
        if (v->type != Value::Type::Table) {
            diags.push_back({v->line, "grid", "grid must be an inline table"});
        } else {
            TableReader g{v, diags, {}, "grid."};
            double horizon = 1.0, eps_max = 0.0;
            int step_log2 = -10;
            g.number("horizon", horizon, true);
            g.number("epsilon_max", eps_max, true);
            g.integer("step_log2", step_log2, true);
            g.finish();
            try {
                out.grid = TimeGrid::dyadic(horizon, eps_max, step_log2);
            } catch (const std::exception& e) {
                diags.push_back({v->line, "grid", e.what()});
            }
        }
    } else if (out.experiment != ExperimentKind::Conditions &&
               out.experiment != ExperimentKind::MuMass &&
               out.experiment != ExperimentKind::RateFit) {
        diags.push_back({0, "grid", "missing required key"});
    }

    if (const Value* v = t.find("eps_ladder")) {
        if (v->type != Value::Type::Array) {
            diags.push_back({v->line, "eps_ladder", "expected an array"});
        } else {
            for (auto& item : v->array) {
                if (item.type != Value::Type::Number) {
                    diags.push_back({item.line, "eps_ladder", "expected numbers"});
                    break;
                }
                out.eps_ladder.push_back(item.num);
            }
        }
    }

    if (const Value* v = t.find("quad")) {
        if (v->type != Value::Type::Table) {
            diags.push_back({v->line, "quad", "quad must be an inline table"});
        } else {
            TableReader q{v, diags, {}, "quad."};
            q.integer("nodes", out.quad.nodes);
            q.integer("max_refinements", out.quad.max_refinements);
            q.number("rel_tol", out.quad.rel_tol);
            q.finish();
        }
    }

    if (const Value* v = t.find("driver")) {
        if (v->type != Value::Type::Table) {
            diags.push_back({v->line, "driver", "driver must be an inline table"});
        } else {
            TableReader d{v, diags, {}, "driver."};
            std::string kind = "wiener";
            d.string("kind", kind, true);
            double c = 1.0;
            d.number("c", c);
            d.finish();
            int m = out.m;
            if (kind == "wiener") out.driver = DriverSpec::wiener();
            else if (kind == "constant") out.driver = DriverSpec::constant(c, m);
            else if (kind == "linear") out.driver = DriverSpec::linear(m);
            else if (kind == "sin") out.driver = DriverSpec::sinOfDriver(m);
            else if (kind == "exp_square") out.driver = DriverSpec::expSquare(m);
            else
                diags.push_back({v->line, "driver.kind",
                                 "unknown driver kind '" + kind + "'"});
        }
    }

    if (const Value* v = t.find("verdict")) {
        if (v->type != Value::Type::Table) {
            diags.push_back({v->line, "verdict", "verdict must be an inline table"});
        } else {
            TableReader w{v, diags, {}, "verdict."};
            w.number("expected_slope", out.verdict.expected_slope);
            w.number("slope_tol", out.verdict.slope_tol);
            w.number("min_r2", out.verdict.min_r2);
            w.boolean("require_decreasing", out.verdict.require_decreasing);
            w.boolean("compare_exact", out.verdict.compare_exact);
            w.number("ratio_max", out.verdict.ratio_max);
            w.number("ratio_lo", out.verdict.ratio_lo);
            w.number("ratio_hi", out.verdict.ratio_hi);
            w.finish();
        }
    }

    if (const Value* v = t.find("probe")) {
        if (v->type != Value::Type::Table) {
            diags.push_back({v->line, "probe", "probe must be an inline table"});
        } else {
            TableReader w{v, diags, {}, "probe."};
            w.string("mode", out.probe.mode);
            w.number("eps", out.probe.eps);
            w.number("eps_prime", out.probe.eps_prime);
            w.number("factor", out.probe.factor);
            w.finish();
        }
    }

    if (const Value* v = t.find("ito")) {
        if (v->type != Value::Type::Table) {
            diags.push_back({v->line, "ito", "ito must be an inline table"});
        } else {
            TableReader w{v, diags, {}, "ito."};
            w.string("f", out.ito.f);
            w.finish();
        }
    }

    if (const Value* v = t.find("conditions")) {
        if (v->type != Value::Type::Table) {
            diags.push_back(
                {v->line, "conditions", "conditions must be an inline table"});
        } else {
            TableReader w{v, diags, {}, "conditions."};
            w.number("a", out.conditions.a);
            w.number("b", out.conditions.b);
            w.number("c", out.conditions.c);
            w.number("cprime", out.conditions.cprime);
            w.integer("probe_n", out.conditions.probe_n);
            w.boolean("expect_i", out.conditions.expect_i);
            w.boolean("expect_ii", out.conditions.expect_ii);
            w.boolean("expect_iii", out.conditions.expect_iii);
            w.boolean("expect_concavity", out.conditions.expect_concavity);
            w.finish();
        }
    }

    t.finish();
    return diags;
}

namespace {

bool needsPaths(ExperimentKind k) {
    return k == ExperimentKind::VariationLadder || k == ExperimentKind::ItoCheck ||
           k == ExperimentKind::MartingaleCase;
}

bool needsLadder(ExperimentKind k) {
    return k != ExperimentKind::Conditions;
}

}  // namespace

std::vector<Diagnostic> validate_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::vector<Diagnostic> diags = parse_config(text, cfg);

    if (cfg.m % 2 == 0 || cfg.m < 1)
        diags.push_back({0, "m", "m must be odd"});
    try {
        cfg.kernel.validate();
    } catch (const std::exception& e) {
        diags.push_back({0, "kernel", e.what()});
    }
    bool mc = needsPaths(cfg.experiment) ||
              (cfg.experiment == ExperimentKind::CriticalH16 &&
               cfg.probe.mode != "none");
    if (mc && cfg.n_paths < 2)
        diags.push_back({0, "n_paths", "MC experiments need n_paths >= 2"});
    if (needsLadder(cfg.experiment) && cfg.eps_ladder.size() < 1)
        diags.push_back({0, "eps_ladder", "missing or empty eps_ladder"});
    for (std::size_t i = 0; i + 1 < cfg.eps_ladder.size(); ++i)
        if (!(cfg.eps_ladder[i + 1] < cfg.eps_ladder[i]))
            diags.push_back({0, "eps_ladder",
                             "ladder entries must be strictly decreasing"});
    bool needGrid = needsPaths(cfg.experiment) ||
                    (cfg.experiment == ExperimentKind::CriticalH16 &&
                     cfg.probe.mode != "none");
    if (needGrid) {
        try {
            cfg.grid.validate();
            for (double eps : cfg.eps_ladder) {
                try {
                    cfg.grid.indexOf(eps);
                } catch (const std::exception& e) {
                    diags.push_back({0, "eps_ladder", e.what()});
                }
                if (eps > cfg.grid.epsilon_max + 1e-12)
                    diags.push_back({0, "eps_ladder",
                                     "eps " + std::to_string(eps) +
                                         " exceeds grid epsilon_max"});
            }
        } catch (const std::exception& e) {
            diags.push_back({0, "grid", e.what()});
        }
    }
    if (cfg.experiment == ExperimentKind::MartingaleCase) {
        if (!cfg.kernel.causal())
            diags.push_back({0, "kernel", "martingale_case needs a causal kernel"});
        if (cfg.inner_refine < 4 || cfg.inner_refine > 64 ||
            (cfg.inner_refine & (cfg.inner_refine - 1)) != 0)
            diags.push_back({0, "inner_refine",
                             "inner_refine must be a power of two in [4, 64]"});
    }
    if (cfg.experiment == ExperimentKind::CriticalH16 &&
        cfg.probe.mode != "none" && cfg.probe.mode != "lower" &&
        cfg.probe.mode != "upper")
        diags.push_back({0, "probe.mode", "mode must be lower/upper/none"});
    if (cfg.experiment == ExperimentKind::Conditions) {
        const auto& c = cfg.conditions;
        if (!(c.a > 1.0)) diags.push_back({0, "conditions.a", "requires a > 1"});
        if (!(c.b > 0.0 && c.b < 0.5))
            diags.push_back({0, "conditions.b", "requires 0 < b < 1/2"});
        if (!(c.c > 0.25)) diags.push_back({0, "conditions.c", "requires c > 1/4"});
        if (!(c.cprime > 0.0))
            diags.push_back({0, "conditions.cprime", "requires c' > 0"});
    }
    if (cfg.experiment == ExperimentKind::MuMass && cfg.mu_grid_n < 64)
        diags.push_back({0, "mu_grid_n", "requires grid_n >= 64"});
    return diags;
}

std::vector<Diagnostic> validate_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {{0, path, "cannot open config file"}};
    std::stringstream ss;
    ss << in.rdbuf();
    return validate_config_text(ss.str());
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    auto diags = validate_config_text(text);
    if (!diags.empty()) {
        std::string msg = "invalid config " + path + ":";
        for (auto& d : diags)
            msg += "\n  line " + std::to_string(d.line) +
                   (d.field.empty() ? "" : " [" + d.field + "]") + ": " + d.message;
        throw std::runtime_error(msg);
    }
    ExperimentConfig cfg;
    parse_config(text, cfg);
    return cfg;
}

}  // namespace powvar
