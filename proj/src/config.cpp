#include "thyp/config.hpp"

#include "thyp/errors.hpp"
#include "thyp/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace thyp::cli {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    os << msg;
    throw ConfigError(os.str());
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    Document run() {
        Document doc;
        std::string section;
        doc[section];
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            const int line = line_;
            if (peek() == '[') {
                ++pos_;
                skip_ws();
                section = identifier();
                skip_ws();
                expect(']');
                if (doc.count(section) && section != "") fail(line, "duplicate section [" + section + "]");
                doc[section];
            } else {
                const std::string key = identifier();
                skip_ws();
                expect('=');
                skip_ws();
                Value v = value();
                auto& tbl = doc[section];
                if (tbl.count(key)) fail(line, "duplicate key '" + key + "'");
                tbl[key] = std::move(v);
            }
            end_of_line();
        }
        return doc;
    }

private:
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }
    void skip_comment() {
        if (peek() == '#') {
            while (!eof() && peek() != '\n') ++pos_;
        }
    }
    void skip_blank_lines() {
        while (true) {
            skip_ws();
            skip_comment();
            if (peek() != '\n') return;
            ++pos_;
            ++line_;
        }
    }
    // whitespace, comments and newlines inside arrays
    void skip_space_any() {
        while (true) {
            skip_ws();
            skip_comment();
            if (peek() != '\n') return;
            ++pos_;
            ++line_;
        }
    }
    void end_of_line() {
        skip_ws();
        skip_comment();
        if (eof()) return;
        if (peek() != '\n') fail(line_, std::string("unexpected '") + peek() + "'");
        ++pos_;
        ++line_;
    }
    void expect(char c) {
        if (peek() != c) fail(line_, std::string("expected '") + c + "'");
        ++pos_;
    }
    std::string identifier() {
        std::string id;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-')) {
            id += s_[pos_++];
        }
        if (id.empty()) fail(line_, "expected a name");
        return id;
    }

    Value value() {
        Value v;
        v.line = line_;
        const char c = peek();
        if (c == '"') {
            v.kind = Value::Kind::String;
            ++pos_;
            while (true) {
                if (eof() || peek() == '\n') fail(v.line, "unterminated string");
                char ch = s_[pos_++];
                if (ch == '"') break;
                if (ch == '\\') {
                    if (eof()) fail(v.line, "unterminated string");
                    const char e = s_[pos_++];
                    switch (e) {
                        case 'n': ch = '\n'; break;
                        case 't': ch = '\t'; break;
                        case '"': ch = '"'; break;
                        case '\\': ch = '\\'; break;
                        default: fail(v.line, std::string("unknown escape \\") + e);
                    }
                }
                v.text += ch;
            }
        } else if (c == '[') {
            v.kind = Value::Kind::Array;
            ++pos_;
            skip_space_any();
            while (peek() != ']') {
                v.items.push_back(value());
                skip_space_any();
                if (peek() == ',') {
                    ++pos_;
                    skip_space_any();
                } else if (peek() != ']') {
                    fail(line_, "expected ',' or ']' in array");
                }
            }
            ++pos_;
        } else {
            std::string tok;
            while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' &&
                   peek() != ']' && peek() != '#') {
                tok += s_[pos_++];
            }
            if (tok == "true" || tok == "false") {
                v.kind = Value::Kind::Bool;
                v.boolean = tok == "true";
            } else {
                v.kind = Value::Kind::Number;
                v.number = parse_number(tok, v.line);
            }
        }
        return v;
    }

    static double parse_number(const std::string& tok, int line) {
        if (tok.empty()) fail(line, "missing value");
        if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
        if (tok == "-inf") return -std::numeric_limits<double>::infinity();
        if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
        std::string clean;
        for (char ch : tok) {
            if (ch != '_') clean += ch;
        }
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(clean, &used);
        } catch (const std::exception&) {
            fail(line, "not a value: '" + tok + "'");
        }
        if (used != clean.size()) fail(line, "not a value: '" + tok + "'");
        return d;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

nlohmann::json value_json(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Number: return io::number(v.number);
        case Value::Kind::Bool: return v.boolean;
        case Value::Kind::String: return v.text;
        case Value::Kind::Array: {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& it : v.items) a.push_back(value_json(it));
            return a;
        }
    }
    return nullptr;
}

// Typed access to one section; remembers which keys were read.
class Section {
public:
    Section(const Document& doc, const std::string& name) : name_(name) {
        if (auto it = doc.find(name); it != doc.end()) tbl_ = &it->second;
    }

    void number(const char* key, double& out) {
        if (const Value* v = find(key)) out = as_number(*v, key);
    }
    void integer(const char* key, int& out) {
        if (const Value* v = find(key)) out = as_int(*v, key);
    }
    void boolean(const char* key, bool& out) {
        if (const Value* v = find(key)) {
            if (v->kind != Value::Kind::Bool) fail(v->line, where(key) + " must be true or false");
            out = v->boolean;
        }
    }
    void string(const char* key, std::string& out) {
        if (const Value* v = find(key)) {
            if (v->kind != Value::Kind::String) fail(v->line, where(key) + " must be a string");
            out = v->text;
        }
    }
    // Scalars are accepted as one-element lists; nested arrays are flattened.
    void numbers(const char* key, std::vector<double>& out) {
        if (const Value* v = find(key)) {
            out.clear();
            flatten(*v, key, out);
        }
    }
    void unsigned64(const char* key, std::uint64_t& out) {
        if (const Value* v = find(key)) {
            const double d = as_number(*v, key);
            if (d < 0 || d != std::floor(d) || d >= 18446744073709551616.0) {
                fail(v->line, where(key) + " must be a non-negative integer");
            }
            out = static_cast<std::uint64_t>(d);
        }
    }

    void reject_unknown() const {
        if (!tbl_) return;
        for (const auto& [key, v] : *tbl_) {
            if (!used_.count(key)) fail(v.line, "unknown key " + where(key.c_str()));
        }
    }

private:
    const Value* find(const char* key) {
        used_.insert(key);
        if (!tbl_) return nullptr;
        auto it = tbl_->find(key);
        return it == tbl_->end() ? nullptr : &it->second;
    }
    std::string where(const char* key) const {
        return name_.empty() ? std::string("'") + key + "'"
                             : "'" + name_ + "." + key + "'";
    }
    double as_number(const Value& v, const char* key) const {
        if (v.kind != Value::Kind::Number) fail(v.line, where(key) + " must be a number");
        return v.number;
    }
    int as_int(const Value& v, const char* key) const {
        const double d = as_number(v, key);
        if (d != std::floor(d) || std::abs(d) > 2e9) fail(v.line, where(key) + " must be an integer");
        return static_cast<int>(d);
    }
    void flatten(const Value& v, const char* key, std::vector<double>& out) const {
        if (v.kind == Value::Kind::Array) {
            for (const auto& it : v.items) flatten(it, key, out);
        } else {
            out.push_back(as_number(v, key));
        }
    }

    std::string name_;
    const std::map<std::string, Value>* tbl_ = nullptr;
    std::set<std::string> used_;
};

Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool is_fluid(const std::string& name) { return name == "euler" || name == "bulk-viscous"; }

}  // namespace

Document parse_document(const std::string& text) { return Parser(text).run(); }

nlohmann::json to_json(const Document& doc) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [section, tbl] : doc) {
        if (section.empty()) {
            for (const auto& [k, v] : tbl) j[k] = value_json(v);
        } else {
            auto& s = j[section];
            s = nlohmann::json::object();
            for (const auto& [k, v] : tbl) s[k] = value_json(v);
        }
    }
    return j;
}

RunConfig interpret(const Document& doc) {
    static const std::set<std::string> known{"",      "model", "grid",   "solve", "initial",
                                             "scan",  "probe", "speeds", "output"};
    for (const auto& [name, tbl] : doc) {
        if (!known.count(name)) {
            const int line = tbl.empty() ? 0 : tbl.begin()->second.line;
            fail(line, "unknown section [" + name + "]");
        }
    }
    RunConfig cfg;
    cfg.document = doc;

    Section top(doc, "");
    top.string("command", cfg.command);
    top.unsigned64("seed", cfg.seed);
    top.reject_unknown();

    Section model(doc, "model");
    ModelSpec& m = cfg.model;
    model.string("name", m.name);
    model.numbers("speeds", m.speeds);
    model.number("speed", m.speed);
    model.number("rate", m.rate);
    model.numbers("matrix", m.matrix);
    model.string("eos", m.eos);
    model.number("K", m.K);
    model.number("gamma", m.gamma);
    model.number("B", m.B);
    model.number("beta", m.beta);
    model.string("eos_table", m.eos_table);
    model.number("tau", m.tau);
    model.number("zeta", m.zeta);
    model.integer("space_dim", m.space_dim);
    model.number("normalization_slack", m.normalization_slack);
    model.reject_unknown();

    Section grid(doc, "grid");
    grid.integer("N", cfg.N);
    grid.integer("n", cfg.n);
    grid.reject_unknown();

    Section solve(doc, "solve");
    SolveConfig& sc = cfg.solve;
    solve.number("s", sc.s);
    solve.number("T", sc.T_request);
    solve.number("dt_cfl", sc.dt_cfl);
    solve.number("dt_max", sc.dt_max);
    solve.number("fixed_dt", sc.fixed_dt);
    solve.number("picard_tol", sc.picard_tol);
    solve.integer("picard_max", sc.picard_max);
    solve.integer("T_halvings_max", sc.T_halvings_max);
    solve.integer("energy_stride", sc.energy_stride);
    solve.number("margin_floor", sc.margin_floor);
    solve.number("blowup_abs", sc.blowup_abs);
    solve.number("blowup_factor", sc.blowup_factor);
    solve.number("blowup_window", sc.blowup_window);
    solve.number("resolution_tol", sc.resolution_tol);
    solve.number("seed_perturbation", sc.seed_perturbation);
    solve.reject_unknown();

    Section init(doc, "initial");
    InitialSpec& in = cfg.initial;
    init.string("profile", in.profile);
    init.numbers("background", in.background);
    init.numbers("amplitude", in.amplitude);
    init.numbers("wavenumber", in.wavenumber);
    init.number("width", in.width);
    init.numbers("center", in.center);
    init.string("snapshot", in.snapshot);
    init.reject_unknown();

    Section scan(doc, "scan");
    ScanSpec& sp = cfg.scan;
    scan.integer("states", sp.states);
    scan.integer("directions", sp.directions);
    scan.integer("points", sp.points);
    scan.numbers("times", sp.times);
    scan.number("radius", sp.radius);
    scan.integer("max_witnesses", sp.max_witnesses);
    scan.number("rho_min", sp.ranges.rho_min);
    scan.number("rho_max", sp.ranges.rho_max);
    scan.number("aux_min", sp.ranges.aux_min);
    scan.number("aux_max", sp.ranges.aux_max);
    scan.number("Pi_min", sp.ranges.Pi_min);
    scan.number("Pi_max", sp.ranges.Pi_max);
    scan.number("speed_max", sp.ranges.speed_max);
    scan.numbers("lo", sp.lo);
    scan.numbers("hi", sp.hi);
    scan.reject_unknown();

    Section probe(doc, "probe");
    probe.numbers("deltas", cfg.probe.deltas);
    probe.reject_unknown();

    Section speeds(doc, "speeds");
    SpeedsSpec& ss = cfg.speeds;
    speeds.numbers("state", ss.state);
    speeds.numbers("direction", ss.direction);
    speeds.integer("component", ss.component);
    speeds.number("from", ss.from);
    speeds.number("to", ss.to);
    speeds.integer("count", ss.count);
    speeds.reject_unknown();

    Section output(doc, "output");
    output.integer("snapshots", cfg.output.snapshots);
    output.reject_unknown();

    if (!cfg.command.empty()) {
        static const std::set<std::string> cmds{"scan", "solve", "probe", "speeds"};
        if (!cmds.count(cfg.command)) fail(0, "unknown command '" + cfg.command + "'");
    }
    if (cfg.n < 4) fail(0, "grid.n must be at least 4");
    if (sp.states < 1 || sp.directions < 1 || sp.points < 1) {
        fail(0, "scan counts must be positive");
    }
    if (ss.count < 2) fail(0, "speeds.count must be at least 2");
    if (cfg.output.snapshots < 0) fail(0, "output.snapshots must be non-negative");
    if (cfg.probe.deltas.size() < 2) fail(0, "probe.deltas needs at least two entries");
    for (double d : cfg.probe.deltas) {
        if (!(d > 0.0)) fail(0, "probe.deltas must be positive");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return interpret(parse_document(buf.str()));
}

SystemDef build_system(const ModelSpec& spec) {
    try {
        if (spec.name == "advection") {
            if (spec.speeds.empty()) fail(0, "model.speeds must not be empty");
            return models::make_advection(spec.speeds);
        }
        if (spec.name == "burgers") return models::make_burgers();
        if (spec.name == "drift") return models::make_drift(spec.speed, spec.rate);
        if (spec.name == "constant-coefficient") {
            const auto m = static_cast<Eigen::Index>(std::llround(std::sqrt(spec.matrix.size())));
            if (m == 0 || static_cast<std::size_t>(m * m) != spec.matrix.size()) {
                fail(0, "model.matrix must hold m*m entries");
            }
            Mat A(m, m);
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = 0; j < m; ++j) {
                    A(i, j) = spec.matrix[static_cast<std::size_t>(i * m + j)];
                }
            }
            return models::make_constant_coefficient(A);
        }
        if (is_fluid(spec.name)) {
            if (spec.space_dim < 1 || spec.space_dim > 3) fail(0, "model.space_dim must be 1, 2 or 3");
            models::EquationOfState eos;
            if (spec.eos == "barotropic") {
                eos = models::EquationOfState::barotropic(spec.K, spec.gamma);
            } else if (spec.eos == "power-sum") {
                eos = models::EquationOfState::power_sum(spec.K, spec.gamma, spec.B, spec.beta);
            } else if (spec.eos == "tabulated") {
                if (spec.eos_table.empty()) fail(0, "model.eos_table is required for a tabulated EOS");
                eos = models::EquationOfState::from_csv(spec.eos_table);
            } else {
                fail(0, "unknown EOS '" + spec.eos + "'");
            }
            models::FluidOptions opts;
            opts.space_dim = spec.space_dim;
            opts.normalization_slack = spec.normalization_slack;
            if (spec.name == "euler") return models::make_relativistic_euler(eos, opts);
            return models::make_bulk_viscous(eos, models::constant(spec.tau),
                                             models::constant(spec.zeta), opts);
        }
    } catch (const IoError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    fail(0, "unknown model '" + spec.name + "'");
}

TorusField build_initial(const RunConfig& cfg, const SystemDef& sys, const TorusGrid& grid) {
    const InitialSpec& in = cfg.initial;
    const int m = sys.m;
    const int N = grid.dim();
    TorusField u(grid, m);

    if (in.profile == "snapshot") {
        if (in.snapshot.empty()) fail(0, "initial.snapshot path is required");
        double t = 0.0;
        TorusField f = io::read_snapshot(in.snapshot, t);
        if (!(f.grid() == grid) || f.components() != m) {
            fail(0, "snapshot grid or component count does not match the configuration");
        }
        return f;
    }

    Vec background = Vec::Zero(m);
    if (!in.background.empty()) {
        if (static_cast<int>(in.background.size()) != m) {
            fail(0, "initial.background must have one entry per component");
        }
        background = to_vec(in.background);
    } else if (cfg.model.name == "euler") {
        background = models::euler_state({0, 0, 0}, 1.0, 1.0);
    } else if (cfg.model.name == "bulk-viscous") {
        background = models::bulk_state({0, 0, 0}, 1.0, 1.0, 0.0);
    }
    Vec amp(m);
    if (in.amplitude.size() == 1) {
        amp.setConstant(in.amplitude[0]);
    } else if (static_cast<int>(in.amplitude.size()) == m) {
        amp = to_vec(in.amplitude);
    } else {
        fail(0, "initial.amplitude must have 1 or m entries");
    }
    std::vector<double> k = in.wavenumber;
    if (k.size() == 1) k.assign(static_cast<std::size_t>(N), k[0]);
    if (static_cast<int>(k.size()) != N) fail(0, "initial.wavenumber must have 1 or N entries");
    std::vector<double> center = in.center;
    if (center.empty()) center.assign(static_cast<std::size_t>(N), std::numbers::pi);
    if (static_cast<int>(center.size()) != N) fail(0, "initial.center must have N entries");
    if (!(in.width > 0.0)) fail(0, "initial.width must be positive");

    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Vec x = grid.point(p);
        double shape = 0.0;
        if (in.profile == "sine" || in.profile == "constant-plus-sine") {
            double phase = 0.0;
            for (int d = 0; d < N; ++d) phase += k[static_cast<std::size_t>(d)] * x[d];
            shape = std::sin(phase);
        } else if (in.profile == "gaussian-bump") {
            // periodized by summing the nearest images
            shape = 1.0;
            for (int d = 0; d < N; ++d) {
                double acc = 0.0;
                for (int img = -2; img <= 2; ++img) {
                    const double r = x[d] - center[static_cast<std::size_t>(d)] +
                                     2.0 * std::numbers::pi * img;
                    acc += std::exp(-0.5 * r * r / (in.width * in.width));
                }
                shape *= acc;
            }
        } else {
            fail(0, "unknown initial profile '" + in.profile + "'");
        }
        Vec z = background + amp * shape;
        if (sys.project) sys.project(z);
        u.set_state(p, z);
    }
    return u;
}

}  // namespace thyp::cli
