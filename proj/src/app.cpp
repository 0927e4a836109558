#include "thyp/app.hpp"

#include "thyp/errors.hpp"
#include "thyp/io.hpp"
#include "thyp/models.hpp"
#include "thyp/solver.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>

#include <chrono>
#include <cstdio>
#include <numbers>
#include <random>

namespace thyp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

bool is_fluid(const std::string& name) { return name == "euler" || name == "bulk-viscous"; }

Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json versions() {
    char eigen[32];
    std::snprintf(eigen, sizeof eigen, "%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                  EIGEN_MINOR_VERSION);
    return {{"thyp", kVersion},
            {"eigen", eigen},
            {"fftw", std::string(fftw_version)},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

class Artifacts {
public:
    explicit Artifacts(fs::path root) : root_(std::move(root)) {}
    fs::path add(const std::string& rel) {
        list_.push_back(rel);
        return root_ / rel;
    }
    const std::vector<std::string>& list() const { return list_; }

private:
    fs::path root_;
    std::vector<std::string> list_;
};

int resolve_dim(const RunConfig& cfg, const SystemDef& sys) {
    if (cfg.N != 0 && cfg.N != sys.N) {
        throw ConfigError("grid.N = " + std::to_string(cfg.N) + " does not match the model dimension " +
                          std::to_string(sys.N));
    }
    return sys.N;
}

std::string run_scan(const RunConfig& cfg, const SystemDef& sys, Artifacts& art, int& code) {
    const ScanSpec& sc = cfg.scan;
    std::mt19937_64 rng(cfg.seed);
    SamplePlan plan;
    plan.times = sc.times;
    plan.radius = sc.radius;
    plan.max_witnesses = sc.max_witnesses;
    const int N = resolve_dim(cfg, sys);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < sc.points; ++k) {
        Vec x = Vec::Zero(N);
        if (k > 0) {
            for (int d = 0; d < N; ++d) x[d] = angle(rng);
        }
        plan.points.push_back(x);
    }
    if (cfg.model.name == "euler") {
        plan.states = models::sample_euler_states(sys, sc.ranges, sc.states, rng);
    } else if (cfg.model.name == "bulk-viscous") {
        plan.states = models::sample_bulk_states(sys, sc.ranges, sc.states, rng);
    } else {
        Vec lo = Vec::Constant(sys.m, -1.0), hi = Vec::Constant(sys.m, 1.0);
        if (!sc.lo.empty()) lo = to_vec(sc.lo);
        if (!sc.hi.empty()) hi = to_vec(sc.hi);
        if (lo.size() != sys.m || hi.size() != sys.m) {
            throw ConfigError("scan.lo and scan.hi need one entry per component");
        }
        plan.states = models::sample_box_states(sys, lo, hi, sc.states, rng);
    }
    if (plan.states.empty()) throw ConfigError("scan: no admissible states in the sampling ranges");
    plan.directions = unit_directions(N, sc.directions);

    const HyperbolicityReport report = scan_hyperbolicity(sys, plan);
    json j = io::to_json(report);
    j["model"] = sys.name;
    j["plan"] = {{"times", plan.times.size()},
                 {"points", plan.points.size()},
                 {"states", plan.states.size()},
                 {"directions", plan.directions.size()},
                 {"radius", io::number(plan.radius)}};
    io::write_text(art.add("report.json"), j.dump(2) + "\n");
    code = report.pass ? kOk : kHyperbolicity;
    return report.pass ? "hyperbolicity scan passed"
                       : "hyperbolicity scan failed on " + std::to_string(report.failures) +
                             " samples";
}

std::string run_solve(const RunConfig& cfg, const SystemDef& sys, Artifacts& art,
                      const fs::path& out, int& code) {
    const TorusGrid grid(resolve_dim(cfg, sys), cfg.n);
    const TorusField u0 = build_initial(cfg, sys, grid);
    const SolveOutcome res = picard_solve(sys, u0, cfg.solve);

    io::write_energies_csv(art.add("energies.csv"), res.energies);
    io::write_field_csv(art.add("final_state.csv"), res.trajectory.back());

    const auto& tr = res.trajectory;
    const int count = std::min<int>(cfg.output.snapshots, static_cast<int>(tr.size()));
    if (count > 0) fs::create_directories(out / "snapshots");
    std::vector<std::size_t> picks;
    for (int k = 0; k < count; ++k) {
        const std::size_t idx =
            count == 1 ? tr.size() - 1
                       : static_cast<std::size_t>(std::llround(
                             static_cast<double>(k) * static_cast<double>(tr.size() - 1) /
                             static_cast<double>(count - 1)));
        if (picks.empty() || picks.back() != idx) picks.push_back(idx);
    }
    for (std::size_t i = 0; i < picks.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshots/snap_%04zu.thyp", i);
        io::write_snapshot(art.add(name), tr.states[picks[i]], tr.times[picks[i]]);
    }

    json h;
    h["status"] = io::to_json(res.status);
    h["converged"] = res.converged;
    h["T_actual"] = io::number(res.T_actual);
    h["resolution_lost"] = res.resolution_lost;
    h["steps"] = tr.size() - 1;
    h["iterates"] = io::to_json(res.history);
    if (res.energies.size() >= 3) {
        const EnergyReport fit = verify_energy_growth(res);
        h["energy_fit"] = {{"a", io::number(fit.a)},
                           {"b", io::number(fit.b)},
                           {"max_slack", io::number(fit.max_slack)},
                           {"samples", fit.samples}};
    }
    io::write_text(art.add("history.json"), h.dump(2) + "\n");

    code = res.halted() ? kHalted : kOk;
    char msg[160];
    std::snprintf(msg, sizeof msg, "%s at t = %.6g", to_string(res.status.kind), res.status.t);
    return msg;
}

std::string run_probe(const RunConfig& cfg, const SystemDef& sys, Artifacts& art) {
    const TorusGrid grid(resolve_dim(cfg, sys), cfg.n);
    const TorusField u0 = build_initial(cfg, sys, grid);
    const DependenceTable table = continuous_dependence_probe(sys, u0, cfg.probe.deltas, cfg.solve);
    io::write_dependence_csv(art.add("dependence.csv"), table);
    io::write_text(art.add("probe.json"),
                   json{{"order", io::number(table.order)}, {"rows", table.rows.size()}}.dump(2) +
                       "\n");
    char msg[96];
    std::snprintf(msg, sizeof msg, "fitted dependence order %.6g", table.order);
    return msg;
}

std::string run_speeds(const RunConfig& cfg, const SystemDef& sys, Artifacts& art) {
    const SpeedsSpec& sp = cfg.speeds;
    const int N = resolve_dim(cfg, sys);
    Vec base = Vec::Zero(sys.m);
    if (!sp.state.empty()) {
        base = to_vec(sp.state);
    } else if (cfg.model.name == "euler") {
        base = models::euler_state({0, 0, 0}, 1.0, 1.0);
    } else if (cfg.model.name == "bulk-viscous") {
        base = models::bulk_state({0, 0, 0}, 1.0, 1.0, 0.0);
    }
    if (base.size() != sys.m) throw ConfigError("speeds.state needs one entry per component");
    if (sp.component < 0 || sp.component >= sys.m) throw ConfigError("speeds.component out of range");
    Vec dir = Vec::Zero(N);
    dir[0] = 1.0;
    if (!sp.direction.empty()) dir = to_vec(sp.direction);
    if (dir.size() != N || !(dir.norm() > 0.0)) {
        throw ConfigError("speeds.direction must be a nonzero vector with N entries");
    }
    dir.normalize();

    const fs::path path = art.add("speeds.csv");
    std::string text = "value,admissible";
    for (int k = 0; k < sys.m; ++k) text += ",lambda_" + std::to_string(k + 1);
    text += '\n';
    int admissible = 0;
    for (int i = 0; i < sp.count; ++i) {
        const double value = sp.from + (sp.to - sp.from) * i / (sp.count - 1);
        Vec z = base;
        z[sp.component] = value;
        if (sys.project && is_fluid(cfg.model.name) && sp.component != 0) sys.project(z);
        text += io::format_double(value);
        std::vector<double> speeds;
        bool ok = sys.domain.contains(z);
        if (ok) {
            try {
                speeds = models::characteristic_speeds(sys, 0.0, Vec::Zero(N), z, dir);
            } catch (const Error&) {
                ok = false;
            }
        }
        text += ok ? ",1" : ",0";
        for (int k = 0; k < sys.m; ++k) {
            text += ',';
            text += io::format_double(ok ? speeds[static_cast<std::size_t>(k)]
                                         : std::numeric_limits<double>::quiet_NaN());
        }
        text += '\n';
        admissible += ok;
    }
    io::write_text(path, text);
    return std::to_string(admissible) + " of " + std::to_string(sp.count) +
           " sweep states admissible";
}

}  // namespace

RunReport run(const RunConfig& cfg, const fs::path& out) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    Artifacts art(out);
    try {
        fs::create_directories(out);
    } catch (const fs::filesystem_error& e) {
        rep.exit_code = kIo;
        rep.message = std::string("cannot create output directory: ") + e.what();
        return rep;
    }

    try {
        if (cfg.command.empty()) throw ConfigError("no command given");
        const SystemDef sys = build_system(cfg.model);
        int code = kOk;
        if (cfg.command == "scan") {
            rep.message = run_scan(cfg, sys, art, code);
        } else if (cfg.command == "solve") {
            rep.message = run_solve(cfg, sys, art, out, code);
        } else if (cfg.command == "probe") {
            rep.message = run_probe(cfg, sys, art);
        } else if (cfg.command == "speeds") {
            rep.message = run_speeds(cfg, sys, art);
        } else {
            throw ConfigError("unknown command '" + cfg.command + "'");
        }
        rep.exit_code = code;
    } catch (const ConfigError& e) {
        rep.exit_code = kConfig;
        rep.message = std::string("config error: ") + e.what();
    } catch (const IoError& e) {
        rep.exit_code = kIo;
        rep.message = std::string("i/o error: ") + e.what();
    } catch (const StateOutsideDomain& e) {
        rep.exit_code = kHyperbolicity;
        rep.message = std::string("inadmissible state: ") + e.what();
    } catch (const SymbolFailure& e) {
        rep.exit_code = kHyperbolicity;
        rep.message = std::string("symbol breakdown: ") + e.what();
    } catch (const ComplexSpectrum& e) {
        rep.exit_code = kHyperbolicity;
        rep.message = std::string("complex spectrum: ") + e.what();
    } catch (const Defective& e) {
        rep.exit_code = kHyperbolicity;
        rep.message = std::string("defective symbol: ") + e.what();
    } catch (const NoConvergence& e) {
        rep.exit_code = kHalted;
        rep.message = std::string("no convergence: ") + e.what();
    } catch (const std::exception& e) {
        rep.exit_code = kInternal;
        rep.message = std::string("internal error: ") + e.what();
    }
    rep.artifacts = art.list();

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest;
    manifest["schema_version"] = 1;
    manifest["command"] = cfg.command;
    manifest["seed"] = cfg.seed;
    manifest["config"] = to_json(cfg.document);
    manifest["versions"] = versions();
    manifest["wall_time_s"] = wall;
    manifest["exit_code"] = rep.exit_code;
    manifest["message"] = rep.message;
    manifest["artifacts"] = rep.artifacts;
    try {
        io::write_text(out / "manifest.json", manifest.dump(2) + "\n");
    } catch (const IoError& e) {
        rep.exit_code = kIo;
        rep.message = e.what();
    }
    return rep;
}

}  // namespace thyp::cli
