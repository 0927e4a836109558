#include "thyp/io.hpp"

#include "thyp/errors.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace thyp::io {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes little-endian");

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw IoError("truncated snapshot: " + path.string());
    }
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

void write_snapshot(const std::filesystem::path& path, const TorusField& f, double t) {
    auto out = open_out(path, true);
    out.write("THYP", 4);
    put<std::uint32_t>(out, kSnapshotVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().dim()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().n()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.components()));
    put<double>(out, t);
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    finish(out, path);
}

TorusField read_snapshot(const std::filesystem::path& path, double& t) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot: " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "THYP", 4) != 0) {
        throw IoError("not a THYP snapshot: " + path.string());
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kSnapshotVersion) throw IoError("unsupported snapshot version");
    const auto N = get<std::uint32_t>(in, path);
    const auto n = get<std::uint32_t>(in, path);
    const auto m = get<std::uint32_t>(in, path);
    t = get<double>(in, path);
    if (N < 1 || N > 3 || m < 1) throw IoError("bad snapshot header: " + path.string());
    TorusGrid grid;
    try {
        grid = TorusGrid(static_cast<int>(N), static_cast<int>(n));
    } catch (const Error& e) {
        throw IoError(std::string("bad snapshot grid: ") + e.what());
    }
    TorusField f(grid, static_cast<int>(m));
    if (!in.read(reinterpret_cast<char*>(f.values().data()),
                 static_cast<std::streamsize>(f.values().size() * sizeof(double)))) {
        throw IoError("truncated snapshot: " + path.string());
    }
    return f;
}

void write_field_csv(const std::filesystem::path& path, const TorusField& f) {
    auto out = open_out(path);
    const int N = f.grid().dim();
    for (int d = 0; d < N; ++d) out << (d ? "," : "") << "x" << d + 1;
    for (int c = 0; c < f.components(); ++c) out << ",u" << c;
    out << '\n';
    for (std::size_t p = 0; p < f.points(); ++p) {
        const Vec x = f.grid().point(p);
        for (int d = 0; d < N; ++d) out << (d ? "," : "") << format_double(x[d]);
        for (int c = 0; c < f.components(); ++c) out << ',' << format_double(f(c, p));
        out << '\n';
    }
    finish(out, path);
}

void write_energies_csv(const std::filesystem::path& path,
                        const std::vector<EnergySample>& energies) {
    auto out = open_out(path);
    out << "t,energy_Ns,sobolev_s,margin,bnorm_proxy\n";
    for (const auto& e : energies) {
        out << format_double(e.t) << ',' << format_double(e.energy) << ','
            << format_double(e.sobolev) << ',' << format_double(e.margin) << ','
            << format_double(e.bnorm) << '\n';
    }
    finish(out, path);
}

void write_dependence_csv(const std::filesystem::path& path, const DependenceTable& table) {
    auto out = open_out(path);
    out << "delta,difference\n";
    for (const auto& r : table.rows) {
        out << format_double(r.delta) << ',' << format_double(r.difference) << '\n';
    }
    finish(out, path);
}

json to_json(const SamplePlan& plan) {
    json j;
    j["times"] = plan.times;
    auto list = [](const std::vector<Vec>& vs) {
        json a = json::array();
        for (const auto& v : vs) a.push_back(vector_json(v));
        return a;
    };
    j["points"] = list(plan.points);
    j["states"] = list(plan.states);
    j["directions"] = list(plan.directions);
    j["radius"] = number(plan.radius);
    j["max_witnesses"] = plan.max_witnesses;
    j["tolerances"] = {{"cluster", plan.tols.cluster}, {"real", plan.tols.real},
                       {"rank", plan.tols.rank},       {"cond", plan.tols.cond},
                       {"resid", plan.tols.resid}};
    return j;
}

json to_json(const HyperbolicityReport& report) {
    json j;
    j["schema_version"] = 1;
    j["pass"] = report.pass;
    j["samples"] = report.samples;
    j["failures"] = report.failures;
    j["worst_imag"] = number(report.worst_imag);
    j["worst_condS"] = number(report.worst_condS);
    j["min_gap"] = number(report.min_gap);
    j["lambda0"] = number(report.lambda0);
    j["lambda1"] = number(report.lambda1);
    json w = json::array();
    for (const auto& x : report.witnesses) {
        w.push_back({{"t", number(x.t)},
                     {"x", vector_json(x.x)},
                     {"zeta", vector_json(x.state)},
                     {"xi", vector_json(x.xi)},
                     {"failure_kind", to_string(x.kind)},
                     {"message", x.message}});
    }
    j["witnesses"] = std::move(w);
    return j;
}

json to_json(const IterateHistory& history) {
    json a = json::array();
    for (const auto& r : history.records) {
        a.push_back({{"window", r.window},
                     {"iterate", r.n},
                     {"t_begin", number(r.t_begin)},
                     {"t_end", number(r.t_end)},
                     {"sup_norm_s", number(r.sup_norm_s)},
                     {"sup_rate_norm", number(r.sup_rate_norm)},
                     {"diff_prev", number(r.diff_prev)},
                     {"min_margin", number(r.min_margin)}});
    }
    return a;
}

json to_json(const ContinuationStatus& status) {
    return {{"kind", to_string(status.kind)},
            {"t", number(status.t)},
            {"value", number(status.value)},
            {"detail", status.detail}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

}  // namespace thyp::io
