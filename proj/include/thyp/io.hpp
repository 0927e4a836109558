#pragma once

#include "thyp/solver.hpp"
#include "thyp/spectral.hpp"
#include "thyp/symbol.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace thyp::io {

using nlohmann::json;

/// Binary snapshot: "THYP", u32 version, u32 N, u32 n, u32 m, f64 time,
/// then m * n^N f64 values, component-major, last axis fastest. Little-endian.
constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::filesystem::path& path, const TorusField& f, double t);
/// Returns the field and stores the header time in `t`.
TorusField read_snapshot(const std::filesystem::path& path, double& t);

/// "x1,..,xN,c0,..,c{m-1}" rows in flat grid order.
void write_field_csv(const std::filesystem::path& path, const TorusField& f);

/// t,energy_Ns,sobolev_s,margin,bnorm_proxy
void write_energies_csv(const std::filesystem::path& path,
                        const std::vector<EnergySample>& energies);
void write_dependence_csv(const std::filesystem::path& path, const DependenceTable& table);

/// %.17g, with "nan", "inf", "-inf" for the special values.
std::string format_double(double v);
/// Finite numbers as numbers, anything else as null.
json number(double v);
json vector_json(const Vec& v);

json to_json(const SamplePlan& plan);
json to_json(const HyperbolicityReport& report);
json to_json(const IterateHistory& history);
json to_json(const ContinuationStatus& status);

/// Writes text, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace thyp::io
