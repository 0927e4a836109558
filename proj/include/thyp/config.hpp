#pragma once

#include "thyp/models.hpp"
#include "thyp/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace thyp::cli {

// ----- raw document

/// One value of the TOML-shaped config grammar.
struct Value {
    enum class Kind { Number, Bool, String, Array };
    Kind kind = Kind::Number;
    double number = 0.0;
    bool boolean = false;
    std::string text;
    std::vector<Value> items;
    int line = 0;
};

/// section -> key -> value; top-level keys live in section "".
using Document = std::map<std::string, std::map<std::string, Value>>;

/// Grammar: `[section]` headers, `key = value` pairs, `#` comments.
/// Values: numbers (including inf, nan), true/false, "strings", [arrays],
/// arrays may span lines and nest. Throws ConfigError with the line number.
Document parse_document(const std::string& text);

nlohmann::json to_json(const Document& doc);

// ----- typed config

struct ModelSpec {
    std::string name = "burgers";
    std::vector<double> speeds{1.0};  // advection
    double speed = 1.0;               // drift
    double rate = 1.0;                // drift
    std::vector<double> matrix;       // constant-coefficient, row-major
    std::string eos = "barotropic";   // barotropic | power-sum | tabulated
    double K = 1.0, gamma = 4.0 / 3.0, B = 0.0, beta = 1.0;
    std::string eos_table;
    double tau = 1.0, zeta = 0.1;     // bulk-viscous
    int space_dim = 1;
    double normalization_slack = 1e-4;
};

struct InitialSpec {
    std::string profile = "sine";  // sine | gaussian-bump | constant-plus-sine | snapshot
    std::vector<double> background;     // constant part, size m (default 0)
    std::vector<double> amplitude{1.0}; // size 1 or m
    std::vector<double> wavenumber{1.0};
    double width = 0.5;
    std::vector<double> center;         // default π in every direction
    std::string snapshot;
};

struct ScanSpec {
    int states = 200;
    int directions = 50;
    int points = 1;
    std::vector<double> times{0.0};
    double radius = std::numeric_limits<double>::infinity();
    int max_witnesses = 8;
    models::FluidSampleRanges ranges;
    std::vector<double> lo, hi;  // sampling box for non-fluid models
};

struct ProbeSpec {
    std::vector<double> deltas{1e-3, 5e-4, 2.5e-4, 1.25e-4};
};

struct SpeedsSpec {
    std::vector<double> state;      // base state (fluids: default rest frame)
    std::vector<double> direction;  // default e_1
    int component = 0;              // state entry swept
    double from = 0.0, to = 1.0;
    int count = 11;
};

struct OutputSpec {
    int snapshots = 5;  // evenly spaced trajectory snapshots, including both ends
};

struct RunConfig {
    std::string command;
    std::uint64_t seed = 0;
    ModelSpec model;
    int N = 0;   // 0: take the model's dimension
    int n = 64;
    SolveConfig solve;
    InitialSpec initial;
    ScanSpec scan;
    ProbeSpec probe;
    SpeedsSpec speeds;
    OutputSpec output;
    Document document;  // echoed into the manifest
};

/// Typed view of a document. Unknown sections or keys raise ConfigError.
RunConfig interpret(const Document& doc);
RunConfig load_config(const std::string& path);

SystemDef build_system(const ModelSpec& spec);
TorusField build_initial(const RunConfig& cfg, const SystemDef& sys, const TorusGrid& grid);

}  // namespace thyp::cli
