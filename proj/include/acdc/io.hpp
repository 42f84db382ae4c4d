#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acdc/grid.hpp"
#include "acdc/linear_model.hpp"
#include "acdc/simulate.hpp"
#include "acdc/synthesis.hpp"

namespace acdc {

/// Optional leader designation carried by a grid document: any bus inside a
/// leader subgrid names that subgrid; converter (ac, dc) pairs name the
/// leader's input channels.
struct LeaderSpec {
    std::vector<int> buses;
    std::vector<std::pair<int, int>> converters;
};

struct ParsedGrid {
    GridGraph grid;
    LinearGridParams params;
    CostWeights cost;
    std::map<std::string, double> base;  // declared per-unit bases, informational
    std::optional<LeaderSpec> leader;
};

/// Parses a JSON grid document. Unknown keys, wrong types, and dangling
/// references are rejected with the offending path; topology violations
/// surface as InvariantError from GridGraph validation.
ParsedGrid parse_grid(const std::string& text);
ParsedGrid load_grid(const std::string& path);
std::string serialize_grid(const ParsedGrid& parsed);

std::string statespace_to_json(const StateSpace& ss);
StateSpace statespace_from_json(const std::string& text);

/// Serialized controller: the gain aligned with a model's state order plus
/// the synthesis record and, for two-stage designs, the leader designation.
struct ControllerDocument {
    Eigen::MatrixXd K;
    std::vector<int> row_partition;
    std::vector<int> col_partition;
    std::vector<std::string> input_labels;
    std::vector<std::string> state_labels;
    std::vector<std::string> subgrid_order;
    std::string mode;  // "centralized" or "leader-follower"
    std::vector<std::string> leader_subgrids;
    std::vector<std::string> leader_inputs;
    double h2 = 0;
    double riccati_residual = 0;
    double closed_loop_abscissa = 0;
};

std::string controller_to_json(const ControllerDocument& doc);
ControllerDocument controller_from_json(const std::string& text);
GainMatrix controller_gain(const ControllerDocument& doc);

std::string trace_to_csv(const Trace& trace);
std::string metrics_to_json(const TraceMetrics& metrics);

/// Initial state from JSON: either a bare array of length n, or an object
/// keyed by state labels (unnamed states default to zero).
Eigen::VectorXd parse_initial_state(const std::string& text, const StateSpace& ss);

/// DOT renderings. Undirected edges are emitted as `a -> b [dir=none]` so a
/// directed edge is exactly a `->` line without dir=none.
std::string to_dot_bus(const GridGraph& grid);
std::string to_dot_subgrid(const QuotientGraph& quotient);

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> inputs;  // path -> content digest
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances;
};

std::string manifest_to_json(const RunManifest& manifest);
/// Writes `<primary_output>.manifest.json`.
void write_manifest(const RunManifest& manifest, const std::string& primary_output);

std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace acdc
