#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acdc/errors.hpp"

namespace acdc {

// ========================================================================
// Bus-level grid
// ========================================================================

/// Direction of a converter edge at the subgrid level.
enum class Orientation { AcToDc, DcToAc, Unassigned };

/// Local converter control loops that pin an orientation.
enum class LocalLoop {
    ReactivePower,         // AC-side measurement feeding the q-axis current
    DcVoltage,             // DC-side voltage feeding the d-axis current
    PowerTransferDcSide,   // power feedback measured on the DC side
    PowerTransferAcSide,   // power feedback measured on the AC side
};

/// What a converter's local loops require of its orientation.
enum class DirectionRequirement { AcToDc, DcToAc, FreeChoice, NotOrientable };

/// AC/DC converter joining one AC bus and one DC bus.
struct Converter {
    int ac_bus = 0;
    int dc_bus = 0;
    Orientation orientation = Orientation::Unassigned;
    std::set<LocalLoop> loops;

    /// Stable identifier used for input labels and parameter lookups.
    std::string id() const;
};

/// Undirected line; endpoints are stored sorted.
using Line = std::pair<int, int>;

Line make_line(int a, int b);

/// Bus-level AC/DC grid. Bus identifiers are globally unique across the
/// AC and DC sides. AC lines join AC buses, DC lines join DC buses, and
/// converters are the only elements bridging the two sides.
struct GridGraph {
    std::set<int> ac_buses;
    std::set<int> dc_buses;
    std::set<Line> ac_lines;
    std::set<Line> dc_lines;
    std::vector<Converter> converters;

    /// Throws InvariantError naming the offending element if any structural
    /// invariant fails (line endpoints on the wrong side, duplicate bus ids,
    /// more than one converter per (ac_bus, dc_bus) pair, ...).
    void validate() const;
};

// ========================================================================
// Subgrids and the quotient graph
// ========================================================================

enum class SubgridKind { Ac, Dc };

/// Map from buses to connected components ("subgrids") of each side.
/// Component indices are 1-based and ordered by smallest contained bus id.
struct SubgridMap {
    std::map<int, int> ac_component;  // ac bus -> 1..ac_count
    std::map<int, int> dc_component;  // dc bus -> 1..dc_count
    int ac_count = 0;
    int dc_count = 0;

    int component_of(SubgridKind kind, int bus) const;
    std::vector<int> buses_of(SubgridKind kind, int component) const;
};

/// Quotient of the grid by its subgrids: one node per subgrid, one
/// underlying edge per converter-connected subgrid pair, and a directed
/// edge for every oriented pair. Node order is all AC subgrids by index,
/// then all DC subgrids by index.
struct QuotientGraph {
    struct Node {
        SubgridKind kind;
        int index;         // 1-based component index within its kind
        std::string name;  // "AC1", "DC2", ...
    };

    std::vector<Node> nodes;
    std::set<std::pair<int, int>> edges;            // directed, node indices
    std::set<std::pair<int, int>> underlying_edges; // sorted node index pairs

    int node_of(SubgridKind kind, int component) const;
    int node_by_name(const std::string& name) const;
    bool fully_oriented() const { return edges.size() >= underlying_edges.size(); }

    /// Topological order with ties broken by a node ranking (smaller rank
    /// first). Returns std::nullopt when the directed edges contain a cycle.
    std::optional<std::vector<int>> topological_order(
        const std::vector<int>& rank) const;
};

/// Connected components of the AC side (over AC lines) and the DC side
/// (over DC lines). Isolated buses form singleton subgrids.
SubgridMap connected_components(const GridGraph& grid);

/// Collapse the grid to its subgrid-level quotient. Converters between the
/// same subgrid pair must agree in direction; otherwise the pair forms a
/// 2-cycle and CoOrientationConflict is thrown. Unassigned converters
/// contribute only an underlying edge.
QuotientGraph build_quotient_graph(const GridGraph& grid, const SubgridMap& map);

/// Node ordering used to complete partial orientations deterministically.
enum class OrientationStrategy { AcSubgridsFirst, DcSubgridsFirst };

/// Assign directions to all unoriented converters such that the quotient
/// is acyclic. Fixed directions (explicit orientations and loop-implied
/// ones) are kept; free underlying edges are oriented along a topological
/// order of the fixed subgraph chosen by the strategy. Throws CycleForced
/// when the fixed directions already contain a cycle (no acyclic
/// completion exists in exactly that case) or when a converter's loops are
/// contradictory. Idempotent on fully oriented acyclic grids.
GridGraph orient_converters(const GridGraph& grid,
                            OrientationStrategy strategy = OrientationStrategy::AcSubgridsFirst);

/// Number of acyclic orientations of the underlying quotient graph,
/// computed as |X(-1)| of the chromatic polynomial via deletion and
/// contraction with memoization. Throws SizeLimit above `max_vertices`.
std::int64_t count_acyclic_orientations(const QuotientGraph& q, int max_vertices = 20);

/// All acyclic orientations, each given as a list of directed node-index
/// pairs aligned with `underlying_edges` order. Throws SizeLimit when the
/// underlying edge count exceeds `max_edges`.
std::vector<std::vector<std::pair<int, int>>> enumerate_acyclic_orientations(
    const QuotientGraph& q, int max_edges = 20);

/// Orientation a set of local loops forces on a converter:
/// ReactivePower and PowerTransferAcSide take their measurements on the AC
/// side (AC upstream), DcVoltage and PowerTransferDcSide on the DC side
/// (DC upstream). No loops leaves a free choice; a mix implying both
/// directions is NotOrientable.
DirectionRequirement infer_converter_direction(const std::set<LocalLoop>& loops);

const char* to_string(Orientation o);
const char* to_string(LocalLoop l);
const char* to_string(DirectionRequirement d);

}  // namespace acdc
