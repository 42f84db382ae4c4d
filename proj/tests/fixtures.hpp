#pragma once

// Shared grid builders for the unit and acceptance suites.

#include <algorithm>
#include <random>
#include <vector>

#include "acdc/grid.hpp"
#include "acdc/linear_model.hpp"

namespace fixtures {

// Two-bus-per-side point-to-point link (one ac subgrid, one dc subgrid,
// two parallel converters) with round physical parameters.
inline acdc::GridGraph point_to_point(acdc::Orientation first, acdc::Orientation second) {
    acdc::GridGraph g;
    g.ac_buses = {1, 4};
    g.dc_buses = {2, 3};
    g.ac_lines = {acdc::make_line(1, 4)};
    g.dc_lines = {acdc::make_line(2, 3)};
    g.converters.push_back({1, 2, first, {}});
    g.converters.push_back({4, 3, second, {}});
    return g;
}

inline acdc::LinearGridParams point_to_point_params() {
    acdc::LinearGridParams p;
    p.ac_bus[1] = {10.0, 0.1, 0.0};
    p.ac_bus[4] = {10.0, 0.1, 0.0};
    p.ac_line_susceptance[acdc::make_line(1, 4)] = 1.0;
    p.dc_bus_capacitance[2] = 0.01;
    p.dc_bus_capacitance[3] = 0.01;
    p.dc_line[acdc::make_line(2, 3)] = {0.001, 0.01};
    p.converter_nominal_voltage[{1, 2}] = 1.0;
    p.converter_nominal_voltage[{4, 3}] = 1.0;
    return p;
}

struct RandomGrid {
    acdc::GridGraph grid;
    acdc::LinearGridParams params;
};

// Random grid with up to 3 subgrids per side, chain-connected buses inside
// each subgrid, and converters oriented along a random subgrid permutation
// (which makes the quotient acyclic by construction).
inline RandomGrid make_random_grid(std::mt19937_64& rng) {
    auto uniform = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    RandomGrid out;
    const int na = 1 + static_cast<int>(rng() % 3);
    const int nd = 1 + static_cast<int>(rng() % 3);

    std::vector<std::vector<int>> ac_subgrid(na), dc_subgrid(nd);
    int next_ac = 1, next_dc = 101;
    for (int s = 0; s < na; ++s) {
        const int buses = 1 + static_cast<int>(rng() % 2);
        for (int b = 0; b < buses; ++b) {
            const int bus = next_ac++;
            ac_subgrid[s].push_back(bus);
            out.grid.ac_buses.insert(bus);
            out.params.ac_bus[bus] = {uniform(1.0, 10.0), uniform(0.05, 1.0), 0.0};
            if (b > 0) {
                const acdc::Line line = acdc::make_line(ac_subgrid[s][b - 1], bus);
                out.grid.ac_lines.insert(line);
                out.params.ac_line_susceptance[line] = uniform(0.5, 2.0);
            }
        }
    }
    for (int s = 0; s < nd; ++s) {
        const int buses = 1 + static_cast<int>(rng() % 3);
        for (int b = 0; b < buses; ++b) {
            const int bus = next_dc++;
            dc_subgrid[s].push_back(bus);
            out.grid.dc_buses.insert(bus);
            out.params.dc_bus_capacitance[bus] = uniform(0.005, 0.05);
            if (b > 0) {
                const acdc::Line line = acdc::make_line(dc_subgrid[s][b - 1], bus);
                out.grid.dc_lines.insert(line);
                out.params.dc_line[line] = {uniform(1e-3, 1e-2), uniform(0.005, 0.1)};
            }
        }
    }

    // Random global order over subgrids; converters point along it.
    std::vector<int> rank(na + nd);
    for (int i = 0; i < na + nd; ++i) rank[i] = i;
    std::shuffle(rank.begin(), rank.end(), rng);

    auto add_converter = [&](int a, int d) {
        const int ac_bus = ac_subgrid[a][rng() % ac_subgrid[a].size()];
        const int dc_bus = dc_subgrid[d][rng() % dc_subgrid[d].size()];
        for (const acdc::Converter& c : out.grid.converters)
            if (c.ac_bus == ac_bus && c.dc_bus == dc_bus) return;  // already there
        const bool ac_first = rank[a] < rank[na + d];
        out.grid.converters.push_back(
            {ac_bus, dc_bus,
             ac_first ? acdc::Orientation::AcToDc : acdc::Orientation::DcToAc,
             {}});
        out.params.converter_nominal_voltage[{ac_bus, dc_bus}] = uniform(0.8, 1.2);
    };

    for (int a = 0; a < na; ++a)
        for (int d = 0; d < nd; ++d) {
            if (rng() % 100 < 60) add_converter(a, d);
            if (rng() % 100 < 20) add_converter(a, d);  // occasional parallel pair
        }
    add_converter(static_cast<int>(rng() % na), static_cast<int>(rng() % nd));

    return out;
}

}  // namespace fixtures
