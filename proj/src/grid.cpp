#include "acdc/grid.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <sstream>

namespace acdc {

std::string Converter::id() const {
    return std::to_string(ac_bus) + "-" + std::to_string(dc_bus);
}

Line make_line(int a, int b) {
    return a < b ? Line{a, b} : Line{b, a};
}

void GridGraph::validate() const {
    for (int b : ac_buses) {
        if (dc_buses.count(b))
            throw InvariantError("bus " + std::to_string(b) +
                                 " appears on both the AC and DC side");
    }
    auto require_bus = [&](const std::set<int>& side, int bus, const std::string& what) {
        if (!side.count(bus))
            throw InvariantError(what + " references unknown bus " + std::to_string(bus));
    };
    for (const auto& [a, b] : ac_lines) {
        if (a == b) throw InvariantError("ac line " + std::to_string(a) + "-" +
                                         std::to_string(b) + " is a self-loop");
        require_bus(ac_buses, a, "ac line");
        require_bus(ac_buses, b, "ac line");
    }
    for (const auto& [a, b] : dc_lines) {
        if (a == b) throw InvariantError("dc line " + std::to_string(a) + "-" +
                                         std::to_string(b) + " is a self-loop");
        require_bus(dc_buses, a, "dc line");
        require_bus(dc_buses, b, "dc line");
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& c : converters) {
        require_bus(ac_buses, c.ac_bus, "converter " + c.id());
        require_bus(dc_buses, c.dc_bus, "converter " + c.id());
        if (!seen.insert({c.ac_bus, c.dc_bus}).second)
            throw InvariantError("duplicate converter between buses " + c.id());
    }
}

// ------------------------------------------------------------------------
// Connected components
// ------------------------------------------------------------------------

namespace {

// BFS components over one side; numbering follows the smallest contained
// bus id so the labeling is independent of container iteration order.
std::map<int, int> side_components(const std::set<int>& buses,
                                   const std::set<Line>& lines, int& count) {
    std::map<int, std::vector<int>> adj;
    for (const auto& [a, b] : lines) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::map<int, int> comp;
    count = 0;
    for (int start : buses) {  // std::set iterates ascending
        if (comp.count(start)) continue;
        ++count;
        std::deque<int> work{start};
        comp[start] = count;
        while (!work.empty()) {
            int u = work.front();
            work.pop_front();
            auto it = adj.find(u);
            if (it == adj.end()) continue;
            for (int v : it->second) {
                if (!comp.count(v)) {
                    comp[v] = count;
                    work.push_back(v);
                }
            }
        }
    }
    return comp;
}

}  // namespace

SubgridMap connected_components(const GridGraph& grid) {
    grid.validate();
    SubgridMap m;
    m.ac_component = side_components(grid.ac_buses, grid.ac_lines, m.ac_count);
    m.dc_component = side_components(grid.dc_buses, grid.dc_lines, m.dc_count);
    return m;
}

int SubgridMap::component_of(SubgridKind kind, int bus) const {
    const auto& map = kind == SubgridKind::Ac ? ac_component : dc_component;
    auto it = map.find(bus);
    if (it == map.end())
        throw UnknownElement("no such " +
                             std::string(kind == SubgridKind::Ac ? "AC" : "DC") +
                             " bus: " + std::to_string(bus));
    return it->second;
}

std::vector<int> SubgridMap::buses_of(SubgridKind kind, int component) const {
    const auto& map = kind == SubgridKind::Ac ? ac_component : dc_component;
    std::vector<int> out;
    for (const auto& [bus, comp] : map)
        if (comp == component) out.push_back(bus);
    return out;  // map iteration is ascending, so buses come out sorted
}

// ------------------------------------------------------------------------
// Quotient graph
// ------------------------------------------------------------------------

int QuotientGraph::node_of(SubgridKind kind, int component) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].kind == kind && nodes[i].index == component)
            return static_cast<int>(i);
    throw UnknownElement("no such subgrid node");
}

int QuotientGraph::node_by_name(const std::string& name) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].name == name) return static_cast<int>(i);
    throw UnknownElement("no such subgrid: " + name);
}

std::optional<std::vector<int>> QuotientGraph::topological_order(
    const std::vector<int>& rank) const {
    const int n = static_cast<int>(nodes.size());
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> succ(n);
    for (const auto& [u, v] : edges) {
        succ[u].push_back(v);
        ++indeg[v];
    }
    auto cmp = [&](int a, int b) { return rank[a] > rank[b]; };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push(i);
    std::vector<int> order;
    order.reserve(n);
    while (!ready.empty()) {
        int u = ready.top();
        ready.pop();
        order.push_back(u);
        for (int v : succ[u])
            if (--indeg[v] == 0) ready.push(v);
    }
    if (static_cast<int>(order.size()) != n) return std::nullopt;
    return order;
}

QuotientGraph build_quotient_graph(const GridGraph& grid, const SubgridMap& map) {
    QuotientGraph q;
    for (int i = 1; i <= map.ac_count; ++i)
        q.nodes.push_back({SubgridKind::Ac, i, "AC" + std::to_string(i)});
    for (int i = 1; i <= map.dc_count; ++i)
        q.nodes.push_back({SubgridKind::Dc, i, "DC" + std::to_string(i)});

    for (const auto& c : grid.converters) {
        int a = q.node_of(SubgridKind::Ac, map.component_of(SubgridKind::Ac, c.ac_bus));
        int d = q.node_of(SubgridKind::Dc, map.component_of(SubgridKind::Dc, c.dc_bus));
        q.underlying_edges.insert({std::min(a, d), std::max(a, d)});
        if (c.orientation == Orientation::AcToDc)
            q.edges.insert({a, d});
        else if (c.orientation == Orientation::DcToAc)
            q.edges.insert({d, a});
    }
    for (const auto& [u, v] : q.edges) {
        if (q.edges.count({v, u}))
            throw CoOrientationConflict(
                "converters between " + q.nodes[u].name + " and " + q.nodes[v].name +
                " are oriented in opposite directions (quotient 2-cycle)");
    }
    return q;
}

// ------------------------------------------------------------------------
// Orientation completion
// ------------------------------------------------------------------------

GridGraph orient_converters(const GridGraph& grid, OrientationStrategy strategy) {
    SubgridMap map = connected_components(grid);

    // Resolve each converter to a fixed direction or a free choice.
    GridGraph out = grid;
    for (auto& c : out.converters) {
        DirectionRequirement req = infer_converter_direction(c.loops);
        if (req == DirectionRequirement::NotOrientable)
            throw CycleForced("converter " + c.id() +
                              " has loops requiring both directions");
        if (c.orientation == Orientation::Unassigned) {
            if (req == DirectionRequirement::AcToDc) c.orientation = Orientation::AcToDc;
            if (req == DirectionRequirement::DcToAc) c.orientation = Orientation::DcToAc;
        } else {
            bool clash = (req == DirectionRequirement::AcToDc &&
                          c.orientation != Orientation::AcToDc) ||
                         (req == DirectionRequirement::DcToAc &&
                          c.orientation != Orientation::DcToAc);
            if (clash)
                throw CycleForced("converter " + c.id() +
                                  " orientation contradicts its local loops");
        }
    }

    // Quotient of the fixed part; throws CoOrientationConflict on a 2-cycle,
    // which we surface as an infeasible orientation.
    QuotientGraph q;
    try {
        q = build_quotient_graph(out, map);
    } catch (const CoOrientationConflict& e) {
        throw CycleForced(e.what());
    }

    // A partial orientation extends to an acyclic one iff the fixed part is
    // acyclic; orienting free edges along a topological order of the fixed
    // subgraph is then always valid.
    std::vector<int> rank(q.nodes.size());
    for (size_t i = 0; i < q.nodes.size(); ++i) {
        bool ac_first = strategy == OrientationStrategy::AcSubgridsFirst;
        bool primary = (q.nodes[i].kind == SubgridKind::Ac) == ac_first;
        rank[i] = (primary ? 0 : 1000000) + q.nodes[i].index;
    }
    auto order = q.topological_order(rank);
    if (!order)
        throw CycleForced("fixed converter directions force a quotient cycle");
    std::vector<int> pos(q.nodes.size());
    for (size_t i = 0; i < order->size(); ++i) pos[(*order)[i]] = static_cast<int>(i);

    for (auto& c : out.converters) {
        if (c.orientation != Orientation::Unassigned) continue;
        int a = q.node_of(SubgridKind::Ac, map.component_of(SubgridKind::Ac, c.ac_bus));
        int d = q.node_of(SubgridKind::Dc, map.component_of(SubgridKind::Dc, c.dc_bus));
        c.orientation = pos[a] < pos[d] ? Orientation::AcToDc : Orientation::DcToAc;
    }
    return out;
}

// ------------------------------------------------------------------------
// Acyclic orientation counting
// ------------------------------------------------------------------------

namespace {

struct SimpleGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // sorted pairs, sorted list
};

std::string graph_key(const SimpleGraph& g) {
    std::string key = std::to_string(g.n) + ";";
    for (const auto& [a, b] : g.edges)
        key += std::to_string(a) + "," + std::to_string(b) + ";";
    return key;
}

// X(G, -1) by deletion-contraction on the exact labeled graph. Connected
// components multiply; the recursion keeps graphs simple (parallel edges
// collapse after contraction, which does not change the chromatic
// polynomial).
std::int64_t chromatic_at_minus_one(const SimpleGraph& g,
                                    std::map<std::string, std::int64_t>& memo);

std::int64_t chromatic_components(const SimpleGraph& g,
                                  std::map<std::string, std::int64_t>& memo) {
    // Split into connected components and relabel each compactly.
    std::vector<int> comp(g.n, -1);
    std::vector<std::vector<int>> adj(g.n);
    for (const auto& [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    int ncomp = 0;
    for (int s = 0; s < g.n; ++s) {
        if (comp[s] != -1) continue;
        std::deque<int> work{s};
        comp[s] = ncomp;
        while (!work.empty()) {
            int u = work.front();
            work.pop_front();
            for (int v : adj[u])
                if (comp[v] == -1) {
                    comp[v] = ncomp;
                    work.push_back(v);
                }
        }
        ++ncomp;
    }
    if (ncomp <= 1) return chromatic_at_minus_one(g, memo);

    std::int64_t product = 1;
    for (int c = 0; c < ncomp; ++c) {
        std::vector<int> relabel(g.n, -1);
        SimpleGraph sub;
        for (int v = 0; v < g.n; ++v)
            if (comp[v] == c) relabel[v] = sub.n++;
        for (const auto& [a, b] : g.edges)
            if (comp[a] == c)
                sub.edges.push_back({std::min(relabel[a], relabel[b]),
                                     std::max(relabel[a], relabel[b])});
        std::sort(sub.edges.begin(), sub.edges.end());
        product *= chromatic_at_minus_one(sub, memo);
    }
    return product;
}

std::int64_t chromatic_at_minus_one(const SimpleGraph& g,
                                    std::map<std::string, std::int64_t>& memo) {
    if (g.edges.empty()) return g.n % 2 == 0 ? 1 : -1;  // (-1)^n
    std::string key = graph_key(g);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    auto [ea, eb] = g.edges.front();

    SimpleGraph del{g.n, {g.edges.begin() + 1, g.edges.end()}};

    // Contract eb into ea, relabel vertices > eb down by one, drop the
    // loop and collapse parallels.
    SimpleGraph con;
    con.n = g.n - 1;
    std::set<std::pair<int, int>> cedges;
    for (size_t i = 1; i < g.edges.size(); ++i) {
        auto [a, b] = g.edges[i];
        if (a == eb) a = ea;
        if (b == eb) b = ea;
        if (a > eb) --a;
        if (b > eb) --b;
        if (a == b) continue;  // cannot occur for simple graphs, kept for safety
        cedges.insert({std::min(a, b), std::max(a, b)});
    }
    con.edges.assign(cedges.begin(), cedges.end());

    std::int64_t value =
        chromatic_components(del, memo) - chromatic_components(con, memo);
    memo[key] = value;
    return value;
}

SimpleGraph underlying_simple(const QuotientGraph& q) {
    SimpleGraph g;
    g.n = static_cast<int>(q.nodes.size());
    g.edges.assign(q.underlying_edges.begin(), q.underlying_edges.end());
    return g;
}

}  // namespace

std::int64_t count_acyclic_orientations(const QuotientGraph& q, int max_vertices) {
    if (static_cast<int>(q.nodes.size()) > max_vertices)
        throw SizeLimit("quotient has " + std::to_string(q.nodes.size()) +
                        " nodes; counting is bounded to " + std::to_string(max_vertices));
    SimpleGraph g = underlying_simple(q);
    std::map<std::string, std::int64_t> memo;
    std::int64_t x = chromatic_components(g, memo);
    return x < 0 ? -x : x;
}

std::vector<std::vector<std::pair<int, int>>> enumerate_acyclic_orientations(
    const QuotientGraph& q, int max_edges) {
    const auto edges = std::vector<std::pair<int, int>>(q.underlying_edges.begin(),
                                                        q.underlying_edges.end());
    const int m = static_cast<int>(edges.size());
    if (m > max_edges)
        throw SizeLimit("quotient has " + std::to_string(m) +
                        " underlying edges; enumeration is bounded to " +
                        std::to_string(max_edges));
    const int n = static_cast<int>(q.nodes.size());

    std::vector<std::vector<std::pair<int, int>>> result;
    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
        std::vector<std::vector<int>> succ(n);
        std::vector<int> indeg(n, 0);
        std::vector<std::pair<int, int>> assignment;
        assignment.reserve(m);
        for (int e = 0; e < m; ++e) {
            auto [a, b] = edges[e];
            if (mask & (1ull << e)) std::swap(a, b);
            succ[a].push_back(b);
            ++indeg[b];
            assignment.push_back({a, b});
        }
        // Kahn's algorithm as the acyclicity test.
        std::deque<int> ready;
        for (int i = 0; i < n; ++i)
            if (indeg[i] == 0) ready.push_back(i);
        int seen = 0;
        while (!ready.empty()) {
            int u = ready.front();
            ready.pop_front();
            ++seen;
            for (int v : succ[u])
                if (--indeg[v] == 0) ready.push_back(v);
        }
        if (seen == n) result.push_back(std::move(assignment));
    }
    return result;
}

DirectionRequirement infer_converter_direction(const std::set<LocalLoop>& loops) {
    bool ac_to_dc = loops.count(LocalLoop::ReactivePower) ||
                    loops.count(LocalLoop::PowerTransferAcSide);
    bool dc_to_ac = loops.count(LocalLoop::DcVoltage) ||
                    loops.count(LocalLoop::PowerTransferDcSide);
    if (ac_to_dc && dc_to_ac) return DirectionRequirement::NotOrientable;
    if (ac_to_dc) return DirectionRequirement::AcToDc;
    if (dc_to_ac) return DirectionRequirement::DcToAc;
    return DirectionRequirement::FreeChoice;
}

const char* to_string(Orientation o) {
    switch (o) {
        case Orientation::AcToDc: return "ac_to_dc";
        case Orientation::DcToAc: return "dc_to_ac";
        default: return "unassigned";
    }
}

const char* to_string(LocalLoop l) {
    switch (l) {
        case LocalLoop::ReactivePower: return "reactive_power";
        case LocalLoop::DcVoltage: return "dc_voltage";
        case LocalLoop::PowerTransferDcSide: return "power_transfer_dc_side";
        default: return "power_transfer_ac_side";
    }
}

const char* to_string(DirectionRequirement d) {
    switch (d) {
        case DirectionRequirement::AcToDc: return "ac_to_dc";
        case DirectionRequirement::DcToAc: return "dc_to_ac";
        case DirectionRequirement::FreeChoice: return "free_choice";
        default: return "not_orientable";
    }
}

}  // namespace acdc
