#include "acdc/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace acdc {

const LinearGridParams::AcBus& LinearGridParams::at_ac_bus(int bus) const {
    auto it = ac_bus.find(bus);
    if (it == ac_bus.end())
        throw MissingParameter("no parameters for ac bus " + std::to_string(bus));
    if (it->second.inertia <= 0)
        throw MissingParameter("ac bus " + std::to_string(bus) +
                               " needs a positive inertia");
    return it->second;
}

double LinearGridParams::susceptance(const Line& line) const {
    auto it = ac_line_susceptance.find(line);
    if (it == ac_line_susceptance.end())
        throw MissingParameter("no susceptance for ac line " +
                               std::to_string(line.first) + "-" +
                               std::to_string(line.second));
    return it->second;
}

double LinearGridParams::capacitance(int bus) const {
    auto it = dc_bus_capacitance.find(bus);
    if (it == dc_bus_capacitance.end() || it->second <= 0)
        throw MissingParameter("no capacitance for dc bus " + std::to_string(bus));
    return it->second;
}

const LinearGridParams::DcLine& LinearGridParams::at_dc_line(const Line& line) const {
    auto it = dc_line.find(line);
    if (it == dc_line.end() || it->second.inductance <= 0)
        throw MissingParameter("no inductance for dc line " +
                               std::to_string(line.first) + "-" +
                               std::to_string(line.second));
    return it->second;
}

double LinearGridParams::nominal_voltage(const Converter& c) const {
    auto it = converter_nominal_voltage.find({c.ac_bus, c.dc_bus});
    if (it == converter_nominal_voltage.end())
        throw MissingParameter("no nominal dc voltage for converter " + c.id());
    return it->second;
}

double CostWeights::state_weight(const std::string& label) const {
    auto it = state_overrides.find(label);
    return it == state_overrides.end() ? default_state : it->second;
}

double CostWeights::input_weight(const std::string& converter_id) const {
    auto it = input_overrides.find(converter_id);
    return it == input_overrides.end() ? default_input : it->second;
}

std::string StateLabel::str() const {
    const char* kind_name = "";
    switch (kind) {
        case StateKind::Angle: kind_name = "theta"; break;
        case StateKind::Frequency: kind_name = "omega"; break;
        case StateKind::DcVoltage: kind_name = "v"; break;
        case StateKind::DcLineCurrent: kind_name = "i"; break;
    }
    return subgrid + ":" + kind_name + ":" + element;
}

int StateSpace::state_index(const std::string& rendered_label) const {
    for (size_t i = 0; i < state_labels.size(); ++i)
        if (state_labels[i].str() == rendered_label) return static_cast<int>(i);
    throw UnknownElement("no such state: " + rendered_label);
}

int StateSpace::input_index(const std::string& converter_id) const {
    for (size_t i = 0; i < input_labels.size(); ++i)
        if (input_labels[i] == converter_id) return static_cast<int>(i);
    throw UnknownElement("no such input: " + converter_id);
}

// ------------------------------------------------------------------------
// Assembly
// ------------------------------------------------------------------------

namespace {

std::vector<int> default_rank(const QuotientGraph& q) {
    std::vector<int> rank(q.nodes.size());
    for (size_t i = 0; i < q.nodes.size(); ++i)
        rank[i] = (q.nodes[i].kind == SubgridKind::Ac ? 0 : 1000000) + q.nodes[i].index;
    return rank;
}

}  // namespace

StateSpace build_linear_statespace(const GridGraph& grid,
                                   const LinearGridParams& params,
                                   const CostWeights& cost,
                                   DisturbanceModel disturbance) {
    grid.validate();
    for (const auto& c : grid.converters)
        if (c.orientation == Orientation::Unassigned)
            throw UnorientedConverter("converter " + c.id() + " has no direction");

    SubgridMap map = connected_components(grid);
    QuotientGraph q = build_quotient_graph(grid, map);
    auto order = q.topological_order(default_rank(q));
    if (!order) throw NotAcyclic("quotient graph contains a directed cycle");

    StateSpace ss;
    std::map<int, int> row_of_omega;   // ac bus -> state row
    std::map<int, int> row_of_theta;   // ac bus -> state row (when present)
    std::map<int, int> row_of_vdc;     // dc bus -> state row
    std::map<Line, int> row_of_iline;  // dc line -> state row

    // ---- state layout --------------------------------------------------
    std::vector<int> state_block_sizes;
    for (int node : *order) {
        const auto& sg = q.nodes[node];
        ss.subgrid_order.push_back(sg.name);
        int before = static_cast<int>(ss.state_labels.size());
        if (sg.kind == SubgridKind::Ac) {
            auto buses = map.buses_of(SubgridKind::Ac, sg.index);
            bool with_angles = buses.size() > 1;
            if (with_angles)
                for (int b : buses) {
                    row_of_theta[b] = static_cast<int>(ss.state_labels.size());
                    ss.state_labels.push_back({sg.name, StateKind::Angle, std::to_string(b)});
                }
            for (int b : buses) {
                row_of_omega[b] = static_cast<int>(ss.state_labels.size());
                ss.state_labels.push_back({sg.name, StateKind::Frequency, std::to_string(b)});
            }
        } else {
            auto buses = map.buses_of(SubgridKind::Dc, sg.index);
            for (int b : buses) {
                row_of_vdc[b] = static_cast<int>(ss.state_labels.size());
                ss.state_labels.push_back({sg.name, StateKind::DcVoltage, std::to_string(b)});
            }
            for (const auto& line : grid.dc_lines) {
                if (map.component_of(SubgridKind::Dc, line.first) != sg.index) continue;
                row_of_iline[line] = static_cast<int>(ss.state_labels.size());
                ss.state_labels.push_back({sg.name, StateKind::DcLineCurrent,
                                           std::to_string(line.first) + "-" +
                                               std::to_string(line.second)});
            }
        }
        state_block_sizes.push_back(static_cast<int>(ss.state_labels.size()) - before);
    }

    // ---- input layout (converters grouped by source subgrid) ------------
    std::vector<int> input_block_sizes;
    std::vector<const Converter*> inputs;
    for (int node : *order) {
        const auto& sg = q.nodes[node];
        int before = static_cast<int>(inputs.size());
        std::vector<const Converter*> mine;
        for (const auto& c : grid.converters) {
            SubgridKind source_kind = c.orientation == Orientation::AcToDc
                                          ? SubgridKind::Ac
                                          : SubgridKind::Dc;
            if (source_kind != sg.kind) continue;
            int source_bus = source_kind == SubgridKind::Ac ? c.ac_bus : c.dc_bus;
            if (map.component_of(source_kind, source_bus) != sg.index) continue;
            mine.push_back(&c);
        }
        std::sort(mine.begin(), mine.end(), [](const Converter* a, const Converter* b) {
            return std::tie(a->ac_bus, a->dc_bus) < std::tie(b->ac_bus, b->dc_bus);
        });
        inputs.insert(inputs.end(), mine.begin(), mine.end());
        input_block_sizes.push_back(static_cast<int>(inputs.size()) - before);
    }
    for (const auto* c : inputs) ss.input_labels.push_back(c->id());

    const int n = static_cast<int>(ss.state_labels.size());
    const int m = static_cast<int>(inputs.size());
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.B = Eigen::MatrixXd::Zero(n, m);
    ss.drift = Eigen::VectorXd::Zero(n);
    ss.state_partition = BlockPartition(state_block_sizes);
    ss.input_partition = BlockPartition(input_block_sizes);

    // ---- AC dynamics:  theta' = omega,
    //      J omega' = P - D omega - sum B (theta_i - theta_j) -+ vhat zeta
    for (const auto& [bus, w_row] : row_of_omega) {
        const auto& p = params.at_ac_bus(bus);
        ss.A(w_row, w_row) -= p.damping / p.inertia;
        ss.drift(w_row) += p.injection / p.inertia;
        if (auto it = row_of_theta.find(bus); it != row_of_theta.end())
            ss.A(it->second, w_row) = 1.0;  // theta' = omega
    }
    for (const auto& line : grid.ac_lines) {
        double b = params.susceptance(line);
        for (auto [self, other] : {std::pair{line.first, line.second},
                                   std::pair{line.second, line.first}}) {
            int w_row = row_of_omega.at(self);
            double inertia = params.at_ac_bus(self).inertia;
            ss.A(w_row, row_of_theta.at(self)) -= b / inertia;
            ss.A(w_row, row_of_theta.at(other)) += b / inertia;
        }
    }

    // ---- DC dynamics:  C v' = sum line currents -+ zeta,
    //      L i' = v_i - v_j - R i     (current flows first -> second)
    for (const auto& [line, i_row] : row_of_iline) {
        const auto& p = params.at_dc_line(line);
        int v_from = row_of_vdc.at(line.first);
        int v_to = row_of_vdc.at(line.second);
        ss.A(i_row, v_from) += 1.0 / p.inductance;
        ss.A(i_row, v_to) -= 1.0 / p.inductance;
        ss.A(i_row, i_row) -= p.resistance / p.inductance;
        ss.A(v_from, i_row) -= 1.0 / params.capacitance(line.first);
        ss.A(v_to, i_row) += 1.0 / params.capacitance(line.second);
    }

    // ---- converter columns ----------------------------------------------
    for (int k = 0; k < m; ++k) {
        const Converter& c = *inputs[k];
        double vhat = params.nominal_voltage(c);
        double inertia = params.at_ac_bus(c.ac_bus).inertia;
        double cap = params.capacitance(c.dc_bus);
        int w_row = row_of_omega.at(c.ac_bus);
        int v_row = row_of_vdc.at(c.dc_bus);
        if (c.orientation == Orientation::AcToDc) {
            ss.B(w_row, k) -= vhat / inertia;  // AC side sheds power
            ss.B(v_row, k) += 1.0 / cap;       // DC side receives current
        } else {
            ss.B(w_row, k) += vhat / inertia;
            ss.B(v_row, k) -= 1.0 / cap;
        }
    }

    // ---- cost outputs z = [Qhalf x; Rhalf u] ----------------------------
    ss.C = Eigen::MatrixXd::Zero(n + m, n);
    ss.D = Eigen::MatrixXd::Zero(n + m, m);
    for (int i = 0; i < n; ++i)
        ss.C(i, i) = std::sqrt(cost.state_weight(ss.state_labels[i].str()));
    for (int k = 0; k < m; ++k)
        ss.D(n + k, k) = std::sqrt(cost.input_weight(ss.input_labels[k]));

    // ---- disturbance ----------------------------------------------------
    ss.F = Eigen::MatrixXd::Identity(n, n);
    if (disturbance == DisturbanceModel::PhysicalChannels) {
        ss.F.setZero();
        for (const auto& [bus, row] : row_of_omega)
            ss.F(row, row) = 1.0 / params.at_ac_bus(bus).inertia;
        for (const auto& [bus, row] : row_of_vdc)
            ss.F(row, row) = 1.0 / params.capacitance(bus);
    }
    return ss;
}

Poset statespace_poset(const GridGraph& grid, const StateSpace& ss) {
    SubgridMap map = connected_components(grid);
    QuotientGraph q = build_quotient_graph(grid, map);
    std::vector<int> node_order;
    for (const auto& name : ss.subgrid_order) node_order.push_back(q.node_by_name(name));
    return poset_from_dag(q, node_order);
}

// ------------------------------------------------------------------------
// Structure checks
// ------------------------------------------------------------------------

Lemma1Report verify_lemma1(const StateSpace& ss, const Poset& poset) {
    Lemma1Report report;
    const auto& part = ss.state_partition;
    const double tol = 1e-12;

    for (int j = 0; j < part.blocks(); ++j)
        for (int i = 0; i < part.blocks(); ++i) {
            if (i == j || part.sizes[i] == 0 || part.sizes[j] == 0) continue;
            auto block = ss.A.block(part.offset(j), part.offset(i),
                                    part.sizes[j], part.sizes[i]);
            if (block.cwiseAbs().maxCoeff() > tol) report.a_block_diagonal = false;
        }

    report.a_membership =
        in_block_incidence_algebra(ss.A, part, part, poset, tol);
    report.b_membership =
        in_block_incidence_algebra(ss.B, part, ss.input_partition, poset, tol);
    return report;
}

bool p22_structure_check(const StateSpace& ss, const Poset& poset,
                         std::vector<double> frequencies, double rel_tol) {
    if (frequencies.empty()) {
        // 5 log-spaced samples across [1e-2, 1e2].
        for (int k = 0; k < 5; ++k) frequencies.push_back(std::pow(10.0, -2.0 + k));
    }
    const int n = ss.n();
    Eigen::VectorXcd eigs = ss.A.eigenvalues();

    for (double w : frequencies) {
        std::complex<double> s(0.0, w);
        bool near_eigenvalue = false;
        for (int i = 0; i < eigs.size(); ++i)
            if (std::abs(s - eigs(i)) < 1e-6) near_eigenvalue = true;
        if (near_eigenvalue) continue;

        Eigen::MatrixXcd resolvent =
            s * Eigen::MatrixXcd::Identity(n, n) - ss.A.cast<std::complex<double>>();
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(resolvent);
        Eigen::MatrixXcd p22 = lu.solve(ss.B.cast<std::complex<double>>());
        if (!p22.allFinite())
            throw SingularResolvent("resolvent is singular at omega = " + std::to_string(w));

        double total = p22.norm();
        const auto& rows = ss.state_partition;
        const auto& cols = ss.input_partition;
        for (int j = 0; j < rows.blocks(); ++j) {
            if (rows.sizes[j] == 0) continue;
            for (int i = 0; i < cols.blocks(); ++i) {
                if (cols.sizes[i] == 0 || poset.leq(i, j)) continue;
                double off = p22.block(rows.offset(j), cols.offset(i),
                                       rows.sizes[j], cols.sizes[i]).norm();
                if (off > rel_tol * total) return false;
            }
        }
    }
    return true;
}

}  // namespace acdc
