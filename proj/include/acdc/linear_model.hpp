#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acdc/grid.hpp"
#include "acdc/poset.hpp"

namespace acdc {

// ========================================================================
// Physical parameters
// ========================================================================

/// Per-element physical parameters of the linearized model. Lookups of
/// absent required values throw MissingParameter naming the element.
struct LinearGridParams {
    struct AcBus {
        double inertia = 0;    // J
        double damping = 0;    // D
        double injection = 0;  // P (constant)
    };
    struct DcLine {
        double inductance = 0;  // L
        double resistance = 0;  // R
    };

    std::map<int, AcBus> ac_bus;
    std::map<Line, double> ac_line_susceptance;  // B
    std::map<int, double> dc_bus_capacitance;    // C
    std::map<Line, DcLine> dc_line;
    std::map<std::pair<int, int>, double> converter_nominal_voltage;  // vhat, (ac,dc)

    const AcBus& at_ac_bus(int bus) const;
    double susceptance(const Line& line) const;
    double capacitance(int bus) const;
    const DcLine& at_dc_line(const Line& line) const;
    double nominal_voltage(const Converter& c) const;
};

/// Diagonal quadratic cost weights, keyed by rendered state label / by
/// converter id; anything not listed uses the defaults.
struct CostWeights {
    double default_state = 1.0;
    double default_input = 1.0;
    std::map<std::string, double> state_overrides;
    std::map<std::string, double> input_overrides;

    double state_weight(const std::string& label) const;
    double input_weight(const std::string& converter_id) const;
};

// ========================================================================
// State space
// ========================================================================

enum class StateKind { Angle, Frequency, DcVoltage, DcLineCurrent };

struct StateLabel {
    std::string subgrid;  // "AC1", "DC2", ...
    StateKind kind;
    std::string element;  // bus id or "i-j" line id

    std::string str() const;
};

/// How the disturbance enters: identity F, or physical channels with 1/J
/// on frequency rows and 1/C on DC voltage rows (zeros elsewhere).
enum class DisturbanceModel { Identity, PhysicalChannels };

/// Linear model  xdot = A x + B u + F w (+ drift),  z = C x + D u.
/// States are ordered subgrid-by-subgrid in a topological order of the
/// quotient DAG; inputs are one converter current per converter, grouped
/// by the converter's source subgrid in the same order. C = [Qhalf; 0]
/// and D = [0; Rhalf], so C'D = 0. `drift` carries the constant injection
/// terms P/J (zero in the usual deviation model).
struct StateSpace {
    Eigen::MatrixXd A, B, F, C, D;
    Eigen::VectorXd drift;
    std::vector<StateLabel> state_labels;
    std::vector<std::string> input_labels;  // converter ids
    BlockPartition state_partition{{}};
    BlockPartition input_partition{{}};
    std::vector<std::string> subgrid_order;  // subgrid names, topological

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    Eigen::MatrixXd Q() const { return C.transpose() * C; }
    Eigen::MatrixXd R() const { return D.transpose() * D; }
    int state_index(const std::string& rendered_label) const;
    int input_index(const std::string& converter_id) const;
};

/// Assemble the swing / DC-circuit model. Every converter must be
/// oriented (UnorientedConverter) and the quotient acyclic. Angle states
/// are omitted for single-bus AC subgrids (no AC lines to reference them).
StateSpace build_linear_statespace(const GridGraph& grid,
                                   const LinearGridParams& params,
                                   const CostWeights& cost = {},
                                   DisturbanceModel disturbance = DisturbanceModel::Identity);

/// Poset over the state-space's subgrid blocks (elements in block order).
Poset statespace_poset(const GridGraph& grid, const StateSpace& ss);

// ========================================================================
// Structure verification
// ========================================================================

struct Lemma1Report {
    bool a_block_diagonal = true;
    MembershipReport a_membership;
    MembershipReport b_membership;

    bool pass() const {
        return a_block_diagonal && a_membership.ok && b_membership.ok;
    }
};

/// Check A is block diagonal over the state partition and B lies in the
/// block incidence algebra of the poset (entries below 1e-12 are zero).
Lemma1Report verify_lemma1(const StateSpace& ss, const Poset& poset);

/// Check the open-loop map P22(s) = (sI - A)^{-1} B stays in the block
/// incidence algebra at the sampled frequencies s = j*omega: every
/// off-structure block must have Frobenius norm at most rel_tol times the
/// full matrix norm. Frequencies within 1e-6 of an eigenvalue of A are
/// skipped. Default frequencies: 5 log-spaced in [1e-2, 1e2].
bool p22_structure_check(const StateSpace& ss, const Poset& poset,
                         std::vector<double> frequencies = {},
                         double rel_tol = 1e-9);

}  // namespace acdc
