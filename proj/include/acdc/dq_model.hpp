#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "acdc/errors.hpp"
#include "acdc/grid.hpp"

namespace acdc {

/// Averaged VSC parameters: combined transformer+filter inductance and
/// resistance on the AC side, DC-side capacitance, synchronous frequency.
struct DqParams {
    double L = 0.1;
    double R = 0.01;
    double C_dc = 0.1;
    double omega = 1.0;

    void validate() const;
};

struct DqState {
    double i_d = 0;
    double i_q = 0;
    double v_dc = 0;
};

/// Boundary signals the converter sees: the AC bus voltage components and
/// the current drawn toward the DC node.
struct DqBoundary {
    double v_d = 0;
    double v_q = 0;
    double i_line = 0;
};

/// Tagged control pair. The kind must match the model variant in use.
struct DqControls {
    enum class Kind { M, Beta, Rho, CurrentSetpoint };
    Kind kind = Kind::M;
    double d = 0;
    double q = 0;

    static DqControls m(double d, double q) { return {Kind::M, d, q}; }
    static DqControls beta(double d, double q) { return {Kind::Beta, d, q}; }
    static DqControls rho(double d, double q) { return {Kind::Rho, d, q}; }
    static DqControls setpoint(double d, double q) {
        return {Kind::CurrentSetpoint, d, q};
    }
};

enum class ModelBase { Full, BetaSub, RhoSub, Timescale };

/// Sign of the omega-L cross terms in the current equations. Paper mode
/// has +omega*L*i_d in the q equation; Antisymmetric uses the rotating-frame
/// convention -omega*L*i_d. The d equation carries +omega*L*i_q in both.
enum class CrossSign { Paper, Antisymmetric };

struct ModelVariant {
    ModelBase base = ModelBase::Full;
    bool const_ac_voltage = false;  // v_q = 0, v_d held fixed
    bool const_dc_voltage = false;  // dv_dc = 0, i_line = zeta
    CrossSign cross_sign = CrossSign::Paper;
};

struct DqDerivatives {
    double di_d = 0;
    double di_q = 0;
    double dv_dc = 0;
};

struct DqOutputs {
    double zeta = 0;
    double p_dc = 0;
    double p_ac = 0;
    double q_ac = 0;
};

/// Right-hand side of the selected model variant. Controls must match the
/// variant (VariantMismatch otherwise); RhoSub requires |i_d|, |i_q| >= 1e-6
/// (GuardViolation). Under const_dc_voltage the returned dv_dc is 0.
DqDerivatives dq_derivatives(const ModelVariant& variant, const DqParams& params,
                             const DqState& state, const DqControls& controls,
                             const DqBoundary& boundary);

/// DC-side converter current zeta for the given variant and operating point.
double dq_zeta(const ModelVariant& variant, const DqParams& params,
               const DqState& state, const DqControls& controls,
               const DqBoundary& boundary);

/// Re-expresses controls in the control coordinates of `to`. Conversions
/// route through the switching signals m; inverses that divide by v_dc or a
/// current component guard at 1e-6 (DivisionGuard). Timescale has no control
/// map (VariantMismatch).
DqControls convert_controls(const DqControls& from, const ModelVariant& to,
                            const DqState& state, const DqParams& params);

/// Converter currents and powers from the m-form controls:
/// zeta = (3/4)(i_d m_d + i_q m_q), P_dc = v_dc zeta,
/// P_ac = (3/4)(v_d i_d + v_q i_q), Q_ac = (3/4)(-v_d i_q + v_q i_d).
DqOutputs dq_outputs(const DqState& state, const DqControls& m_controls,
                     const DqBoundary& boundary);

/// Signals adjacent to one converter: the AC bus voltage components, the
/// converter currents, the DC capacitor voltage, and the DC line draw.
enum class Signal { Vd, Vq, Id, Iq, Vdc, ILine };

enum class EdgeKind {
    Physical,  // coupling through the model equations or the adjacent grid
    Control,   // coupling mediated by a control input (timescale separation)
    Loop,      // information flow added by a local converter control loop
};

struct SignalEdge {
    Signal from;
    Signal to;
    EdgeKind kind;
    auto operator<=>(const SignalEdge&) const = default;
};

using CouplingGraph = std::set<SignalEdge>;

/// Directed coupling graph among the six converter-adjacent signals.
/// Physical edges between model states are found by sampling Jacobians at
/// `samples` random points (|d(target)/d(source)| > 1e-8 at any point);
/// the adjacent grids' reactions (i -> v on the AC side, v_dc -> i_line on
/// the DC side) are structural, and local loops contribute the dashed
/// one-way edges of the paper's coupling diagram.
CouplingGraph coupling_graph(const ModelVariant& variant,
                             const std::set<LocalLoop>& loops,
                             const DqParams& params = DqParams{},
                             std::uint64_t seed = 0, int samples = 20);

enum class PartitionType { NotPartitioned, OneWayAcToDc, OneWayDcToAc, Full };

/// Classifies the converter's partition by directed reachability between the
/// AC-grid signals {v_d, v_q} and the DC-grid signals {v_dc, i_line}; the
/// converter currents act as conduits.
PartitionType partition_type(const ModelVariant& variant,
                             const std::set<LocalLoop>& loops,
                             const DqParams& params = DqParams{},
                             std::uint64_t seed = 0);

std::string to_string(Signal s);
std::string to_string(EdgeKind k);
std::string to_string(PartitionType p);
std::string to_string(ModelBase b);

}  // namespace acdc
