#include "acdc/dq_model.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>
#include <vector>

namespace acdc {

namespace {

constexpr double kGuard = 1e-6;

std::string kind_name(DqControls::Kind k) {
    switch (k) {
        case DqControls::Kind::M: return "m";
        case DqControls::Kind::Beta: return "beta";
        case DqControls::Kind::Rho: return "rho";
        case DqControls::Kind::CurrentSetpoint: return "current-setpoint";
    }
    return "?";
}

DqControls::Kind expected_kind(ModelBase base) {
    switch (base) {
        case ModelBase::Full: return DqControls::Kind::M;
        case ModelBase::BetaSub: return DqControls::Kind::Beta;
        case ModelBase::RhoSub: return DqControls::Kind::Rho;
        case ModelBase::Timescale: return DqControls::Kind::CurrentSetpoint;
    }
    return DqControls::Kind::M;
}

void require_kind(const ModelVariant& variant, const DqControls& controls) {
    const auto want = expected_kind(variant.base);
    if (controls.kind != want) {
        throw VariantMismatch("model base " + to_string(variant.base) + " takes " +
                              kind_name(want) + " controls, got " +
                              kind_name(controls.kind));
    }
}

// Sign of the omega-L term in the q-axis current equation.
double cross(const ModelVariant& v) {
    return v.cross_sign == CrossSign::Paper ? 1.0 : -1.0;
}

// Applies the constant-AC-voltage approximation: v_q = 0, v_d held.
DqBoundary effective_boundary(const ModelVariant& variant, const DqBoundary& b) {
    DqBoundary eff = b;
    if (variant.const_ac_voltage) eff.v_q = 0;
    return eff;
}

DqControls to_m(const DqControls& from, const DqState& state,
                const DqParams& params, double s) {
    const double wl = params.omega * params.L;
    switch (from.kind) {
        case DqControls::Kind::M:
            return from;
        case DqControls::Kind::Beta: {
            if (std::abs(state.v_dc) < kGuard) {
                std::ostringstream msg;
                msg << "beta-to-m conversion divides by v_dc = " << state.v_dc;
                throw DivisionGuard(msg.str());
            }
            return DqControls::m(2 * (from.d + wl * state.i_q) / state.v_dc,
                                 2 * (from.q + s * wl * state.i_d) / state.v_dc);
        }
        case DqControls::Kind::Rho: {
            if (std::abs(state.i_d) < kGuard || std::abs(state.i_q) < kGuard) {
                throw DivisionGuard("rho-to-m conversion divides by currents i_d = " +
                                    std::to_string(state.i_d) + ", i_q = " +
                                    std::to_string(state.i_q));
            }
            return DqControls::m(from.d / state.i_d, from.q / state.i_q);
        }
        case DqControls::Kind::CurrentSetpoint:
            throw VariantMismatch("current setpoints have no switching-signal form");
    }
    throw VariantMismatch("unknown control kind");
}

}  // namespace

void DqParams::validate() const {
    if (!(L > 0)) throw InvariantError("dq params: L must be positive");
    if (!(C_dc > 0)) throw InvariantError("dq params: C_dc must be positive");
    if (R < 0) throw InvariantError("dq params: R must be nonnegative");
    if (!(omega > 0)) throw InvariantError("dq params: omega must be positive");
}

double dq_zeta(const ModelVariant& variant, const DqParams& params,
               const DqState& state, const DqControls& controls,
               const DqBoundary& boundary) {
    require_kind(variant, controls);
    const DqBoundary b = effective_boundary(variant, boundary);
    switch (variant.base) {
        case ModelBase::Full:
            return 0.75 * (state.i_d * controls.d + state.i_q * controls.q);
        case ModelBase::BetaSub: {
            const DqControls m = to_m(controls, state, params, cross(variant));
            return 0.75 * (state.i_d * m.d + state.i_q * m.q);
        }
        case ModelBase::RhoSub:
            return 0.75 * (controls.d + controls.q);
        case ModelBase::Timescale: {
            // Lossless conversion at the commanded currents.
            if (std::abs(state.v_dc) < kGuard) {
                throw GuardViolation("timescale zeta divides by v_dc = " +
                                     std::to_string(state.v_dc));
            }
            return 0.75 * (b.v_d * controls.d + b.v_q * controls.q) / state.v_dc;
        }
    }
    throw VariantMismatch("unknown model base");
}

DqDerivatives dq_derivatives(const ModelVariant& variant, const DqParams& params,
                             const DqState& state, const DqControls& controls,
                             const DqBoundary& boundary) {
    params.validate();
    require_kind(variant, controls);
    const DqBoundary b = effective_boundary(variant, boundary);
    const double wl = params.omega * params.L;
    const double s = cross(variant);

    DqDerivatives out;
    switch (variant.base) {
        case ModelBase::Full:
            out.di_d = (b.v_d + wl * state.i_q - params.R * state.i_d -
                        0.5 * state.v_dc * controls.d) / params.L;
            out.di_q = (b.v_q + s * wl * state.i_d - params.R * state.i_q -
                        0.5 * state.v_dc * controls.q) / params.L;
            break;
        case ModelBase::BetaSub:
            // Decoupled current dynamics: no cross terms, no v_dc.
            out.di_d = (b.v_d - params.R * state.i_d - controls.d) / params.L;
            out.di_q = (b.v_q - params.R * state.i_q - controls.q) / params.L;
            break;
        case ModelBase::RhoSub:
            if (std::abs(state.i_d) < kGuard || std::abs(state.i_q) < kGuard) {
                throw GuardViolation("rho model needs |i_d|, |i_q| >= 1e-6, got i_d = " +
                                     std::to_string(state.i_d) + ", i_q = " +
                                     std::to_string(state.i_q));
            }
            out.di_d = (b.v_d + wl * state.i_q - params.R * state.i_d -
                        state.v_dc * controls.d / (2 * state.i_d)) / params.L;
            out.di_q = (b.v_q + s * wl * state.i_d - params.R * state.i_q -
                        state.v_dc * controls.q / (2 * state.i_q)) / params.L;
            break;
        case ModelBase::Timescale:
            // Currents are at their setpoints; only the capacitor evolves.
            out.di_d = 0;
            out.di_q = 0;
            break;
    }

    if (variant.const_dc_voltage) {
        out.dv_dc = 0;
    } else {
        const double zeta = dq_zeta(variant, params, state, controls, boundary);
        out.dv_dc = (zeta - b.i_line) / params.C_dc;
    }
    return out;
}

DqControls convert_controls(const DqControls& from, const ModelVariant& to,
                            const DqState& state, const DqParams& params) {
    const auto target = expected_kind(to.base);
    if (target == DqControls::Kind::CurrentSetpoint) {
        throw VariantMismatch(
            "the timescale-separated model takes current setpoints, not converted controls");
    }
    if (from.kind == DqControls::Kind::CurrentSetpoint) {
        throw VariantMismatch("current setpoints cannot be converted to " +
                              kind_name(target) + " controls");
    }
    const double s = cross(to);
    const DqControls m = to_m(from, state, params, s);
    const double wl = params.omega * params.L;
    switch (target) {
        case DqControls::Kind::M:
            return m;
        case DqControls::Kind::Beta:
            return DqControls::beta(0.5 * state.v_dc * m.d - wl * state.i_q,
                                    0.5 * state.v_dc * m.q - s * wl * state.i_d);
        case DqControls::Kind::Rho:
            return DqControls::rho(state.i_d * m.d, state.i_q * m.q);
        case DqControls::Kind::CurrentSetpoint:
            break;
    }
    throw VariantMismatch("unknown conversion target");
}

DqOutputs dq_outputs(const DqState& state, const DqControls& m_controls,
                     const DqBoundary& boundary) {
    if (m_controls.kind != DqControls::Kind::M) {
        throw VariantMismatch("dq_outputs takes m-form controls, got " +
                              kind_name(m_controls.kind));
    }
    DqOutputs out;
    out.zeta = 0.75 * (state.i_d * m_controls.d + state.i_q * m_controls.q);
    out.p_dc = state.v_dc * out.zeta;
    out.p_ac = 0.75 * (boundary.v_d * state.i_d + boundary.v_q * state.i_q);
    out.q_ac = 0.75 * (-boundary.v_d * state.i_q + boundary.v_q * state.i_d);
    return out;
}

namespace {

constexpr std::array<Signal, 6> kSignals = {Signal::Vd,  Signal::Vq,  Signal::Id,
                                            Signal::Iq,  Signal::Vdc, Signal::ILine};

struct SamplePoint {
    std::array<double, 6> value;  // indexed by Signal
    DqControls controls;

    double& at(Signal s) { return value[static_cast<int>(s)]; }
    double at(Signal s) const { return value[static_cast<int>(s)]; }
};

double eval_target(const ModelVariant& variant, const DqParams& params,
                   const SamplePoint& p, Signal target) {
    const DqState state{p.at(Signal::Id), p.at(Signal::Iq), p.at(Signal::Vdc)};
    const DqBoundary boundary{p.at(Signal::Vd), p.at(Signal::Vq), p.at(Signal::ILine)};
    if (target == Signal::ILine) {
        // Under constant DC voltage the line draw equals zeta.
        return dq_zeta(variant, params, state, p.controls, boundary);
    }
    const DqDerivatives d = dq_derivatives(variant, params, state, p.controls, boundary);
    switch (target) {
        case Signal::Id: return d.di_d;
        case Signal::Iq: return d.di_q;
        case Signal::Vdc: return d.dv_dc;
        default: throw InvariantError("not a sampled target");
    }
}

CouplingGraph timescale_edges(const ModelVariant& variant) {
    CouplingGraph g;
    g.insert({Signal::Id, Signal::Vd, EdgeKind::Control});
    g.insert({Signal::Iq, Signal::Vq, EdgeKind::Control});
    if (variant.const_dc_voltage) {
        g.insert({Signal::Id, Signal::ILine, EdgeKind::Control});
        g.insert({Signal::Iq, Signal::ILine, EdgeKind::Control});
    } else {
        g.insert({Signal::Id, Signal::Vdc, EdgeKind::Control});
        g.insert({Signal::Iq, Signal::Vdc, EdgeKind::Control});
        g.insert({Signal::Vdc, Signal::ILine, EdgeKind::Physical});
        g.insert({Signal::ILine, Signal::Vdc, EdgeKind::Physical});
    }
    return g;
}

}  // namespace

CouplingGraph coupling_graph(const ModelVariant& variant,
                             const std::set<LocalLoop>& loops,
                             const DqParams& params, std::uint64_t seed,
                             int samples) {
    params.validate();
    if (samples < 1) throw InvariantError("coupling_graph needs at least one sample");

    CouplingGraph g;
    if (variant.base == ModelBase::Timescale) {
        g = timescale_edges(variant);
    } else {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> u_sym(-1.0, 1.0);
        std::uniform_real_distribution<double> u_vdc(0.5, 1.5);

        std::vector<Signal> targets = {Signal::Id, Signal::Iq};
        targets.push_back(variant.const_dc_voltage ? Signal::ILine : Signal::Vdc);

        std::vector<Signal> sources = {Signal::Id, Signal::Iq, Signal::ILine};
        if (!variant.const_ac_voltage) {
            sources.push_back(Signal::Vd);
            sources.push_back(Signal::Vq);
        }
        if (!variant.const_dc_voltage) sources.push_back(Signal::Vdc);

        constexpr double kStep = 1e-6;
        constexpr double kThreshold = 1e-8;
        // Keep rho-model evaluations clear of the current guard even after
        // the finite-difference perturbation.
        constexpr double kCurrentMargin = 1e-2;

        for (int k = 0; k < samples; ++k) {
            SamplePoint p;
            do {
                p.at(Signal::Vd) = u_sym(gen);
                p.at(Signal::Vq) = u_sym(gen);
                p.at(Signal::Id) = u_sym(gen);
                p.at(Signal::Iq) = u_sym(gen);
                p.at(Signal::Vdc) = u_vdc(gen);
                p.at(Signal::ILine) = u_sym(gen);
            } while (variant.base == ModelBase::RhoSub &&
                     (std::abs(p.at(Signal::Id)) < kCurrentMargin ||
                      std::abs(p.at(Signal::Iq)) < kCurrentMargin));
            p.controls = DqControls{expected_kind(variant.base), u_sym(gen), u_sym(gen)};

            for (Signal src : sources) {
                for (Signal tgt : targets) {
                    if (src == tgt) continue;
                    SamplePoint hi = p, lo = p;
                    hi.at(src) += kStep;
                    lo.at(src) -= kStep;
                    const double deriv = (eval_target(variant, params, hi, tgt) -
                                          eval_target(variant, params, lo, tgt)) /
                                         (2 * kStep);
                    if (std::abs(deriv) > kThreshold) {
                        g.insert({src, tgt, EdgeKind::Physical});
                    }
                }
            }
        }

        // The adjacent grids respond to what the converter injects: the AC bus
        // voltage to the converter currents, the DC line draw to the terminal
        // voltage. These reactions live outside the single-converter equations
        // but carry the information flow the partition argument relies on.
        g.insert({Signal::Id, Signal::Vd, EdgeKind::Physical});
        g.insert({Signal::Iq, Signal::Vq, EdgeKind::Physical});
        if (!variant.const_dc_voltage) {
            g.insert({Signal::Vdc, Signal::ILine, EdgeKind::Physical});
        }
    }

    for (LocalLoop loop : loops) {
        switch (loop) {
            case LocalLoop::ReactivePower:
                g.insert({Signal::Vd, Signal::Iq, EdgeKind::Loop});
                g.insert({Signal::Vq, Signal::Iq, EdgeKind::Loop});
                break;
            case LocalLoop::DcVoltage:
                g.insert({Signal::Vdc, Signal::Id, EdgeKind::Loop});
                break;
            case LocalLoop::PowerTransferDcSide:
                g.insert({Signal::ILine, Signal::Id, EdgeKind::Loop});
                break;
            case LocalLoop::PowerTransferAcSide:
                g.insert({Signal::Vd, Signal::Id, EdgeKind::Loop});
                g.insert({Signal::Vq, Signal::Id, EdgeKind::Loop});
                break;
        }
    }
    return g;
}

PartitionType partition_type(const ModelVariant& variant,
                             const std::set<LocalLoop>& loops,
                             const DqParams& params, std::uint64_t seed) {
    const CouplingGraph g = coupling_graph(variant, loops, params, seed);

    auto reaches = [&g](std::initializer_list<Signal> from,
                        std::initializer_list<Signal> to) {
        std::set<Signal> seen(from);
        std::queue<Signal> frontier;
        for (Signal s : from) frontier.push(s);
        while (!frontier.empty()) {
            const Signal at = frontier.front();
            frontier.pop();
            for (const SignalEdge& e : g) {
                if (e.from == at && seen.insert(e.to).second) frontier.push(e.to);
            }
        }
        for (Signal s : to) {
            if (seen.count(s)) return true;
        }
        return false;
    };

    // The AC grid talks to the converter through its bus voltage; the DC grid
    // through the capacitor voltage and line draw. Currents are conduits.
    const bool ac_to_dc = reaches({Signal::Vd, Signal::Vq}, {Signal::Vdc, Signal::ILine});
    const bool dc_to_ac = reaches({Signal::Vdc, Signal::ILine}, {Signal::Vd, Signal::Vq});
    if (ac_to_dc && dc_to_ac) return PartitionType::NotPartitioned;
    if (ac_to_dc) return PartitionType::OneWayAcToDc;
    if (dc_to_ac) return PartitionType::OneWayDcToAc;
    return PartitionType::Full;
}

std::string to_string(Signal s) {
    switch (s) {
        case Signal::Vd: return "v_d";
        case Signal::Vq: return "v_q";
        case Signal::Id: return "i_d";
        case Signal::Iq: return "i_q";
        case Signal::Vdc: return "v_dc";
        case Signal::ILine: return "i_line";
    }
    return "?";
}

std::string to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Physical: return "physical";
        case EdgeKind::Control: return "control";
        case EdgeKind::Loop: return "loop";
    }
    return "?";
}

std::string to_string(PartitionType p) {
    switch (p) {
        case PartitionType::NotPartitioned: return "not_partitioned";
        case PartitionType::OneWayAcToDc: return "one_way_ac_to_dc";
        case PartitionType::OneWayDcToAc: return "one_way_dc_to_ac";
        case PartitionType::Full: return "full";
    }
    return "?";
}

std::string to_string(ModelBase b) {
    switch (b) {
        case ModelBase::Full: return "full";
        case ModelBase::BetaSub: return "beta_sub";
        case ModelBase::RhoSub: return "rho_sub";
        case ModelBase::Timescale: return "timescale";
    }
    return "?";
}

}  // namespace acdc
