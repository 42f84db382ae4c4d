#include "acdc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace acdc {

namespace {

constexpr double kDivergence = 1e12;

int step_count(const SimConfig& cfg) {
    return static_cast<int>(std::floor(cfg.horizon / cfg.dt + 0.5)) + 1;
}

void check_finite(const Eigen::VectorXd& x, double t) {
    for (int i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x(i)) || std::abs(x(i)) > kDivergence) {
            std::ostringstream msg;
            msg << "state " << i << " diverged at t = " << t << " (value " << x(i)
                << ")";
            throw NonFiniteState(msg.str());
        }
    }
}

// One classical RK4 step of dx/dt = f(t, x).
template <typename F>
Eigen::VectorXd rk4_step(const F& f, double t, const Eigen::VectorXd& x, double dt) {
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + dt / 2, x + (dt / 2) * k1);
    const Eigen::VectorXd k3 = f(t + dt / 2, x + (dt / 2) * k2);
    const Eigen::VectorXd k4 = f(t + dt, x + dt * k3);
    return x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

std::string control_label(DqControls::Kind kind, bool d_axis) {
    switch (kind) {
        case DqControls::Kind::M: return d_axis ? "m_d" : "m_q";
        case DqControls::Kind::Beta: return d_axis ? "beta_d" : "beta_q";
        case DqControls::Kind::Rho: return d_axis ? "rho_d" : "rho_q";
        case DqControls::Kind::CurrentSetpoint: return d_axis ? "i_d_ref" : "i_q_ref";
    }
    return "?";
}

}  // namespace

void SimConfig::validate() const {
    if (!(dt > 0)) throw InvariantError("simulation step dt must be positive");
    if (horizon < dt) throw InvariantError("simulation horizon must cover one step");
}

Trace simulate_linear(const StateSpace& ss, const GainMatrix* K,
                      const Eigen::VectorXd& x0, const SimConfig& cfg) {
    cfg.validate();
    const int n = ss.n();
    if (x0.size() != n) {
        throw DimensionMismatch("initial state has " + std::to_string(x0.size()) +
                                " entries, model has " + std::to_string(n));
    }
    Eigen::MatrixXd a_eff = ss.A;
    if (K != nullptr) {
        if (K->K.rows() != ss.m() || K->K.cols() != n) {
            throw DimensionMismatch("gain is " + std::to_string(K->K.rows()) + "x" +
                                    std::to_string(K->K.cols()) + ", model needs " +
                                    std::to_string(ss.m()) + "x" + std::to_string(n));
        }
        a_eff += ss.B * K->K;
    }

    const int steps = step_count(cfg);
    Trace trace;
    trace.times.resize(steps);
    trace.states.resize(steps, n);
    for (const StateLabel& label : ss.state_labels)
        trace.state_labels.push_back(label.str());
    const int m = K != nullptr ? ss.m() : 0;
    trace.inputs.resize(steps, m);
    if (K != nullptr) trace.input_labels = ss.input_labels;

    auto f = [&a_eff, &ss](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return a_eff * x + ss.drift;
    };

    Eigen::VectorXd x = x0;
    for (int k = 0; k < steps; ++k) {
        const double t = k * cfg.dt;
        check_finite(x, t);
        trace.times[k] = t;
        trace.states.row(k) = x.transpose();
        if (K != nullptr) trace.inputs.row(k) = (K->K * x).transpose();
        if (k + 1 < steps) x = rk4_step(f, t, x, cfg.dt);
    }
    return trace;
}

Trace simulate_dq(const ModelVariant& variant, const DqParams& params,
                  const std::function<DqControls(double)>& controls,
                  const std::function<DqBoundary(double)>& boundary,
                  const DqState& x0, const SimConfig& cfg) {
    cfg.validate();
    params.validate();

    auto f = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const DqState state{x(0), x(1), x(2)};
        const DqDerivatives d =
            dq_derivatives(variant, params, state, controls(t), boundary(t));
        return Eigen::Vector3d(d.di_d, d.di_q, d.dv_dc);
    };

    const int steps = step_count(cfg);
    Trace trace;
    trace.times.resize(steps);
    trace.states.resize(steps, 3);
    trace.state_labels = {"i_d", "i_q", "v_dc"};
    trace.inputs.resize(steps, 6);
    const DqControls::Kind kind = controls(0).kind;
    trace.input_labels = {control_label(kind, true), control_label(kind, false),
                          "zeta", "p_dc", "p_ac", "q_ac"};

    Eigen::VectorXd x(3);
    x << x0.i_d, x0.i_q, x0.v_dc;
    for (int k = 0; k < steps; ++k) {
        const double t = k * cfg.dt;
        check_finite(x, t);
        trace.times[k] = t;
        trace.states.row(k) = x.transpose();

        const DqState state{x(0), x(1), x(2)};
        const DqControls u = controls(t);
        const DqBoundary b = boundary(t);
        const double zeta = dq_zeta(variant, params, state, u, b);
        // AC-side powers at the acting currents (the setpoints under
        // timescale separation) and the model's effective bus voltage.
        const double id = variant.base == ModelBase::Timescale ? u.d : state.i_d;
        const double iq = variant.base == ModelBase::Timescale ? u.q : state.i_q;
        const double vq = variant.const_ac_voltage ? 0.0 : b.v_q;
        trace.inputs(k, 0) = u.d;
        trace.inputs(k, 1) = u.q;
        trace.inputs(k, 2) = zeta;
        trace.inputs(k, 3) = state.v_dc * zeta;
        trace.inputs(k, 4) = 0.75 * (b.v_d * id + vq * iq);
        trace.inputs(k, 5) = 0.75 * (-b.v_d * iq + vq * id);
        if (k + 1 < steps) x = rk4_step(f, t, x, cfg.dt);
    }
    return trace;
}

const ChannelMetrics& TraceMetrics::channel(const std::string& label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw UnknownElement("no trace channel named " + label);
    return channels[it - labels.begin()];
}

TraceMetrics trace_metrics(const Trace& trace, const Eigen::MatrixXd& Q,
                           const Eigen::MatrixXd& R) {
    const int steps = trace.steps();
    if (steps == 0) throw InvariantError("trace is empty");
    const int n = static_cast<int>(trace.states.cols());
    const int m = static_cast<int>(trace.inputs.cols());
    if (Q.rows() != n || Q.cols() != n) {
        throw DimensionMismatch("state weight must be " + std::to_string(n) + "x" +
                                std::to_string(n));
    }
    if (m > 0 && (R.rows() != m || R.cols() != m)) {
        throw DimensionMismatch("input weight must be " + std::to_string(m) + "x" +
                                std::to_string(m));
    }

    TraceMetrics metrics;
    metrics.labels = trace.state_labels;
    metrics.channels.resize(n);
    for (int j = 0; j < n; ++j) {
        const double band = 0.1 * std::abs(trace.states(0, j));
        double peak = 0;
        int settle_index = 0;  // first index from which |x| stays in the band
        for (int k = 0; k < steps; ++k) {
            const double v = std::abs(trace.states(k, j));
            peak = std::max(peak, v);
            if (v > band) settle_index = k + 1;
        }
        metrics.channels[j].peak = peak;
        metrics.channels[j].settling_time =
            settle_index < steps ? trace.times[settle_index]
                                 : std::numeric_limits<double>::infinity();
    }

    double cost = 0;
    auto integrand = [&](int k) {
        const Eigen::VectorXd x = trace.states.row(k).transpose();
        double value = x.dot(Q * x);
        if (m > 0) {
            const Eigen::VectorXd u = trace.inputs.row(k).transpose();
            value += u.dot(R * u);
        }
        return value;
    };
    double prev = integrand(0);
    for (int k = 1; k < steps; ++k) {
        const double cur = integrand(k);
        cost += 0.5 * (prev + cur) * (trace.times[k] - trace.times[k - 1]);
        prev = cur;
    }
    metrics.quadratic_cost = cost;
    return metrics;
}

TraceMetrics trace_metrics(const Trace& trace) {
    const int n = static_cast<int>(trace.states.cols());
    const int m = static_cast<int>(trace.inputs.cols());
    return trace_metrics(trace, Eigen::MatrixXd::Identity(n, n),
                         Eigen::MatrixXd::Identity(m, m));
}

}  // namespace acdc
