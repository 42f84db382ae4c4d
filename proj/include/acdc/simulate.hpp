#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acdc/dq_model.hpp"
#include "acdc/linear_model.hpp"
#include "acdc/synthesis.hpp"

namespace acdc {

struct SimConfig {
    double dt = 1e-4;
    double horizon = 10.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Fixed-step trajectory. Rows are steps at uniform spacing dt; the input
/// matrix is empty unless a controller (or converter outputs) supplied
/// per-step values.
struct Trace {
    std::vector<double> times;
    Eigen::MatrixXd states;
    Eigen::MatrixXd inputs;
    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;

    int steps() const { return static_cast<int>(times.size()); }
};

/// Classical RK4 integration of dx/dt = A x + drift (+ B K x with a
/// controller). Inputs u = K x are recorded when K is given. Throws
/// NonFiniteState if any state magnitude exceeds 1e12.
Trace simulate_linear(const StateSpace& ss, const GainMatrix* K,
                      const Eigen::VectorXd& x0, const SimConfig& cfg);

/// RK4 integration of one converter's dq model with prescribed control and
/// boundary signals. The trace's input columns carry the controls followed
/// by (zeta, p_dc, p_ac, q_ac) at each step.
Trace simulate_dq(const ModelVariant& variant, const DqParams& params,
                  const std::function<DqControls(double)>& controls,
                  const std::function<DqBoundary(double)>& boundary,
                  const DqState& x0, const SimConfig& cfg);

struct ChannelMetrics {
    double settling_time = 0;  // infinity when the channel never settles
    double peak = 0;
};

struct TraceMetrics {
    std::vector<std::string> labels;  // state channels, trace order
    std::vector<ChannelMetrics> channels;
    double quadratic_cost = 0;

    const ChannelMetrics& channel(const std::string& label) const;
};

/// Per-channel settling time (first time after which |x| stays within 10%
/// of |x(0)|), peak |x|, and the trapezoid integral of x'Qx + u'Ru.
TraceMetrics trace_metrics(const Trace& trace, const Eigen::MatrixXd& Q,
                           const Eigen::MatrixXd& R);

/// Unit-weight convenience overload.
TraceMetrics trace_metrics(const Trace& trace);

}  // namespace acdc
