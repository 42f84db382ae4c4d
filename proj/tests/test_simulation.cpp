#include "doctest.h"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "acdc/errors.hpp"
#include "acdc/linear_model.hpp"
#include "acdc/simulate.hpp"
#include "acdc/synthesis.hpp"

#include "fixtures.hpp"

using namespace acdc;

namespace {

// Minimal hand-built state space: xdot = A x + B u, C = I, no feedthrough.
StateSpace manual_ss(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    StateSpace ss;
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    ss.A = A;
    ss.B = B;
    ss.F = Eigen::MatrixXd::Identity(n, n);
    ss.C = Eigen::MatrixXd::Identity(n, n);
    ss.D = Eigen::MatrixXd::Zero(n, m);
    ss.drift = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        ss.state_labels.push_back({"S1", StateKind::Frequency, std::to_string(i + 1)});
    for (int j = 0; j < m; ++j) ss.input_labels.push_back("u" + std::to_string(j + 1));
    ss.state_partition = BlockPartition{{n}};
    ss.input_partition = BlockPartition{{m}};
    ss.subgrid_order = {"S1"};
    return ss;
}

StateSpace scalar_ss(double a) {
    Eigen::MatrixXd A(1, 1), B(1, 0);
    A(0, 0) = a;
    return manual_ss(A, B);
}

}  // namespace

TEST_CASE("scalar exponential decay matches the closed form") {
    const StateSpace ss = scalar_ss(-1.0);
    Eigen::VectorXd x0(1);
    x0 << 1.0;

    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 2.0;
    const Trace trace = simulate_linear(ss, nullptr, x0, cfg);

    REQUIRE(trace.steps() == 2001);
    CHECK(trace.times.front() == 0.0);
    CHECK(trace.times.back() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(trace.state_labels.at(0) == "S1:omega:1");
    CHECK(trace.inputs.cols() == 0);

    // t = 1 lands exactly on step 1000.
    CHECK(trace.times[1000] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(trace.states(1000, 0) - std::exp(-1.0)) < 1e-10);
    CHECK(std::abs(trace.states(2000, 0) - std::exp(-2.0)) < 1e-10);
}

TEST_CASE("halving the step shrinks the global error about sixteenfold") {
    Eigen::MatrixXd A(3, 3);
    A << -2.0, 1.0, 0.3,
          0.5, -3.0, 1.0,
          0.2, 0.4, -4.0;
    const StateSpace ss = manual_ss(A, Eigen::MatrixXd::Zero(3, 0));
    Eigen::VectorXd x0(3);
    x0 << 1.0, -0.5, 0.25;

    const double T = 1.0;
    const Eigen::VectorXd truth = (A * T).exp() * x0;

    auto final_error = [&](double dt) {
        SimConfig cfg;
        cfg.dt = dt;
        cfg.horizon = T;
        const Trace tr = simulate_linear(ss, nullptr, x0, cfg);
        const Eigen::VectorXd xT = tr.states.row(tr.steps() - 1).transpose();
        return (xT - truth).norm();
    };

    const double coarse = final_error(0.02);
    const double fine = final_error(0.01);
    REQUIRE(coarse > 1e-12);  // well above rounding noise
    const double factor = coarse / fine;
    CHECK(factor > 8.0);
    CHECK(factor < 32.0);
}

TEST_CASE("settling time of a pure decay is ln 10") {
    const StateSpace ss = scalar_ss(-1.0);
    Eigen::VectorXd x0(1);
    x0 << 1.0;

    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 10.0;
    const Trace trace = simulate_linear(ss, nullptr, x0, cfg);
    const TraceMetrics metrics = trace_metrics(trace);

    const ChannelMetrics& ch = metrics.channel("S1:omega:1");
    CHECK(std::abs(ch.settling_time - std::log(10.0)) <= 2 * cfg.dt);
    CHECK(ch.peak == doctest::Approx(1.0).epsilon(1e-12));

    // Open loop, unit weights: integral of exp(-2t) over [0, 10].
    const double expected = 0.5 * (1.0 - std::exp(-20.0));
    CHECK(std::abs(metrics.quadratic_cost - expected) < 1e-5);
}

TEST_CASE("closed loop matches the matrix exponential and records u = K x") {
    Eigen::MatrixXd A(2, 2), B(2, 1);
    A << 0.0, 1.0, 0.0, 0.0;
    B << 0.0, 1.0;
    const StateSpace ss = manual_ss(A, B);

    GainMatrix gain;
    gain.K.resize(1, 2);
    gain.K << -1.0, -2.0;
    gain.row_partition = BlockPartition{{1}};
    gain.col_partition = BlockPartition{{2}};

    Eigen::VectorXd x0(2);
    x0 << 1.0, 0.0;

    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 2.0;
    const Trace trace = simulate_linear(ss, &gain, x0, cfg);

    REQUIRE(trace.inputs.cols() == 1);
    REQUIRE(trace.inputs.rows() == trace.steps());

    const Eigen::MatrixXd Acl = A + B * gain.K;
    for (double t : {1.0, 2.0}) {
        const int k = static_cast<int>(std::lround(t / cfg.dt));
        const Eigen::VectorXd truth = (Acl * t).exp() * x0;
        const Eigen::VectorXd xk = trace.states.row(k).transpose();
        CHECK((xk - truth).norm() < 1e-9);
    }

    for (int k = 0; k < trace.steps(); k += 250) {
        const Eigen::VectorXd xk = trace.states.row(k).transpose();
        const double u = (gain.K * xk)(0);
        CHECK(std::abs(trace.inputs(k, 0) - u) < 1e-15);
    }
}

TEST_CASE("undamped grid conserves energy over ten seconds") {
    // Zero damping, zero line resistance; soften the LC pair so the RK4
    // amplitude error stays far below the drift budget.
    GridGraph grid = fixtures::point_to_point(Orientation::DcToAc, Orientation::DcToAc);
    LinearGridParams params = fixtures::point_to_point_params();
    params.ac_bus[1].damping = 0.0;
    params.ac_bus[4].damping = 0.0;
    params.dc_bus_capacitance[2] = 0.1;
    params.dc_bus_capacitance[3] = 0.1;
    params.dc_line[make_line(2, 3)] = {0.01, 0.0};

    const StateSpace ss = build_linear_statespace(grid, params);
    REQUIRE(ss.n() == 7);

    const int iv2 = ss.state_index("DC1:v:2");
    const int iv3 = ss.state_index("DC1:v:3");
    const int ii23 = ss.state_index("DC1:i:2-3");
    const int ith1 = ss.state_index("AC1:theta:1");
    const int ith4 = ss.state_index("AC1:theta:4");
    const int iw1 = ss.state_index("AC1:omega:1");
    const int iw4 = ss.state_index("AC1:omega:4");

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(7);
    x0(iv2) = 0.1;
    x0(iv3) = -0.05;
    x0(ii23) = 0.02;
    x0(ith1) = 0.3;
    x0(ith4) = -0.2;
    x0(iw1) = 0.05;
    x0(iw4) = -0.03;

    auto energy = [&](const Eigen::RowVectorXd& x) {
        const double J = params.ac_bus.at(1).inertia;
        const double b = params.susceptance(make_line(1, 4));
        const double C = params.capacitance(2);
        const double L = params.at_dc_line(make_line(2, 3)).inductance;
        const double dtheta = x(ith1) - x(ith4);
        return 0.5 * J * (x(iw1) * x(iw1) + x(iw4) * x(iw4)) +
               0.5 * b * dtheta * dtheta +
               0.5 * C * (x(iv2) * x(iv2) + x(iv3) * x(iv3)) +
               0.5 * L * x(ii23) * x(ii23);
    };

    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.horizon = 10.0;
    const Trace trace = simulate_linear(ss, nullptr, x0, cfg);

    const double e0 = energy(trace.states.row(0));
    REQUIRE(e0 > 0);
    double worst = 0;
    for (int k = 0; k < trace.steps(); k += 1000)
        worst = std::max(worst, std::abs(energy(trace.states.row(k)) - e0));
    worst = std::max(worst,
                     std::abs(energy(trace.states.row(trace.steps() - 1)) - e0));
    CHECK(worst / e0 <= 1e-6);
}

TEST_CASE("divergent dynamics raise NonFiniteState") {
    const StateSpace ss = scalar_ss(10.0);
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 5.0;
    CHECK_THROWS_AS(simulate_linear(ss, nullptr, x0, cfg), NonFiniteState);
}

TEST_CASE("dimension and configuration guards") {
    const StateSpace ss = scalar_ss(-1.0);
    SimConfig cfg;

    Eigen::VectorXd wrong(2);
    wrong << 1.0, 2.0;
    CHECK_THROWS_AS(simulate_linear(ss, nullptr, wrong, cfg), DimensionMismatch);

    Eigen::VectorXd x0(1);
    x0 << 1.0;
    GainMatrix bad;
    bad.K = Eigen::MatrixXd::Zero(1, 3);
    CHECK_THROWS_AS(simulate_linear(ss, &bad, x0, cfg), DimensionMismatch);

    SimConfig zero_dt = cfg;
    zero_dt.dt = 0.0;
    CHECK_THROWS_AS(simulate_linear(ss, nullptr, x0, zero_dt), InvariantError);

    SimConfig short_horizon = cfg;
    short_horizon.dt = 1.0;
    short_horizon.horizon = 0.5;
    CHECK_THROWS_AS(simulate_linear(ss, nullptr, x0, short_horizon), InvariantError);
}

TEST_CASE("dq: zero modulation settles to the resistive steady state") {
    ModelVariant variant;  // full model, paper cross sign
    DqParams params;
    params.L = 0.01;
    params.R = 0.1;
    params.C_dc = 0.1;
    params.omega = 1.0;

    const double vd = 0.2, vq = 0.05;
    auto controls = [](double) { return DqControls::m(0.0, 0.0); };
    auto boundary = [&](double) { return DqBoundary{vd, vq, 0.0}; };

    DqState x0;
    x0.i_d = 0.0;
    x0.i_q = 0.0;
    x0.v_dc = 1.0;

    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.horizon = 3.0;
    const Trace trace = simulate_dq(variant, params, controls, boundary, x0, cfg);

    // Steady state of di = 0 with the paper's +omega L cross terms:
    //   [ R  -wL ] [i_d]   [v_d]
    //   [-wL   R ] [i_q] = [v_q]
    const double wl = params.omega * params.L;
    Eigen::Matrix2d M;
    M << params.R, -wl, -wl, params.R;
    const Eigen::Vector2d istar = M.inverse() * Eigen::Vector2d(vd, vq);

    const int last = trace.steps() - 1;
    CHECK(std::abs(trace.states(last, 0) - istar(0)) < 1e-8);
    CHECK(std::abs(trace.states(last, 1) - istar(1)) < 1e-8);
    // zeta is identically zero with m = 0, so v_dc never moves.
    CHECK(trace.states(last, 2) == 1.0);
    CHECK(trace.inputs(last, 2) == 0.0);   // zeta
    CHECK(trace.inputs(last, 3) == 0.0);   // p_dc
    CHECK(trace.input_labels.at(0) == "m_d");
    CHECK(trace.input_labels.at(1) == "m_q");
}

TEST_CASE("dq: constant-beta equilibrium is a fixed point") {
    ModelVariant variant;
    variant.base = ModelBase::BetaSub;

    DqParams params;
    params.L = 0.02;
    params.R = 0.05;
    params.C_dc = 0.2;
    params.omega = 1.0;

    const DqState star{0.3, -0.1, 1.1};
    const DqBoundary vbus{0.25, 0.1, 0.0};

    // beta = v - R i makes both current derivatives vanish.
    const DqControls beta = DqControls::beta(vbus.v_d - params.R * star.i_d,
                                             vbus.v_q - params.R * star.i_q);
    const double zeta_star = dq_zeta(variant, params, star, beta, vbus);
    const DqBoundary balanced{vbus.v_d, vbus.v_q, zeta_star};

    const DqDerivatives at_star = dq_derivatives(
        variant, params, star, beta, balanced);
    REQUIRE(std::abs(at_star.di_d) < 1e-15);
    REQUIRE(std::abs(at_star.di_q) < 1e-15);
    REQUIRE(std::abs(at_star.dv_dc) < 1e-15);

    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 1.0;
    const Trace trace = simulate_dq(
        variant, params, [&](double) { return beta; },
        [&](double) { return balanced; }, star, cfg);

    const int last = trace.steps() - 1;
    CHECK(std::abs(trace.states(last, 0) - star.i_d) < 1e-12);
    CHECK(std::abs(trace.states(last, 1) - star.i_q) < 1e-12);
    CHECK(std::abs(trace.states(last, 2) - star.v_dc) < 1e-12);
    CHECK(trace.input_labels.at(0) == "beta_d");
}

TEST_CASE("dq: timescale model follows the closed-form dc voltage") {
    ModelVariant variant;
    variant.base = ModelBase::Timescale;

    DqParams params;
    params.C_dc = 0.1;

    const double vd = 0.3, vq = 0.1;
    const DqControls ref = DqControls::setpoint(0.5, -0.2);
    auto controls = [&](double) { return ref; };
    auto boundary = [&](double) { return DqBoundary{vd, vq, 0.0}; };

    DqState x0;
    x0.i_d = 0.5;
    x0.i_q = -0.2;
    x0.v_dc = 1.0;

    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.horizon = 1.0;
    const Trace trace = simulate_dq(variant, params, controls, boundary, x0, cfg);

    // C v v' = 0.75 (v_d i_d* + v_q i_q*)  =>  v(t) = sqrt(v0^2 + 1.5 k t / C)
    const double k = 0.75 * (vd * ref.d + vq * ref.q);
    const int last = trace.steps() - 1;
    const double expected = std::sqrt(1.0 + 2.0 * k * trace.times[last] / params.C_dc);
    CHECK(std::abs(trace.states(last, 2) - expected) < 1e-10);

    // Currents are pinned to their setpoints under timescale separation.
    CHECK(trace.states(last, 0) == x0.i_d);
    CHECK(trace.states(last, 1) == x0.i_q);
    CHECK(trace.input_labels.at(0) == "i_d_ref");
}

TEST_CASE("trace metrics guards and never-settling channels") {
    Eigen::MatrixXd A(2, 2);
    A << -1.0, 0.0, 1.0, -1.0;
    const StateSpace ss = manual_ss(A, Eigen::MatrixXd::Zero(2, 0));
    Eigen::VectorXd x0(2);
    x0 << 1.0, 0.0;

    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 4.0;
    const Trace trace = simulate_linear(ss, nullptr, x0, cfg);
    const TraceMetrics metrics = trace_metrics(trace);

    // The second channel starts at zero: its settling band has zero width
    // and the driven response never re-enters it.
    CHECK(std::isinf(metrics.channel("S1:omega:2").settling_time));
    CHECK(metrics.channel("S1:omega:2").peak > 0.1);
    CHECK(std::isfinite(metrics.channel("S1:omega:1").settling_time));

    CHECK_THROWS_AS(metrics.channel("nope"), UnknownElement);
    CHECK_THROWS_AS(trace_metrics(trace, Eigen::MatrixXd::Identity(3, 3),
                                  Eigen::MatrixXd(0, 0)),
                    DimensionMismatch);
}
