#include <cmath>
#include <random>

#include "doctest.h"

#include "acdc/dq_model.hpp"

using namespace acdc;

namespace {

struct Point {
    DqState state;
    DqBoundary boundary;
    DqControls m;
};

Point random_point(std::mt19937_64& rng, double current_margin = 0.0) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> vdc(0.5, 1.5);
    Point p;
    do {
        p.state.i_d = unit(rng);
        p.state.i_q = unit(rng);
    } while (std::abs(p.state.i_d) < current_margin ||
             std::abs(p.state.i_q) < current_margin);
    p.state.v_dc = vdc(rng);
    p.boundary.v_d = unit(rng);
    p.boundary.v_q = unit(rng);
    p.boundary.i_line = unit(rng);
    p.m = DqControls::m(unit(rng), unit(rng));
    return p;
}

ModelVariant variant(ModelBase base, CrossSign sign = CrossSign::Paper) {
    ModelVariant v;
    v.base = base;
    v.cross_sign = sign;
    return v;
}

}  // namespace

TEST_CASE("control conversions round-trip through every coordinate system") {
    std::mt19937_64 rng(3);
    const DqParams params;
    for (int trial = 0; trial < 200; ++trial) {
        const Point p = random_point(rng, 1e-2);
        for (CrossSign sign : {CrossSign::Paper, CrossSign::Antisymmetric}) {
            const ModelVariant full = variant(ModelBase::Full, sign);
            const ModelVariant beta = variant(ModelBase::BetaSub, sign);
            const ModelVariant rho = variant(ModelBase::RhoSub, sign);

            const DqControls b = convert_controls(p.m, beta, p.state, params);
            CHECK(b.kind == DqControls::Kind::Beta);
            const DqControls m_back = convert_controls(b, full, p.state, params);
            CHECK(m_back.d == doctest::Approx(p.m.d).epsilon(1e-13));
            CHECK(m_back.q == doctest::Approx(p.m.q).epsilon(1e-13));

            const DqControls r = convert_controls(p.m, rho, p.state, params);
            CHECK(r.kind == DqControls::Kind::Rho);
            CHECK(r.d == doctest::Approx(p.state.i_d * p.m.d).epsilon(1e-14));
            const DqControls m_back2 = convert_controls(r, full, p.state, params);
            CHECK(m_back2.d == doctest::Approx(p.m.d).epsilon(1e-13));
            CHECK(m_back2.q == doctest::Approx(p.m.q).epsilon(1e-13));
        }
    }
}

TEST_CASE("beta and rho substitutions reproduce the full model") {
    std::mt19937_64 rng(17);
    const DqParams params;
    double worst_beta = 0.0, worst_rho = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const Point p = random_point(rng, 1e-2);
        for (CrossSign sign : {CrossSign::Paper, CrossSign::Antisymmetric}) {
            const ModelVariant full = variant(ModelBase::Full, sign);
            const DqDerivatives truth =
                dq_derivatives(full, params, p.state, p.m, p.boundary);

            const ModelVariant beta = variant(ModelBase::BetaSub, sign);
            const DqControls b = convert_controls(p.m, beta, p.state, params);
            const DqDerivatives via_beta =
                dq_derivatives(beta, params, p.state, b, p.boundary);
            worst_beta = std::max({worst_beta, std::abs(via_beta.di_d - truth.di_d),
                                   std::abs(via_beta.di_q - truth.di_q),
                                   std::abs(via_beta.dv_dc - truth.dv_dc)});

            const ModelVariant rho = variant(ModelBase::RhoSub, sign);
            const DqControls r = convert_controls(p.m, rho, p.state, params);
            const DqDerivatives via_rho =
                dq_derivatives(rho, params, p.state, r, p.boundary);
            worst_rho = std::max({worst_rho, std::abs(via_rho.di_d - truth.di_d),
                                  std::abs(via_rho.di_q - truth.di_q),
                                  std::abs(via_rho.dv_dc - truth.dv_dc)});
        }
    }
    CHECK(worst_beta <= 1e-12);
    CHECK(worst_rho <= 1e-12);
}

TEST_CASE("the two cross-sign conventions are distinct models") {
    const DqParams params;
    Point p;
    p.state = {0.4, -0.3, 1.1};
    p.boundary = {0.9, 0.1, 0.2};
    p.m = DqControls::m(0.5, 0.6);
    const DqDerivatives paper =
        dq_derivatives(variant(ModelBase::Full, CrossSign::Paper), params, p.state,
                       p.m, p.boundary);
    const DqDerivatives anti =
        dq_derivatives(variant(ModelBase::Full, CrossSign::Antisymmetric), params,
                       p.state, p.m, p.boundary);
    CHECK(paper.di_d == anti.di_d);           // d-equation is shared
    CHECK(paper.di_q != anti.di_q);           // q-equation flips the coupling term
    // Difference is exactly 2 omega L i_d / L = 2 omega i_d.
    CHECK(paper.di_q - anti.di_q ==
          doctest::Approx(2.0 * params.omega * p.state.i_d).epsilon(1e-12));
}

TEST_CASE("zeta is identical across its equivalent formulations") {
    std::mt19937_64 rng(23);
    const DqParams params;
    for (int trial = 0; trial < 200; ++trial) {
        const Point p = random_point(rng, 1e-2);
        const double direct =
            dq_zeta(variant(ModelBase::Full), params, p.state, p.m, p.boundary);
        CHECK(direct ==
              doctest::Approx(0.75 * (p.state.i_d * p.m.d + p.state.i_q * p.m.q))
                  .epsilon(1e-15));

        // rho form: zeta = (3/4)(rho_d + rho_q) with rho = i .* m, exactly.
        const DqControls r =
            convert_controls(p.m, variant(ModelBase::RhoSub), p.state, params);
        const double via_rho =
            dq_zeta(variant(ModelBase::RhoSub), params, p.state, r, p.boundary);
        CHECK(via_rho == doctest::Approx(direct).epsilon(1e-14));

        // beta form recovers m first, then applies the same formula.
        const DqControls b =
            convert_controls(p.m, variant(ModelBase::BetaSub), p.state, params);
        const double via_beta =
            dq_zeta(variant(ModelBase::BetaSub), params, p.state, b, p.boundary);
        CHECK(via_beta == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("internal and terminal power agree exactly") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        const Point p = random_point(rng);
        const DqOutputs out = dq_outputs(p.state, p.m, p.boundary);

        // Terminal voltage v_t = (1/2) v_dc m; the converter is lossless:
        // (3/2) <v_t, i> = v_dc zeta.
        const double vt_d = 0.5 * p.state.v_dc * p.m.d;
        const double vt_q = 0.5 * p.state.v_dc * p.m.q;
        const double terminal = 1.5 * (vt_d * p.state.i_d + vt_q * p.state.i_q);
        CHECK(std::abs(terminal - out.p_dc) <= 1e-12);
        CHECK(out.p_dc == doctest::Approx(p.state.v_dc * out.zeta).epsilon(1e-15));

        CHECK(out.p_ac ==
              doctest::Approx(0.75 * (p.boundary.v_d * p.state.i_d +
                                      p.boundary.v_q * p.state.i_q)));
        CHECK(out.q_ac ==
              doctest::Approx(0.75 * (-p.boundary.v_d * p.state.i_q +
                                      p.boundary.v_q * p.state.i_d)));
    }
}

TEST_CASE("variant constraints freeze the held quantities") {
    const DqParams params;
    Point p;
    p.state = {0.3, 0.2, 1.0};
    p.boundary = {1.0, 0.25, 0.1};
    p.m = DqControls::m(0.4, -0.2);

    SUBCASE("constant dc voltage pins dv_dc at zero") {
        ModelVariant v = variant(ModelBase::Full);
        v.const_dc_voltage = true;
        CHECK(dq_derivatives(v, params, p.state, p.m, p.boundary).dv_dc == 0.0);
    }
    SUBCASE("constant ac voltage forces the q component to the reference") {
        ModelVariant v = variant(ModelBase::Full);
        v.const_ac_voltage = true;
        const DqDerivatives with_vq =
            dq_derivatives(v, params, p.state, p.m, p.boundary);
        DqBoundary zeroed = p.boundary;
        zeroed.v_q = 0.0;
        const DqDerivatives without =
            dq_derivatives(v, params, p.state, p.m, zeroed);
        CHECK(with_vq.di_q == without.di_q);
        CHECK(with_vq.di_d == without.di_d);
    }
    SUBCASE("timescale model holds the currents at their setpoints") {
        ModelVariant v = variant(ModelBase::Timescale);
        const DqControls sp = DqControls::setpoint(0.3, 0.2);
        const DqDerivatives d = dq_derivatives(v, params, p.state, sp, p.boundary);
        CHECK(d.di_d == 0.0);
        CHECK(d.di_q == 0.0);
        // zeta balances the instantaneous ac-side power over v_dc.
        const double zeta = dq_zeta(v, params, p.state, sp, p.boundary);
        CHECK(zeta == doctest::Approx(0.75 *
                                      (p.boundary.v_d * 0.3 + p.boundary.v_q * 0.2) /
                                      p.state.v_dc));
    }
}

TEST_CASE("guards reject near-singular operating points") {
    const DqParams params;
    Point p;
    p.state = {0.5, 0.5, 1.0};
    p.boundary = {1.0, 0.0, 0.0};
    p.m = DqControls::m(0.4, 0.4);

    SUBCASE("beta inversion needs a live dc voltage") {
        p.state.v_dc = 1e-9;
        const DqControls b = DqControls::beta(0.1, 0.1);
        CHECK_THROWS_AS(convert_controls(b, variant(ModelBase::Full), p.state, params),
                        DivisionGuard);
    }
    SUBCASE("rho dynamics need nonzero currents") {
        p.state.i_d = 1e-9;
        const DqControls r = DqControls::rho(0.1, 0.1);
        CHECK_THROWS_AS(
            dq_derivatives(variant(ModelBase::RhoSub), params, p.state, r, p.boundary),
            GuardViolation);
    }
    SUBCASE("timescale zeta needs a live dc voltage") {
        p.state.v_dc = 1e-9;
        const DqControls sp = DqControls::setpoint(0.5, 0.5);
        CHECK_THROWS_AS(
            dq_zeta(variant(ModelBase::Timescale), params, p.state, sp, p.boundary),
            GuardViolation);
    }
    SUBCASE("controls must match the variant") {
        CHECK_THROWS_AS(
            dq_derivatives(variant(ModelBase::Full), params, p.state,
                           DqControls::beta(0.1, 0.1), p.boundary),
            VariantMismatch);
        CHECK_THROWS_AS(
            convert_controls(p.m, variant(ModelBase::Timescale), p.state, params),
            VariantMismatch);
    }
}

TEST_CASE("coupling graphs are stable across sampling seeds") {
    for (ModelBase base :
         {ModelBase::Full, ModelBase::BetaSub, ModelBase::RhoSub, ModelBase::Timescale}) {
        const ModelVariant v = variant(base);
        const CouplingGraph reference = coupling_graph(v, {}, DqParams{}, 0);
        for (std::uint64_t seed : {1ull, 7ull, 99ull})
            CHECK(coupling_graph(v, {}, DqParams{}, seed) == reference);
    }
}

TEST_CASE("coupling partition reproduces the variant table") {
    const std::set<LocalLoop> none;
    auto type = [&](ModelVariant v, const std::set<LocalLoop>& loops = {}) {
        return partition_type(v, loops);
    };

    CHECK(type(variant(ModelBase::Full)) == PartitionType::NotPartitioned);
    CHECK(type(variant(ModelBase::BetaSub)) == PartitionType::OneWayAcToDc);
    CHECK(type(variant(ModelBase::RhoSub)) == PartitionType::OneWayDcToAc);

    ModelVariant const_dc = variant(ModelBase::Full);
    const_dc.const_dc_voltage = true;
    CHECK(type(const_dc) == PartitionType::OneWayAcToDc);

    ModelVariant const_ac = variant(ModelBase::Full);
    const_ac.const_ac_voltage = true;
    CHECK(type(const_ac) == PartitionType::OneWayDcToAc);

    ModelVariant both = variant(ModelBase::Full);
    both.const_ac_voltage = both.const_dc_voltage = true;
    CHECK(type(both) == PartitionType::Full);

    ModelVariant beta_const_ac = variant(ModelBase::BetaSub);
    beta_const_ac.const_ac_voltage = true;
    CHECK(type(beta_const_ac) == PartitionType::Full);

    ModelVariant rho_const_dc = variant(ModelBase::RhoSub);
    rho_const_dc.const_dc_voltage = true;
    CHECK(type(rho_const_dc) == PartitionType::Full);

    CHECK(type(variant(ModelBase::Timescale)) == PartitionType::Full);
    CHECK(type(variant(ModelBase::Timescale), {LocalLoop::DcVoltage}) ==
          PartitionType::OneWayDcToAc);
    CHECK(type(variant(ModelBase::Timescale), {LocalLoop::ReactivePower}) ==
          PartitionType::OneWayAcToDc);
    CHECK(type(variant(ModelBase::Timescale), {LocalLoop::PowerTransferDcSide}) ==
          PartitionType::OneWayDcToAc);
    CHECK(type(variant(ModelBase::Timescale), {LocalLoop::PowerTransferAcSide}) ==
          PartitionType::OneWayAcToDc);
    // Opposing loops close the cycle again.
    CHECK(type(variant(ModelBase::Timescale),
               {LocalLoop::DcVoltage, LocalLoop::ReactivePower}) ==
          PartitionType::NotPartitioned);
    (void)none;
}

TEST_CASE("loop edges appear in the coupling graph with loop kind") {
    const CouplingGraph g =
        coupling_graph(variant(ModelBase::Timescale), {LocalLoop::DcVoltage});
    CHECK(g.count({Signal::Vdc, Signal::Id, EdgeKind::Loop}) == 1);

    const CouplingGraph g2 =
        coupling_graph(variant(ModelBase::Timescale), {LocalLoop::ReactivePower});
    CHECK(g2.count({Signal::Vd, Signal::Iq, EdgeKind::Loop}) == 1);
    CHECK(g2.count({Signal::Vq, Signal::Iq, EdgeKind::Loop}) == 1);
}
