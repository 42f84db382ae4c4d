#include "acdc/synthesis.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace acdc {

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& M, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = M(rows[r], cols[c]);
    return out;
}

std::vector<int> complement(int total, const std::vector<int>& chosen) {
    std::set<int> in(chosen.begin(), chosen.end());
    std::vector<int> out;
    for (int i = 0; i < total; ++i)
        if (!in.count(i)) out.push_back(i);
    return out;
}

SynthesisReport finish_report(const StateSpace& ss, Eigen::MatrixXd K,
                              double residual) {
    SynthesisReport report;
    report.gain.K = std::move(K);
    report.gain.row_partition = ss.input_partition;
    report.gain.col_partition = ss.state_partition;
    report.riccati_residual = residual;

    const Eigen::MatrixXd a_cl = ss.A + ss.B * report.gain.K;
    report.closed_loop_abscissa = spectral_abscissa(a_cl);
    const Eigen::MatrixXd c_cl = ss.C + ss.D * report.gain.K;
    report.h2 = h2_norm(a_cl, c_cl, ss.F);
    return report;
}

}  // namespace

SynthesisReport synthesize_centralized(const StateSpace& ss) {
    const Eigen::MatrixXd Q = ss.Q();
    const Eigen::MatrixXd R = ss.R();
    const CareResult care = solve_care(ss.A, ss.B, Q, R);
    return finish_report(ss, care_gain(care.X, ss.B, R), care.relative_residual);
}

SynthesisReport synthesize_leader_follower(
    const StateSpace& ss, const std::vector<std::string>& leader_subgrids,
    const std::vector<std::string>& leader_input_ids) {
    const int n = ss.n();
    const int m = ss.m();

    // Resolve the leader's state indices from its subgrid blocks.
    std::set<std::string> leader_set(leader_subgrids.begin(), leader_subgrids.end());
    for (const std::string& name : leader_subgrids) {
        if (std::find(ss.subgrid_order.begin(), ss.subgrid_order.end(), name) ==
            ss.subgrid_order.end()) {
            throw UnknownElement("leader subgrid " + name + " is not in the model");
        }
    }
    std::vector<int> l_states;
    for (std::size_t b = 0; b < ss.subgrid_order.size(); ++b) {
        if (!leader_set.count(ss.subgrid_order[b])) continue;
        const int off = ss.state_partition.offset(static_cast<int>(b));
        for (int i = 0; i < ss.state_partition.sizes[b]; ++i) l_states.push_back(off + i);
    }
    std::vector<int> l_inputs;
    for (const std::string& id : leader_input_ids) l_inputs.push_back(ss.input_index(id));
    std::sort(l_inputs.begin(), l_inputs.end());
    const std::vector<int> f_states = complement(n, l_states);
    const std::vector<int> f_inputs = complement(m, l_inputs);

    if (l_states.empty()) throw InvariantError("leader designation selects no states");

    // Self-containment: the leader dynamics may not read follower states, and
    // the leader's input channels may not touch follower states.
    for (int r : l_states) {
        for (int c : f_states) {
            if (ss.A(r, c) != 0.0) {
                std::ostringstream msg;
                msg << "leader state " << ss.state_labels[r].str()
                    << " is driven by follower state " << ss.state_labels[c].str();
                throw LeaderNotSelfContained(msg.str());
            }
        }
    }
    for (int r : f_states) {
        for (int c : l_inputs) {
            if (ss.B(r, c) != 0.0) {
                std::ostringstream msg;
                msg << "leader input " << ss.input_labels[c]
                    << " drives follower state " << ss.state_labels[r].str();
                throw LeaderNotSelfContained(msg.str());
            }
        }
    }

    const Eigen::MatrixXd Q = ss.Q();
    const Eigen::MatrixXd R = ss.R();

    // Stage 1: regulator for the leader system alone, with the leader's
    // blocks of the cost.
    const Eigen::MatrixXd a_ll = gather(ss.A, l_states, l_states);
    const Eigen::MatrixXd b_ll = gather(ss.B, l_states, l_inputs);
    const Eigen::MatrixXd q_ll = gather(Q, l_states, l_states);
    const Eigen::MatrixXd r_ll = gather(R, l_inputs, l_inputs);
    const CareResult stage1 = solve_care(a_ll, b_ll, q_ll, r_ll);
    const Eigen::MatrixXd k1 = care_gain(stage1.X, b_ll, r_ll);

    // Embed with zero columns on every follower state.
    Eigen::MatrixXd k1_embedded = Eigen::MatrixXd::Zero(m, n);
    for (std::size_t r = 0; r < l_inputs.size(); ++r)
        for (std::size_t c = 0; c < l_states.size(); ++c)
            k1_embedded(l_inputs[r], l_states[c]) = k1(r, c);

    // Stage 2: close the leader loop, then optimize the remaining channels
    // over the full state. The already-closed leader inputs are excluded
    // from the stage-2 cost.
    const Eigen::MatrixXd a2 = ss.A + ss.B * k1_embedded;
    Eigen::MatrixXd K = k1_embedded;
    double residual = stage1.relative_residual;
    if (!f_inputs.empty()) {
        std::vector<int> all_states(n);
        for (int i = 0; i < n; ++i) all_states[i] = i;
        const Eigen::MatrixXd b_f = gather(ss.B, all_states, f_inputs);
        const Eigen::MatrixXd r_ff = gather(R, f_inputs, f_inputs);
        const CareResult stage2 = solve_care(a2, b_f, Q, r_ff);
        const Eigen::MatrixXd k2 = care_gain(stage2.X, b_f, r_ff);
        for (std::size_t r = 0; r < f_inputs.size(); ++r)
            for (int c = 0; c < n; ++c) K(f_inputs[r], c) = k2(r, c);
        residual = std::max(residual, stage2.relative_residual);
    } else if (spectral_abscissa(a2) >= 0) {
        throw NotStabilizable("no follower inputs remain and the leader loop "
                              "does not stabilize the full system");
    }

    return finish_report(ss, std::move(K), residual);
}

MembershipReport verify_controller_structure(const GainMatrix& gain,
                                             const Poset& poset) {
    return in_block_incidence_algebra(gain.K, gain.row_partition,
                                      gain.col_partition, poset);
}

}  // namespace acdc
