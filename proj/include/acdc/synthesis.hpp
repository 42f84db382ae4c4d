#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acdc/linear_model.hpp"
#include "acdc/poset.hpp"
#include "acdc/riccati.hpp"

namespace acdc {

/// Static state-feedback gain u = K x with its block structure.
struct GainMatrix {
    Eigen::MatrixXd K;
    BlockPartition row_partition{{}};  // input blocks
    BlockPartition col_partition{{}};  // state blocks
    /// Poset the gain is declared to respect, if any.
    std::optional<Poset> declared_structure;
};

struct SynthesisReport {
    GainMatrix gain;
    double riccati_residual = 0;
    double closed_loop_abscissa = 0;
    double h2 = 0;
};

/// Full-information LQR / H2 design: solve the CARE for Q = C'C, R = D'D,
/// close the loop, and report the closed-loop H2 norm from w to z.
SynthesisReport synthesize_centralized(const StateSpace& ss);

/// Two-stage leader-follower design. Stage 1 solves the LQR restricted to
/// the leader subgrids' states and the designated leader input channels
/// (their cost blocks only); the resulting gain is embedded with zero
/// columns on follower states. Stage 2 closes the leader loop and solves
/// the full-state LQR over the remaining inputs. The closed leader inputs
/// are excluded from the stage-2 cost. Requires the leader to be
/// self-contained: A has no leader-row/follower-column coupling and the
/// leader input columns vanish on follower states
/// (LeaderNotSelfContained otherwise).
SynthesisReport synthesize_leader_follower(
    const StateSpace& ss,
    const std::vector<std::string>& leader_subgrids,
    const std::vector<std::string>& leader_input_ids);

/// Membership of K's blocks in the incidence algebra: input block j may
/// read state block i only when element(i) <= element(j).
MembershipReport verify_controller_structure(const GainMatrix& gain, const Poset& poset);

}  // namespace acdc
