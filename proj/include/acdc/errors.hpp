#pragma once

#include <stdexcept>
#include <string>

namespace acdc {

/// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// -- topology -----------------------------------------------------------

/// Two converters between the same subgrid pair carry opposite directions.
struct CoOrientationConflict : Error { using Error::Error; };
/// Fixed converter directions admit no acyclic completion.
struct CycleForced : Error { using Error::Error; };
/// Graph exceeds the supported desk-scale size bound.
struct SizeLimit : Error { using Error::Error; };
/// A grid document violates a structural invariant (named element in message).
struct InvariantError : Error { using Error::Error; };

// -- poset algebra ------------------------------------------------------

/// Directed quotient graph contains a cycle; no poset exists.
struct NotAcyclic : Error { using Error::Error; };
/// Lookup of a poset element / bus / subgrid that does not exist.
struct UnknownElement : Error { using Error::Error; };
/// Matrix or vector dimensions disagree with a partition or state count.
struct DimensionMismatch : Error { using Error::Error; };

// -- linear model -------------------------------------------------------

/// Model assembly requires every converter to carry a direction.
struct UnorientedConverter : Error { using Error::Error; };
/// A required physical parameter is absent (element named in message).
struct MissingParameter : Error { using Error::Error; };
/// (sI - A) is numerically singular at a requested frequency.
struct SingularResolvent : Error { using Error::Error; };

// -- dq model -----------------------------------------------------------

/// Evaluation point violates a division guard (|i_d| or |i_q| too small).
struct GuardViolation : Error { using Error::Error; };
/// Control vector kind does not match the model variant.
struct VariantMismatch : Error { using Error::Error; };
/// Control conversion would divide by a near-zero quantity.
struct DivisionGuard : Error { using Error::Error; };

// -- synthesis ----------------------------------------------------------

/// PBH test failed for an unstable or marginal mode.
struct NotStabilizable : Error { using Error::Error; };
/// PBH test failed for the cost output of an unstable or marginal mode.
struct NotDetectable : Error { using Error::Error; };
/// Riccati/Lyapunov solve did not reach the required residual.
struct ResidualTooLarge : Error { using Error::Error; };
/// A matrix required to be Hurwitz is not.
struct NotHurwitz : Error { using Error::Error; };
/// Leader dynamics reach outside the designated leader states/inputs.
struct LeaderNotSelfContained : Error { using Error::Error; };

// -- simulation ---------------------------------------------------------

/// State left the finite range (divergence) during integration.
struct NonFiniteState : Error { using Error::Error; };

// -- io -----------------------------------------------------------------

/// Input is not valid JSON.
struct ParseError : Error { using Error::Error; };
/// Input is valid JSON but violates the document schema (path in message).
struct SchemaError : Error { using Error::Error; };
/// Filesystem failure.
struct IoError : Error { using Error::Error; };

}  // namespace acdc
