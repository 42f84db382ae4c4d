#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "acdc/errors.hpp"
#include "acdc/grid.hpp"

namespace acdc {

// ========================================================================
// Finite posets
// ========================================================================

/// Finite partially ordered set over named elements. leq(i, j) means
/// element i precedes (is upstream of) element j.
class Poset {
  public:
    Poset() = default;
    Poset(std::vector<std::string> elements, std::vector<std::vector<bool>> leq);

    /// Build from a list of relation pairs (a, b) meaning a <= b; the
    /// reflexive-transitive closure is taken. Throws NotAcyclic when the
    /// closure would violate antisymmetry.
    static Poset from_relations(std::vector<std::string> elements,
                                const std::vector<std::pair<std::string, std::string>>& relations);

    int size() const { return static_cast<int>(elements_.size()); }
    const std::vector<std::string>& elements() const { return elements_; }
    int index_of(const std::string& element) const;

    bool leq(int a, int b) const { return leq_[a][b]; }
    bool leq(const std::string& a, const std::string& b) const {
        return leq(index_of(a), index_of(b));
    }
    bool strictly_less(int a, int b) const { return a != b && leq_[a][b]; }

    /// Covering relation: a is covered by b (a < b with nothing between).
    std::vector<std::pair<int, int>> covers() const;

    /// Throws if reflexivity, antisymmetry, or transitivity fails.
    void validate() const;

  private:
    std::vector<std::string> elements_;
    std::vector<std::vector<bool>> leq_;
};

/// Reflexive-transitive closure of the quotient DAG's reachability.
/// Elements appear in the quotient's node order; throws NotAcyclic when
/// the directed edges contain a cycle.
Poset poset_from_dag(const QuotientGraph& q);

/// Same, with elements permuted into the given node order (a permutation
/// of 0..p-1 in quotient node indices).
Poset poset_from_dag(const QuotientGraph& q, const std::vector<int>& node_order);

/// Upstream set of `element`: every b with b <= element, the element
/// itself included.
std::vector<std::string> up_set(const Poset& poset, const std::string& element);

// ========================================================================
// Block incidence algebra
// ========================================================================

/// Consecutive blocks partitioning 0..total-1. Zero-size blocks are
/// permitted (a subgrid without converters owns no input channels).
struct BlockPartition {
    std::vector<int> sizes;

    explicit BlockPartition(std::vector<int> sizes_ = {});
    int blocks() const { return static_cast<int>(sizes.size()); }
    int total() const;
    int offset(int block) const;
    int block_of(int index) const;
    void validate() const;
};

struct MembershipReport {
    bool ok = true;
    /// (row_block, col_block) pairs holding nonzero mass where the poset
    /// forbids it.
    std::vector<std::pair<int, int>> violations;
};

/// Check that M lies in the block incidence algebra I(poset): block
/// M[j_block, i_block] may be nonzero only when element(i) <= element(j).
/// Block k of either partition corresponds to poset element k. Entries
/// with magnitude at most `tol` count as zero.
MembershipReport in_block_incidence_algebra(const Eigen::MatrixXd& M,
                                            const BlockPartition& rows,
                                            const BlockPartition& cols,
                                            const Poset& poset,
                                            double tol = 1e-12);

// ========================================================================
// Structure classification
// ========================================================================

struct StructureClass {
    enum class Tag { PosetCausal, Hierarchical, Coordinated, LeaderFollower, Decoupled };

    Tag tag = Tag::PosetCausal;
    /// LeaderFollower: the single leader element.
    std::string leader;
    /// Coordinated: the coordinator element(s); a single source for an
    /// out-star, the set of sources for an in-star (composite coordinator).
    std::vector<std::string> coordinator;
};

/// Individual predicates (used by the classifier and by property tests;
/// each more specific predicate implies the ones after it):
/// leader-follower => coordinated => hierarchical => poset-causal.
bool is_leader_follower(const Poset& poset);
bool is_coordinated(const Poset& poset);
bool is_hierarchical(const Poset& poset);  // covering graph is a single directed tree
bool is_poset_causal(const Poset& poset);  // poset axioms hold

/// Most specific structure tag for the poset. Decoupled requires the
/// identity order on more than one element.
StructureClass classify_structure(const Poset& poset, const QuotientGraph& q);

const char* to_string(StructureClass::Tag tag);

}  // namespace acdc
