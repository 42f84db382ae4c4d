#include "acdc/poset.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace acdc {

Poset::Poset(std::vector<std::string> elements, std::vector<std::vector<bool>> leq)
    : elements_(std::move(elements)), leq_(std::move(leq)) {
    validate();
}

Poset Poset::from_relations(
    std::vector<std::string> elements,
    const std::vector<std::pair<std::string, std::string>>& relations) {
    const int p = static_cast<int>(elements.size());
    std::vector<std::vector<bool>> leq(p, std::vector<bool>(p, false));
    for (int i = 0; i < p; ++i) leq[i][i] = true;

    auto index = [&](const std::string& name) {
        auto it = std::find(elements.begin(), elements.end(), name);
        if (it == elements.end()) throw UnknownElement("no such element: " + name);
        return static_cast<int>(it - elements.begin());
    };
    for (const auto& [a, b] : relations) leq[index(a)][index(b)] = true;

    // Warshall closure.
    for (int k = 0; k < p; ++k)
        for (int i = 0; i < p; ++i)
            if (leq[i][k])
                for (int j = 0; j < p; ++j)
                    if (leq[k][j]) leq[i][j] = true;

    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (leq[i][j] && leq[j][i])
                throw NotAcyclic("relations between " + elements[i] + " and " +
                                 elements[j] + " form a cycle");
    return Poset(std::move(elements), std::move(leq));
}

int Poset::index_of(const std::string& element) const {
    for (int i = 0; i < size(); ++i)
        if (elements_[i] == element) return i;
    throw UnknownElement("no such element: " + element);
}

std::vector<std::pair<int, int>> Poset::covers() const {
    std::vector<std::pair<int, int>> out;
    const int p = size();
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            if (!strictly_less(a, b)) continue;
            bool direct = true;
            for (int c = 0; c < p && direct; ++c)
                if (strictly_less(a, c) && strictly_less(c, b)) direct = false;
            if (direct) out.push_back({a, b});
        }
    }
    return out;
}

void Poset::validate() const {
    const int p = size();
    if (static_cast<int>(leq_.size()) != p)
        throw DimensionMismatch("poset relation matrix does not match element count");
    for (int i = 0; i < p; ++i) {
        if (static_cast<int>(leq_[i].size()) != p)
            throw DimensionMismatch("poset relation matrix is not square");
        if (!leq_[i][i]) throw Error("poset relation is not reflexive");
    }
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            if (i != j && leq_[i][j] && leq_[j][i])
                throw Error("poset relation is not antisymmetric (" + elements_[i] +
                            ", " + elements_[j] + ")");
            if (leq_[i][j])
                for (int k = 0; k < p; ++k)
                    if (leq_[j][k] && !leq_[i][k])
                        throw Error("poset relation is not transitive");
        }
}

Poset poset_from_dag(const QuotientGraph& q) {
    std::vector<int> identity(q.nodes.size());
    std::iota(identity.begin(), identity.end(), 0);
    return poset_from_dag(q, identity);
}

Poset poset_from_dag(const QuotientGraph& q, const std::vector<int>& node_order) {
    const int p = static_cast<int>(q.nodes.size());
    if (static_cast<int>(node_order.size()) != p)
        throw DimensionMismatch("node order length does not match quotient size");

    std::vector<int> flat_rank(p);
    std::iota(flat_rank.begin(), flat_rank.end(), 0);
    if (!q.topological_order(flat_rank))
        throw NotAcyclic("quotient graph contains a directed cycle");

    // Reachability closure in quotient indices.
    std::vector<std::vector<bool>> reach(p, std::vector<bool>(p, false));
    for (int i = 0; i < p; ++i) reach[i][i] = true;
    for (const auto& [u, v] : q.edges) reach[u][v] = true;
    for (int k = 0; k < p; ++k)
        for (int i = 0; i < p; ++i)
            if (reach[i][k])
                for (int j = 0; j < p; ++j)
                    if (reach[k][j]) reach[i][j] = true;

    std::vector<std::string> elements(p);
    std::vector<std::vector<bool>> leq(p, std::vector<bool>(p, false));
    for (int a = 0; a < p; ++a) {
        elements[a] = q.nodes[node_order[a]].name;
        for (int b = 0; b < p; ++b) leq[a][b] = reach[node_order[a]][node_order[b]];
    }
    return Poset(std::move(elements), std::move(leq));
}

std::vector<std::string> up_set(const Poset& poset, const std::string& element) {
    int a = poset.index_of(element);
    std::vector<std::string> out;
    for (int b = 0; b < poset.size(); ++b)
        if (poset.leq(b, a)) out.push_back(poset.elements()[b]);
    return out;
}

// ------------------------------------------------------------------------
// Block partitions and incidence algebra membership
// ------------------------------------------------------------------------

BlockPartition::BlockPartition(std::vector<int> sizes_) : sizes(std::move(sizes_)) {
    validate();
}

int BlockPartition::total() const {
    return std::accumulate(sizes.begin(), sizes.end(), 0);
}

int BlockPartition::offset(int block) const {
    return std::accumulate(sizes.begin(), sizes.begin() + block, 0);
}

int BlockPartition::block_of(int index) const {
    int acc = 0;
    for (int b = 0; b < blocks(); ++b) {
        acc += sizes[b];
        if (index < acc) return b;
    }
    throw DimensionMismatch("index " + std::to_string(index) + " outside partition");
}

void BlockPartition::validate() const {
    for (int s : sizes)
        if (s < 0) throw DimensionMismatch("negative block size");
}

MembershipReport in_block_incidence_algebra(const Eigen::MatrixXd& M,
                                            const BlockPartition& rows,
                                            const BlockPartition& cols,
                                            const Poset& poset,
                                            double tol) {
    if (rows.total() != M.rows() || cols.total() != M.cols())
        throw DimensionMismatch("matrix does not match row/column partitions");
    if (rows.blocks() != poset.size() || cols.blocks() != poset.size())
        throw DimensionMismatch("partition block count does not match poset size");

    MembershipReport report;
    for (int j = 0; j < rows.blocks(); ++j) {
        if (rows.sizes[j] == 0) continue;
        for (int i = 0; i < cols.blocks(); ++i) {
            if (cols.sizes[i] == 0) continue;
            if (poset.leq(i, j)) continue;  // block (j, i) may be nonzero
            auto block = M.block(rows.offset(j), cols.offset(i), rows.sizes[j], cols.sizes[i]);
            if (block.cwiseAbs().maxCoeff() > tol) {
                report.ok = false;
                report.violations.push_back({j, i});
            }
        }
    }
    return report;
}

// ------------------------------------------------------------------------
// Classification
// ------------------------------------------------------------------------

namespace {

struct CoverShape {
    int p = 0;
    std::vector<std::pair<int, int>> covers;
    std::vector<int> indeg, outdeg;

    explicit CoverShape(const Poset& poset)
        : p(poset.size()), covers(poset.covers()), indeg(p, 0), outdeg(p, 0) {
        for (const auto& [a, b] : covers) {
            ++outdeg[a];
            ++indeg[b];
        }
    }

    bool connected_underlying() const {
        if (p == 0) return false;
        std::vector<std::vector<int>> adj(p);
        for (const auto& [a, b] : covers) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        std::vector<bool> seen(p, false);
        std::vector<int> stack{0};
        seen[0] = true;
        int count = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = true;
                    ++count;
                    stack.push_back(v);
                }
        }
        return count == p;
    }

    // Out-star: one source covering all other elements, no other covers.
    int out_star_center() const {
        for (int c = 0; c < p; ++c) {
            if (outdeg[c] != p - 1 || indeg[c] != 0) continue;
            bool ok = true;
            for (int v = 0; v < p && ok; ++v)
                if (v != c && (indeg[v] != 1 || outdeg[v] != 0)) ok = false;
            if (ok) return c;
        }
        return -1;
    }

    // In-star: one sink covered by all other elements, no other covers.
    int in_star_center() const {
        for (int c = 0; c < p; ++c) {
            if (indeg[c] != p - 1 || outdeg[c] != 0) continue;
            bool ok = true;
            for (int v = 0; v < p && ok; ++v)
                if (v != c && (outdeg[v] != 1 || indeg[v] != 0)) ok = false;
            if (ok) return c;
        }
        return -1;
    }
};

}  // namespace

bool is_poset_causal(const Poset& poset) {
    try {
        poset.validate();
    } catch (const Error&) {
        return false;
    }
    return true;
}

bool is_hierarchical(const Poset& poset) {
    CoverShape shape(poset);
    if (shape.p == 1) return true;
    // A single directed tree: the underlying covering graph is connected
    // with exactly p-1 cover edges.
    return shape.connected_underlying() &&
           static_cast<int>(shape.covers.size()) == shape.p - 1;
}

bool is_coordinated(const Poset& poset) {
    CoverShape shape(poset);
    if (shape.p == 1) return false;
    return shape.out_star_center() >= 0 || shape.in_star_center() >= 0;
}

bool is_leader_follower(const Poset& poset) {
    if (poset.size() != 2) return false;
    return poset.strictly_less(0, 1) != poset.strictly_less(1, 0);
}

StructureClass classify_structure(const Poset& poset, const QuotientGraph& q) {
    (void)q;  // element names already live on the poset
    StructureClass result;
    const int p = poset.size();
    if (p == 0) return result;

    if (is_leader_follower(poset)) {
        result.tag = StructureClass::Tag::LeaderFollower;
        result.leader = poset.strictly_less(0, 1) ? poset.elements()[0]
                                                  : poset.elements()[1];
        return result;
    }

    CoverShape shape(poset);
    if (int c = shape.out_star_center(); p > 1 && c >= 0) {
        result.tag = StructureClass::Tag::Coordinated;
        result.coordinator = {poset.elements()[c]};
        return result;
    }
    if (int c = shape.in_star_center(); p > 1 && c >= 0) {
        result.tag = StructureClass::Tag::Coordinated;
        for (int v = 0; v < p; ++v)
            if (v != c) result.coordinator.push_back(poset.elements()[v]);
        return result;
    }
    if (is_hierarchical(poset)) {
        result.tag = StructureClass::Tag::Hierarchical;
        return result;
    }
    if (p > 1 && shape.covers.empty()) {
        result.tag = StructureClass::Tag::Decoupled;
        return result;
    }
    result.tag = StructureClass::Tag::PosetCausal;
    return result;
}

const char* to_string(StructureClass::Tag tag) {
    switch (tag) {
        case StructureClass::Tag::Hierarchical: return "Hierarchical";
        case StructureClass::Tag::Coordinated: return "Coordinated";
        case StructureClass::Tag::LeaderFollower: return "LeaderFollower";
        case StructureClass::Tag::Decoupled: return "Decoupled";
        default: return "PosetCausal";
    }
}

}  // namespace acdc
