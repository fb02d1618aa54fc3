#ifndef BARTVS_TREE_HPP
#define BARTVS_TREE_HPP

#include "bartvs/data.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace bartvs {

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

/// Arena node. Internal nodes carry the rule {x_feature <= cutpoint}; leaves
/// carry a value. accept_prob tags the MH move that created or last changed
/// the rule (negative when untagged).
struct TreeNode {
    int feature = -1;
    int cut_index = -1;
    double cutpoint = 0.0;
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    NodeId parent = kNoNode;
    double value = 0.0;
    double accept_prob = -1.0;

    bool is_leaf() const { return left == kNoNode; }
};

/// Binary regression tree stored as an indexed arena. Slots freed by
/// collapse() are recycled, so node ids are stable but not contiguous.
class DecisionTree {
public:
    explicit DecisionTree(double root_value = 0.0);

    NodeId root() const { return 0; }
    const TreeNode& node(NodeId id) const { return nodes_[id]; }
    TreeNode& node(NodeId id) { return nodes_[id]; }

    /// Turns a leaf into an internal node with two fresh leaves.
    std::pair<NodeId, NodeId> split(NodeId leaf, int feature, int cut_index, double cutpoint,
                                    double left_value = 0.0, double right_value = 0.0);

    /// Turns an internal node whose children are both leaves back into a leaf.
    void collapse(NodeId id, double value = 0.0);

    std::vector<NodeId> leaves() const;
    std::vector<NodeId> internal_nodes() const;
    /// Internal nodes whose two children are both leaves.
    std::vector<NodeId> nog_nodes() const;

    int depth(NodeId id) const;
    int leaf_count() const { return internal_count_ + 1; }
    /// One past the largest node id ever allocated.
    int arena_size() const { return static_cast<int>(nodes_.size()); }
    int internal_count() const { return internal_count_; }

    /// Leaf reached by a row of grid indices (training data routing).
    template <typename Derived>
    NodeId route_index(const Eigen::MatrixBase<Derived>& row) const
    {
        NodeId id = root();
        while (!nodes_[id].is_leaf()) {
            const auto& nd = nodes_[id];
            id = row[nd.feature] <= nd.cut_index ? nd.left : nd.right;
        }
        return id;
    }

    /// Leaf reached by a real-valued input (go left iff x_j <= c).
    template <typename Derived>
    NodeId route(const Eigen::MatrixBase<Derived>& x) const
    {
        NodeId id = root();
        while (!nodes_[id].is_leaf()) {
            const auto& nd = nodes_[id];
            id = x[nd.feature] <= nd.cutpoint ? nd.left : nd.right;
        }
        return id;
    }

    /// Multiplies every leaf value by scale and adds shift.
    void affine_leaves(double scale, double shift);

    /// Checks structural invariants and, when a grid is given, that every
    /// cutpoint lies on its feature's grid. Throws ValidationError.
    void validate(const CutpointGrid* grid = nullptr) const;

private:
    std::vector<TreeNode> nodes_;
    std::vector<bool> live_;
    std::vector<NodeId> free_;
    int internal_count_ = 0;

    NodeId allocate();
};

/// T trees plus the error variance and, under DART, the split probabilities
/// and Dirichlet concentration.
struct EnsembleState {
    std::vector<DecisionTree> trees;
    double sigma2 = 1.0;
    std::optional<Eigen::VectorXd> split_probs;
    std::optional<double> alpha;

    void validate() const;
};

template <typename Derived>
double predict_tree(const DecisionTree& tree, const Eigen::MatrixBase<Derived>& x)
{
    return tree.node(tree.route(x)).value;
}

template <typename Derived>
double predict_ensemble(const EnsembleState& state, const Eigen::MatrixBase<Derived>& x)
{
    double sum = 0.0;
    for (const auto& tree : state.trees)
        sum += predict_tree(tree, x);
    return sum;
}

/// Predictions for every row of X.
Eigen::VectorXd predict_ensemble(const EnsembleState& state, const Eigen::MatrixXd& X);

} // namespace bartvs

#endif // BARTVS_TREE_HPP
