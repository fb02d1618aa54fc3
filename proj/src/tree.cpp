#include "bartvs/tree.hpp"

#include <cmath>
#include <string>

namespace bartvs {

DecisionTree::DecisionTree(double root_value)
{
    nodes_.push_back(TreeNode{});
    nodes_.back().value = root_value;
    live_.push_back(true);
}

NodeId DecisionTree::allocate()
{
    if (!free_.empty()) {
        NodeId id = free_.back();
        free_.pop_back();
        nodes_[id] = TreeNode{};
        live_[id] = true;
        return id;
    }
    nodes_.push_back(TreeNode{});
    live_.push_back(true);
    return static_cast<NodeId>(nodes_.size() - 1);
}

std::pair<NodeId, NodeId> DecisionTree::split(NodeId leaf, int feature, int cut_index,
                                              double cutpoint, double left_value,
                                              double right_value)
{
    if (!nodes_[leaf].is_leaf())
        throw std::logic_error("split() on an internal node");
    NodeId l = allocate();
    NodeId r = allocate();
    nodes_[l].parent = leaf;
    nodes_[l].value = left_value;
    nodes_[r].parent = leaf;
    nodes_[r].value = right_value;

    auto& nd = nodes_[leaf];
    nd.feature = feature;
    nd.cut_index = cut_index;
    nd.cutpoint = cutpoint;
    nd.left = l;
    nd.right = r;
    ++internal_count_;
    return {l, r};
}

void DecisionTree::collapse(NodeId id, double value)
{
    auto& nd = nodes_[id];
    if (nd.is_leaf() || !nodes_[nd.left].is_leaf() || !nodes_[nd.right].is_leaf())
        throw std::logic_error("collapse() requires two leaf children");
    live_[nd.left] = false;
    live_[nd.right] = false;
    free_.push_back(nd.right);
    free_.push_back(nd.left);
    nd = TreeNode{.parent = nd.parent, .value = value};
    --internal_count_;
}

std::vector<NodeId> DecisionTree::leaves() const
{
    std::vector<NodeId> out;
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id)
        if (live_[id] && nodes_[id].is_leaf())
            out.push_back(id);
    return out;
}

std::vector<NodeId> DecisionTree::internal_nodes() const
{
    std::vector<NodeId> out;
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id)
        if (live_[id] && !nodes_[id].is_leaf())
            out.push_back(id);
    return out;
}

std::vector<NodeId> DecisionTree::nog_nodes() const
{
    std::vector<NodeId> out;
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
        const auto& nd = nodes_[id];
        if (live_[id] && !nd.is_leaf() && nodes_[nd.left].is_leaf() && nodes_[nd.right].is_leaf())
            out.push_back(id);
    }
    return out;
}

int DecisionTree::depth(NodeId id) const
{
    int d = 0;
    while (nodes_[id].parent != kNoNode) {
        id = nodes_[id].parent;
        ++d;
    }
    return d;
}

void DecisionTree::affine_leaves(double scale, double shift)
{
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id)
        if (live_[id] && nodes_[id].is_leaf())
            nodes_[id].value = scale * nodes_[id].value + shift;
}

void DecisionTree::validate(const CutpointGrid* grid) const
{
    int internal = 0;
    int leaves = 0;
    int roots = 0;
    for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
        if (!live_[id])
            continue;
        const auto& nd = nodes_[id];
        if (nd.parent == kNoNode)
            ++roots;
        if (nd.is_leaf()) {
            ++leaves;
            if (nd.right != kNoNode)
                throw ValidationError("node " + std::to_string(id) + " has one child");
            continue;
        }
        ++internal;
        if (nd.right == kNoNode || !live_[nd.left] || !live_[nd.right] ||
            nodes_[nd.left].parent != id || nodes_[nd.right].parent != id)
            throw ValidationError("node " + std::to_string(id) + " has inconsistent children");
        if (grid) {
            if (nd.feature < 0 || nd.feature >= grid->features())
                throw ValidationError("split feature out of range at node " + std::to_string(id));
            const auto& v = grid->values(nd.feature);
            if (nd.cut_index < 0 || nd.cut_index >= static_cast<int>(v.size()) ||
                v[nd.cut_index] != nd.cutpoint)
                throw ValidationError("cutpoint off grid at node " + std::to_string(id));
        }
    }
    if (roots != 1 || nodes_[0].parent != kNoNode)
        throw ValidationError("tree must have exactly one root");
    if (leaves != internal + 1 || internal != internal_count_)
        throw ValidationError("leaf count must equal internal count + 1");
}

void EnsembleState::validate() const
{
    if (trees.empty())
        throw ValidationError("ensemble must contain at least one tree");
    if (!(sigma2 > 0.0))
        throw ValidationError("sigma2 must be positive");
    if (split_probs) {
        if ((split_probs->array() < 0.0).any() || std::abs(split_probs->sum() - 1.0) > 1e-12)
            throw ValidationError("split probabilities must lie on the simplex");
    }
    if (alpha && !(*alpha > 0.0))
        throw ValidationError("alpha must be positive");
    for (const auto& t : trees)
        t.validate();
}

Eigen::VectorXd predict_ensemble(const EnsembleState& state, const Eigen::MatrixXd& X)
{
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out[i] = predict_ensemble(state, X.row(i).transpose());
    return out;
}

} // namespace bartvs
