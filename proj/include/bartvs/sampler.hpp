#ifndef BARTVS_SAMPLER_HPP
#define BARTVS_SAMPLER_HPP

#include "bartvs/data.hpp"
#include "bartvs/distributions.hpp"
#include "bartvs/trace.hpp"
#include "bartvs/tree.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace bartvs {

enum class MoveKind { birth, death, change };

/// Proposal mix used for every tree update.
inline constexpr double kBirthProb = 0.25;
inline constexpr double kDeathProb = 0.25;
inline constexpr double kChangeProb = 0.50;

struct TreePrior {
    double gamma;
    double beta;
    double sigma_mu2;
};

/// Log Metropolis-Hastings ratio split into its three factors.
struct MoveRatio {
    double log_kernel = 0.0;
    double log_prior = 0.0;
    double log_likelihood = 0.0;

    double log_ratio() const { return log_kernel + log_prior + log_likelihood; }
    double accept_prob() const { return log_ratio() >= 0.0 ? 1.0 : std::exp(log_ratio()); }
};

/// Everything about a BIRTH at a leaf that the ratio needs besides the data:
/// leaf count of the current tree, nog count (internal nodes with two leaf
/// children) of the proposed tree, depth of the leaf, and the split-probability
/// mass of features with no cutpoint left at the leaf and at each new child.
struct BirthGeometry {
    int leaves_before = 1;
    int nog_after = 1;
    int depth = 0;
    double exhausted_node = 0.0;
    double exhausted_left = 0.0;
    double exhausted_right = 0.0;
};

/// Probability that a node at this depth stays terminal, given the mass of
/// split features that are exhausted there.
double terminal_prob(int depth, double exhausted_mass, const TreePrior& prior);

/// r(eta) for growing a leaf into two children with the given residual stats.
/// Rule-choice probabilities appear in both the prior and the proposal and cancel.
MoveRatio birth_ratio(const BirthGeometry& geom, const LeafSufficientStats& left,
                      const LeafSufficientStats& right, double sigma2, const TreePrior& prior);

/// Ratio for pruning the two children back; geometry describes the pruned
/// tree as the birth that would recreate the current one. Exactly 1 / birth_ratio.
MoveRatio death_ratio(const BirthGeometry& geom, const LeafSufficientStats& left,
                      const LeafSufficientStats& right, double sigma2, const TreePrior& prior);

/// Half-open range [lo, hi) of usable cut indices for one feature at a node.
struct CutRange {
    int feature;
    int lo;
    int hi;

    bool empty() const { return lo >= hi; }
};

/// Ranges of every feature some ancestor of `node` splits on; features absent
/// from the result keep their full grid.
std::vector<CutRange> ancestor_ranges(const DecisionTree& tree, NodeId node, const CutpointGrid& grid);

/// Outcome of one tree update.
struct MoveOutcome {
    MoveKind kind;
    bool proposed = false;   ///< false for no-op proposals (e.g. DEATH on a single leaf)
    bool exhausted = false;  ///< the drawn feature had no cutpoint left at the node
    bool accepted = false;
    double accept_prob = 0.0;
    int feature = -1;
};

/// Metropolis-within-Gibbs sampler over a sum of trees. The response is
/// min-max scaled to [-0.5, 0.5] internally; state() and traces report
/// response units.
class Sampler {
public:
    Sampler(const Dataset& data, FitConfig config);

    /// One full sweep: every tree, then sigma^2, then (DART) s and alpha.
    void iterate();

    /// Update tree t given all others, then redraw its leaf values.
    MoveOutcome step_tree(int t);

    void update_sigma2();
    void update_dart();

    /// Writes the current state into row k of a trace from make_trace().
    void record(PosteriorTrace& trace, Eigen::Index k) const;
    PosteriorTrace make_trace() const;

    /// Copy of the ensemble in response units.
    EnsembleState state() const;

    const DecisionTree& tree(int t) const { return trees_[t]; }
    const Eigen::VectorXd& split_probs() const { return s_; }
    const Eigen::VectorXi& split_counts() const { return var_count_; }
    double sigma2() const { return sigma2_ * scale_ * scale_; }
    double alpha() const { return alpha_; }
    const TreePrior& prior() const { return prior_; }
    const MoveStats& moves() const { return moves_; }
    int iteration() const { return iteration_; }
    double lambda() const { return lambda_; }

private:
    const Dataset& data_;
    FitConfig config_;
    CutpointGrid grid_;
    Rng rng_;
    TreePrior prior_;

    double center_ = 0.0;
    double scale_ = 1.0;
    Eigen::VectorXd y_;        // scaled response
    Eigen::VectorXd resid_;    // y_ - sum of tree fits
    Eigen::VectorXd partial_;  // residual excluding the tree being updated

    std::vector<DecisionTree> trees_;
    std::vector<std::vector<NodeId>> leaf_of_;
    std::vector<LeafSufficientStats> stats_buf_;
    Eigen::VectorXi var_count_;

    double sigma2_ = 1.0;
    double lambda_ = 1.0;
    Eigen::VectorXd s_;
    Eigen::VectorXd s_cum_;
    double const_mass_ = 0.0;
    double alpha_ = 1.0;
    double rho_ = 1.0;
    bool dart_ = false;
    int iteration_ = 0;
    MoveStats moves_;

    void set_split_probs(Eigen::VectorXd s);
    int draw_feature();
    double exhausted_mass(const std::vector<CutRange>& ranges) const;
    static void apply_rule(std::vector<CutRange>& ranges, const CutpointGrid& grid, int feature,
                           int cut, bool left);

    MoveOutcome propose_birth(int t);
    MoveOutcome propose_death(int t);
    MoveOutcome propose_change(int t);
    void redraw_leaves(int t);
};

/// Runs burn_in + draws sweeps and keeps the last `draws` states.
PosteriorTrace fit(const Dataset& data, const FitConfig& config);

} // namespace bartvs

#endif // BARTVS_SAMPLER_HPP
