#ifndef BARTVS_TRACE_HPP
#define BARTVS_TRACE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bartvs {

enum class PriorKind { bart, dart };

std::string to_string(PriorKind kind);
PriorKind prior_kind_from_string(const std::string& s);

struct FitConfig {
    int trees = 20;
    int burn_in = 5000;
    int draws = 5000;
    double gamma = 0.95;
    double beta = 2.0;
    double k_leaf = 2.0;
    double nu = 3.0;
    double q = 0.9;
    PriorKind prior = PriorKind::bart;
    double dart_a = 0.5;
    double dart_b = 1.0;
    double dart_rho = 0.0;     ///< <= 0 means rho = p
    int alpha_grid = 1000;
    int dart_start = -1;       ///< iteration at which s/alpha updates begin; < 0 means burn_in / 2
    bool record_mi = false;
    std::uint64_t seed = 0;
    /// Split-feature probabilities held fixed for the whole run (disables
    /// the DART update when set).
    std::optional<Eigen::VectorXd> fixed_split_probs;

    void validate() const;
    int effective_dart_start() const { return dart_start < 0 ? burn_in / 2 : dart_start; }

    bool operator==(const FitConfig&) const = default;
};

/// One interior node of a retained draw: split feature and the acceptance
/// probability of the move that created or last changed its rule.
struct MiNode {
    int feature;
    double accept_prob;

    bool operator==(const MiNode&) const = default;
};

using MatrixXb = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct MoveStats {
    std::int64_t birth_proposed = 0;
    std::int64_t birth_accepted = 0;
    std::int64_t death_proposed = 0;
    std::int64_t death_accepted = 0;
    std::int64_t change_proposed = 0;
    std::int64_t change_accepted = 0;
    std::int64_t exhausted = 0;
    std::int64_t alpha_warnings = 0;

    bool operator==(const MoveStats&) const = default;
};

/// K retained ensemble states, summarized per draw.
struct PosteriorTrace {
    Eigen::MatrixXi counts;          ///< K x p split counts c_jk
    MatrixXb inclusion;              ///< K x p, counts > 0
    Eigen::VectorXd sigma2_path;     ///< response units^2
    Eigen::MatrixXi tree_leaves;     ///< K x T leaf counts
    Eigen::VectorXd mean_fit_path;   ///< mean in-sample prediction per draw, response units
    std::optional<std::vector<std::vector<MiNode>>> mi_node_log;
    std::optional<Eigen::MatrixXd> s_path;
    std::optional<Eigen::VectorXd> alpha_path;
    FitConfig config;
    std::vector<std::string> feature_names;
    MoveStats moves;

    Eigen::Index draws() const { return counts.rows(); }
    Eigen::Index features() const { return counts.cols(); }

    /// Throws ValidationError when the stored matrices disagree with each other.
    void validate() const;

    bool operator==(const PosteriorTrace& other) const;
};

} // namespace bartvs

#endif // BARTVS_TRACE_HPP
