#ifndef BARTVS_SELECTION_HPP
#define BARTVS_SELECTION_HPP

#include "bartvs/data.hpp"
#include "bartvs/summaries.hpp"
#include "bartvs/trace.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bartvs {

struct SelectionDiagnostics {
    std::optional<double> c_star;
    std::optional<double> global_threshold;
    std::optional<Eigen::VectorXd> null_maxima;
    std::optional<std::array<double, 2>> cluster_means;  ///< indexed by cluster label
    std::optional<std::array<int, 2>> cluster_sizes;
    std::optional<std::vector<int>> cluster_labels;
    bool equal_cluster_means = false;
};

/// Selected features (0-based, ascending) with the values that produced them.
struct SelectionResult {
    std::vector<int> selected;
    std::string method;
    Eigen::VectorXd importance;
    std::optional<Eigen::VectorXd> thresholds;
    SelectionDiagnostics diagnostics;
};

/// log1p followed by per-column standardization (sample SD); constant
/// columns become zero.
Eigen::MatrixXd log1p_standardize(const Eigen::MatrixXd& Z);

/// HAC with average linkage on the transformed summary matrix, cut into two
/// clusters; keeps the cluster with the larger mean of raw column 0, or with the
/// smaller mean rank for a VIP-Rank summary.
SelectionResult cluster_select(const SummaryMatrix& summary);

/// Median probability model: features with MPVIP >= 0.5.
SelectionResult mpm_select(const ImportanceVector& mpvip);

/// Select j iff q_j >= the (1 - alpha) quantile of null column j.
SelectionResult threshold_local(const Eigen::VectorXd& observed, const Eigen::MatrixXd& null, double alpha);

/// Select j iff q_j >= the (1 - alpha) quantile of the per-permutation maxima.
SelectionResult threshold_gmax(const Eigen::VectorXd& observed, const Eigen::MatrixXd& null, double alpha);

/// Smallest C >= 0 such that every column has more than (1 - alpha) of its
/// null draws at or below mean + C * sd. Columns with zero spread never bind.
double gse_multiplier(const Eigen::MatrixXd& null, double alpha);

/// Select j iff q_j >= m_j + C* s_j.
SelectionResult threshold_gse(const Eigen::VectorXd& observed, const Eigen::MatrixXd& null, double alpha);

/// Uniform permutation of y driven by the given seed.
Eigen::VectorXd permuted_response(const Eigen::VectorXd& y, std::uint64_t seed);

/// Seed of permutation l (0-based) under base seed s: s + 10000 + l.
inline std::uint64_t permutation_seed(std::uint64_t base, int l)
{
    return base + 10000u + static_cast<std::uint64_t>(l);
}

/// Null importance matrix (L_perm x p): one fit per permuted response.
/// Permutation l uses permutation_seed(seed, l) for both the shuffle and the fit.
Eigen::MatrixXd permutation_null(const Dataset& data, ImportanceKind kind, int permutations,
                                 const FitConfig& config, std::uint64_t seed, int jobs = 1);

} // namespace bartvs

#endif // BARTVS_SELECTION_HPP
