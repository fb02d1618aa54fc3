#ifndef BARTVS_DATA_HPP
#define BARTVS_DATA_HPP

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bartvs {

/// Raised when input data or configuration violates a documented invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Response vector plus n x p feature matrix. Truth indices are 0-based
/// internally; the text surfaces (CSV, JSON, CLI) use 1-based indices.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> feature_names;
    std::optional<std::vector<int>> truth;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

/// Builds a Dataset and checks every invariant: n, p >= 1, finite entries,
/// matching lengths, truth indices in range. Feature names default to x1..xp.
Dataset validate_dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
                         std::vector<std::string> feature_names = {},
                         std::optional<std::vector<int>> truth = std::nullopt);

/// Sorted distinct observed values per feature. A split on feature j at grid
/// index k sends x to the left child iff x_j <= values[j][k].
class CutpointGrid {
public:
    CutpointGrid() = default;
    explicit CutpointGrid(const Eigen::MatrixXd& X);

    Eigen::Index features() const { return static_cast<Eigen::Index>(values_.size()); }
    const std::vector<double>& values(Eigen::Index j) const { return values_[j]; }
    double cutpoint(Eigen::Index j, int k) const { return values_[j][k]; }

    /// Number of usable cut indices for feature j. The largest observed value
    /// is excluded since x_j <= max routes every row left.
    int usable(Eigen::Index j) const { return static_cast<int>(values_[j].size()) - 1; }

    /// Grid index of every entry of X (n x p, column major), so routing reduces
    /// to integer comparison: x_ij <= c_k iff index(i, j) <= k.
    const Eigen::MatrixXi& index() const { return index_; }

private:
    std::vector<std::vector<double>> values_;
    Eigen::MatrixXi index_;
};

} // namespace bartvs

#endif // BARTVS_DATA_HPP
