#include "bartvs/data.hpp"

#include <algorithm>
#include <cmath>

namespace bartvs {

Dataset validate_dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
                         std::vector<std::string> feature_names,
                         std::optional<std::vector<int>> truth)
{
    if (X.rows() == 0 || X.cols() == 0)
        throw ValidationError("dataset must have n >= 1 rows and p >= 1 features");
    if (y.size() != X.rows())
        throw ValidationError("response length " + std::to_string(y.size()) +
                              " does not match " + std::to_string(X.rows()) + " rows");

    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (!std::isfinite(y[i]))
            throw ValidationError("non-finite response at row " + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (!std::isfinite(X(i, j)))
                throw ValidationError("non-finite entry at row " + std::to_string(i + 1) +
                                      ", column " + std::to_string(j + 1));

    if (feature_names.empty()) {
        feature_names.reserve(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            feature_names.push_back("x" + std::to_string(j + 1));
    } else if (static_cast<Eigen::Index>(feature_names.size()) != X.cols()) {
        throw ValidationError("expected " + std::to_string(X.cols()) + " feature names, got " +
                              std::to_string(feature_names.size()));
    }

    if (truth) {
        for (int j : *truth)
            if (j < 0 || j >= X.cols())
                throw ValidationError("truth index out of range: " + std::to_string(j + 1));
        std::sort(truth->begin(), truth->end());
        truth->erase(std::unique(truth->begin(), truth->end()), truth->end());
    }

    return Dataset{std::move(y), std::move(X), std::move(feature_names), std::move(truth)};
}

CutpointGrid::CutpointGrid(const Eigen::MatrixXd& X)
    : values_(X.cols()), index_(X.rows(), X.cols())
{
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        auto& v = values_[j];
        v.assign(X.col(j).data(), X.col(j).data() + X.rows());
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            index_(i, j) = static_cast<int>(std::lower_bound(v.begin(), v.end(), X(i, j)) - v.begin());
    }
}

} // namespace bartvs
