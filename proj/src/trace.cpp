#include "bartvs/trace.hpp"

#include "bartvs/data.hpp"

namespace bartvs {

std::string to_string(PriorKind kind)
{
    return kind == PriorKind::dart ? "dart" : "bart";
}

PriorKind prior_kind_from_string(const std::string& s)
{
    if (s == "bart")
        return PriorKind::bart;
    if (s == "dart")
        return PriorKind::dart;
    throw ValidationError("unknown prior kind: " + s);
}

void FitConfig::validate() const
{
    if (trees < 1)
        throw ValidationError("trees must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ValidationError("gamma must lie in (0, 1)");
    if (!(beta >= 0.0))
        throw ValidationError("beta must be >= 0");
    if (burn_in < 0 || draws < 0)
        throw ValidationError("burn_in and draws must be >= 0");
    if (!(nu > 0.0))
        throw ValidationError("nu must be positive");
    if (!(q > 0.0 && q < 1.0))
        throw ValidationError("q must lie in (0, 1)");
    if (!(k_leaf > 0.0))
        throw ValidationError("k_leaf must be positive");
    if (!(dart_a > 0.0 && dart_b > 0.0))
        throw ValidationError("DART hyperprior a and b must be positive");
    if (alpha_grid < 1)
        throw ValidationError("alpha grid must have at least one point");
    if (fixed_split_probs) {
        if ((fixed_split_probs->array() < 0.0).any() || !(fixed_split_probs->sum() > 0.0))
            throw ValidationError("fixed split probabilities must be nonnegative with positive sum");
    }
}

void PosteriorTrace::validate() const
{
    const auto K = counts.rows();
    const auto p = counts.cols();
    if (inclusion.rows() != K || inclusion.cols() != p)
        throw ValidationError("inclusion matrix shape mismatch");
    if ((counts.array() < 0).any())
        throw ValidationError("negative split count");
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < p; ++j)
            if (inclusion(k, j) != (counts(k, j) > 0))
                throw ValidationError("inclusion flag disagrees with counts at draw " + std::to_string(k + 1));
    if (sigma2_path.size() != K || mean_fit_path.size() != K || tree_leaves.rows() != K)
        throw ValidationError("per-draw path length mismatch");
    for (Eigen::Index k = 0; k < K; ++k) {
        const long internal = tree_leaves.row(k).cast<long>().sum() - tree_leaves.cols();
        if (internal != counts.row(k).cast<long>().sum())
            throw ValidationError("split counts do not match internal node total at draw " +
                                  std::to_string(k + 1));
    }
    if (mi_node_log) {
        if (static_cast<Eigen::Index>(mi_node_log->size()) != K)
            throw ValidationError("MI log length mismatch");
        for (Eigen::Index k = 0; k < K; ++k)
            if (static_cast<long>((*mi_node_log)[k].size()) != counts.row(k).cast<long>().sum())
                throw ValidationError("MI log node count mismatch at draw " + std::to_string(k + 1));
    }
    if (s_path && (s_path->rows() != K || s_path->cols() != p))
        throw ValidationError("s path shape mismatch");
    if (alpha_path && alpha_path->size() != K)
        throw ValidationError("alpha path length mismatch");
}

bool PosteriorTrace::operator==(const PosteriorTrace& o) const
{
    auto same_opt = [](const auto& a, const auto& b) {
        if (a.has_value() != b.has_value())
            return false;
        if (!a)
            return true;
        return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
    };
    return counts.rows() == o.counts.rows() && counts.cols() == o.counts.cols() &&
           counts == o.counts && inclusion == o.inclusion &&
           sigma2_path.size() == o.sigma2_path.size() && sigma2_path == o.sigma2_path &&
           tree_leaves.rows() == o.tree_leaves.rows() && tree_leaves.cols() == o.tree_leaves.cols() &&
           tree_leaves == o.tree_leaves && mean_fit_path.size() == o.mean_fit_path.size() &&
           mean_fit_path == o.mean_fit_path && mi_node_log == o.mi_node_log &&
           same_opt(s_path, o.s_path) && same_opt(alpha_path, o.alpha_path) &&
           config == o.config && feature_names == o.feature_names && moves == o.moves;
}

} // namespace bartvs
