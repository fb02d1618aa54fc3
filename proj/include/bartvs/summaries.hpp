#ifndef BARTVS_SUMMARIES_HPP
#define BARTVS_SUMMARIES_HPP

#include "bartvs/trace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace bartvs {

enum class ImportanceKind { vip, vc, mpvip, mi };

std::string to_string(ImportanceKind kind);

struct ImportanceVector {
    ImportanceKind kind;
    Eigen::VectorXd values;
    int fit_id = 0;
};

/// Mean over draws of c_jk / c_.k; empty draws contribute zero.
ImportanceVector vip(const PosteriorTrace& trace);
/// Mean split count per feature.
ImportanceVector vc(const PosteriorTrace& trace);
/// Fraction of draws splitting on the feature at least once.
ImportanceVector mpvip(const PosteriorTrace& trace);
/// Normalized average acceptance probability of each feature's interior nodes.
/// Throws ValidationError when the trace carries no MI log.
ImportanceVector metropolis_importance(const PosteriorTrace& trace);

ImportanceVector importance(const PosteriorTrace& trace, ImportanceKind kind);

/// Descending midranks: the largest value gets rank 1, tied values share the
/// average of the positions they span.
template <typename Derived>
Eigen::VectorXd rank_descending(const Eigen::DenseBase<Derived>& values)
{
    const Eigen::Index p = values.size();
    std::vector<Eigen::Index> order(p);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return values(a) > values(b);
    });
    Eigen::VectorXd ranks(p);
    Eigen::Index i = 0;
    while (i < p) {
        Eigen::Index j = i;
        while (j + 1 < p && values(order[j + 1]) == values(order[i]))
            ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k)
            ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

/// Type-7 sample quantile (linear interpolation, h = (n - 1) q + 1).
template <typename Derived>
double quantile_type7(const Eigen::DenseBase<Derived>& values, double q)
{
    std::vector<double> x(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i)
        x[i] = static_cast<double>(values(i));
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= x.size())
        return x.back();
    return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

enum class SummarySource { vc_measure, vip_measure, vip_rank };

std::string to_string(SummarySource source);

/// Clustering features per predictor. For vc_measure / vip_measure the four
/// columns are (mean importance, 25% quantile, mean rank, 75% rank quantile);
/// vip_rank keeps only the mean VIP rank.
struct SummaryMatrix {
    Eigen::MatrixXd Z;
    int replicates = 0;
    SummarySource source = SummarySource::vc_measure;
};

/// From per-fit importance vectors (VC for vc_measure, VIP otherwise).
SummaryMatrix build_summary_matrix(std::span<const Eigen::VectorXd> per_fit, SummarySource source);

/// From replicate traces; VC or VIP is computed per trace according to source.
SummaryMatrix build_summary_matrix(std::span<const PosteriorTrace> traces, SummarySource source);

} // namespace bartvs

#endif // BARTVS_SUMMARIES_HPP
