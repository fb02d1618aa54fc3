#include "bartvs/summaries.hpp"

#include "bartvs/data.hpp"

namespace bartvs {

std::string to_string(ImportanceKind kind)
{
    switch (kind) {
    case ImportanceKind::vip: return "VIP";
    case ImportanceKind::vc: return "VC";
    case ImportanceKind::mpvip: return "MPVIP";
    case ImportanceKind::mi: return "MI";
    }
    return "?";
}

std::string to_string(SummarySource source)
{
    switch (source) {
    case SummarySource::vc_measure: return "VC-measure";
    case SummarySource::vip_measure: return "VIP-measure";
    case SummarySource::vip_rank: return "VIP-Rank";
    }
    return "?";
}

ImportanceVector vip(const PosteriorTrace& trace)
{
    const Eigen::Index K = trace.draws();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(trace.features());
    for (Eigen::Index k = 0; k < K; ++k) {
        const double total = trace.counts.row(k).cast<double>().sum();
        if (total > 0.0)
            acc += trace.counts.row(k).cast<double>().transpose() / total;
    }
    if (K > 0)
        acc /= static_cast<double>(K);
    return {ImportanceKind::vip, acc};
}

ImportanceVector vc(const PosteriorTrace& trace)
{
    const Eigen::Index K = trace.draws();
    Eigen::VectorXd acc = trace.counts.cast<double>().colwise().sum().transpose();
    if (K > 0)
        acc /= static_cast<double>(K);
    return {ImportanceKind::vc, acc};
}

ImportanceVector mpvip(const PosteriorTrace& trace)
{
    const Eigen::Index K = trace.draws();
    Eigen::VectorXd acc = trace.inclusion.cast<double>().colwise().sum().transpose();
    if (K > 0)
        acc /= static_cast<double>(K);
    return {ImportanceKind::mpvip, acc};
}

ImportanceVector metropolis_importance(const PosteriorTrace& trace)
{
    if (!trace.mi_node_log)
        throw ValidationError("MI logging was not enabled");
    const Eigen::Index p = trace.features();
    const auto& log = *trace.mi_node_log;
    const auto K = static_cast<Eigen::Index>(log.size());

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd sum(p);
    Eigen::VectorXi count(p);
    for (const auto& draw : log) {
        sum.setZero();
        count.setZero();
        for (const auto& node : draw) {
            sum[node.feature] += node.accept_prob;
            ++count[node.feature];
        }
        Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
        for (Eigen::Index j = 0; j < p; ++j)
            if (count[j] > 0)
                u[j] = sum[j] / count[j];
        const double total = u.sum();
        if (total > 0.0)
            acc += u / total;
    }
    if (K > 0)
        acc /= static_cast<double>(K);
    return {ImportanceKind::mi, acc};
}

ImportanceVector importance(const PosteriorTrace& trace, ImportanceKind kind)
{
    switch (kind) {
    case ImportanceKind::vip: return vip(trace);
    case ImportanceKind::vc: return vc(trace);
    case ImportanceKind::mpvip: return mpvip(trace);
    case ImportanceKind::mi: return metropolis_importance(trace);
    }
    throw ValidationError("unknown importance kind");
}

namespace {

// Sums in sorted order so the result does not depend on fit order.
template <typename Derived>
double order_free_mean(const Eigen::DenseBase<Derived>& row)
{
    std::vector<double> x(row.size());
    for (Eigen::Index i = 0; i < row.size(); ++i)
        x[i] = row(i);
    std::sort(x.begin(), x.end());
    double s = 0.0;
    for (double v : x)
        s += v;
    return s / static_cast<double>(x.size());
}

} // namespace

SummaryMatrix build_summary_matrix(std::span<const Eigen::VectorXd> per_fit, SummarySource source)
{
    if (per_fit.empty())
        throw ValidationError("summary matrix needs at least one fit");
    const Eigen::Index p = per_fit.front().size();
    const auto L = static_cast<Eigen::Index>(per_fit.size());
    Eigen::MatrixXd values(p, L);
    Eigen::MatrixXd ranks(p, L);
    for (Eigen::Index l = 0; l < L; ++l) {
        if (per_fit[l].size() != p)
            throw ValidationError("fits disagree on the number of features");
        values.col(l) = per_fit[l];
        ranks.col(l) = rank_descending(per_fit[l]);
    }

    SummaryMatrix out;
    out.replicates = static_cast<int>(L);
    out.source = source;
    if (source == SummarySource::vip_rank) {
        out.Z.resize(p, 1);
        for (Eigen::Index j = 0; j < p; ++j)
            out.Z(j, 0) = order_free_mean(ranks.row(j));
        return out;
    }
    out.Z.resize(p, 4);
    for (Eigen::Index j = 0; j < p; ++j) {
        out.Z(j, 0) = order_free_mean(values.row(j));
        out.Z(j, 1) = quantile_type7(values.row(j), 0.25);
        out.Z(j, 2) = order_free_mean(ranks.row(j));
        out.Z(j, 3) = quantile_type7(ranks.row(j), 0.75);
    }
    return out;
}

SummaryMatrix build_summary_matrix(std::span<const PosteriorTrace> traces, SummarySource source)
{
    std::vector<Eigen::VectorXd> per_fit;
    per_fit.reserve(traces.size());
    for (const auto& tr : traces)
        per_fit.push_back(source == SummarySource::vc_measure ? vc(tr).values : vip(tr).values);
    return build_summary_matrix(std::span<const Eigen::VectorXd>(per_fit), source);
}

} // namespace bartvs
