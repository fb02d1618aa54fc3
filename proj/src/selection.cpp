#include "bartvs/selection.hpp"

#include "bartvs/hac.hpp"
#include "bartvs/parallel.hpp"
#include "bartvs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bartvs {

namespace {

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("alpha must lie in (0, 1)");
}

void check_null(const Eigen::VectorXd& observed, const Eigen::MatrixXd& null)
{
    if (null.rows() < 1)
        throw ValidationError("null matrix needs at least one permutation");
    if (null.cols() != observed.size())
        throw ValidationError("null matrix and observed importance disagree on p");
}

std::vector<int> select_at_or_above(const Eigen::VectorXd& values, const Eigen::VectorXd& thresholds)
{
    std::vector<int> out;
    for (Eigen::Index j = 0; j < values.size(); ++j)
        if (values[j] >= thresholds[j])
            out.push_back(static_cast<int>(j));
    return out;
}

} // namespace

Eigen::MatrixXd log1p_standardize(const Eigen::MatrixXd& Z)
{
    Eigen::MatrixXd out = Z.array().log1p().matrix();
    const auto m = static_cast<double>(out.rows());
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        // test constancy directly: the mean of equal values can be off by an
        // ulp, and standardizing that residue would blow it up to +-1
        if (out.col(c).maxCoeff() == out.col(c).minCoeff()) {
            out.col(c).setZero();
            continue;
        }
        const double mean = out.col(c).mean();
        out.col(c).array() -= mean;
        const double ss = out.col(c).squaredNorm();
        const double sd = m > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
        if (sd > 0.0)
            out.col(c) /= sd;
        else
            out.col(c).setZero();
    }
    return out;
}

SelectionResult cluster_select(const SummaryMatrix& summary)
{
    const Eigen::MatrixXd& Z = summary.Z;
    if (Z.rows() < 2)
        throw ValidationError("clustering selection needs p >= 2");

    const auto labels = cut_two(hac_average_linkage(log1p_standardize(Z)));
    std::array<double, 2> sums{0.0, 0.0};
    std::array<int, 2> sizes{0, 0};
    for (Eigen::Index j = 0; j < Z.rows(); ++j) {
        sums[labels[j]] += Z(j, 0);
        ++sizes[labels[j]];
    }
    const std::array<double, 2> means{sums[0] / sizes[0], sums[1] / sizes[1]};

    int keep;
    if (summary.source == SummarySource::vip_rank)
        keep = means[1] < means[0] ? 1 : 0;
    else
        keep = means[1] > means[0] ? 1 : 0;

    SelectionResult r;
    r.method = to_string(summary.source);
    r.importance = Z.col(0);
    for (Eigen::Index j = 0; j < Z.rows(); ++j)
        if (labels[j] == keep)
            r.selected.push_back(static_cast<int>(j));
    r.diagnostics.cluster_means = means;
    r.diagnostics.cluster_sizes = sizes;
    r.diagnostics.cluster_labels = labels;
    r.diagnostics.equal_cluster_means = means[0] == means[1];
    return r;
}

SelectionResult mpm_select(const ImportanceVector& pi_hat)
{
    SelectionResult r;
    r.method = "MPM";
    r.importance = pi_hat.values;
    r.thresholds = Eigen::VectorXd::Constant(pi_hat.values.size(), 0.5);
    r.diagnostics.global_threshold = 0.5;
    r.selected = select_at_or_above(r.importance, *r.thresholds);
    return r;
}

SelectionResult threshold_local(const Eigen::VectorXd& observed, const Eigen::MatrixXd& null, double alpha)
{
    check_alpha(alpha);
    check_null(observed, null);
    Eigen::VectorXd thr(observed.size());
    for (Eigen::Index j = 0; j < observed.size(); ++j)
        thr[j] = quantile_type7(null.col(j), 1.0 - alpha);
    SelectionResult r;
    r.method = "Local";
    r.importance = observed;
    r.selected = select_at_or_above(observed, thr);
    r.thresholds = std::move(thr);
    return r;
}

SelectionResult threshold_gmax(const Eigen::VectorXd& observed, const Eigen::MatrixXd& null, double alpha)
{
    check_alpha(alpha);
    check_null(observed, null);
    Eigen::VectorXd maxima = null.rowwise().maxCoeff();
    const double thr = quantile_type7(maxima, 1.0 - alpha);
    SelectionResult r;
    r.method = "G.Max";
    r.importance = observed;
    r.thresholds = Eigen::VectorXd::Constant(observed.size(), thr);
    r.selected = select_at_or_above(observed, *r.thresholds);
    r.diagnostics.global_threshold = thr;
    r.diagnostics.null_maxima = std::move(maxima);
    return r;
}

namespace {

struct NullMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
};

NullMoments null_moments(const Eigen::MatrixXd& null)
{
    const auto L = static_cast<double>(null.rows());
    NullMoments m;
    m.mean = null.colwise().mean().transpose();
    m.sd = Eigen::VectorXd::Zero(null.cols());
    if (null.rows() > 1)
        for (Eigen::Index j = 0; j < null.cols(); ++j)
            m.sd[j] = std::sqrt((null.col(j).array() - m.mean[j]).square().sum() / (L - 1.0));
    return m;
}

} // namespace

double gse_multiplier(const Eigen::MatrixXd& null, double alpha)
{
    check_alpha(alpha);
    const auto mom = null_moments(null);
    const Eigen::Index L = null.rows();

    // Standardized null draws of the columns that can bind.
    std::vector<Eigen::VectorXd> z;
    std::vector<double> candidates{0.0};
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
        if (!(mom.sd[j] > 0.0))
            continue;
        Eigen::VectorXd zj = (null.col(j).array() - mom.mean[j]) / mom.sd[j];
        for (Eigen::Index l = 0; l < L; ++l)
            if (zj[l] > 0.0)
                candidates.push_back(zj[l]);
        z.push_back(std::move(zj));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const double need = 1.0 - alpha;
    for (double c : candidates) {
        bool ok = true;
        for (const auto& zj : z) {
            const auto covered = (zj.array() <= c).count();
            if (!(static_cast<double>(covered) / static_cast<double>(L) > need)) {
                ok = false;
                break;
            }
        }
        if (ok)
            return c;
    }
    return candidates.back();
}

SelectionResult threshold_gse(const Eigen::VectorXd& observed, const Eigen::MatrixXd& null, double alpha)
{
    check_alpha(alpha);
    check_null(observed, null);
    const double c = gse_multiplier(null, alpha);
    const auto mom = null_moments(null);
    Eigen::VectorXd thr = mom.mean + c * mom.sd;
    SelectionResult r;
    r.method = "G.SE";
    r.importance = observed;
    r.selected = select_at_or_above(observed, thr);
    r.thresholds = std::move(thr);
    r.diagnostics.c_star = c;
    return r;
}

Eigen::VectorXd permuted_response(const Eigen::VectorXd& y, std::uint64_t seed)
{
    std::vector<Eigen::Index> order(y.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x9e3779b9u};
    Rng rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::VectorXd out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        out[i] = y[order[i]];
    return out;
}

Eigen::MatrixXd permutation_null(const Dataset& data, ImportanceKind kind, int permutations,
                                 const FitConfig& config, std::uint64_t seed, int jobs)
{
    if (permutations < 1)
        throw ValidationError("permutation count must be >= 1");
    Eigen::MatrixXd null(permutations, data.p());
    FitConfig cfg = config;
    cfg.record_mi = cfg.record_mi || kind == ImportanceKind::mi;
    parallel_for(permutations, jobs, [&](int l) {
        try {
            Dataset perm{permuted_response(data.y, permutation_seed(seed, l)), data.X,
                         data.feature_names, data.truth};
            FitConfig c = cfg;
            c.seed = permutation_seed(seed, l);
            const auto trace = fit(perm, c);
            null.row(l) = importance(trace, kind).values.transpose();
        } catch (const std::exception& e) {
            throw std::runtime_error("permutation " + std::to_string(l + 1) + ": " + e.what());
        }
    });
    return null;
}

} // namespace bartvs
