// Independent reference implementations used by the unit and acceptance
// tests. Everything here is written the slow, obvious way on purpose.
#ifndef BARTVS_TESTS_ORACLES_HPP
#define BARTVS_TESTS_ORACLES_HPP

#include "bartvs/trace.hpp"
#include "bartvs/tree.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <vector>

namespace oracle {

// Plain nested tree, evaluated by recursive descent.
struct Node {
    int feature = -1;
    double cut = 0.0;
    double value = 0.0;
    std::unique_ptr<Node> left, right;
};

inline double predict(const Node& n, const Eigen::VectorXd& x)
{
    if (!n.left)
        return n.value;
    return x[n.feature] <= n.cut ? predict(*n.left, x) : predict(*n.right, x);
}

// Grows the same random shape into a DecisionTree and a nested oracle tree.
template <typename Rng>
void grow(bartvs::DecisionTree& tree, bartvs::NodeId id, Node& mirror, int depth, int max_depth, int p, Rng& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution stop(depth == 0 ? 0.0 : 0.35);
    if (depth >= max_depth || stop(rng)) {
        const double v = u(rng);
        tree.node(id).value = v;
        mirror.value = v;
        return;
    }
    const int j = std::uniform_int_distribution<int>(0, p - 1)(rng);
    const double c = u(rng);
    const auto [l, r] = tree.split(id, j, 0, c);
    mirror.feature = j;
    mirror.cut = c;
    mirror.left = std::make_unique<Node>();
    mirror.right = std::make_unique<Node>();
    grow(tree, l, *mirror.left, depth + 1, max_depth, p, rng);
    grow(tree, r, *mirror.right, depth + 1, max_depth, p, rng);
}

// Type-7 quantile from its textbook definition with 1-based order statistics.
inline double quantile7(std::vector<double> x, double q)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    const double h = (n - 1.0) * q + 1.0;
    const double fh = std::floor(h);
    const auto at = [&](double k) { return x[static_cast<std::size_t>(std::min(std::max(k, 1.0), n)) - 1]; };
    return at(fh) + (h - fh) * (at(fh + 1.0) - at(fh));
}

// Midranks by counting: rank_j = 1 + #(greater) + (#(equal) - 1) / 2.
inline Eigen::VectorXd midranks(const Eigen::VectorXd& v)
{
    Eigen::VectorXd r(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        double greater = 0, equal = 0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            greater += v[i] > v[j];
            equal += v[i] == v[j];
        }
        r[j] = 1.0 + greater + (equal - 1.0) / 2.0;
    }
    return r;
}

// UPGMA by brute force: every step recomputes all average inter-cluster
// distances from the member lists. Returns labels of the final two clusters,
// label 0 holding point 0.
inline std::vector<int> upgma_cut_two(const Eigen::MatrixXd& X)
{
    const int m = static_cast<int>(X.rows());
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < m; ++i)
        clusters.push_back({i});
    auto avg = [&](const std::vector<int>& a, const std::vector<int>& b) {
        double s = 0.0;
        for (int i : a)
            for (int j : b)
                s += (X.row(i) - X.row(j)).norm();
        return s / static_cast<double>(a.size() * b.size());
    };
    while (clusters.size() > 2) {
        // order clusters by smallest member for the tie-break
        std::sort(clusters.begin(), clusters.end(),
                  [](const auto& a, const auto& b) { return *std::min_element(a.begin(), a.end()) <
                                                            *std::min_element(b.begin(), b.end()); });
        std::size_t ba = 0, bb = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < clusters.size(); ++a)
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double d = avg(clusters[a], clusters[b]);
                if (d < best) {
                    best = d;
                    ba = a;
                    bb = b;
                }
            }
        clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
    }
    std::vector<int> labels(m, 1);
    const auto& zero = std::find(clusters[0].begin(), clusters[0].end(), 0) != clusters[0].end() ? clusters[0]
                                                                                                   : clusters[1];
    for (int i : zero)
        labels[i] = 0;
    return labels;
}

inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b)
{
    if (a.size() != b.size())
        return false;
    bool same = true, swapped = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i] == b[i];
        swapped = swapped && a[i] == 1 - b[i];
    }
    return same || swapped;
}

inline std::vector<int> select_local(const Eigen::VectorXd& q, const Eigen::MatrixXd& null, double alpha)
{
    std::vector<int> out;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        std::vector<double> col(null.col(j).data(), null.col(j).data() + null.rows());
        if (q[j] >= quantile7(col, 1.0 - alpha))
            out.push_back(static_cast<int>(j));
    }
    return out;
}

inline std::vector<int> select_gmax(const Eigen::VectorXd& q, const Eigen::MatrixXd& null, double alpha)
{
    std::vector<double> maxima;
    for (Eigen::Index l = 0; l < null.rows(); ++l) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < null.cols(); ++j)
            mx = std::max(mx, null(l, j));
        maxima.push_back(mx);
    }
    const double thr = quantile7(maxima, 1.0 - alpha);
    std::vector<int> out;
    for (Eigen::Index j = 0; j < q.size(); ++j)
        if (q[j] >= thr)
            out.push_back(static_cast<int>(j));
    return out;
}

struct ColumnMoments {
    std::vector<double> mean, sd;
};

inline ColumnMoments moments(const Eigen::MatrixXd& null)
{
    ColumnMoments m;
    const double L = static_cast<double>(null.rows());
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index l = 0; l < null.rows(); ++l)
            s += null(l, j);
        const double mean = s / L;
        double ss = 0.0;
        for (Eigen::Index l = 0; l < null.rows(); ++l)
            ss += (null(l, j) - mean) * (null(l, j) - mean);
        m.mean.push_back(mean);
        m.sd.push_back(null.rows() > 1 ? std::sqrt(ss / (L - 1.0)) : 0.0);
    }
    return m;
}

// Coverage condition at multiplier C, counted on standardized draws.
inline bool gse_covers(const Eigen::MatrixXd& null, const ColumnMoments& m, double C, double alpha)
{
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
        if (!(m.sd[j] > 0.0))
            continue;
        int covered = 0;
        for (Eigen::Index l = 0; l < null.rows(); ++l)
            covered += (null(l, j) - m.mean[j]) / m.sd[j] <= C;
        if (!(static_cast<double>(covered) / static_cast<double>(null.rows()) > 1.0 - alpha))
            return false;
    }
    return true;
}

// Exhaustive scan: try every standardized null value (and 0), keep the smallest that covers.
inline double gse_scan(const Eigen::MatrixXd& null, double alpha)
{
    const auto m = moments(null);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> cands{0.0};
    for (Eigen::Index j = 0; j < null.cols(); ++j)
        if (m.sd[j] > 0.0)
            for (Eigen::Index l = 0; l < null.rows(); ++l)
                cands.push_back(std::max(0.0, (null(l, j) - m.mean[j]) / m.sd[j]));
    for (double c : cands)
        if (c < best && gse_covers(null, m, c, alpha))
            best = c;
    return best;
}

// Bisection on C for the same coverage condition (monotone in C).
inline double gse_bisect(const Eigen::MatrixXd& null, double alpha)
{
    const auto m = moments(null);
    if (gse_covers(null, m, 0.0, alpha))
        return 0.0;
    double lo = 0.0, hi = 1.0;
    while (!gse_covers(null, m, hi, alpha))
        hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gse_covers(null, m, mid, alpha))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

inline std::vector<int> select_gse_at(const Eigen::VectorXd& q, const Eigen::MatrixXd& null, double C)
{
    const auto m = moments(null);
    std::vector<int> out;
    for (Eigen::Index j = 0; j < q.size(); ++j)
        if (q[j] >= m.mean[j] + C * m.sd[j])
            out.push_back(static_cast<int>(j));
    return out;
}

// Random trace whose counts, inclusion, leaf counts and MI log agree.
template <typename Rng>
bartvs::PosteriorTrace random_trace(int K, int p, Rng& rng, bool with_mi = true, double empty_rate = 0.15)
{
    bartvs::PosteriorTrace tr;
    tr.counts = Eigen::MatrixXi::Zero(K, p);
    std::bernoulli_distribution empty(empty_rate);
    std::uniform_int_distribution<int> count(0, 3);
    std::uniform_real_distribution<double> prob(0.0, 1.0);
    for (int k = 0; k < K; ++k)
        if (!empty(rng))
            for (int j = 0; j < p; ++j)
                tr.counts(k, j) = count(rng) * (prob(rng) < 0.5);
    tr.inclusion = (tr.counts.array() > 0).matrix();
    tr.tree_leaves = (tr.counts.rowwise().sum().array() + 1).matrix();
    tr.sigma2_path = Eigen::VectorXd::Ones(K);
    tr.mean_fit_path = Eigen::VectorXd::Zero(K);
    tr.config.draws = K;
    for (int j = 0; j < p; ++j)
        tr.feature_names.push_back("x" + std::to_string(j + 1));
    if (with_mi) {
        std::vector<std::vector<bartvs::MiNode>> log(K);
        for (int k = 0; k < K; ++k)
            for (int j = 0; j < p; ++j)
                for (int c = 0; c < tr.counts(k, j); ++c)
                    log[k].push_back({j, prob(rng)});
        for (auto& draw : log)
            std::shuffle(draw.begin(), draw.end(), rng);
        tr.mi_node_log = std::move(log);
    }
    return tr;
}

inline Eigen::VectorXd vip(const bartvs::PosteriorTrace& t)
{
    const auto K = t.counts.rows(), p = t.counts.cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
    for (Eigen::Index k = 0; k < K; ++k) {
        double total = 0;
        for (Eigen::Index j = 0; j < p; ++j)
            total += t.counts(k, j);
        if (total > 0)
            for (Eigen::Index j = 0; j < p; ++j)
                out[j] += t.counts(k, j) / total;
    }
    return out / static_cast<double>(K);
}

inline Eigen::VectorXd vc(const bartvs::PosteriorTrace& t)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(t.counts.cols());
    for (Eigen::Index k = 0; k < t.counts.rows(); ++k)
        for (Eigen::Index j = 0; j < t.counts.cols(); ++j)
            out[j] += t.counts(k, j);
    return out / static_cast<double>(t.counts.rows());
}

inline Eigen::VectorXd mpvip(const bartvs::PosteriorTrace& t)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(t.counts.cols());
    for (Eigen::Index k = 0; k < t.counts.rows(); ++k)
        for (Eigen::Index j = 0; j < t.counts.cols(); ++j)
            out[j] += t.inclusion(k, j) ? 1.0 : 0.0;
    return out / static_cast<double>(t.counts.rows());
}

inline Eigen::VectorXd mi(const bartvs::PosteriorTrace& t)
{
    const auto p = t.counts.cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
    for (const auto& draw : *t.mi_node_log) {
        std::vector<double> sum(p, 0.0), n(p, 0.0);
        for (const auto& node : draw) {
            sum[node.feature] += node.accept_prob;
            n[node.feature] += 1.0;
        }
        std::vector<double> u(p, 0.0);
        double total = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            u[j] = n[j] > 0 ? sum[j] / n[j] : 0.0;
            total += u[j];
        }
        if (total > 0)
            for (Eigen::Index j = 0; j < p; ++j)
                out[j] += u[j] / total;
    }
    return out / static_cast<double>(t.counts.rows());
}

// log of the Gaussian marginal of residuals r under mu ~ N(0, tau2),
// r | mu ~ N(mu 1, sigma2 I), evaluated with the explicit covariance.
inline double log_marginal(const std::vector<double>& r, double sigma2, double tau2)
{
    const auto n = static_cast<Eigen::Index>(r.size());
    if (n == 0)
        return 0.0;
    Eigen::MatrixXd S = sigma2 * Eigen::MatrixXd::Identity(n, n) + tau2 * Eigen::MatrixXd::Ones(n, n);
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(r.data(), n);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + logdet + v.dot(llt.solve(v)));
}

} // namespace oracle

#endif // BARTVS_TESTS_ORACLES_HPP
