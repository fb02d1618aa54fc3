#include "bartvs/hac.hpp"

#include "bartvs/data.hpp"

#include <limits>

namespace bartvs {

std::vector<int> Dendrogram::members(int id) const
{
    std::vector<int> out;
    std::vector<int> stack{id};
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        if (c < leaves) {
            out.push_back(c);
            continue;
        }
        const auto& m = merges[c - leaves];
        stack.push_back(m.b);
        stack.push_back(m.a);
    }
    return out;
}

Dendrogram hac_average_linkage(const Eigen::MatrixXd& points)
{
    const auto m = static_cast<int>(points.rows());
    if (m < 2)
        throw ValidationError("clustering needs at least two points");
    if (!points.allFinite())
        throw ValidationError("clustering points must be finite");

    Eigen::MatrixXd dist(m, m);
    for (int i = 0; i < m; ++i) {
        dist(i, i) = 0.0;
        for (int j = i + 1; j < m; ++j)
            dist(i, j) = dist(j, i) = (points.row(i) - points.row(j)).norm();
    }

    // Clusters are indexed by their smallest member point.
    std::vector<bool> active(m, true);
    std::vector<int> size(m, 1);
    std::vector<int> cluster_id(m);
    for (int i = 0; i < m; ++i)
        cluster_id[i] = i;

    Dendrogram d;
    d.leaves = m;
    d.merges.reserve(m - 1);
    for (int step = 0; step < m - 1; ++step) {
        int best_a = -1, best_b = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < m; ++a) {
            if (!active[a])
                continue;
            for (int b = a + 1; b < m; ++b) {
                if (active[b] && dist(a, b) < best) {
                    best = dist(a, b);
                    best_a = a;
                    best_b = b;
                }
            }
        }

        const int na = size[best_a];
        const int nb = size[best_b];
        for (int k = 0; k < m; ++k) {
            if (!active[k] || k == best_a || k == best_b)
                continue;
            // lo + w (hi - lo) never falls below lo, keeping heights monotone
            const double x = dist(best_a, k);
            const double y = dist(best_b, k);
            const double w_hi = static_cast<double>(x <= y ? nb : na) / (na + nb);
            const double lo = std::min(x, y);
            const double v = lo + w_hi * (std::max(x, y) - lo);
            dist(best_a, k) = dist(k, best_a) = v;
        }
        d.merges.push_back({cluster_id[best_a], cluster_id[best_b], best, na + nb});
        active[best_b] = false;
        size[best_a] = na + nb;
        cluster_id[best_a] = m + step;
    }
    d.order = d.members(m + (m - 2));
    return d;
}

std::vector<int> cut_two(const Dendrogram& dendrogram)
{
    const auto& last = dendrogram.merges.back();
    std::vector<int> labels(dendrogram.leaves, 1);
    for (int i : dendrogram.members(last.a))
        labels[i] = 0;
    if (labels[0] != 0)
        for (int& l : labels)
            l = 1 - l;
    return labels;
}

} // namespace bartvs
