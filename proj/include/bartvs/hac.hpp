#ifndef BARTVS_HAC_HPP
#define BARTVS_HAC_HPP

#include <Eigen/Dense>

#include <vector>

namespace bartvs {

/// One agglomeration. Ids 0..m-1 are the input points; merge k creates id m + k.
struct Merge {
    int a;
    int b;
    double height;
    int size;
};

struct Dendrogram {
    int leaves = 0;
    std::vector<Merge> merges;
    std::vector<int> order;  ///< leaf order of a left-first traversal

    /// Input points under a cluster id.
    std::vector<int> members(int id) const;
};

/// Unweighted average linkage (UPGMA) on Euclidean distances between rows.
/// Ties go to the pair with the lexicographically smallest (min index of
/// first cluster, min index of second cluster). Throws for fewer than 2 rows.
Dendrogram hac_average_linkage(const Eigen::MatrixXd& points);

/// Undoes the final merge. Label 0 is the cluster containing point 0.
std::vector<int> cut_two(const Dendrogram& dendrogram);

} // namespace bartvs

#endif // BARTVS_HAC_HPP
