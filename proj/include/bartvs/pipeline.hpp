#ifndef BARTVS_PIPELINE_HPP
#define BARTVS_PIPELINE_HPP

#include "bartvs/data.hpp"
#include "bartvs/selection.hpp"
#include "bartvs/summaries.hpp"
#include "bartvs/trace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bartvs {

enum class Method {
    bart_vip_local,
    bart_vip_gse,
    bart_vip_gmax,
    bart_mi_local,
    bart_vip_rank,
    dart_mpm,
    bart_vc_measure,
    dart_vc_measure,
    bart_vip_measure,
    dart_vip_measure,
};

std::string to_string(Method m);
Method method_from_string(const std::string& s);
const std::vector<Method>& all_methods();

bool is_permutation_method(Method m);
bool is_clustering_method(Method m);
PriorKind prior_of(Method m);

/// Full configuration of one selection run. Fit l on the original data uses
/// seed + l; permutation l uses seed + 10000 + l.
struct RunConfig {
    Method method = Method::dart_vc_measure;
    FitConfig fit;
    int lrep = 10;
    int lperm = 50;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int jobs = 1;

    /// Defaults for a method: L_perm = 50, alpha = 0.05, L_rep = 10 except
    /// dart-mpm (1) and bart-vip-rank (20); prior and MI logging follow the method.
    static RunConfig defaults(Method m);

    /// Forces the prior and MI logging implied by the method.
    void close();

    /// Throws ValidationError on invalid method/flag combinations.
    void validate() const;
};

struct MethodRun {
    SelectionResult selection;
    std::optional<SummaryMatrix> summary;
    std::optional<Eigen::MatrixXd> null;
    std::vector<std::uint64_t> fit_seeds;
    std::vector<std::uint64_t> permutation_seeds;
    double seconds = 0.0;
};

/// Fits `count` replicate models on the original data (seeds seed + l).
std::vector<PosteriorTrace> fit_replicates(const Dataset& data, const RunConfig& config, int count);

/// Null matrix for a permutation method (empty for other methods).
std::optional<Eigen::MatrixXd> method_null(const Dataset& data, const RunConfig& config);

/// Selection from already-fitted replicates (any prefix of fit_replicates)
/// and, for permutation methods, the null matrix.
MethodRun select_from_fits(const RunConfig& config, std::span<const PosteriorTrace> fits,
                           const std::optional<Eigen::MatrixXd>& null);

/// Runs the method end to end and times it.
MethodRun run_method(const Dataset& data, RunConfig config);

} // namespace bartvs

#endif // BARTVS_PIPELINE_HPP
