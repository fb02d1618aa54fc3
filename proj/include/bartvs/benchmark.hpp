#ifndef BARTVS_BENCHMARK_HPP
#define BARTVS_BENCHMARK_HPP

#include "bartvs/data.hpp"
#include "bartvs/expression.hpp"
#include "bartvs/pipeline.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace bartvs {

/// A data-generating equation with the sampling box of its relevant inputs.
struct EquationSpec {
    std::string id;
    std::string expression;
    std::vector<std::pair<double, double>> ranges;

    int p0() const { return static_cast<int>(ranges.size()); }
    void validate() const;
};

/// Built-in equations: II-11-17 plus small product, additive and trigonometric forms.
const std::vector<EquationSpec>& equation_registry();
const EquationSpec& find_equation(const std::string& id);

struct GeneratedData {
    Dataset data;
    Eigen::VectorXd f_values;
    double signal_variance = 0.0;
    double noise_variance = 0.0;
};

/// Relevant columns iid Uniform(a_j, b_j), y = f + N(0, var(f) / snr) (no
/// noise when snr is empty), then S irrelevant copies per relevant feature
/// grouped by parent. Truth is the first p0 columns.
GeneratedData generate_dataset(const EquationSpec& spec, int n, std::optional<double> snr, int S,
                               std::uint64_t seed);

struct MetricsRecord {
    double tpr = 0.0;
    double fpr = 0.0;
    double f1 = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int tn = 0;
    double runtime = 0.0;
    bool no_selection = false;

    bool operator==(const MetricsRecord&) const = default;
};

/// TPR is recall tp / (tp + fn). Empty selections score zero everywhere.
MetricsRecord compute_metrics(const std::vector<int>& selected, const std::vector<int>& truth, int p);

/// One benchmark scenario. When lrep_prefixes is non-empty, max(prefixes)
/// replicate fits are run once and one result is emitted per prefix.
struct GridPoint {
    EquationSpec equation;
    int n = 500;
    std::optional<double> snr;  ///< empty means noiseless
    int S = 50;
    Method method = Method::dart_vc_measure;
    int lrep = 10;
    std::vector<int> lrep_prefixes;
    int lperm = 50;
    double alpha = 0.05;
    FitConfig fit;
    int replicate = 0;
    std::uint64_t seed = 0;
};

struct GridRow {
    int point = 0;
    int replicate = 0;
    std::string method;
    std::string equation;
    int n = 0;
    std::optional<double> snr;
    int S = 0;
    int p = 0;
    int lrep = 0;
    std::uint64_t seed = 0;
    MetricsRecord metrics;
    std::vector<int> selected;
    std::string error;
};

/// Key that identifies a row across runs: (point, replicate, L_rep).
using RowKey = std::tuple<int, int, int>;

struct GridOptions {
    int jobs = 1;
    std::set<RowKey> completed;                      ///< points whose rows all appear here are skipped
    std::function<void(const GridRow&)> on_row;      ///< called in grid order
};

/// Runs every point, emitting rows ordered by grid index regardless of which
/// worker finishes first. Failures become rows with a non-empty error.
std::vector<GridRow> run_grid(const std::vector<GridPoint>& grid, const GridOptions& options = {});

/// Mean TPR/FPR/F1 per (method, n, snr, L_rep), in first-seen order.
struct AggregateRow {
    std::string method;
    int n = 0;
    std::optional<double> snr;
    int lrep = 0;
    int rows = 0;
    double tpr = 0.0;
    double fpr = 0.0;
    double f1 = 0.0;
    double runtime = 0.0;
};

std::vector<AggregateRow> aggregate(const std::vector<GridRow>& rows);

} // namespace bartvs

#endif // BARTVS_BENCHMARK_HPP
