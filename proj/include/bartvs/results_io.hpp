#ifndef BARTVS_RESULTS_IO_HPP
#define BARTVS_RESULTS_IO_HPP

#include "bartvs/benchmark.hpp"
#include "bartvs/pipeline.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bartvs {

nlohmann::ordered_json to_json(const FitConfig& c);
FitConfig fit_config_from_json(const nlohmann::ordered_json& j, FitConfig base = {});

nlohmann::ordered_json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::ordered_json& j);

/// Everything a selection run reports. Indices are 0-based in memory and
/// 1-based in the JSON text.
struct ResultsDocument {
    RunConfig config;
    std::vector<std::string> feature_names;
    std::string importance_kind;
    Eigen::VectorXd importance;
    std::optional<Eigen::VectorXd> thresholds;
    std::optional<std::string> summary_source;
    std::optional<Eigen::MatrixXd> summary;
    std::vector<int> selected;
    std::vector<std::string> selected_names;
    bool no_selection = false;
    std::optional<double> c_star;
    std::optional<double> global_threshold;
    std::optional<std::array<double, 2>> cluster_means;
    std::optional<std::array<int, 2>> cluster_sizes;
    bool equal_cluster_means = false;
    std::optional<std::vector<int>> truth;
    std::optional<MetricsRecord> metrics;
    double seconds = 0.0;
    std::vector<std::uint64_t> fit_seeds;
    std::vector<std::uint64_t> permutation_seeds;

    bool operator==(const ResultsDocument& other) const;
};

ResultsDocument make_results_document(const Dataset& data, const RunConfig& config, const MethodRun& run);

nlohmann::ordered_json to_json(const ResultsDocument& doc);
ResultsDocument results_from_json(const nlohmann::ordered_json& j);

void save_results(const std::string& path, const ResultsDocument& doc);
ResultsDocument load_results(const std::string& path);

/// One row per feature in feature order: index, name, importance,
/// threshold (blank when none), selected flag, then the summary columns.
void write_importance_csv(std::ostream& out, const ResultsDocument& doc);

// Benchmark grid files.
//
// {
//   "fit":    { FitConfig fields applied to every point },
//   "points": [ { "equation": "product" | {"id", "expression", "ranges"},
//                 "n", "snr": number | "noiseless", "S", "method",
//                 "lrep", "lrep_prefixes", "lperm", "alpha",
//                 "replicates", "seed", "fit": {...} } ]
// }
//
// Each point expands into `replicates` GridPoints; replicate r uses
// seed + 1000000 * r.
std::vector<GridPoint> parse_grid(const std::string& text);
std::vector<GridPoint> load_grid(const std::string& path);

std::vector<std::string> metrics_csv_header();
std::vector<std::string> metrics_csv_fields(const GridRow& row);
/// Reads rows previously written with metrics_csv_fields. A trailing line
/// without a newline (an interrupted write) is ignored.
std::vector<GridRow> read_metrics_csv(const std::string& path);

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

} // namespace bartvs

#endif // BARTVS_RESULTS_IO_HPP
