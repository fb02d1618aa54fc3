// bartvs: fit tree ensembles, select variables, run benchmark grids.
//
// Exit status: 0 on success (an empty selection is a success), 2 on usage
// errors, 1 on runtime failures.

#include "bartvs/benchmark.hpp"
#include "bartvs/csv.hpp"
#include "bartvs/pipeline.hpp"
#include "bartvs/results_io.hpp"
#include "bartvs/sampler.hpp"
#include "bartvs/trace_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace bartvs;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int default_jobs()
{
    if (const char* env = std::getenv("BARTVS_JOBS")) {
        try {
            const int j = std::stoi(env);
            if (j >= 1)
                return j;
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("BARTVS_JOBS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<int> parse_index_list(const std::string& text, int p)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        int k = 0;
        try {
            std::size_t used = 0;
            k = std::stoi(item, &used);
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--truth expects 1-based column indices, got '" + item + "'");
        }
        if (k < 1 || k > p)
            throw UsageError("truth index out of range: " + std::to_string(k));
        out.push_back(k - 1);
    }
    return out;
}

std::optional<double> parse_snr(const std::string& s)
{
    if (s == "noiseless")
        return std::nullopt;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw UsageError("--snr expects a number or 'noiseless', got '" + s + "'");
    }
}

// Options shared by fit and select. Only flags the user actually passed
// override the defaults.
struct FitFlags {
    std::string response = "y";
    int trees = 0;
    int burnin = 0;
    int draws = 0;
    std::uint64_t seed = 0;
    CLI::Option* trees_opt = nullptr;
    CLI::Option* burnin_opt = nullptr;
    CLI::Option* draws_opt = nullptr;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--response", response, "Name of the response column")->capture_default_str();
        trees_opt = cmd->add_option("--trees", trees, "Trees per ensemble (default 20)")->check(CLI::PositiveNumber);
        burnin_opt = cmd->add_option("--burnin", burnin, "Burn-in iterations (default 5000)")->check(CLI::NonNegativeNumber);
        draws_opt = cmd->add_option("--draws", draws, "Kept draws (default 5000)")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Base RNG seed")->capture_default_str();
    }

    void apply(FitConfig& c) const
    {
        if (trees_opt->count())
            c.trees = trees;
        if (burnin_opt->count())
            c.burn_in = burnin;
        if (draws_opt->count())
            c.draws = draws;
        c.seed = seed;
    }
};

int cmd_fit(const std::string& csv, const FitFlags& flags, const std::string& prior, bool mi, const std::string& out)
{
    FitConfig config;
    flags.apply(config);
    try {
        config.prior = prior_kind_from_string(prior);
        config.record_mi = mi;
        config.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    const Dataset data = load_dataset(csv, flags.response);
    const PosteriorTrace trace = fit(data, config);
    save_trace(out, trace);
    std::cout << "n=" << data.n() << " p=" << data.p() << " draws=" << trace.draws() << " -> " << out << '\n';
    return 0;
}

struct SelectFlags {
    std::string method = "dart-vc-measure";
    int lrep = 0;
    int lperm = 0;
    double alpha = 0.05;
    int jobs = 0;
    std::string truth;
    std::string out = "results.json";
    std::string importance;
    CLI::Option* lrep_opt = nullptr;
    CLI::Option* lperm_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
};

int cmd_select(const std::string& csv, const FitFlags& ff, const SelectFlags& sf)
{
    RunConfig config;
    try {
        config = RunConfig::defaults(method_from_string(sf.method));
        ff.apply(config.fit);
        config.seed = ff.seed;
        if (sf.lrep_opt->count())
            config.lrep = sf.lrep;
        if (sf.lperm_opt->count())
            config.lperm = sf.lperm;
        if (sf.alpha_opt->count())
            config.alpha = sf.alpha;
        config.jobs = sf.jobs_opt->count() ? sf.jobs : default_jobs();
        config.close();
        config.validate();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }

    Dataset data = load_dataset(csv, ff.response);
    if (!sf.truth.empty()) {
        const auto truth = parse_index_list(sf.truth, static_cast<int>(data.p()));
        data = validate_dataset(data.y, data.X, data.feature_names, truth);
    }

    const MethodRun run = run_method(data, config);
    const ResultsDocument doc = make_results_document(data, config, run);
    save_results(sf.out, doc);

    std::string imp_path = sf.importance;
    if (imp_path.empty()) {
        fs::path p(sf.out);
        imp_path = (p.parent_path() / (p.stem().string() + "_importance.csv")).string();
    }
    std::ofstream imp(imp_path, std::ios::binary | std::ios::trunc);
    if (!imp)
        throw std::runtime_error("cannot write " + imp_path);
    write_importance_csv(imp, doc);

    std::cout << to_string(config.method) << ": selected " << doc.selected.size() << " of " << data.p();
    if (doc.no_selection)
        std::cout << " (no selection)";
    std::cout << '\n';
    for (std::size_t i = 0; i < doc.selected.size(); ++i)
        std::cout << "  " << doc.selected[i] + 1 << ' ' << doc.selected_names[i] << '\n';
    if (doc.metrics)
        std::cout << "tpr=" << doc.metrics->tpr << " fpr=" << doc.metrics->fpr << " f1=" << doc.metrics->f1 << '\n';
    return 0;
}

int cmd_benchmark(const std::string& grid_path, const std::string& out_dir, int jobs, bool resume)
{
    const auto grid = load_grid(grid_path);
    fs::create_directories(out_dir);
    const fs::path metrics_path = fs::path(out_dir) / "metrics.csv";
    const fs::path timings_path = fs::path(out_dir) / "timings.csv";

    std::vector<GridRow> previous;
    if (resume && fs::exists(metrics_path))
        previous = read_metrics_csv(metrics_path.string());

    GridOptions options;
    options.jobs = jobs;
    for (const auto& r : previous)
        options.completed.insert({r.point, r.replicate, r.lrep});

    // Rewrite what survived (dropping any torn trailing line), then append
    // rows as they are emitted so an interrupted run can resume.
    std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
    if (!metrics)
        throw std::runtime_error("cannot write " + metrics_path.string());
    write_csv_row(metrics, metrics_csv_header());
    for (const auto& r : previous)
        write_csv_row(metrics, metrics_csv_fields(r));
    metrics.flush();

    const bool keep_timings = resume && fs::exists(timings_path);
    std::ofstream timings(timings_path, std::ios::binary | (keep_timings ? std::ios::app : std::ios::trunc));
    if (!keep_timings)
        write_csv_row(timings, {"point", "replicate", "lrep", "seconds"});

    options.on_row = [&](const GridRow& r) {
        write_csv_row(metrics, metrics_csv_fields(r));
        metrics.flush();
        write_csv_row(timings, {std::to_string(r.point), std::to_string(r.replicate), std::to_string(r.lrep),
                                format_double(r.metrics.runtime)});
        timings.flush();
        std::cerr << "point " << r.point << " rep " << r.replicate << " lrep " << r.lrep << ' ' << r.method;
        if (r.error.empty())
            std::cerr << " f1=" << r.metrics.f1 << '\n';
        else
            std::cerr << " error: " << r.error << '\n';
    };
    const auto fresh = run_grid(grid, options);
    metrics.close();

    // Final file in grid order, independent of how many resumes it took.
    std::map<RowKey, GridRow> merged;
    for (const auto& r : previous)
        merged[{r.point, r.replicate, r.lrep}] = r;
    for (const auto& r : fresh)
        merged[{r.point, r.replicate, r.lrep}] = r;
    std::vector<GridRow> rows;
    for (auto& [key, r] : merged)
        rows.push_back(r);
    {
        std::ofstream final_out(metrics_path, std::ios::binary | std::ios::trunc);
        write_csv_row(final_out, metrics_csv_header());
        for (const auto& r : rows)
            write_csv_row(final_out, metrics_csv_fields(r));
    }

    std::vector<GridRow> ok;
    int failed = 0;
    for (const auto& r : rows) {
        if (r.error.empty())
            ok.push_back(r);
        else
            ++failed;
    }
    std::ofstream agg(fs::path(out_dir) / "aggregate.csv", std::ios::binary | std::ios::trunc);
    write_aggregate_csv(agg, aggregate(ok));
    std::cout << rows.size() << " rows (" << failed << " failed) -> " << out_dir << '\n';
    return 0;
}

void report_results(const ResultsDocument& d)
{
    std::cout << "method   " << to_string(d.config.method) << '\n'
              << "lrep     " << d.config.lrep << '\n';
    if (is_permutation_method(d.config.method))
        std::cout << "lperm    " << d.config.lperm << "  alpha " << d.config.alpha << '\n';
    std::cout << "seconds  " << d.seconds << '\n'
              << "selected " << d.selected.size() << " of " << d.feature_names.size() << '\n';
    for (std::size_t i = 0; i < d.selected.size(); ++i)
        std::cout << "  " << d.selected[i] + 1 << ' ' << d.selected_names[i] << '\n';
    if (d.c_star)
        std::cout << "C*       " << *d.c_star << '\n';
    if (d.global_threshold)
        std::cout << "global   " << *d.global_threshold << '\n';
    if (d.cluster_means)
        std::cout << "clusters " << (*d.cluster_means)[0] << ' ' << (*d.cluster_means)[1] << '\n';
    if (d.metrics)
        std::cout << "tpr " << d.metrics->tpr << "  fpr " << d.metrics->fpr << "  f1 " << d.metrics->f1 << '\n';

    std::vector<int> order(d.feature_names.size());
    for (std::size_t j = 0; j < order.size(); ++j)
        order[j] = static_cast<int>(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const bool ascending = d.importance_kind == "mean VIP rank";
        return ascending ? d.importance[a] < d.importance[b] : d.importance[a] > d.importance[b];
    });
    std::cout << "top features by " << d.importance_kind << ":\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, order.size()); ++i)
        std::cout << "  " << std::setw(4) << order[i] + 1 << ' ' << std::left << std::setw(16)
                  << d.feature_names[order[i]] << std::right << d.importance[order[i]] << '\n';
}

void report_trace(const PosteriorTrace& t)
{
    const auto& m = t.moves;
    std::cout << "prior    " << to_string(t.config.prior) << '\n'
              << "draws    " << t.draws() << "  trees " << t.tree_leaves.cols() << "  features " << t.features()
              << '\n'
              << "sigma2   mean " << t.sigma2_path.mean() << '\n'
              << "leaves   mean " << t.tree_leaves.cast<double>().mean() << " per tree\n"
              << "accept   birth " << m.birth_accepted << '/' << m.birth_proposed << "  death " << m.death_accepted
              << '/' << m.death_proposed << "  change " << m.change_accepted << '/' << m.change_proposed << '\n';
    const Eigen::VectorXd q = vip(t).values;
    std::vector<int> order(q.size());
    for (std::size_t j = 0; j < order.size(); ++j)
        order[j] = static_cast<int>(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a] > q[b]; });
    std::cout << "top features by VIP:\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, order.size()); ++i)
        std::cout << "  " << std::setw(4) << order[i] + 1 << ' ' << std::left << std::setw(16)
                  << t.feature_names[order[i]] << std::right << q[order[i]] << '\n';
}

int cmd_report(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    in.close();
    if (std::equal(magic, magic + 4, kTraceMagic)) {
        report_trace(load_trace(path));
        return 0;
    }
    if (fs::path(path).extension() == ".csv") {
        std::vector<GridRow> ok;
        for (auto& r : read_metrics_csv(path))
            if (r.error.empty())
                ok.push_back(std::move(r));
        write_aggregate_csv(std::cout, aggregate(ok));
        return 0;
    }
    report_results(load_results(path));
    return 0;
}

int cmd_generate(const std::string& equation, const std::string& expression, int n, const std::string& snr, int S,
                 std::uint64_t seed, const std::string& out)
{
    EquationSpec spec;
    if (!expression.empty()) {
        spec.id = "custom";
        spec.expression = expression;
        const int k = Expression::parse(expression).arity();
        spec.ranges.assign(k, {1.0, 3.0});
    } else {
        spec = find_equation(equation);
    }
    const auto gen = generate_dataset(spec, n, parse_snr(snr), S, seed);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot write " + out);
    write_dataset_csv(f, gen.data);
    std::cout << "n=" << gen.data.n() << " p=" << gen.data.p() << " truth=1.." << spec.p0()
              << " noise_variance=" << gen.noise_variance << " -> " << out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Variable selection with BART and DART tree ensembles"};
    app.require_subcommand(1);

    FitFlags fit_flags;
    std::string fit_csv, fit_out, fit_prior = "bart";
    bool fit_mi = false;
    auto* fit_cmd = app.add_subcommand("fit", "Fit one ensemble and write its posterior trace");
    fit_cmd->add_option("csv", fit_csv, "Input CSV with a header row")->required()->check(CLI::ExistingFile);
    fit_flags.add(fit_cmd);
    fit_cmd->add_option("--prior", fit_prior, "bart or dart")->check(CLI::IsMember({"bart", "dart"}));
    fit_cmd->add_flag("--mi", fit_mi, "Record per-node acceptance probabilities");
    fit_cmd->add_option("--out", fit_out, "Trace file to write")->required();

    FitFlags sel_flags;
    SelectFlags sf;
    std::string sel_csv;
    auto* sel_cmd = app.add_subcommand("select", "Run a selection method end to end");
    sel_cmd->add_option("csv", sel_csv, "Input CSV with a header row")->required()->check(CLI::ExistingFile);
    sel_flags.add(sel_cmd);
    sel_cmd->add_option("--method", sf.method, "Selection method")->capture_default_str();
    sf.lrep_opt = sel_cmd->add_option("--lrep", sf.lrep, "Replicate fits on the original data");
    sf.lperm_opt = sel_cmd->add_option("--lperm", sf.lperm, "Permutation fits (permutation methods)");
    sf.alpha_opt = sel_cmd->add_option("--alpha", sf.alpha, "Permutation threshold level");
    sf.jobs_opt = sel_cmd->add_option("--jobs", sf.jobs, "Concurrent fits (default BARTVS_JOBS or all cores)");
    sel_cmd->add_option("--truth", sf.truth, "Comma-separated 1-based indices of the relevant columns");
    sel_cmd->add_option("--out", sf.out, "Results JSON")->capture_default_str();
    sel_cmd->add_option("--importance", sf.importance, "Per-feature CSV (default <out>_importance.csv)");

    std::string grid_path, bench_out;
    int bench_jobs = 0;
    bool resume = false;
    auto* bench_cmd = app.add_subcommand("benchmark", "Run a benchmark grid");
    bench_cmd->add_option("grid", grid_path, "Grid JSON file")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--out", bench_out, "Output directory")->required();
    auto* bench_jobs_opt = bench_cmd->add_option("--jobs", bench_jobs, "Concurrent grid points");
    bench_cmd->add_flag("--resume", resume, "Skip rows already present in <out>/metrics.csv");

    std::string report_path;
    auto* report_cmd = app.add_subcommand("report", "Summarize a results JSON, trace file or metrics CSV");
    report_cmd->add_option("file", report_path, "File to summarize")->required()->check(CLI::ExistingFile);

    std::string gen_eq = "product", gen_expr, gen_snr = "noiseless", gen_out;
    int gen_n = 500, gen_S = 50;
    std::uint64_t gen_seed = 0;
    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    gen_cmd->add_option("--equation", gen_eq, "Built-in equation id")->capture_default_str();
    gen_cmd->add_option("--expression", gen_expr, "Custom expression over x1..xk, inputs drawn from (1, 3)");
    gen_cmd->add_option("--n", gen_n, "Rows")->capture_default_str()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--snr", gen_snr, "Signal-to-noise ratio or 'noiseless'")->capture_default_str();
    gen_cmd->add_option("--S", gen_S, "Irrelevant copies per relevant feature")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen_cmd->add_option("--out", gen_out, "CSV to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*fit_cmd)
            return cmd_fit(fit_csv, fit_flags, fit_prior, fit_mi, fit_out);
        if (*sel_cmd)
            return cmd_select(sel_csv, sel_flags, sf);
        if (*bench_cmd) {
            const int jobs = bench_jobs_opt->count() ? bench_jobs : default_jobs();
            if (jobs < 1)
                throw UsageError("--jobs must be >= 1");
            return cmd_benchmark(grid_path, bench_out, jobs, resume);
        }
        if (*report_cmd)
            return cmd_report(report_path);
        if (*gen_cmd)
            return cmd_generate(gen_eq, gen_expr, gen_n, gen_snr, gen_S, gen_seed, gen_out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
