#include "bartvs/results_io.hpp"

#include "bartvs/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace bartvs {

using ojson = nlohmann::ordered_json;

namespace {

ojson vector_json(const Eigen::VectorXd& v)
{
    ojson a = ojson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vector_from(const ojson& a)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

std::vector<int> one_based(const std::vector<int>& idx)
{
    std::vector<int> out;
    for (int i : idx)
        out.push_back(i + 1);
    return out;
}

std::vector<int> zero_based(const ojson& a)
{
    std::vector<int> out;
    for (const auto& v : a)
        out.push_back(v.get<int>() - 1);
    return out;
}

void reject_unknown(const ojson& j, std::initializer_list<const char*> keys, const std::string& where)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            known = known || it.key() == k;
        if (!known)
            throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void read_if(const ojson& j, const char* key, T& dst)
{
    if (j.contains(key))
        dst = j.at(key).get<T>();
}

ojson metrics_json(const MetricsRecord& m)
{
    return ojson{{"tpr", m.tpr}, {"fpr", m.fpr}, {"f1", m.f1},     {"tp", m.tp},
                 {"fp", m.fp},   {"fn", m.fn},   {"tn", m.tn},     {"runtime", m.runtime},
                 {"no_selection", m.no_selection}};
}

MetricsRecord metrics_from(const ojson& j)
{
    MetricsRecord m;
    m.tpr = j.at("tpr").get<double>();
    m.fpr = j.at("fpr").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.tp = j.at("tp").get<int>();
    m.fp = j.at("fp").get<int>();
    m.fn = j.at("fn").get<int>();
    m.tn = j.at("tn").get<int>();
    m.runtime = j.at("runtime").get<double>();
    m.no_selection = j.at("no_selection").get<bool>();
    return m;
}

bool same(const std::optional<Eigen::VectorXd>& a, const std::optional<Eigen::VectorXd>& b)
{
    if (a.has_value() != b.has_value())
        return false;
    return !a || (a->size() == b->size() && *a == *b);
}

bool same(const std::optional<Eigen::MatrixXd>& a, const std::optional<Eigen::MatrixXd>& b)
{
    if (a.has_value() != b.has_value())
        return false;
    return !a || (a->rows() == b->rows() && a->cols() == b->cols() && *a == *b);
}

const char* summary_column_names(const std::string& source, int col)
{
    static const char* vc[] = {"mean_vc", "q25_vc", "mean_vc_rank", "q75_vc_rank"};
    static const char* vip[] = {"mean_vip", "q25_vip", "mean_vip_rank", "q75_vip_rank"};
    if (source == to_string(SummarySource::vip_rank))
        return "mean_vip_rank";
    return source == to_string(SummarySource::vc_measure) ? vc[col] : vip[col];
}

} // namespace

ojson to_json(const FitConfig& c)
{
    ojson j{{"trees", c.trees},
            {"burn_in", c.burn_in},
            {"draws", c.draws},
            {"gamma", c.gamma},
            {"beta", c.beta},
            {"k_leaf", c.k_leaf},
            {"nu", c.nu},
            {"q", c.q},
            {"prior", to_string(c.prior)},
            {"dart_a", c.dart_a},
            {"dart_b", c.dart_b},
            {"dart_rho", c.dart_rho},
            {"alpha_grid", c.alpha_grid},
            {"dart_start", c.dart_start},
            {"record_mi", c.record_mi},
            {"seed", c.seed}};
    if (c.fixed_split_probs)
        j["fixed_split_probs"] = vector_json(*c.fixed_split_probs);
    return j;
}

FitConfig fit_config_from_json(const ojson& j, FitConfig c)
{
    if (!j.is_object())
        throw ValidationError("fit config must be a JSON object");
    reject_unknown(j,
                   {"trees", "burn_in", "draws", "gamma", "beta", "k_leaf", "nu", "q", "prior", "dart_a", "dart_b",
                    "dart_rho", "alpha_grid", "dart_start", "record_mi", "seed", "fixed_split_probs"},
                   "fit config");
    read_if(j, "trees", c.trees);
    read_if(j, "burn_in", c.burn_in);
    read_if(j, "draws", c.draws);
    read_if(j, "gamma", c.gamma);
    read_if(j, "beta", c.beta);
    read_if(j, "k_leaf", c.k_leaf);
    read_if(j, "nu", c.nu);
    read_if(j, "q", c.q);
    if (j.contains("prior"))
        c.prior = prior_kind_from_string(j.at("prior").get<std::string>());
    read_if(j, "dart_a", c.dart_a);
    read_if(j, "dart_b", c.dart_b);
    read_if(j, "dart_rho", c.dart_rho);
    read_if(j, "alpha_grid", c.alpha_grid);
    read_if(j, "dart_start", c.dart_start);
    read_if(j, "record_mi", c.record_mi);
    read_if(j, "seed", c.seed);
    if (j.contains("fixed_split_probs"))
        c.fixed_split_probs = vector_from(j.at("fixed_split_probs"));
    return c;
}

ojson to_json(const RunConfig& c)
{
    return ojson{{"method", to_string(c.method)}, {"lrep", c.lrep}, {"lperm", c.lperm}, {"alpha", c.alpha},
                 {"seed", c.seed},                {"jobs", c.jobs}, {"fit", to_json(c.fit)}};
}

RunConfig run_config_from_json(const ojson& j)
{
    RunConfig c;
    c.method = method_from_string(j.at("method").get<std::string>());
    c.lrep = j.at("lrep").get<int>();
    c.lperm = j.at("lperm").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.jobs = j.at("jobs").get<int>();
    c.fit = fit_config_from_json(j.at("fit"));
    return c;
}

bool ResultsDocument::operator==(const ResultsDocument& o) const
{
    return config.method == o.config.method && config.fit == o.config.fit && config.lrep == o.config.lrep &&
           config.lperm == o.config.lperm && config.alpha == o.config.alpha && config.seed == o.config.seed &&
           config.jobs == o.config.jobs && feature_names == o.feature_names &&
           importance_kind == o.importance_kind && importance.size() == o.importance.size() &&
           importance == o.importance && same(thresholds, o.thresholds) && summary_source == o.summary_source &&
           same(summary, o.summary) && selected == o.selected && selected_names == o.selected_names &&
           no_selection == o.no_selection && c_star == o.c_star && global_threshold == o.global_threshold &&
           cluster_means == o.cluster_means && cluster_sizes == o.cluster_sizes &&
           equal_cluster_means == o.equal_cluster_means && truth == o.truth && metrics == o.metrics &&
           seconds == o.seconds && fit_seeds == o.fit_seeds && permutation_seeds == o.permutation_seeds;
}

ResultsDocument make_results_document(const Dataset& data, const RunConfig& config, const MethodRun& run)
{
    ResultsDocument d;
    d.config = config;
    d.feature_names = data.feature_names;
    const Method m = config.method;
    if (m == Method::bart_mi_local)
        d.importance_kind = "MI";
    else if (is_permutation_method(m))
        d.importance_kind = "VIP";
    else if (m == Method::dart_mpm)
        d.importance_kind = "MPVIP";
    else if (m == Method::bart_vip_rank)
        d.importance_kind = "mean VIP rank";
    else if (m == Method::bart_vc_measure || m == Method::dart_vc_measure)
        d.importance_kind = "mean VC";
    else
        d.importance_kind = "mean VIP";
    const auto& sel = run.selection;
    d.importance = sel.importance;
    d.thresholds = sel.thresholds;
    if (run.summary) {
        d.summary_source = to_string(run.summary->source);
        d.summary = run.summary->Z;
    }
    d.selected = sel.selected;
    for (int j : sel.selected)
        d.selected_names.push_back(data.feature_names[j]);
    d.no_selection = sel.selected.empty();
    d.c_star = sel.diagnostics.c_star;
    d.global_threshold = sel.diagnostics.global_threshold;
    d.cluster_means = sel.diagnostics.cluster_means;
    d.cluster_sizes = sel.diagnostics.cluster_sizes;
    d.equal_cluster_means = sel.diagnostics.equal_cluster_means;
    d.truth = data.truth;
    if (data.truth) {
        d.metrics = compute_metrics(sel.selected, *data.truth, static_cast<int>(data.p()));
        d.metrics->runtime = run.seconds;
    }
    d.seconds = run.seconds;
    d.fit_seeds = run.fit_seeds;
    d.permutation_seeds = run.permutation_seeds;
    return d;
}

ojson to_json(const ResultsDocument& d)
{
    ojson j;
    j["config"] = to_json(d.config);
    j["features"] = d.feature_names;
    ojson imp{{"kind", d.importance_kind}, {"values", vector_json(d.importance)}};
    if (d.thresholds)
        imp["thresholds"] = vector_json(*d.thresholds);
    j["importance"] = imp;
    if (d.summary) {
        ojson cols = ojson::array();
        for (Eigen::Index c = 0; c < d.summary->cols(); ++c)
            cols.push_back(summary_column_names(d.summary_source.value_or(""), static_cast<int>(c)));
        ojson rows = ojson::array();
        for (Eigen::Index r = 0; r < d.summary->rows(); ++r)
            rows.push_back(vector_json(d.summary->row(r).transpose()));
        j["summary"] = ojson{{"source", d.summary_source.value_or("")}, {"columns", cols}, {"Z", rows}};
    }
    j["selection"] = ojson{
        {"indices", one_based(d.selected)}, {"names", d.selected_names}, {"no_selection", d.no_selection}};
    ojson diag = ojson::object();
    if (d.c_star)
        diag["c_star"] = *d.c_star;
    if (d.global_threshold)
        diag["global_threshold"] = *d.global_threshold;
    if (d.cluster_means)
        diag["cluster_means"] = *d.cluster_means;
    if (d.cluster_sizes)
        diag["cluster_sizes"] = *d.cluster_sizes;
    diag["equal_cluster_means"] = d.equal_cluster_means;
    j["diagnostics"] = diag;
    if (d.truth)
        j["truth"] = one_based(*d.truth);
    if (d.metrics)
        j["metrics"] = metrics_json(*d.metrics);
    j["seconds"] = d.seconds;
    j["fit_seeds"] = d.fit_seeds;
    j["permutation_seeds"] = d.permutation_seeds;
    return j;
}

ResultsDocument results_from_json(const ojson& j)
{
    ResultsDocument d;
    d.config = run_config_from_json(j.at("config"));
    d.feature_names = j.at("features").get<std::vector<std::string>>();
    const auto& imp = j.at("importance");
    d.importance_kind = imp.at("kind").get<std::string>();
    d.importance = vector_from(imp.at("values"));
    if (imp.contains("thresholds"))
        d.thresholds = vector_from(imp.at("thresholds"));
    if (j.contains("summary")) {
        const auto& s = j.at("summary");
        d.summary_source = s.at("source").get<std::string>();
        const auto& rows = s.at("Z");
        const auto cols = static_cast<Eigen::Index>(s.at("columns").size());
        Eigen::MatrixXd Z(static_cast<Eigen::Index>(rows.size()), cols);
        for (std::size_t r = 0; r < rows.size(); ++r)
            Z.row(static_cast<Eigen::Index>(r)) = vector_from(rows[r]).transpose();
        d.summary = std::move(Z);
    }
    const auto& sel = j.at("selection");
    d.selected = zero_based(sel.at("indices"));
    d.selected_names = sel.at("names").get<std::vector<std::string>>();
    d.no_selection = sel.at("no_selection").get<bool>();
    const auto& diag = j.at("diagnostics");
    if (diag.contains("c_star"))
        d.c_star = diag.at("c_star").get<double>();
    if (diag.contains("global_threshold"))
        d.global_threshold = diag.at("global_threshold").get<double>();
    if (diag.contains("cluster_means"))
        d.cluster_means = diag.at("cluster_means").get<std::array<double, 2>>();
    if (diag.contains("cluster_sizes"))
        d.cluster_sizes = diag.at("cluster_sizes").get<std::array<int, 2>>();
    d.equal_cluster_means = diag.at("equal_cluster_means").get<bool>();
    if (j.contains("truth"))
        d.truth = zero_based(j.at("truth"));
    if (j.contains("metrics"))
        d.metrics = metrics_from(j.at("metrics"));
    d.seconds = j.at("seconds").get<double>();
    d.fit_seeds = j.at("fit_seeds").get<std::vector<std::uint64_t>>();
    d.permutation_seeds = j.at("permutation_seeds").get<std::vector<std::uint64_t>>();
    if (d.selected.size() != d.selected_names.size())
        throw ValidationError("results document: selected indices and names differ in length");
    return d;
}

void save_results(const std::string& path, const ResultsDocument& doc)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << to_json(doc).dump(2) << '\n';
}

ResultsDocument load_results(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    try {
        return results_from_json(ojson::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_importance_csv(std::ostream& out, const ResultsDocument& doc)
{
    std::vector<std::string> header{"index", "feature", "importance", "threshold", "selected"};
    if (doc.summary)
        for (Eigen::Index c = 0; c < doc.summary->cols(); ++c)
            header.push_back(summary_column_names(doc.summary_source.value_or(""), static_cast<int>(c)));
    write_csv_row(out, header);

    std::vector<bool> chosen(doc.feature_names.size(), false);
    for (int j : doc.selected)
        chosen[j] = true;
    for (std::size_t j = 0; j < doc.feature_names.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        std::vector<std::string> row{std::to_string(j + 1), doc.feature_names[j], format_double(doc.importance[jj]),
                                     doc.thresholds ? format_double((*doc.thresholds)[jj]) : "",
                                     chosen[j] ? "1" : "0"};
        if (doc.summary)
            for (Eigen::Index c = 0; c < doc.summary->cols(); ++c)
                row.push_back(format_double((*doc.summary)(jj, c)));
        write_csv_row(out, row);
    }
}

std::vector<GridPoint> parse_grid(const std::string& text)
{
    ojson root;
    try {
        root = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("grid file: ") + e.what());
    }
    if (!root.is_object() || !root.contains("points") || !root.at("points").is_array())
        throw ValidationError("grid file: expected an object with a 'points' array");
    reject_unknown(root, {"fit", "points"}, "grid file");
    const FitConfig base = root.contains("fit") ? fit_config_from_json(root.at("fit")) : FitConfig{};

    std::vector<GridPoint> grid;
    const auto& points = root.at("points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string where = "grid file: points[" + std::to_string(i) + "]";
        try {
            const auto& pj = points[i];
            reject_unknown(pj,
                           {"equation", "n", "snr", "S", "method", "lrep", "lrep_prefixes", "lperm", "alpha",
                            "replicates", "seed", "fit"},
                           where);
            GridPoint pt;
            const auto& eq = pj.at("equation");
            if (eq.is_string()) {
                pt.equation = find_equation(eq.get<std::string>());
            } else {
                pt.equation.id = eq.at("id").get<std::string>();
                pt.equation.expression = eq.at("expression").get<std::string>();
                for (const auto& r : eq.at("ranges"))
                    pt.equation.ranges.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
            }
            read_if(pj, "n", pt.n);
            if (pj.contains("snr")) {
                const auto& s = pj.at("snr");
                if (s.is_string()) {
                    if (s.get<std::string>() != "noiseless")
                        throw ValidationError(where + ": snr must be a number or \"noiseless\"");
                    pt.snr.reset();
                } else {
                    pt.snr = s.get<double>();
                }
            }
            read_if(pj, "S", pt.S);
            if (pj.contains("method"))
                pt.method = method_from_string(pj.at("method").get<std::string>());
            RunConfig defaults = RunConfig::defaults(pt.method);
            pt.lrep = defaults.lrep;
            read_if(pj, "lrep", pt.lrep);
            read_if(pj, "lrep_prefixes", pt.lrep_prefixes);
            read_if(pj, "lperm", pt.lperm);
            read_if(pj, "alpha", pt.alpha);
            pt.fit = pj.contains("fit") ? fit_config_from_json(pj.at("fit"), base) : base;
            std::uint64_t seed = 0;
            read_if(pj, "seed", seed);
            int replicates = 1;
            read_if(pj, "replicates", replicates);
            if (replicates < 1)
                throw ValidationError(where + ": replicates must be >= 1");
            for (int r = 0; r < replicates; ++r) {
                pt.replicate = r;
                pt.seed = seed + 1000000u * static_cast<std::uint64_t>(r);
                grid.push_back(pt);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            throw ValidationError(msg.rfind("grid file", 0) == 0 ? msg : where + ": " + msg);
        }
    }
    if (grid.empty())
        throw ValidationError("grid file: no points");
    return grid;
}

std::vector<GridPoint> load_grid(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_grid(ss.str());
}

std::vector<std::string> metrics_csv_header()
{
    return {"point", "replicate", "method", "equation", "n", "snr", "S",  "p",  "lrep",         "seed",
            "tpr",   "fpr",       "f1",     "tp",       "fp", "fn",  "tn", "no_selection", "selected", "error"};
}

std::vector<std::string> metrics_csv_fields(const GridRow& r)
{
    std::string sel;
    for (int j : r.selected)
        sel += (sel.empty() ? "" : " ") + std::to_string(j + 1);
    const auto& m = r.metrics;
    return {std::to_string(r.point),
            std::to_string(r.replicate),
            r.method,
            r.equation,
            std::to_string(r.n),
            r.snr ? format_double(*r.snr) : "noiseless",
            std::to_string(r.S),
            std::to_string(r.p),
            std::to_string(r.lrep),
            std::to_string(r.seed),
            format_double(m.tpr),
            format_double(m.fpr),
            format_double(m.f1),
            std::to_string(m.tp),
            std::to_string(m.fp),
            std::to_string(m.fn),
            std::to_string(m.tn),
            m.no_selection ? "1" : "0",
            sel,
            r.error};
}

std::vector<GridRow> read_metrics_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    const auto last_nl = text.find_last_of('\n');
    text.resize(last_nl == std::string::npos ? 0 : last_nl + 1);
    if (text.empty())
        return {};
    std::istringstream body(text);
    const CsvTable table = read_csv(body);
    if (table.header != metrics_csv_header())
        throw ValidationError(path + ": not a metrics file (unexpected header)");

    std::vector<GridRow> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        try {
            GridRow r;
            r.point = std::stoi(f[0]);
            r.replicate = std::stoi(f[1]);
            r.method = f[2];
            r.equation = f[3];
            r.n = std::stoi(f[4]);
            if (f[5] != "noiseless")
                r.snr = std::stod(f[5]);
            r.S = std::stoi(f[6]);
            r.p = std::stoi(f[7]);
            r.lrep = std::stoi(f[8]);
            r.seed = std::stoull(f[9]);
            r.metrics.tpr = std::stod(f[10]);
            r.metrics.fpr = std::stod(f[11]);
            r.metrics.f1 = std::stod(f[12]);
            r.metrics.tp = std::stoi(f[13]);
            r.metrics.fp = std::stoi(f[14]);
            r.metrics.fn = std::stoi(f[15]);
            r.metrics.tn = std::stoi(f[16]);
            r.metrics.no_selection = f[17] == "1";
            std::istringstream sel(f[18]);
            for (int j; sel >> j;)
                r.selected.push_back(j - 1);
            r.error = f[19];
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw ValidationError(path + ": line " + std::to_string(table.line[i]) + ": malformed metrics row");
        }
    }
    return rows;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows)
{
    write_csv_row(out, {"method", "n", "snr", "lrep", "rows", "mean_tpr", "mean_fpr", "mean_f1"});
    for (const auto& a : rows)
        write_csv_row(out, {a.method, std::to_string(a.n), a.snr ? format_double(*a.snr) : "noiseless",
                            std::to_string(a.lrep), std::to_string(a.rows), format_double(a.tpr),
                            format_double(a.fpr), format_double(a.f1)});
}

} // namespace bartvs
