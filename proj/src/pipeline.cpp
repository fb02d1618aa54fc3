#include "bartvs/pipeline.hpp"

#include "bartvs/parallel.hpp"
#include "bartvs/sampler.hpp"

#include <chrono>

namespace bartvs {

namespace {

struct MethodInfo {
    Method method;
    const char* name;
};

constexpr MethodInfo kMethods[] = {
    {Method::bart_vip_local, "bart-vip-local"},
    {Method::bart_vip_gse, "bart-vip-gse"},
    {Method::bart_vip_gmax, "bart-vip-gmax"},
    {Method::bart_mi_local, "bart-mi-local"},
    {Method::bart_vip_rank, "bart-vip-rank"},
    {Method::dart_mpm, "dart-mpm"},
    {Method::bart_vc_measure, "bart-vc-measure"},
    {Method::dart_vc_measure, "dart-vc-measure"},
    {Method::bart_vip_measure, "bart-vip-measure"},
    {Method::dart_vip_measure, "dart-vip-measure"},
};

} // namespace

std::string to_string(Method m)
{
    for (const auto& info : kMethods)
        if (info.method == m)
            return info.name;
    return "?";
}

Method method_from_string(const std::string& s)
{
    for (const auto& info : kMethods)
        if (s == info.name)
            return info.method;
    throw ValidationError("unknown method: " + s);
}

const std::vector<Method>& all_methods()
{
    static const std::vector<Method> methods = [] {
        std::vector<Method> out;
        for (const auto& info : kMethods)
            out.push_back(info.method);
        return out;
    }();
    return methods;
}

bool is_permutation_method(Method m)
{
    return m == Method::bart_vip_local || m == Method::bart_vip_gse || m == Method::bart_vip_gmax ||
           m == Method::bart_mi_local;
}

bool is_clustering_method(Method m)
{
    return m == Method::bart_vip_rank || m == Method::bart_vc_measure || m == Method::dart_vc_measure ||
           m == Method::bart_vip_measure || m == Method::dart_vip_measure;
}

PriorKind prior_of(Method m)
{
    return m == Method::dart_mpm || m == Method::dart_vc_measure || m == Method::dart_vip_measure
               ? PriorKind::dart
               : PriorKind::bart;
}

RunConfig RunConfig::defaults(Method m)
{
    RunConfig c;
    c.method = m;
    if (m == Method::dart_mpm)
        c.lrep = 1;
    else if (m == Method::bart_vip_rank)
        c.lrep = 20;
    c.close();
    return c;
}

void RunConfig::close()
{
    fit.prior = prior_of(method);
    fit.record_mi = method == Method::bart_mi_local;
}

void RunConfig::validate() const
{
    fit.validate();
    if (lrep < 1)
        throw ValidationError(to_string(method) + " requires L_rep >= 1");
    if (is_permutation_method(method)) {
        if (lperm < 1)
            throw ValidationError(to_string(method) + " requires L_perm >= 1");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw ValidationError("alpha must lie in (0, 1)");
    }
    if (fit.prior != prior_of(method))
        throw ValidationError(to_string(method) + " requires the " + to_string(prior_of(method)) + " prior");
    if (method == Method::bart_mi_local && !fit.record_mi)
        throw ValidationError("bart-mi-local requires MI logging");
    if (jobs < 1)
        throw ValidationError("jobs must be >= 1");
}

std::vector<PosteriorTrace> fit_replicates(const Dataset& data, const RunConfig& config, int count)
{
    std::vector<PosteriorTrace> fits(count);
    parallel_for(count, config.jobs, [&](int l) {
        FitConfig c = config.fit;
        c.seed = config.seed + static_cast<std::uint64_t>(l);
        fits[l] = fit(data, c);
    });
    return fits;
}

std::optional<Eigen::MatrixXd> method_null(const Dataset& data, const RunConfig& config)
{
    if (!is_permutation_method(config.method))
        return std::nullopt;
    const auto kind = config.method == Method::bart_mi_local ? ImportanceKind::mi : ImportanceKind::vip;
    return permutation_null(data, kind, config.lperm, config.fit, config.seed, config.jobs);
}

MethodRun select_from_fits(const RunConfig& config, std::span<const PosteriorTrace> fits,
                           const std::optional<Eigen::MatrixXd>& null)
{
    if (fits.empty())
        throw ValidationError("selection needs at least one fit");
    MethodRun run;
    for (std::size_t l = 0; l < fits.size(); ++l)
        run.fit_seeds.push_back(config.seed + l);

    const Method m = config.method;
    if (is_permutation_method(m)) {
        if (!null)
            throw ValidationError(to_string(m) + " needs a permutation null");
        const auto kind = m == Method::bart_mi_local ? ImportanceKind::mi : ImportanceKind::vip;
        Eigen::VectorXd observed = Eigen::VectorXd::Zero(fits.front().features());
        for (const auto& tr : fits)
            observed += importance(tr, kind).values;
        observed /= static_cast<double>(fits.size());

        if (m == Method::bart_vip_gse)
            run.selection = threshold_gse(observed, *null, config.alpha);
        else if (m == Method::bart_vip_gmax)
            run.selection = threshold_gmax(observed, *null, config.alpha);
        else
            run.selection = threshold_local(observed, *null, config.alpha);
        run.null = null;
        for (int l = 0; l < null->rows(); ++l)
            run.permutation_seeds.push_back(permutation_seed(config.seed, l));
    } else if (m == Method::dart_mpm) {
        ImportanceVector pi{ImportanceKind::mpvip, Eigen::VectorXd::Zero(fits.front().features())};
        for (const auto& tr : fits)
            pi.values += mpvip(tr).values;
        pi.values /= static_cast<double>(fits.size());
        run.selection = mpm_select(pi);
    } else {
        SummarySource source = SummarySource::vc_measure;
        if (m == Method::bart_vip_rank)
            source = SummarySource::vip_rank;
        else if (m == Method::bart_vip_measure || m == Method::dart_vip_measure)
            source = SummarySource::vip_measure;
        run.summary = build_summary_matrix(fits, source);
        run.selection = cluster_select(*run.summary);
    }
    run.selection.method = to_string(m);
    return run;
}

MethodRun run_method(const Dataset& data, RunConfig config)
{
    config.close();
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto fits = fit_replicates(data, config, config.lrep);
    const auto null = method_null(data, config);
    MethodRun run = select_from_fits(config, fits, null);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

} // namespace bartvs
