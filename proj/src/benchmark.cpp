#include "bartvs/benchmark.hpp"

#include "bartvs/parallel.hpp"
#include "bartvs/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

namespace bartvs {

void EquationSpec::validate() const
{
    if (ranges.empty())
        throw ValidationError("equation " + id + " has no relevant inputs (p0 = 0)");
    for (const auto& [a, b] : ranges)
        if (!(a < b))
            throw ValidationError("equation " + id + " has an empty range");
    const auto f = Expression::parse(expression);
    if (f.arity() > p0())
        throw ValidationError("equation " + id + " references x" + std::to_string(f.arity()) +
                              " but declares " + std::to_string(p0()) + " ranges");
}

const std::vector<EquationSpec>& equation_registry()
{
    // Ranges follow the usual Feynman-benchmark sampling boxes.
    static const std::vector<EquationSpec> registry = {
        {"II-11-17", "x1*(1 + x5*x6*cos(x4)/(x2*x3))",
         {{1, 3}, {1, 3}, {1, 3}, {1, 3}, {1, 3}, {1, 3}}},
        {"product", "x1*x2", {{1, 3}, {1, 3}}},
        {"additive", "x1 + 2*x2 + 3*x3", {{1, 5}, {1, 5}, {1, 5}}},
        {"trig", "x1*sin(x2) + x3", {{1, 5}, {1, 5}, {1, 5}}},
        {"ratio", "x1*x2/(x3*x4)", {{1, 5}, {1, 5}, {1, 5}, {1, 5}}},
    };
    return registry;
}

const EquationSpec& find_equation(const std::string& id)
{
    for (const auto& e : equation_registry())
        if (e.id == id)
            return e;
    throw ValidationError("unknown equation: " + id);
}

GeneratedData generate_dataset(const EquationSpec& spec, int n, std::optional<double> snr, int S,
                               std::uint64_t seed)
{
    spec.validate();
    if (n < 1)
        throw ValidationError("n must be >= 1");
    if (S < 0)
        throw ValidationError("S must be >= 0");
    if (snr && !(*snr > 0.0))
        throw ValidationError("snr must be positive");

    const auto f = Expression::parse(spec.expression);
    const int p0 = spec.p0();
    const int p = p0 * (1 + S);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0xda7au};
    Rng rng(seq);

    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd fv(n);
    std::vector<double> row(p0);
    auto draw_row = [&](int i) {
        for (int j = 0; j < p0; ++j) {
            std::uniform_real_distribution<double> u(spec.ranges[j].first, spec.ranges[j].second);
            row[j] = u(rng);
        }
        (void)i;
    };
    for (int i = 0; i < n; ++i) {
        int attempts = 0;
        double v;
        do {
            if (attempts == 100)
                throw std::runtime_error("equation " + spec.id + " is non-finite at 100 sampled points for row " +
                                         std::to_string(i + 1));
            draw_row(i);
            v = f.evaluate(row);
            ++attempts;
        } while (!std::isfinite(v));
        for (int j = 0; j < p0; ++j)
            X(i, j) = row[j];
        fv[i] = v;
    }

    GeneratedData out;
    out.f_values = fv;
    out.signal_variance = n > 1 ? (fv.array() - fv.mean()).square().sum() / (n - 1.0) : 0.0;
    Eigen::VectorXd y = fv;
    if (snr) {
        out.noise_variance = out.signal_variance / *snr;
        std::normal_distribution<double> z(0.0, 1.0);
        const double sd = std::sqrt(out.noise_variance);
        for (int i = 0; i < n; ++i)
            y[i] += sd * z(rng);
    }

    std::vector<std::string> names;
    names.reserve(p);
    for (int j = 0; j < p0; ++j)
        names.push_back("x" + std::to_string(j + 1));
    int col = p0;
    for (int j = 0; j < p0; ++j) {
        std::uniform_real_distribution<double> u(spec.ranges[j].first, spec.ranges[j].second);
        for (int s = 0; s < S; ++s, ++col) {
            for (int i = 0; i < n; ++i)
                X(i, col) = u(rng);
            names.push_back("x" + std::to_string(j + 1) + "_irr" + std::to_string(s + 1));
        }
    }

    std::vector<int> truth(p0);
    for (int j = 0; j < p0; ++j)
        truth[j] = j;
    out.data = validate_dataset(std::move(y), std::move(X), std::move(names), std::move(truth));
    return out;
}

MetricsRecord compute_metrics(const std::vector<int>& selected, const std::vector<int>& truth, int p)
{
    std::vector<bool> is_true(p, false);
    std::vector<bool> is_sel(p, false);
    for (int j : truth) {
        if (j < 0 || j >= p)
            throw ValidationError("truth index out of range");
        is_true[j] = true;
    }
    for (int j : selected) {
        if (j < 0 || j >= p)
            throw ValidationError("selected index out of range");
        is_sel[j] = true;
    }
    MetricsRecord m;
    for (int j = 0; j < p; ++j) {
        if (is_sel[j] && is_true[j])
            ++m.tp;
        else if (is_sel[j])
            ++m.fp;
        else if (is_true[j])
            ++m.fn;
        else
            ++m.tn;
    }
    if (m.tp + m.fp == 0) {
        m.no_selection = true;
        return m;
    }
    m.tpr = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.fpr = m.fp + m.tn > 0 ? static_cast<double>(m.fp) / (m.fp + m.tn) : 0.0;
    m.f1 = 2.0 * m.tp / (2.0 * m.tp + m.fp + m.fn);
    return m;
}

namespace {

std::vector<int> prefixes_of(const GridPoint& pt)
{
    std::vector<int> out = pt.lrep_prefixes.empty() ? std::vector<int>{pt.lrep} : pt.lrep_prefixes;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GridRow row_header(const GridPoint& pt, int index, int lrep)
{
    GridRow r;
    r.point = index;
    r.replicate = pt.replicate;
    r.method = to_string(pt.method);
    r.equation = pt.equation.id;
    r.n = pt.n;
    r.snr = pt.snr;
    r.S = pt.S;
    r.p = pt.equation.p0() * (1 + pt.S);
    r.lrep = lrep;
    r.seed = pt.seed;
    return r;
}

std::vector<GridRow> run_point(const GridPoint& pt, int index)
{
    using clock = std::chrono::steady_clock;
    const auto prefixes = prefixes_of(pt);
    std::vector<GridRow> rows;
    try {
        if (prefixes.front() < 1)
            throw ValidationError("L_rep prefixes must be >= 1");
        const auto gen = generate_dataset(pt.equation, pt.n, pt.snr, pt.S, pt.seed);

        RunConfig cfg;
        cfg.method = pt.method;
        cfg.fit = pt.fit;
        cfg.lrep = prefixes.back();
        cfg.lperm = pt.lperm;
        cfg.alpha = pt.alpha;
        cfg.seed = pt.seed;
        cfg.jobs = 1;
        cfg.close();
        cfg.validate();

        std::vector<PosteriorTrace> fits(cfg.lrep);
        std::vector<double> fit_seconds(cfg.lrep);
        for (int l = 0; l < cfg.lrep; ++l) {
            const auto t0 = clock::now();
            FitConfig c = cfg.fit;
            c.seed = cfg.seed + static_cast<std::uint64_t>(l);
            fits[l] = fit(gen.data, c);
            fit_seconds[l] = std::chrono::duration<double>(clock::now() - t0).count();
        }
        const auto t0 = clock::now();
        const auto null = method_null(gen.data, cfg);
        const double null_seconds = std::chrono::duration<double>(clock::now() - t0).count();

        for (int L : prefixes) {
            const auto t1 = clock::now();
            const auto run = select_from_fits(cfg, std::span<const PosteriorTrace>(fits.data(), L), null);
            GridRow r = row_header(pt, index, L);
            r.selected = run.selection.selected;
            r.metrics = compute_metrics(run.selection.selected, *gen.data.truth, static_cast<int>(gen.data.p()));
            double secs = null_seconds + std::chrono::duration<double>(clock::now() - t1).count();
            for (int l = 0; l < L; ++l)
                secs += fit_seconds[l];
            r.metrics.runtime = secs;
            rows.push_back(std::move(r));
        }
    } catch (const std::exception& e) {
        rows.clear();
        for (int L : prefixes) {
            GridRow r = row_header(pt, index, L);
            r.error = e.what();
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

} // namespace

std::vector<GridRow> run_grid(const std::vector<GridPoint>& grid, const GridOptions& options)
{
    if (grid.empty())
        throw ValidationError("grid is empty");

    const int count = static_cast<int>(grid.size());
    std::vector<std::vector<GridRow>> results(count);
    std::vector<bool> ready(count, false);
    std::vector<bool> skipped(count, false);
    for (int i = 0; i < count; ++i) {
        bool all_done = !options.completed.empty();
        for (int L : prefixes_of(grid[i]))
            all_done = all_done && options.completed.count({i, grid[i].replicate, L}) > 0;
        skipped[i] = all_done;
    }

    std::mutex mu;
    int next_emit = 0;
    auto flush = [&] {
        while (next_emit < count && ready[next_emit]) {
            if (options.on_row)
                for (const auto& r : results[next_emit])
                    options.on_row(r);
            ++next_emit;
        }
    };

    parallel_for(count, options.jobs, [&](int i) {
        std::vector<GridRow> rows;
        if (!skipped[i])
            rows = run_point(grid[i], i);
        std::lock_guard lock(mu);
        results[i] = std::move(rows);
        ready[i] = true;
        flush();
    });

    std::vector<GridRow> out;
    for (auto& rs : results)
        for (auto& r : rs)
            out.push_back(std::move(r));
    return out;
}

std::vector<AggregateRow> aggregate(const std::vector<GridRow>& rows)
{
    std::vector<AggregateRow> out;
    auto same_snr = [](const std::optional<double>& a, const std::optional<double>& b) {
        return a.has_value() == b.has_value() && (!a || *a == *b);
    };
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const AggregateRow& a) {
            return a.method == r.method && a.n == r.n && same_snr(a.snr, r.snr) && a.lrep == r.lrep;
        });
        if (it == out.end()) {
            out.push_back({r.method, r.n, r.snr, r.lrep});
            it = out.end() - 1;
        }
        ++it->rows;
        it->tpr += r.metrics.tpr;
        it->fpr += r.metrics.fpr;
        it->f1 += r.metrics.f1;
        it->runtime += r.metrics.runtime;
    }
    for (auto& a : out) {
        a.tpr /= a.rows;
        a.fpr /= a.rows;
        a.f1 /= a.rows;
        a.runtime /= a.rows;
    }
    return out;
}

} // namespace bartvs
