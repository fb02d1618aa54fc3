// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "oracles.hpp"

#include "bartvs/benchmark.hpp"
#include "bartvs/csv.hpp"
#include "bartvs/distributions.hpp"
#include "bartvs/hac.hpp"
#include "bartvs/pipeline.hpp"
#include "bartvs/selection.hpp"
#include "bartvs/summaries.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace bartvs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// Criterion 1: leaf and sigma^2 full conditionals.
Outcome conjugate_updates()
{
    Rng rng(101);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    std::uniform_int_distribution<int> count(0, 200);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        LeafSufficientStats s;
        s.n = count(rng);
        s.sum_r = (u(rng) - 1.5) * s.n;
        const double sigma2 = u(rng), tau2 = u(rng);
        const auto post = leaf_posterior(s, sigma2, tau2);
        const double var = 1.0 / (s.n / sigma2 + 1.0 / tau2);
        const double mean = var * s.sum_r / sigma2;
        worst = std::max({worst, std::abs(post.variance - var) / var,
                          std::abs(post.mean - mean) / std::max(1.0, std::abs(mean))});

        const double sse = u(rng) * 10, nu = 3.0, lambda = u(rng);
        const long n = count(rng);
        const auto ig = sigma2_posterior(sse, n, nu, lambda);
        worst = std::max({worst, std::abs(ig.shape - 0.5 * (n + nu)) / ig.shape,
                          std::abs(ig.scale - 0.5 * (sse + nu * lambda)) / ig.scale});
    }
    if (worst > 1e-10)
        return {false, fmt("closed-form mismatch %.3g", worst)};

    // Monte Carlo moments over 1e5 draws
    const int N = 100000;
    const LeafSufficientStats s{7, 2.1, 0.0};
    const double sigma2 = 0.4, tau2 = 0.3;
    const auto post = leaf_posterior(s, sigma2, tau2);
    double m1 = 0, m2 = 0;
    for (int i = 0; i < N; ++i) {
        const double v = sample_leaf_value(s, sigma2, tau2, rng);
        m1 += v;
        m2 += v * v;
    }
    m1 /= N;
    const double v_hat = m2 / N - m1 * m1;
    const double z_mean = std::abs(m1 - post.mean) / std::sqrt(post.variance / N);
    // variance of a sample variance of normals: 2 sigma^4 / N
    const double z_var = std::abs(v_hat - post.variance) / std::sqrt(2.0 * post.variance * post.variance / N);

    const auto ig = sigma2_posterior(3.0, 20, 3.0, 0.5);
    double g = 0;
    for (int i = 0; i < N; ++i)
        g += sample_sigma2(3.0, 20, 3.0, 0.5, rng);
    g /= N;
    const double ig_sd = ig.scale / ((ig.shape - 1) * std::sqrt(ig.shape - 2));
    const double z_ig = std::abs(g - ig.mean()) / (ig_sd / std::sqrt(N));
    const double z = std::max({z_mean, z_var, z_ig});
    return {z < 3.0, fmt("max rel err %.2g, max |z| %.2f", worst, z)};
}

// Criterion 2: Dirichlet split-probability update.
Outcome dirichlet_update()
{
    Rng rng(202);
    std::uniform_int_distribution<int> count(0, 12), dim(2, 8);
    std::uniform_real_distribution<double> al(0.3, 5.0);
    const int N = 100000;
    double zmax = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const int p = dim(rng);
        Eigen::VectorXi c(p);
        for (auto& x : c)
            x = count(rng);
        const double alpha = al(rng);
        const Eigen::VectorXd params = (c.cast<double>().array() + alpha / p).matrix();
        const double a0 = params.sum();
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
        for (int i = 0; i < N; ++i)
            mean += update_split_probs(c, alpha, rng);
        mean /= N;
        for (int j = 0; j < p; ++j) {
            const double m = params[j] / a0;
            const double se = std::sqrt(m * (1 - m) / (a0 + 1) / N);
            zmax = std::max(zmax, std::abs(mean[j] - m) / se);
        }
    }
    return {zmax < 3.0, fmt("max |z| %.2f over 10 count vectors", zmax)};
}

// Criterion 3: average-linkage clustering against the brute-force oracle.
Outcome hac_equivalence()
{
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> msize(2, 10), dsize(1, 4), coarse(0, 3);
    std::normal_distribution<double> z;
    int agree = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const int m = msize(rng), d = dsize(rng);
        Eigen::MatrixXd X(m, d);
        for (Eigen::Index i = 0; i < X.size(); ++i)
            X.data()[i] = rep % 4 == 0 ? coarse(rng) : z(rng);
        agree += oracle::same_partition(cut_two(hac_average_linkage(X)), oracle::upgma_cut_two(X));
    }
    return {agree == 200, fmt("%.0f/200 partitions equal", agree)};
}

// Criterion 4: permutation thresholds against exhaustive oracles.
Outcome threshold_oracles()
{
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> psize(1, 6), lsize(1, 8), coarse(0, 4);
    std::uniform_real_distribution<double> u(0, 1);
    int ok = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const int p = psize(rng), L = lsize(rng);
        Eigen::MatrixXd null(L, p);
        for (Eigen::Index i = 0; i < null.size(); ++i)
            null.data()[i] = rep % 3 == 0 ? coarse(rng) * 0.1 : u(rng);
        Eigen::VectorXd q(p);
        for (auto& x : q)
            x = u(rng);
        const double alpha = 0.05 + 0.3 * (rep % 2);
        bool good = threshold_local(q, null, alpha).selected == oracle::select_local(q, null, alpha);
        good = good && threshold_gmax(q, null, alpha).selected == oracle::select_gmax(q, null, alpha);
        const auto gse = threshold_gse(q, null, alpha);
        good = good && gse.selected == oracle::select_gse_at(q, null, oracle::gse_scan(null, alpha));
        good = good && gse.selected == oracle::select_gse_at(q, null, oracle::gse_bisect(null, alpha));
        ok += good;
    }
    return {ok == 100, fmt("%.0f/100 null matrices agree", ok)};
}

// Criterion 5: importance formulas, sums and midrank conservation.
Outcome summary_formulas()
{
    std::mt19937_64 rng(505);
    double worst = 0, sum_err = 0;
    bool ranks_ok = true;
    for (int rep = 0; rep < 100; ++rep) {
        const auto tr = oracle::random_trace(1 + rep % 25, 1 + rep % 12, rng, true, rep % 2 ? 0.2 : 0.0);
        worst = std::max({worst, (vip(tr).values - oracle::vip(tr)).cwiseAbs().maxCoeff(),
                          (vc(tr).values - oracle::vc(tr)).cwiseAbs().maxCoeff(),
                          (mpvip(tr).values - oracle::mpvip(tr)).cwiseAbs().maxCoeff(),
                          (metropolis_importance(tr).values - oracle::mi(tr)).cwiseAbs().maxCoeff()});
        const bool no_empty = (tr.counts.rowwise().sum().array() > 0).all();
        if (no_empty)
            sum_err = std::max(sum_err, std::abs(vip(tr).values.sum() - 1.0));
        const auto r = rank_descending(vc(tr).values);
        const double p = static_cast<double>(r.size());
        ranks_ok = ranks_ok && r.sum() == p * (p + 1) / 2;
    }
    return {worst <= 1e-12 && sum_err <= 1e-10 && ranks_ok,
            fmt("max formula err %.2g, max |sum vip - 1| %.2g", worst, sum_err)};
}

// Criterion 6: metrics fixture and empty selection.
Outcome metrics_fixture()
{
    const auto m = compute_metrics({0, 1, 2}, {0, 1}, 102);
    const auto e = compute_metrics({}, {0, 1}, 102);
    const bool pass = m.tpr == 1.0 && m.fpr == 0.01 && m.f1 == 0.8 && e.tpr == 0 && e.fpr == 0 && e.f1 == 0 &&
                      e.no_selection;
    return {pass, fmt("tpr %.17g fpr %.17g f1 %.17g", m.tpr, m.fpr, m.f1)};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Criterion 7: two identical select runs write identical importance files.
Outcome cli_determinism()
{
    const fs::path dir = fs::temp_directory_path() / ("bartvs_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto g = generate_dataset(find_equation("product"), 200, 10.0, 10, 7);
    {
        std::ofstream out(dir / "data.csv");
        write_dataset_csv(out, g.data);
    }
    for (const char* run : {"a", "b"}) {
        const std::string cmd = std::string(BARTVS_CLI) + " select " + (dir / "data.csv").string() +
                                " --method dart-vc-measure --lrep 3 --trees 20 --burnin 300 --draws 300"
                                " --seed 11 --jobs 2 --out " +
                                (dir / (std::string(run) + ".json")).string() + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0)
            return {false, "select exited nonzero"};
    }
    const auto a = slurp(dir / "a_importance.csv"), b = slurp(dir / "b_importance.csv");
    fs::remove_all(dir);
    return {!a.empty() && a == b, fmt("%.0f-byte importance files identical", static_cast<double>(a.size()))};
}

RunConfig fixture_config(Method m, std::uint64_t seed)
{
    RunConfig c = RunConfig::defaults(m);
    c.fit.trees = 20;
    c.fit.burn_in = 1000;
    c.fit.draws = 1000;
    if (m != Method::dart_mpm)
        c.lrep = 5;
    c.seed = seed;
    c.jobs = 1;
    return c;
}

MetricsRecord fixture_run(Method m, double snr, std::uint64_t seed)
{
    const auto g = generate_dataset(find_equation("product"), 500, snr, 50, seed);
    const auto run = run_method(g.data, fixture_config(m, seed));
    return compute_metrics(run.selection.selected, *g.data.truth, static_cast<int>(g.data.p()));
}

struct SeedSweep {
    double f1 = 0, fpr = 0;
    int perfect = 0;
};

SeedSweep sweep(Method m, double snr)
{
    SeedSweep s;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = fixture_run(m, snr, seed);
        s.f1 += r.f1 / 10.0;
        s.fpr += r.fpr / 10.0;
        s.perfect += r.f1 == 1.0;
    }
    return s;
}

SeedSweep dart_vc_snr10;

// Criterion 8: easy recovery of x1 * x2 among 102 features.
Outcome easy_recovery()
{
    dart_vc_snr10 = sweep(Method::dart_vc_measure, 10.0);
    return {dart_vc_snr10.perfect >= 8,
            fmt("F1 = 1 in %.0f/10 seeds, mean F1 %.3f", dart_vc_snr10.perfect, dart_vc_snr10.f1)};
}

// Criterion 9: DART is at least as good as BART under the VC measure.
Outcome dart_vs_bart()
{
    const auto bart = sweep(Method::bart_vc_measure, 10.0);
    return {dart_vc_snr10.f1 >= bart.f1 - 0.02, fmt("mean F1 dart %.3f, bart %.3f", dart_vc_snr10.f1, bart.f1)};
}

// Criterion 10: at high SNR the median probability model is no more selective than the VC measure.
Outcome high_snr()
{
    const auto mpm = sweep(Method::dart_mpm, 20.0);
    const auto vcm = sweep(Method::dart_vc_measure, 20.0);
    return {mpm.fpr >= vcm.fpr && vcm.f1 >= mpm.f1,
            fmt("FPR mpm %.4f vs vc %.4f; F1 vc %.3f vs mpm %.3f", mpm.fpr, vcm.fpr, vcm.f1, mpm.f1)};
}

// Criterion 11: prefix evaluation equals an independent run with the same seeds.
Outcome prefix_protocol()
{
    GridPoint pt;
    pt.equation = find_equation("product");
    pt.n = 150;
    pt.snr = 5.0;
    pt.S = 10;
    pt.method = Method::dart_vc_measure;
    pt.fit.trees = 10;
    pt.fit.burn_in = 200;
    pt.fit.draws = 200;
    pt.seed = 4242;
    pt.lrep_prefixes = {1, 2, 5};
    const auto rows = run_grid({pt});

    GridPoint two = pt;
    two.lrep_prefixes.clear();
    two.lrep = 2;
    const auto alone = run_grid({two});
    const GridRow* prefix = nullptr;
    for (const auto& r : rows)
        if (r.lrep == 2)
            prefix = &r;
    if (!prefix || alone.size() != 1 || !alone[0].error.empty() || !prefix->error.empty())
        return {false, "missing or failed rows"};
    auto strip = [](MetricsRecord m) {
        m.runtime = 0;
        return m;
    };
    const bool same = prefix->selected == alone[0].selected && strip(prefix->metrics) == strip(alone[0].metrics) &&
                      prefix->p == alone[0].p && prefix->seed == alone[0].seed;
    return {same, fmt("L_rep=2 prefix selects %.0f features, independent run %.0f",
                      static_cast<double>(prefix->selected.size()), static_cast<double>(alone[0].selected.size()))};
}

// Criterion 12: global max thresholding on pure noise keeps nothing.
Outcome noise_gmax()
{
    int empty = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed * 7919);
        std::normal_distribution<double> z;
        std::uniform_real_distribution<double> u;
        Eigen::VectorXd y(200);
        Eigen::MatrixXd X(200, 10);
        for (int i = 0; i < 200; ++i) {
            y[i] = z(rng);
            for (int j = 0; j < 10; ++j)
                X(i, j) = u(rng);
        }
        auto c = RunConfig::defaults(Method::bart_vip_gmax);
        c.lrep = 10;
        c.lperm = 50;
        c.fit.burn_in = 500;
        c.fit.draws = 500;
        c.seed = seed;
        c.jobs = 1;
        empty += run_method(validate_dataset(y, X), c).selection.selected.empty();
    }
    return {empty >= 9, fmt("empty selection in %.0f/10 seeds", empty)};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"conjugate updates", conjugate_updates},
        {"Dirichlet update", dirichlet_update},
        {"clustering oracle", hac_equivalence},
        {"threshold oracles", threshold_oracles},
        {"importance formulas", summary_formulas},
        {"metrics fixture", metrics_fixture},
        {"select determinism", cli_determinism},
        {"easy recovery", easy_recovery},
        {"DART vs BART", dart_vs_bart},
        {"high SNR", high_snr},
        {"prefix protocol", prefix_protocol},
        {"noise global max", noise_gmax},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("criterion %zu: %s  %s (%s, %.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
