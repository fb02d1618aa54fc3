#include "bartvs/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bartvs {

double p_split(int depth, double gamma, double beta)
{
    return gamma / std::pow(1.0 + depth, beta);
}

NormalParams leaf_posterior(const LeafSufficientStats& stats, double sigma2, double sigma_mu2)
{
    const double precision = static_cast<double>(stats.n) / sigma2 + 1.0 / sigma_mu2;
    const double v = 1.0 / precision;
    return {v * stats.sum_r / sigma2, v};
}

double sample_leaf_value(const LeafSufficientStats& stats, double sigma2, double sigma_mu2, Rng& rng)
{
    const auto post = leaf_posterior(stats, sigma2, sigma_mu2);
    std::normal_distribution<double> z(0.0, 1.0);
    return post.mean + std::sqrt(post.variance) * z(rng);
}

InverseGammaParams sigma2_posterior(double total_sse, long n, double nu, double lambda)
{
    return {0.5 * (static_cast<double>(n) + nu), 0.5 * (total_sse + nu * lambda)};
}

double sample_inverse_gamma(const InverseGammaParams& params, Rng& rng)
{
    std::gamma_distribution<double> g(params.shape, 1.0);
    return params.scale / g(rng);
}

double sample_sigma2(double total_sse, long n, double nu, double lambda, Rng& rng)
{
    return sample_inverse_gamma(sigma2_posterior(total_sse, n, nu, lambda), rng);
}

double calibrate_sigma_lambda(double sigma2_hat, double nu, double q)
{
    boost::math::chi_squared chi2(nu);
    return sigma2_hat * boost::math::quantile(chi2, 1.0 - q) / nu;
}

double log_leaf_integrated_likelihood(long n, double sum_r, double sigma2, double sigma_mu2)
{
    const double nd = static_cast<double>(n);
    const double denom = sigma2 + nd * sigma_mu2;
    return -0.5 * std::log(denom / sigma2) + 0.5 * sigma_mu2 * sum_r * sum_r / (sigma2 * denom);
}

double sample_log_gamma(double shape, Rng& rng)
{
    if (shape >= 1.0) {
        std::gamma_distribution<double> g(shape, 1.0);
        return std::log(g(rng));
    }
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    std::gamma_distribution<double> g(shape + 1.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double uu;
    do {
        uu = u(rng);
    } while (uu <= 0.0);
    return std::log(g(rng)) + std::log(uu) / shape;
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& params, Rng& rng, Eigen::VectorXd* log_out)
{
    Eigen::VectorXd logs(params.size());
    for (Eigen::Index j = 0; j < params.size(); ++j)
        logs[j] = sample_log_gamma(params[j], rng);
    const double mx = logs.maxCoeff();
    const double lse = mx + std::log((logs.array() - mx).exp().sum());
    logs.array() -= lse;
    Eigen::VectorXd s = logs.array().exp();
    s /= s.sum();
    if (log_out)
        *log_out = logs;
    return s;
}

Eigen::VectorXd update_split_probs(const Eigen::VectorXi& counts, double alpha, Rng& rng,
                                   Eigen::VectorXd* log_out)
{
    const double base = alpha / static_cast<double>(counts.size());
    Eigen::VectorXd params = counts.cast<double>().array() + base;
    return sample_dirichlet(params, rng, log_out);
}

AlphaGrid alpha_grid_weights(const Eigen::VectorXd& s, double a, double b, double rho, int grid_size)
{
    const double p = static_cast<double>(s.size());
    const double sum_log_s = s.array().max(1e-300).log().sum();
    const double log_beta_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);

    AlphaGrid g;
    g.lambda.resize(grid_size);
    g.alpha.resize(grid_size);
    g.weights.resize(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        const double lam = (i + 0.5) / grid_size;
        const double alpha = rho * lam / (1.0 - lam);
        const double log_beta = log_beta_norm + (a - 1.0) * std::log(lam) + (b - 1.0) * std::log1p(-lam);
        const double log_dir = std::lgamma(alpha) - p * std::lgamma(alpha / p) + (alpha / p - 1.0) * sum_log_s;
        g.lambda[i] = lam;
        g.alpha[i] = alpha;
        g.weights[i] = log_beta + log_dir;
    }
    const double mx = g.weights.maxCoeff();
    if (!std::isfinite(mx)) {
        g.underflow = true;
        g.weights.setZero();
        return g;
    }
    g.weights = (g.weights.array() - mx).exp();
    const double total = g.weights.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        g.underflow = true;
        g.weights.setZero();
        return g;
    }
    g.weights /= total;
    return g;
}

AlphaDraw sample_alpha(const Eigen::VectorXd& s, double a, double b, double rho, int grid_size,
                       Rng& rng, double current_alpha)
{
    const auto g = alpha_grid_weights(s, a, b, rho, grid_size);
    if (g.underflow)
        return {current_alpha, true};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double target = u(rng);
    double acc = 0.0;
    for (int i = 0; i < grid_size; ++i) {
        acc += g.weights[i];
        if (target < acc)
            return {g.alpha[i], false};
    }
    return {g.alpha[grid_size - 1], false};
}

} // namespace bartvs
