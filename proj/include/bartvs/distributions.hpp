#ifndef BARTVS_DISTRIBUTIONS_HPP
#define BARTVS_DISTRIBUTIONS_HPP

#include <Eigen/Dense>

#include <random>

namespace bartvs {

using Rng = std::mt19937_64;

/// Prior probability that a node at the given depth is split: gamma / (1 + depth)^beta.
double p_split(int depth, double gamma, double beta);

/// Sufficient statistics of partial residuals falling in one leaf.
struct LeafSufficientStats {
    long n = 0;
    double sum_r = 0.0;
    double sum_r2 = 0.0;

    void add(double r)
    {
        ++n;
        sum_r += r;
        sum_r2 += r * r;
    }
};

struct NormalParams {
    double mean;
    double variance;
};

struct InverseGammaParams {
    double shape;
    double scale;

    double mean() const { return scale / (shape - 1.0); }
};

/// Conjugate Gaussian full conditional of a leaf value with prior N(0, sigma_mu2).
NormalParams leaf_posterior(const LeafSufficientStats& stats, double sigma2, double sigma_mu2);
double sample_leaf_value(const LeafSufficientStats& stats, double sigma2, double sigma_mu2, Rng& rng);

/// Inverse-gamma full conditional of sigma^2 under the scaled-inverse-chi^2(nu, lambda) prior.
InverseGammaParams sigma2_posterior(double total_sse, long n, double nu, double lambda);
double sample_sigma2(double total_sse, long n, double nu, double lambda, Rng& rng);
double sample_inverse_gamma(const InverseGammaParams& params, Rng& rng);

/// lambda such that P(sigma^2 < sigma2_hat) = q under nu * lambda / chi^2_nu.
double calibrate_sigma_lambda(double sigma2_hat, double nu, double q);

/// Log marginal likelihood of one leaf with its mean integrated out, dropping
/// the -n/2 log(2 pi sigma^2) - sum r^2 / (2 sigma^2) part shared by any
/// partition of the same residuals.
double log_leaf_integrated_likelihood(long n, double sum_r, double sigma2, double sigma_mu2);

/// log of a Gamma(shape, 1) draw; stable for very small shapes.
double sample_log_gamma(double shape, Rng& rng);

/// Dirichlet draw; log_out (when given) receives log-probabilities that stay
/// finite even where the returned probabilities underflow to zero.
Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& params, Rng& rng,
                                 Eigen::VectorXd* log_out = nullptr);

/// Conjugate DART update: s ~ Dirichlet(alpha/p + c_1, ..., alpha/p + c_p).
Eigen::VectorXd update_split_probs(const Eigen::VectorXi& counts, double alpha, Rng& rng,
                                   Eigen::VectorXd* log_out = nullptr);

/// Midpoint grid for lambda = alpha / (alpha + rho) and the normalized
/// posterior weights Beta(lambda; a, b) * Dirichlet(s; alpha(lambda)/p, ...).
struct AlphaGrid {
    Eigen::VectorXd lambda;
    Eigen::VectorXd alpha;
    Eigen::VectorXd weights;
    bool underflow = false;
};

AlphaGrid alpha_grid_weights(const Eigen::VectorXd& s, double a, double b, double rho, int grid_size);

struct AlphaDraw {
    double alpha;
    bool warning;
};

/// Griddy-Gibbs draw of the Dirichlet concentration. Returns current_alpha
/// with warning set when every grid weight underflows.
AlphaDraw sample_alpha(const Eigen::VectorXd& s, double a, double b, double rho, int grid_size,
                       Rng& rng, double current_alpha);

} // namespace bartvs

#endif // BARTVS_DISTRIBUTIONS_HPP
