#pragma once

#include <limits>
#include <span>

#include "scribe/numkit.hpp"

namespace scribe {

// One pen step: offset from the previous point plus the end-of-stroke flag.
struct StrokePoint {
    double dx = 0.0;
    double dy = 0.0;
    int eos = 0;
    bool operator==(const StrokePoint &) const = default;
};

// Correlations are kept strictly inside (-1, 1) so 1/(1 - rho^2) stays finite.
inline constexpr double kRhoLimit = 1.0 - 1e-6;

// Raw output layout for M components (6M + 1 values):
//   [e_hat, pi_hat(M), mu1_hat(M), mu2_hat(M), sigma1_hat(M), sigma2_hat(M), rho_hat(M)]
struct MdnSlots {
    std::size_t M;
    std::size_t eos() const { return 0; }
    std::size_t pi(std::size_t j) const { return 1 + j; }
    std::size_t mu1(std::size_t j) const { return 1 + M + j; }
    std::size_t mu2(std::size_t j) const { return 1 + 2 * M + j; }
    std::size_t sigma1(std::size_t j) const { return 1 + 3 * M + j; }
    std::size_t sigma2(std::size_t j) const { return 1 + 4 * M + j; }
    std::size_t rho(std::size_t j) const { return 1 + 5 * M + j; }
    std::size_t size() const { return 6 * M + 1; }
};

inline int mdn_output_size(int components) { return 6 * components + 1; }

// Squashed mixture parameters for one timestep.
struct MixtureOut {
    double e = 0.5; // end-of-stroke probability
    // Pre-squash e_hat when known; lets the Bernoulli term use softplus
    // instead of log(e), which saturates once e rounds to 0 or 1.
    double e_hat = std::numeric_limits<double>::quiet_NaN();
    Vec pi, mu1, mu2, sigma1, sigma2, rho;
    Vec log_pi;     // log of pi, kept for log-space evaluation
    std::size_t components() const { return pi.size(); }
};

// e = 1 / (1 + exp(e_hat)), pi = softmax(pi_hat), mu = mu_hat,
// sigma = exp(sigma_hat), rho = tanh(rho_hat).
MixtureOut split_outputs(std::span<const double> yhat, int components);

// Probability-biased parameters: sigma = exp(sigma_hat - b) and
// pi = softmax(pi_hat (1 + b)). b = +inf selects the most probable
// component's mode. Throws std::invalid_argument when b < 0 or NaN.
MixtureOut apply_bias(std::span<const double> yhat, int components, double bias);

// log N(x | mu, sigma, rho), evaluated directly in log space.
double bivariate_logdensity(Point2 x, Point2 mu, Point2 sigma, double rho);

// sum_j pi_j N(x | component j): density of the next offset.
double mixture_density(const MixtureOut &mix, Point2 x);

struct MdnBackCache {
    Vec gamma; // responsibilities
    Vec Z;     // quadratic form per component
    Vec C;     // 1 / (1 - rho^2) per component
};

struct MdnStepResult {
    double loss = 0.0; // nats
    MdnBackCache cache;
};

// -log(sum_j pi_j N_j(x)) - [eos] log e - [!eos] log(1 - e), via logsumexp.
MdnStepResult mdn_step_loss(const MixtureOut &mix, const StrokePoint &x_next);

// Analytic dL/dyhat (6M + 1 values) for the matching mdn_step_loss call.
Vec mdn_backward(const MixtureOut &mix, const MdnBackCache &cache, const StrokePoint &x_next);

// Sum of step losses over the rows of yhat; fills dyhat when non-null.
double mdn_sequence_loss(const Mat &yhat, std::span<const StrokePoint> targets, int components,
                         Mat *dyhat);

// Component ~ Categorical(pi), offset ~ that component, eos ~ Bernoulli(e).
StrokePoint mdn_sample(const MixtureOut &mix, Rng &rng);

} // namespace scribe
