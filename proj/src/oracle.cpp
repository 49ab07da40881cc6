#include "iflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iflow {

void MixtureSpec::validate() const {
    if (weights.empty() || weights.size() != means.size() || weights.size() != scales.size())
        throw ArgumentError("mixture: weights/means/scales must be non-empty and equal length");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw ArgumentError("mixture: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("mixture: weights must sum to 1");
    for (const Vec& m : means)
        if (m.size() != means[0].size()) throw ArgumentError("mixture: mean dims disagree");
    for (double s : scales)
        if (!(s > 0.0)) throw ArgumentError("mixture: scales must be positive");
}

// Per-component log N(x; mu_i, (s_i^2 + sigma^2) I) plus log w_i.
static void component_logs(const MixtureSpec& mix, const Vec& x, double sigma,
                           std::vector<double>& logs) {
    size_t k = mix.components();
    size_t d = x.size();
    logs.resize(k);
    for (size_t i = 0; i < k; ++i) {
        double var = mix.scales[i] * mix.scales[i] + sigma * sigma;
        double sq = squared_distance(x, mix.means[i]);
        logs[i] = std::log(mix.weights[i]) -
                  0.5 * (static_cast<double>(d) * std::log(2.0 * M_PI * var) + sq / var);
    }
}

double ve_log_density(const MixtureSpec& mix, const Vec& x, double sigma) {
    mix.validate();
    if (x.size() != mix.dim()) throw ArgumentError("ve_log_density: dim mismatch");
    if (!(sigma >= 0.0)) throw ArgumentError("ve_log_density: sigma must be >= 0");
    std::vector<double> logs;
    component_logs(mix, x, sigma, logs);
    double m = *std::max_element(logs.begin(), logs.end());
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - m);
    return m + std::log(acc);
}

Vec ve_score(const MixtureSpec& mix, const Vec& x, double sigma) {
    mix.validate();
    if (x.size() != mix.dim()) throw ArgumentError("ve_score: dim mismatch");
    if (!(sigma >= 0.0)) throw ArgumentError("ve_score: sigma must be >= 0");
    std::vector<double> logs;
    component_logs(mix, x, sigma, logs);
    double m = *std::max_element(logs.begin(), logs.end());
    double total = 0.0;
    std::vector<double> resp(logs.size());
    for (size_t i = 0; i < logs.size(); ++i) {
        resp[i] = std::exp(logs[i] - m);
        total += resp[i];
    }
    Vec score(x.size(), 0.0);
    for (size_t i = 0; i < logs.size(); ++i) {
        double var = mix.scales[i] * mix.scales[i] + sigma * sigma;
        double w = resp[i] / total;
        for (size_t j = 0; j < x.size(); ++j)
            score[j] += w * (mix.means[i][j] - x[j]) / var;
    }
    return score;
}

Vec euler_pf_ode(const MixtureSpec& mix, const Vec& x_T, const ProcessSpec& spec,
                 int64_t num_steps) {
    if (spec.kind != ProcessKind::VE) throw ArgumentError("euler_pf_ode: VE spec required");
    spec.validate();
    mix.validate();
    if (num_steps < 1) throw ArgumentError("euler_pf_ode: num_steps must be >= 1");
    require_finite(x_T, "euler_pf_ode: x_T");

    double T = static_cast<double>(spec.T);
    double log_ratio = std::log(spec.sigma_max / spec.sigma_min);
    double h = T / static_cast<double>(num_steps);
    Vec x = x_T;
    for (int64_t k = 0; k < num_steps; ++k) {
        double t = T - static_cast<double>(k) * h;
        double sigma = ve_sigma_continuous(spec, t);
        // d(sigma^2)/dt = 2 sigma^2 log_ratio / T, so
        // dx/dt = -(sigma^2 log_ratio / T) * score.
        double coef = sigma * sigma * log_ratio / T;
        Vec sc = ve_score(mix, x, sigma);
        for (size_t j = 0; j < x.size(); ++j) x[j] += h * coef * sc[j];
        if (!all_finite(x))
            throw NumericError("euler_pf_ode: non-finite state at step " + std::to_string(k));
    }
    return x;
}

Vec gaussian_rf_map(const Vec& z, double s) {
    if (!(s > 0.0)) throw ArgumentError("gaussian_rf_map: s must be positive");
    Vec out(z.size());
    for (size_t i = 0; i < z.size(); ++i) out[i] = s * z[i];
    return out;
}

Theorem1Result theorem1_check(double s, double sigma, double tau, int64_t trials,
                              RngStream& rng) {
    if (!(s > 0.0 && sigma > 0.0 && tau > 0.0))
        throw ArgumentError("theorem1_check: s, sigma, tau must be positive");
    if (trials < 2) throw ArgumentError("theorem1_check: trials must be >= 2");

    double s2 = s * s, sig2 = sigma * sigma, tau2 = tau * tau;
    double shrink = s2 / (s2 + sig2);
    double prec = 1.0 / s2 + 1.0 / sig2 + 1.0 / tau2;

    double sum_j = 0.0, sum_j2 = 0.0;
    double sum_m = 0.0, sum_m2 = 0.0;
    double sum_d = 0.0, sum_d2 = 0.0;
    for (int64_t i = 0; i < trials; ++i) {
        double x0 = s * rng.normal();
        double xt = x0 + sigma * rng.normal();
        double anchor = x0 + tau * rng.normal();
        double est_m = shrink * xt;
        double est_j = (xt / sig2 + anchor / tau2) / prec;
        double em = (x0 - est_m) * (x0 - est_m);
        double ej = (x0 - est_j) * (x0 - est_j);
        sum_j += ej;
        sum_j2 += ej * ej;
        sum_m += em;
        sum_m2 += em * em;
        double d = em - ej;
        sum_d += d;
        sum_d2 += d * d;
    }
    double n = static_cast<double>(trials);
    auto se_of = [n](double sum, double sum2) {
        double mean = sum / n;
        double var = std::max(0.0, sum2 / n - mean * mean);
        return std::sqrt(var / n);
    };
    Theorem1Result r;
    r.mse_joint = sum_j / n;
    r.mse_marginal = sum_m / n;
    r.analytic_joint = 1.0 / prec;
    r.analytic_marginal = s2 * sig2 / (s2 + sig2);
    r.se_joint = se_of(sum_j, sum_j2);
    r.se_marginal = se_of(sum_m, sum_m2);
    r.se_diff = se_of(sum_d, sum_d2);
    return r;
}

Theorem3Result theorem3_check(int64_t field_samples, int64_t path_samples, RngStream& rng) {
    if (field_samples < 1) throw ArgumentError("theorem3_check: field_samples must be >= 1");
    if (path_samples < 1000) throw ArgumentError("theorem3_check: path_samples must be >= 1000");

    constexpr size_t dim = 2;
    Quadrature quad = gauss_legendre(64, 0.0, 1.0);

    Theorem3Result worst;
    bool first = true;
    bool all_hold = true;
    for (int64_t f = 0; f < field_samples; ++f) {
        double A[dim][dim];
        double b[dim];
        for (auto& row : A)
            for (double& v : row) v = rng.normal();
        for (double& v : b) v = rng.normal();

        double sum_l = 0.0, sum_r = 0.0, sum_g = 0.0, sum_g2 = 0.0;
        for (int64_t p = 0; p < path_samples; ++p) {
            double x0[dim], x1[dim];
            for (double& v : x0) v = rng.normal();
            for (double& v : x1) v = rng.normal();

            double lhs_i = 0.0;
            double acc[dim] = {0.0, 0.0};
            for (size_t q = 0; q < quad.nodes.size(); ++q) {
                double t = quad.nodes[q], w = quad.weights[q];
                double xt[dim];
                for (size_t j = 0; j < dim; ++j) xt[j] = (1.0 - t) * x0[j] + t * x1[j];
                double f0 = 0.0;
                double fv[dim];
                for (size_t j = 0; j < dim; ++j) {
                    double vx = A[j][0] * xt[0] + A[j][1] * xt[1] + b[j] * t;
                    fv[j] = (x1[j] - x0[j]) - vx;
                    f0 += fv[j] * fv[j];
                }
                lhs_i += w * f0;
                for (size_t j = 0; j < dim; ++j) acc[j] += w * fv[j];
            }
            double rhs_i = acc[0] * acc[0] + acc[1] * acc[1];
            sum_l += lhs_i;
            sum_r += rhs_i;
            double g = lhs_i - rhs_i;
            sum_g += g;
            sum_g2 += g * g;
        }
        double n = static_cast<double>(path_samples);
        double lhs = sum_l / n, rhs = sum_r / n;
        double gmean = sum_g / n;
        double gvar = std::max(0.0, sum_g2 / n - gmean * gmean);
        double se = std::sqrt(gvar / n);
        bool holds = lhs >= rhs - 3.0 * se;
        all_hold = all_hold && holds;
        if (first || (lhs - rhs) < (worst.lhs - worst.rhs)) {
            worst.lhs = lhs;
            worst.rhs = rhs;
            worst.se_gap = se;
            first = false;
        }
    }
    worst.holds = all_hold;
    return worst;
}

Quadrature gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ArgumentError("gauss_legendre: n must be >= 1");
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    // Roots of P_n on [-1,1] by Newton iteration from the Chebyshev guess.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[i] = 0.5 * (b - a) * x + 0.5 * (a + b);
        q.weights[i] = 0.5 * (b - a) * w;
    }
    return q;
}

}  // namespace iflow
