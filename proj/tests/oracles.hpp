// Test-only reference implementations, independent of the library's
// computation paths: a textbook Kalman filter, a batch joint-Gaussian
// smoother, a Gauss-Newton MAP solver, and distribution quantiles.

#ifndef ULF_TESTS_ORACLES_HPP
#define ULF_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct KalmanState {
    VectorXd mean;
    MatrixXd cov;
};

// Plain textbook Kalman filter (explicit inverses on purpose; this is the
// independent route the library is checked against).
inline std::vector<KalmanState> plain_kalman_filter(const KalmanState& init, const MatrixXd& f,
                                                    const VectorXd& fb, const MatrixXd& q,
                                                    const MatrixXd& h, const VectorXd& hb,
                                                    const MatrixXd& r,
                                                    const std::vector<VectorXd>& ys) {
    std::vector<KalmanState> out;
    out.reserve(ys.size());
    VectorXd x = init.mean;
    MatrixXd p = init.cov;
    for (const VectorXd& y : ys) {
        x = f * x + fb;
        p = f * p * f.transpose() + q;
        const MatrixXd s = h * p * h.transpose() + r;
        const MatrixXd k = p * h.transpose() * s.inverse();
        x = x + k * (y - h * x - hb);
        p = p - k * h * p;
        p = 0.5 * (p + p.transpose());
        out.push_back({x, p});
    }
    return out;
}

// Batch smoother: stack the whole affine chain x_0..x_{K-1} (with
// x_0 = F x_init + b + w) and the measurements into one joint Gaussian in
// information form, invert, and read off the marginals.
struct BatchMarginals {
    std::vector<VectorXd> means;
    std::vector<MatrixXd> covs;
};

inline BatchMarginals batch_affine_smoother(const KalmanState& init, const MatrixXd& f,
                                            const VectorXd& fb, const MatrixXd& q,
                                            const MatrixXd& h, const VectorXd& hb,
                                            const MatrixXd& r, const std::vector<VectorXd>& ys) {
    const Eigen::Index n = init.mean.size();
    const Eigen::Index steps = static_cast<Eigen::Index>(ys.size());
    const Eigen::Index dim = n * steps;

    MatrixXd info = MatrixXd::Zero(dim, dim);
    VectorXd vec = VectorXd::Zero(dim);

    const MatrixXd qi = q.inverse();
    const MatrixXd ri = r.inverse();

    // Prior on x_0 from pushing the init through the dynamics.
    const VectorXd m0 = f * init.mean + fb;
    const MatrixXd p0 = f * init.cov * f.transpose() + q;
    const MatrixXd p0i = p0.inverse();
    info.topLeftCorner(n, n) += p0i;
    vec.head(n) += p0i * m0;

    for (Eigen::Index k = 0; k + 1 < steps; ++k) {
        const Eigen::Index a = k * n;
        const Eigen::Index b = (k + 1) * n;
        info.block(a, a, n, n) += f.transpose() * qi * f;
        info.block(a, b, n, n) -= f.transpose() * qi;
        info.block(b, a, n, n) -= qi * f;
        info.block(b, b, n, n) += qi;
        vec.segment(a, n) -= f.transpose() * qi * fb;
        vec.segment(b, n) += qi * fb;
    }
    for (Eigen::Index k = 0; k < steps; ++k) {
        const Eigen::Index a = k * n;
        info.block(a, a, n, n) += h.transpose() * ri * h;
        vec.segment(a, n) += h.transpose() * ri * (ys[static_cast<std::size_t>(k)] - hb);
    }

    const MatrixXd joint_cov = info.inverse();
    const VectorXd joint_mean = joint_cov * vec;

    BatchMarginals out;
    for (Eigen::Index k = 0; k < steps; ++k) {
        out.means.push_back(joint_mean.segment(k * n, n));
        out.covs.push_back(joint_cov.block(k * n, k * n, n, n));
    }
    return out;
}

// Gauss-Newton on the scalar MAP cost
//   J(x) = (x - prior_mean)^2 / prior_var + (y - g(x))^2 / r
template <typename G, typename DG>
double gauss_newton_map(double prior_mean, double prior_var, double y, double r, G g, DG dg,
                        double x0, int max_iters = 100, double tol = 1e-14) {
    double x = x0;
    for (int i = 0; i < max_iters; ++i) {
        const double jac = dg(x);
        const double lhs = 1.0 / prior_var + jac * jac / r;
        const double rhs = jac * (y - g(x)) / r - (x - prior_mean) / prior_var;
        const double step = rhs / lhs;
        x += step;
        if (std::abs(step) < tol * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

template <typename Cost>
double fd_gradient(Cost cost, double x, double step = 1e-6) {
    return (cost(x + step) - cost(x - step)) / (2.0 * step);
}

// Acklam's inverse normal CDF (relative error below 1.2e-9).
inline double norm_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double q;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Wilson-Hilferty chi-square quantile; excellent at the large dof used by
// the NEES consistency checks.
inline double chi2_quantile(double p, double dof) {
    const double z = norm_quantile(p);
    const double t = 2.0 / (9.0 * dof);
    const double body = 1.0 - t + z * std::sqrt(t);
    return dof * body * body * body;
}

// Student-t quantile via Hill's expansion around the normal quantile; fine
// for the dof >= 30 seen in the paired Monte Carlo tests.
inline double t_quantile(double p, double dof) {
    const double z = norm_quantile(p);
    const double g1 = (z * z * z + z) / 4.0;
    const double g2 = (5.0 * std::pow(z, 5) + 16.0 * z * z * z + 3.0 * z) / 96.0;
    const double g3 =
        (3.0 * std::pow(z, 7) + 19.0 * std::pow(z, 5) + 17.0 * z * z * z - 15.0 * z) / 384.0;
    return z + g1 / dof + g2 / (dof * dof) + g3 / (dof * dof * dof);
}

// Random SPD matrix with a bounded condition number.
inline MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = normal(rng);
    }
    return scale * (a * a.transpose() + 0.2 * static_cast<double>(n) * MatrixXd::Identity(n, n));
}

inline VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
}

inline MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                              double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

}  // namespace oracles

#endif  // ULF_TESTS_ORACLES_HPP
