#include "ulf/linearize.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace ulf {

QuadratureRule QuadratureRule::unscented(double alpha, double beta, std::optional<double> kappa) {
    if (!(alpha > 0.0)) throw InvalidArgument("unscented rule: alpha must be > 0");
    return {UnscentedRule{alpha, beta, kappa}};
}

QuadratureRule QuadratureRule::monte_carlo(std::int64_t sample_count, std::uint64_t seed) {
    if (sample_count < 2) throw InvalidArgument("monte carlo rule: sample_count must be >= 2");
    return {MonteCarloRule{sample_count, seed}};
}

double default_fd_step(const VectorXd& at) {
    const double scale = at.size() == 0 ? 1.0 : std::max(1.0, at.lpNorm<Eigen::Infinity>());
    return 1e-6 * scale;
}

MatrixXd finite_diff_jacobian(const NonlinearModel& model, const VectorXd& at, double step) {
    if (!(step > 0.0)) throw InvalidArgument("finite_diff_jacobian: step must be > 0");
    if (at.size() != model.input_dim) {
        throw DimensionMismatch("finite_diff_jacobian: point dim vs model input dim");
    }
    MatrixXd jac(model.output_dim, model.input_dim);
    VectorXd xp = at;
    VectorXd xm = at;
    for (Eigen::Index j = 0; j < model.input_dim; ++j) {
        xp(j) += step;
        xm(j) -= step;
        const VectorXd gp = model.func(xp);
        const VectorXd gm = model.func(xm);
        if (!gp.allFinite() || !gm.allFinite()) {
            throw NonFiniteOutput("finite_diff_jacobian: model returned NaN/Inf");
        }
        jac.col(j) = (gp - gm) / (2.0 * step);
        xp(j) = at(j);
        xm(j) = at(j);
    }
    return jac;
}

AffineModel linearize_analytical(const NonlinearModel& model, const VectorXd& at,
                                 bool allow_finite_diff) {
    if (at.size() != model.input_dim) {
        throw DimensionMismatch("linearize_analytical: point dim vs model input dim");
    }
    MatrixXd slope;
    if (model.jacobian) {
        slope = (*model.jacobian)(at);
        if (slope.rows() != model.output_dim || slope.cols() != model.input_dim) {
            throw DimensionMismatch("linearize_analytical: jacobian shape");
        }
    } else if (allow_finite_diff) {
        slope = finite_diff_jacobian(model, at, default_fd_step(at));
    } else {
        throw JacobianUnavailable("linearize_analytical: no jacobian and finite differencing disabled");
    }
    const VectorXd value = model.func(at);
    if (!value.allFinite() || !slope.allFinite()) {
        throw NonFiniteOutput("linearize_analytical: model returned NaN/Inf");
    }
    VectorXd offset = value - slope * at;
    return AffineModel{std::move(slope), std::move(offset),
                       MatrixXd::Zero(model.output_dim, model.output_dim)};
}

WeightedSampleSet quadrature_points(const GaussianDensity& density, const QuadratureRule& rule) {
    const Eigen::Index n = density.dim();
    if (n == 0) throw InvalidArgument("quadrature_points: empty density");

    WeightedSampleSet set;
    if (const auto* ut = std::get_if<UnscentedRule>(&rule.kind)) {
        const double kappa = ut->kappa ? *ut->kappa : 3.0 - static_cast<double>(n);
        const double lambda = ut->alpha * ut->alpha * (static_cast<double>(n) + kappa) - n;
        const double scale = static_cast<double>(n) + lambda;
        if (!(scale > 0.0)) {
            throw InvalidArgument("quadrature_points: n + lambda must be > 0");
        }
        const MatrixXd spread = std::sqrt(scale) * safe_cholesky(density.cov);
        set.points.resize(n, 2 * n + 1);
        set.weights_mean.resize(2 * n + 1);
        set.weights_cov.resize(2 * n + 1);
        set.points.col(0) = density.mean;
        set.weights_mean(0) = lambda / scale;
        set.weights_cov(0) = lambda / scale + (1.0 - ut->alpha * ut->alpha + ut->beta);
        for (Eigen::Index i = 0; i < n; ++i) {
            set.points.col(1 + 2 * i) = density.mean + spread.col(i);
            set.points.col(2 + 2 * i) = density.mean - spread.col(i);
            set.weights_mean(1 + 2 * i) = set.weights_mean(2 + 2 * i) = 0.5 / scale;
            set.weights_cov(1 + 2 * i) = set.weights_cov(2 + 2 * i) = 0.5 / scale;
        }
    } else if (const auto* mc = std::get_if<MonteCarloRule>(&rule.kind)) {
        const MatrixXd lower = safe_cholesky(density.cov);
        std::mt19937_64 rng(mc->seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        set.points.resize(n, mc->sample_count);
        for (Eigen::Index c = 0; c < mc->sample_count; ++c) {
            VectorXd z(n);
            for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
            set.points.col(c) = density.mean + lower * z;
        }
        const double w = 1.0 / static_cast<double>(mc->sample_count);
        set.weights_mean = VectorXd::Constant(mc->sample_count, w);
        set.weights_cov = set.weights_mean;
    } else {
        // Cubature: 2n points at x +- sqrt(n P)_i, weights 1/(2n).
        const MatrixXd spread = std::sqrt(static_cast<double>(n)) * safe_cholesky(density.cov);
        set.points.resize(n, 2 * n);
        for (Eigen::Index i = 0; i < n; ++i) {
            set.points.col(2 * i) = density.mean + spread.col(i);
            set.points.col(2 * i + 1) = density.mean - spread.col(i);
        }
        const double w = 0.5 / static_cast<double>(n);
        set.weights_mean = VectorXd::Constant(2 * n, w);
        set.weights_cov = set.weights_mean;
    }
    return set;
}

namespace {

struct QuadratureEval {
    MatrixXd values;    // m x count, g applied column-wise
    VectorXd in_mean;   // weighted mean of the points
    MatrixXd in_cov;    // weighted spread of the points
    VectorXd zbar;
    MatrixXd psi;
    MatrixXd phi;
};

QuadratureEval evaluate_moments(const NonlinearModel& model, const WeightedSampleSet& set) {
    const Eigen::Index count = set.count();
    const Eigen::Index n = set.points.rows();
    const Eigen::Index m = model.output_dim;

    QuadratureEval ev;
    ev.values.resize(m, count);
    for (Eigen::Index c = 0; c < count; ++c) {
        ev.values.col(c) = model.func(set.points.col(c));
    }
    if (!ev.values.allFinite()) {
        throw NonFiniteOutput("statistical_moments: model returned NaN/Inf at a quadrature point");
    }

    ev.in_mean = set.points * set.weights_mean;
    ev.zbar = ev.values * set.weights_mean;

    ev.in_cov = MatrixXd::Zero(n, n);
    ev.psi = MatrixXd::Zero(n, m);
    ev.phi = MatrixXd::Zero(m, m);
    for (Eigen::Index c = 0; c < count; ++c) {
        const VectorXd dx = set.points.col(c) - ev.in_mean;
        const VectorXd dz = ev.values.col(c) - ev.zbar;
        const double w = set.weights_cov(c);
        ev.in_cov.noalias() += w * dx * dx.transpose();
        ev.psi.noalias() += w * dx * dz.transpose();
        ev.phi.noalias() += w * dz * dz.transpose();
    }
    ev.in_cov = symmetrized(ev.in_cov);
    ev.phi = symmetrized(ev.phi);
    return ev;
}

MatrixXd clip_to_psd(const MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
        throw NonFiniteOutput("clip_to_psd: eigendecomposition failed");
    }
    VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    return symmetrized(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

StatMoments statistical_moments(const NonlinearModel& model, const GaussianDensity& density,
                                const QuadratureRule& rule) {
    if (density.dim() != model.input_dim) {
        throw DimensionMismatch("statistical_moments: density dim vs model input dim");
    }
    const WeightedSampleSet set = quadrature_points(density, rule);
    QuadratureEval ev = evaluate_moments(model, set);
    return StatMoments{std::move(ev.zbar), std::move(ev.psi), std::move(ev.phi)};
}

AffineModel linearize_statistical(const NonlinearModel& model, const GaussianDensity& density,
                                  const QuadratureRule& rule) {
    if (density.dim() != model.input_dim) {
        throw DimensionMismatch("linearize_statistical: density dim vs model input dim");
    }
    {
        Eigen::LLT<MatrixXd> llt(density.cov);
        if (llt.info() != Eigen::Success) {
            throw SingularDensity("linearize_statistical: expansion covariance not PD");
        }
    }
    const WeightedSampleSet set = quadrature_points(density, rule);
    const QuadratureEval ev = evaluate_moments(model, set);

    // A = Psi^T P^-1 via Cholesky solve on the sample moments; never form P^-1.
    Eigen::LLT<MatrixXd> llt(ev.in_cov);
    if (llt.info() != Eigen::Success) {
        throw SingularDensity("linearize_statistical: sample covariance not PD");
    }
    MatrixXd slope = llt.solve(ev.psi).transpose();
    VectorXd offset = ev.zbar - slope * ev.in_mean;
    MatrixXd omega = symmetrized(ev.phi - slope * ev.in_cov * slope.transpose());
    omega = clip_to_psd(omega);

    if (!slope.allFinite() || !offset.allFinite() || !omega.allFinite()) {
        throw NonFiniteOutput("linearize_statistical: non-finite result");
    }
    return AffineModel{std::move(slope), std::move(offset), std::move(omega)};
}

}  // namespace ulf
