#include "ulf/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace ulf {

namespace {

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace

bool passes_psd_floor(const MatrixXd& sym, double scale) {
    if (!all_finite(sym)) return false;
    if (sym.rows() == 0) return true;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return false;
    const double floor = -scale * sym.trace() / static_cast<double>(sym.rows());
    return es.eigenvalues().minCoeff() >= floor;
}

GaussianDensity make_gaussian(const VectorXd& mean, const MatrixXd& cov) {
    if (cov.rows() != cov.cols() || mean.size() != cov.rows()) {
        std::ostringstream os;
        os << "make_gaussian: mean dim " << mean.size() << " vs cov " << cov.rows() << "x"
           << cov.cols();
        throw DimensionMismatch(os.str());
    }
    if (!mean.allFinite() || !all_finite(cov)) {
        throw NotPositiveSemiDefinite("make_gaussian: non-finite input");
    }
    MatrixXd sym = symmetrized(cov);
    if (!passes_psd_floor(sym)) {
        throw NotPositiveSemiDefinite("make_gaussian: covariance below PSD floor");
    }
    return GaussianDensity{mean, std::move(sym)};
}

AffineModel make_affine(const MatrixXd& slope, const VectorXd& offset, const MatrixXd& lin_err_cov) {
    const Eigen::Index m = slope.rows();
    if (offset.size() != m || lin_err_cov.rows() != m || lin_err_cov.cols() != m) {
        std::ostringstream os;
        os << "make_affine: rows(A)=" << m << ", len(b)=" << offset.size() << ", dim(Omega)="
           << lin_err_cov.rows() << "x" << lin_err_cov.cols();
        throw DimensionMismatch(os.str());
    }
    if (!all_finite(slope) || !offset.allFinite() || !all_finite(lin_err_cov)) {
        throw NonFiniteOutput("make_affine: non-finite input");
    }
    MatrixXd omega = symmetrized(lin_err_cov);
    if (!passes_psd_floor(omega)) {
        throw NotPositiveSemiDefinite("make_affine: Omega below PSD floor");
    }
    return AffineModel{slope, offset, std::move(omega)};
}

NonlinearModel make_nonlinear(std::function<VectorXd(const VectorXd&)> func,
                              std::optional<std::function<MatrixXd(const VectorXd&)>> jacobian,
                              MatrixXd noise_cov, Eigen::Index input_dim, Eigen::Index output_dim,
                              std::function<VectorXd(const VectorXd&)> residual_wrap) {
    if (!func) throw InvalidArgument("make_nonlinear: func required");
    if (noise_cov.rows() != output_dim || noise_cov.cols() != output_dim) {
        throw DimensionMismatch("make_nonlinear: noise_cov dim must equal output dim");
    }
    MatrixXd q = symmetrized(noise_cov);
    if (!passes_psd_floor(q)) {
        throw NotPositiveSemiDefinite("make_nonlinear: noise covariance below PSD floor");
    }
    NonlinearModel model;
    model.func = std::move(func);
    model.jacobian = std::move(jacobian);
    model.noise_cov = std::move(q);
    model.input_dim = input_dim;
    model.output_dim = output_dim;
    model.residual_wrap = std::move(residual_wrap);
    return model;
}

MatrixXd safe_cholesky(const MatrixXd& cov) {
    if (cov.rows() != cov.cols()) {
        throw DimensionMismatch("safe_cholesky: matrix not square");
    }
    const Eigen::Index n = cov.rows();
    if (n == 0) return MatrixXd(0, 0);
    const MatrixXd sym = symmetrized(cov);
    const double unit = sym.trace() / static_cast<double>(n);
    const MatrixXd eye = MatrixXd::Identity(n, n);

    double jitter = 0.0;
    while (true) {
        Eigen::LLT<MatrixXd> llt(sym + jitter * eye);
        if (llt.info() == Eigen::Success) {
            MatrixXd lower = llt.matrixL();
            if (lower.allFinite()) return lower;
        }
        if (jitter == 0.0) {
            jitter = 1e-12 * unit;
            if (jitter <= 0.0) break;
        } else if (jitter < 1e-6 * unit) {
            jitter = std::min(jitter * 10.0, 1e-6 * unit);
        } else {
            break;
        }
    }
    throw FactorizationFailed("safe_cholesky: jitter cap reached");
}

GaussianDensity marginal_of_affine(const GaussianDensity& density, const AffineModel& model,
                                   const MatrixXd& noise_cov) {
    if (model.in_dim() != density.dim()) {
        throw DimensionMismatch("marginal_of_affine: model input dim vs density dim");
    }
    if (noise_cov.rows() != model.out_dim() || noise_cov.cols() != model.out_dim()) {
        throw DimensionMismatch("marginal_of_affine: noise_cov dim vs model output dim");
    }
    VectorXd mean = model.slope * density.mean + model.offset;
    MatrixXd cov = model.slope * density.cov * model.slope.transpose() + noise_cov + model.lin_err_cov;
    return make_gaussian(mean, cov);
}

}  // namespace ulf
