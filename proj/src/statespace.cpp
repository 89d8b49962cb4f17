#include "rmpc/statespace.hpp"

#include <cmath>
#include <string>

#include "rmpc/errors.hpp"

namespace rmpc {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M) {
    require(M.rows() == M.cols(), "matrix_exponential: matrix must be square");
    require(M.allFinite(), "matrix_exponential: input has non-finite entries");

    // Pade(13,13) coefficients.
    static constexpr double b[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};

    const Eigen::Index n = M.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    // Scale so the 1-norm falls below the Pade(13) accuracy bound.
    double norm = M.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 5.37) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 5.37)));
    }
    const Eigen::MatrixXd As = M / std::pow(2.0, squarings);

    const Eigen::MatrixXd A2 = As * As;
    const Eigen::MatrixXd A4 = A2 * A2;
    const Eigen::MatrixXd A6 = A4 * A2;

    Eigen::MatrixXd U = A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) +
                        b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I;
    U = As * U;
    const Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) +
                              b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Eigen::MatrixXd E = (V - U).partialPivLu().solve(V + U);
    for (int i = 0; i < squarings; ++i) E = E * E;

    if (!E.allFinite()) throw NumericalError("matrix_exponential: overflow");
    return E;
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& S) {
    require(S.rows() == S.cols(), "psd_project: matrix must be square");
    require(S.allFinite(), "psd_project: input has non-finite entries");

    const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
        throw NumericalError("psd_project: eigendecomposition failed");
    }
    if (es.eigenvalues().minCoeff() >= 0.0) return sym;
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

LinearModel::LinearModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                         Eigen::MatrixXd G, Eigen::MatrixXd D)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)),
      G_(std::move(G)), D_(std::move(D)) {
    const Eigen::Index n = A_.rows();
    require(A_.cols() == n, "LinearModel: A must be square");
    require(B_.rows() == n, "LinearModel: B row count must match state dimension");
    require(C_.cols() == n, "LinearModel: C column count must match state dimension");
    require(G_.rows() == n, "LinearModel: G row count must match state dimension");
    require(D_.rows() == C_.rows(), "LinearModel: D row count must match output dimension");
    require(D_.cols() == G_.cols(), "LinearModel: G and D must share the noise dimension");

    // The filter equations assume disjoint noise channels; this must hold
    // exactly as stored, not just approximately.
    if (!(G_ * D_.transpose()).isZero(0.0)) {
        throw std::invalid_argument("LinearModel: G * D^T must be exactly zero");
    }

    const Eigen::MatrixXd R = D_ * D_.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(R);
    if (llt.info() != Eigen::Success || R.diagonal().minCoeff() <= 0.0) {
        throw std::invalid_argument("LinearModel: D * D^T must be positive definite");
    }
}

ContinuousModel::ContinuousModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                                 Eigen::MatrixXd G, Eigen::MatrixXd D)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)),
      G_(std::move(G)), D_(std::move(D)) {
    const Eigen::Index n = A_.rows();
    require(A_.cols() == n, "ContinuousModel: A must be square");
    require(B_.rows() == n, "ContinuousModel: B row count must match state dimension");
    require(C_.cols() == n, "ContinuousModel: C column count must match state dimension");
    require(G_.rows() == n, "ContinuousModel: G row count must match state dimension");
    require(D_.rows() == C_.rows(), "ContinuousModel: D row count must match output dimension");
    require(D_.cols() == G_.cols(), "ContinuousModel: G and D must share the noise dimension");
}

GaussianBelief::GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
    require(cov_.rows() == mean_.size() && cov_.cols() == mean_.size(),
            "GaussianBelief: covariance shape must match mean");
    require(mean_.allFinite() && cov_.allFinite(), "GaussianBelief: non-finite entries");

    const double scale = cov_.cwiseAbs().maxCoeff();
    const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        throw std::invalid_argument("GaussianBelief: covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov_ + cov_.transpose()),
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * cov_.trace()) {
        throw std::invalid_argument("GaussianBelief: covariance is not PSD");
    }
}

LinearModel discretize_zoh(const ContinuousModel& cm, double sample_time) {
    if (!(sample_time > 0.0)) {
        throw std::invalid_argument("discretize_zoh: sample time must be positive");
    }
    const Eigen::Index n = cm.n();
    const Eigen::Index q = cm.q();
    const Eigen::Index m = cm.m();

    // State and input maps from one augmented exponential:
    //   exp([Ac Bc; 0 0] T) = [A B; 0 I].
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + q, n + q);
    aug.topLeftCorner(n, n) = cm.A();
    aug.topRightCorner(n, q) = cm.B();
    const Eigen::MatrixXd aug_exp = matrix_exponential(aug * sample_time);
    if (!aug_exp.allFinite()) {
        throw NumericalError("discretize_zoh: non-finite matrix exponential");
    }
    const Eigen::MatrixXd A = aug_exp.topLeftCorner(n, n);
    const Eigen::MatrixXd B = aug_exp.topRightCorner(n, q);

    // Van Loan integral for the discrete process-noise covariance:
    //   exp([-Ac GcGc^T; 0 Ac^T] T) = [* F12; 0 F22],  Qd = F22^T F12.
    Eigen::MatrixXd vl = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    vl.topLeftCorner(n, n) = -cm.A();
    vl.topRightCorner(n, n) = cm.G() * cm.G().transpose();
    vl.bottomRightCorner(n, n) = cm.A().transpose();
    const Eigen::MatrixXd vl_exp = matrix_exponential(vl * sample_time);
    const Eigen::MatrixXd Qd =
        psd_project(vl_exp.bottomRightCorner(n, n).transpose() * vl_exp.topRightCorner(n, n));

    // Square-root factor of Qd through the eigendecomposition; robust to
    // rank-deficient noise covariances.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Qd);
    if (es.info() != Eigen::Success) {
        throw NumericalError("discretize_zoh: noise factorization failed");
    }
    const Eigen::MatrixXd Gd =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    // Keep the process and measurement channels in disjoint columns so the
    // exact G D^T = 0 invariant survives discretization.
    const Eigen::Index p = cm.p();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n + m);
    G.leftCols(n) = Gd;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p, n + m);
    D.rightCols(m) = cm.D();

    return LinearModel(A, B, cm.C(), G, D);
}

}  // namespace rmpc
