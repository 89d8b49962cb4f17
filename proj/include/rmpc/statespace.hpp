#pragma once

#include <Eigen/Dense>

namespace rmpc {

/// Dense matrix exponential via scaling-and-squaring with a Pade(13,13)
/// approximant. Relative accuracy better than 1e-10 for norms up to ~1e2.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M);

/// Symmetrize and clip negative eigenvalues at zero. Idempotent on
/// symmetric PSD input; used as covariance hygiene between Riccati steps.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& S);

/// Discrete-time state-space model with separate process/measurement
/// noise channels:
///
///   x_{t+1} = A x_t + B u_t + G v_t
///   y_t     = C x_t + D v_t
///
/// with v_t white with unit covariance. Construction enforces
/// G * D^T == 0 (noise channels disjoint) and D * D^T positive definite
/// (required by the filter gain inversions).
class LinearModel {
  public:
    LinearModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                Eigen::MatrixXd G, Eigen::MatrixXd D);

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }
    const Eigen::MatrixXd& C() const { return C_; }
    const Eigen::MatrixXd& G() const { return G_; }
    const Eigen::MatrixXd& D() const { return D_; }

    Eigen::Index n() const { return A_.rows(); }   // states
    Eigen::Index q() const { return B_.cols(); }   // inputs
    Eigen::Index p() const { return C_.rows(); }   // outputs
    Eigen::Index m() const { return G_.cols(); }   // noise channels

    Eigen::MatrixXd process_cov() const { return G_ * G_.transpose(); }
    Eigen::MatrixXd measurement_cov() const { return D_ * D_.transpose(); }

  private:
    Eigen::MatrixXd A_, B_, C_, G_, D_;
};

/// Continuous-time counterpart (SI units):
///
///   dx = (A x + B u) dt + G dw,   y = C x + D (dw/dt)
///
/// with w a normalized Wiener process. Only used as input to
/// discretize_zoh.
class ContinuousModel {
  public:
    ContinuousModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                    Eigen::MatrixXd G, Eigen::MatrixXd D);

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }
    const Eigen::MatrixXd& C() const { return C_; }
    const Eigen::MatrixXd& G() const { return G_; }
    const Eigen::MatrixXd& D() const { return D_; }

    Eigen::Index n() const { return A_.rows(); }
    Eigen::Index q() const { return B_.cols(); }
    Eigen::Index p() const { return C_.rows(); }
    Eigen::Index m() const { return G_.cols(); }

  private:
    Eigen::MatrixXd A_, B_, C_, G_, D_;
};

/// Gaussian state prior (mean, covariance). Construction requires the
/// covariance to be symmetric to 1e-12 relative and PSD up to a
/// -1e-12*trace eigenvalue slack.
class GaussianBelief {
  public:
    GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& covariance() const { return cov_; }
    Eigen::Index n() const { return mean_.size(); }

  private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// Zero-order-hold discretization with sample time T:
///   A = exp(Ac T),  B = \int_0^T exp(Ac s) ds Bc,  C = Cc.
/// The discrete process-noise factor G satisfies
///   G G^T = \int_0^T exp(Ac s) Gc Gc^T exp(Ac^T s) ds   (Van Loan),
/// and the measurement noise is kept white with covariance Dc Dc^T.
/// The returned model keeps process and measurement channels disjoint so
/// the G D^T = 0 invariant holds exactly.
LinearModel discretize_zoh(const ContinuousModel& cm, double sample_time);

}  // namespace rmpc
