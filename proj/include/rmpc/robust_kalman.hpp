#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rmpc/kalman.hpp"
#include "rmpc/statespace.hpp"

namespace rmpc {

/// State of the robust filter: the standard fields plus the deflated
/// covariance V = (P^-1 - theta I)^-1, the deflation parameter theta and
/// the model tolerance c (radius of the KL ball, fixed a priori).
struct RobustFilterState : FilterState {
    Eigen::MatrixXd V;
    double theta = 0.0;
    double c = 0.0;
};

/// KL radius reached by deflating a prediction covariance P with a given
/// theta:
///   gamma(theta) = log det(I - theta P) + tr[(I - theta P)^-1] - n.
/// gamma(0) = 0 and gamma is strictly increasing on [0, 1/lambda_max(P)),
/// diverging at the right endpoint. Throws std::domain_error outside that
/// interval.
double kl_radius(const Eigen::MatrixXd& P, double theta);

/// Invert kl_radius by bisection: the unique theta > 0 with
/// |gamma(theta) - c| <= tol. The bracket's upper endpoint starts at
/// 0.5/lambda_max(P) and is pushed toward the boundary until gamma
/// exceeds c. Throws std::domain_error for c <= 0 and NumericalError if
/// the iteration cap (128) is hit.
double solve_theta(const Eigen::MatrixXd& P, double c, double tol = 1e-10);

RobustFilterState rkf_init(const GaussianBelief& prior, double c);

/// Measurement half-step of the robust recursion: solve for theta from
/// the current P, deflate to V, then apply the standard update formulas
/// with gains taken from V instead of P. c = 0 short-circuits to
/// theta = 0, V = P exactly.
RobustFilterState rkf_update(const RobustFilterState& st, const LinearModel& model,
                             const Eigen::VectorXd& y);

/// Time half-step (requires rkf_update at the same step):
///   x_pred' = A x_pred + K (y - C x_pred) + B u
///   P'      = A V A^T - K (C V C^T + D D^T) K^T + G G^T, PSD-projected.
RobustFilterState rkf_predict(const RobustFilterState& st, const LinearModel& model,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& u);

/// Full step: rkf_update followed by rkf_predict.
RobustFilterState rkf_step(const RobustFilterState& st, const LinearModel& model,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& u);

std::vector<RobustFilterState> rkf_run(const LinearModel& model, const GaussianBelief& prior,
                                       double c, const std::vector<Eigen::VectorXd>& ys,
                                       const std::vector<Eigen::VectorXd>& us);

}  // namespace rmpc
