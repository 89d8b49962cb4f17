#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rmpc/statespace.hpp"

namespace rmpc {

/// Running state of the filter. x_pred/P always refer to the one-step
/// prediction at step t; x_filt and the gains are the values produced by
/// the most recent measurement update.
struct FilterState {
    Eigen::VectorXd x_pred;  // x one step ahead given data up to t-1
    Eigen::MatrixXd P;       // prediction error covariance at t
    Eigen::VectorXd x_filt;  // filtered estimate at t (after update)
    Eigen::MatrixXd L;       // filter gain (n x p)
    Eigen::MatrixXd K;       // predictor gain, K = A * L
    long t = 0;
    bool updated = false;    // measurement update applied at this step
};

FilterState kf_init(const GaussianBelief& prior);

/// Measurement half-step: gains from the current P, filtered estimate
/// from the innovation. Leaves x_pred/P/t untouched.
///   L = P C^T (C P C^T + D D^T)^-1,   K = A L,
///   x_filt = x_pred + L (y - C x_pred).
FilterState kf_update(const FilterState& st, const LinearModel& model,
                      const Eigen::VectorXd& y);

/// Time half-step (requires kf_update at the same step):
///   x_pred' = A x_pred + K (y - C x_pred) + B u
///   P'      = A P A^T - K (C P C^T + D D^T) K^T + G G^T, PSD-projected.
FilterState kf_predict(const FilterState& st, const LinearModel& model,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& u);

/// Full step: measurement update followed by time update.
FilterState kf_step(const FilterState& st, const LinearModel& model,
                    const Eigen::VectorXd& y, const Eigen::VectorXd& u);

/// Fold kf_step over equal-length measurement/input sequences; the i-th
/// output is the state after consuming (ys[i], us[i]).
std::vector<FilterState> kf_run(const LinearModel& model, const GaussianBelief& prior,
                                const std::vector<Eigen::VectorXd>& ys,
                                const std::vector<Eigen::VectorXd>& us);

}  // namespace rmpc
