#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rmpc/statespace.hpp"

namespace rmpc {

/// Which input term the cost penalizes. DeltaU penalizes the predicted
/// input increments (the first increment is taken against the previously
/// applied input); U penalizes the inputs themselves, which reproduces
/// the textbook closed-form gain with no memory of the last input.
enum class InputPenalty { DeltaU, U };

/// Horizons and stage weights. Weights are stored per step; a
/// single-entry vector is repeated across the horizon.
struct MpcConfig {
    int Hp = 1;                        // prediction horizon
    int Hu = 1;                        // control horizon (inputs free for Hu steps)
    std::vector<Eigen::MatrixXd> Qk;   // output-error weights, size 1 or Hp
    std::vector<Eigen::MatrixXd> Rk;   // input weights, size 1 or Hu
    InputPenalty penalize = InputPenalty::DeltaU;

    static MpcConfig uniform(int Hp, int Hu, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                             InputPenalty penalize = InputPenalty::DeltaU);
    /// Scalar-weight convenience for single-input single-output plants.
    static MpcConfig uniform_scalar(int Hp, int Hu, double q, double r,
                                    InputPenalty penalize = InputPenalty::DeltaU);

    const Eigen::MatrixXd& Q_at(int k) const;  // k in [0, Hp)
    const Eigen::MatrixXd& R_at(int k) const;  // k in [0, Hu)
    void validate(Eigen::Index p, Eigen::Index q) const;
};

/// Stacked horizon maps: predicted outputs = Psi x + Theta u_plan, with
/// the input held at its last planned value beyond the control horizon.
/// Psi is (p Hp) x n, Theta is (p Hp) x (q Hu) and block lower
/// triangular; its last block column carries the partial sums of CA^k B
/// produced by the held input.
struct PredictionMatrices {
    Eigen::MatrixXd Psi;
    Eigen::MatrixXd Theta;
};

struct MpcSolution {
    Eigen::VectorXd u_now;              // first input block of the plan
    Eigen::VectorXd u_plan;             // stacked inputs over the control horizon
    Eigen::VectorXd predicted_outputs;  // Psi x + Theta u_plan
    double cost = 0.0;                  // objective value at the minimizer
};

PredictionMatrices build_prediction(const LinearModel& model, const MpcConfig& cfg);

/// Exact unconstrained minimizer of the receding-horizon quadratic cost
/// for the current state estimate, stacked reference and last applied
/// input, via an SPD solve of the normal equations. Throws IllPosedError
/// when the normal-equations matrix is singular to working precision.
MpcSolution solve_mpc(const PredictionMatrices& pm, const MpcConfig& cfg,
                      const Eigen::VectorXd& x_hat, const Eigen::VectorXd& r_stack,
                      const Eigen::VectorXd& u_prev);

/// Stack the next Hp reference samples r(t+1) ... r(t+Hp).
Eigen::VectorXd stack_reference(const std::function<Eigen::VectorXd(long)>& r_fn,
                                long t, int Hp);

}  // namespace rmpc
