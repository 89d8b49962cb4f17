#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "rmpc/statespace.hpp"

namespace rmpc {

/// Physical parameters of the DC-servomechanism benchmark: motor, gear
/// box, elastic shaft and load, plus the Coulomb/deadzone friction
/// coefficients of the nonlinear model.
struct ServoParams {
    double L = 0.0;        // armature inductance [H]
    double Jm = 0.0;       // motor inertia [kg m^2]
    double beta_m = 0.0;   // motor viscous friction [N m s]
    double R = 0.0;        // armature resistance [ohm]
    double Kt = 0.0;       // motor constant [N m / A]
    double rho = 0.0;      // gear ratio
    double k_theta = 0.0;  // torsional rigidity [N m / rad]
    double Jl = 0.0;       // load inertia [kg m^2]
    double beta_l = 0.0;   // load viscous friction [N m s]
    std::array<double, 3> alpha_l{0.0, 0.0, 0.0};  // load nonlinear friction
    std::array<double, 3> alpha_m{0.0, 0.0, 0.0};  // motor nonlinear friction
    double v_sat = 220.0;  // armature voltage range [V]

    void validate() const;
};

/// Table of nominal parameter values (linear model, L = 0, no nonlinear
/// friction).
ServoParams nominal_params();

/// Fixed perturbed parameter set used as the "real" plant: +-5% on the
/// well-known parameters, +-10% on the uncertain ones (load inertia
/// perturbed downward), nonzero inductance and nonlinear friction.
ServoParams perturbed_params();

/// Randomized variant: each perturbation factor drawn uniformly within
/// its +-5% / +-10% class; inductance and friction coefficients as in
/// perturbed_params().
ServoParams randomized_perturbed_params(std::uint64_t seed);

struct PlantState {
    double theta_l = 0.0;  // load angle [rad]
    double omega_l = 0.0;  // load velocity [rad/s]
    double theta_m = 0.0;  // motor angle [rad]
    double omega_m = 0.0;  // motor velocity [rad/s]
    double i_m = 0.0;      // armature current [A]; a state only when L > 0
};

/// Coulomb plus deadzone friction torque:
///   T_f = a0 sgn(w) + a1 exp(-a2 |w|) sgn(w),   sgn(0) = 0.
double friction_torque(double omega, const std::array<double, 3>& alpha);

/// Time derivative of the plant state under an applied voltage. The
/// voltage is saturated to +-v_sat at this input stage. With L = 0 the
/// armature current is algebraic and the returned i_m derivative is 0.
PlantState plant_derivative(const PlantState& s, double voltage, const ServoParams& p);

/// Classical fixed-step RK4 over one sample period with the (saturated)
/// voltage held constant. Throws DivergenceError if the state leaves the
/// representable range.
PlantState simulate_plant_step(const PlantState& s, double voltage, const ServoParams& p,
                               double sample_time, int substeps);

/// Noise shaping for the nominal model: per-state process-noise
/// densities and the measurement-noise standard deviation on the load
/// angle. Defaults chosen at plausible magnitudes relative to the
/// rad-scale reference.
struct NoiseSpec {
    Eigen::VectorXd process_std;  // one entry per state, units per sqrt(s)
    double meas_std = 0.01;       // [rad]

    static NoiseSpec servo_default();
    void validate(Eigen::Index n) const;
};

/// Continuous-time linearization around the origin with the nonlinear
/// friction removed, L = 0 and no saturation; states
/// [theta_l, omega_l, theta_m, omega_m], input the armature voltage,
/// output the load angle.
ContinuousModel build_nominal_continuous(const ServoParams& p, const NoiseSpec& noise);

/// The linearization above discretized by zero-order hold.
LinearModel build_nominal_linear(const ServoParams& p, const NoiseSpec& noise,
                                 double sample_time);

}  // namespace rmpc
