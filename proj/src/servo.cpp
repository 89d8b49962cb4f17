#include "rmpc/servo.hpp"

#include <algorithm>
#include <cmath>

#include "rmpc/errors.hpp"
#include "rmpc/random.hpp"

namespace rmpc {

void ServoParams::validate() const {
    const bool positive = Jm > 0.0 && R > 0.0 && Kt > 0.0 && rho > 0.0 &&
                          k_theta > 0.0 && Jl > 0.0 && v_sat > 0.0;
    if (!positive || L < 0.0 || beta_m < 0.0 || beta_l < 0.0) {
        throw std::invalid_argument("ServoParams: non-physical parameter value");
    }
    for (double a : alpha_l) {
        if (a < 0.0) throw std::invalid_argument("ServoParams: negative friction coefficient");
    }
    for (double a : alpha_m) {
        if (a < 0.0) throw std::invalid_argument("ServoParams: negative friction coefficient");
    }
}

ServoParams nominal_params() {
    ServoParams p;
    p.L = 0.0;
    p.Jm = 0.5;
    p.beta_m = 0.1;
    p.R = 20.0;
    p.Kt = 10.0;
    p.rho = 20.0;
    p.k_theta = 1280.2;
    p.Jl = 25.0;
    p.beta_l = 25.0;
    p.v_sat = 220.0;
    return p;
}

namespace {

constexpr double kEpsMin = 0.05;
constexpr double kEpsMax = 0.10;

ServoParams apply_perturbation(double f_Jm, double f_bm, double f_R, double f_Kt,
                               double f_rho, double f_kth, double f_Jl, double f_bl) {
    ServoParams p = nominal_params();
    p.L = 0.8;
    p.Jm *= f_Jm;
    p.beta_m *= f_bm;
    p.R *= f_R;
    p.Kt *= f_Kt;
    p.rho *= f_rho;
    p.k_theta *= f_kth;
    p.Jl *= f_Jl;
    p.beta_l *= f_bl;
    p.alpha_l = {0.5, 10.0, 0.5};
    p.alpha_m = {0.1, 2.0, 0.5};
    return p;
}

}  // namespace

ServoParams perturbed_params() {
    return apply_perturbation(1.0 + kEpsMax, 1.0 + kEpsMax, 1.0 + kEpsMin,
                              1.0 + kEpsMax, 1.0 + kEpsMin, 1.0 + kEpsMin,
                              1.0 - kEpsMax, 1.0 + kEpsMax);
}

ServoParams randomized_perturbed_params(std::uint64_t seed) {
    Rng rng(seed);
    auto factor = [&rng](double eps) { return 1.0 + rng.uniform(-eps, eps); };
    return apply_perturbation(factor(kEpsMax), factor(kEpsMax), factor(kEpsMin),
                              factor(kEpsMax), factor(kEpsMin), factor(kEpsMin),
                              factor(kEpsMax), factor(kEpsMax));
}

double friction_torque(double omega, const std::array<double, 3>& alpha) {
    if (omega == 0.0) return 0.0;
    const double sign = omega > 0.0 ? 1.0 : -1.0;
    return sign * (alpha[0] + alpha[1] * std::exp(-alpha[2] * std::abs(omega)));
}

PlantState plant_derivative(const PlantState& s, double voltage, const ServoParams& p) {
    const double V = std::clamp(voltage, -p.v_sat, p.v_sat);

    PlantState d;
    double i_m;
    if (p.L > 0.0) {
        i_m = s.i_m;
        d.i_m = (V - p.R * s.i_m - p.Kt * s.omega_m) / p.L;
    } else {
        i_m = (V - p.Kt * s.omega_m) / p.R;  // algebraic armature loop
        d.i_m = 0.0;
    }
    const double torque_motor = p.Kt * i_m;
    const double torque_shaft = (p.k_theta / p.rho) * (s.theta_m / p.rho - s.theta_l);

    d.theta_l = s.omega_l;
    d.omega_l = (p.rho * torque_shaft - p.beta_l * s.omega_l -
                 friction_torque(s.omega_l, p.alpha_l)) / p.Jl;
    d.theta_m = s.omega_m;
    d.omega_m = (torque_motor - torque_shaft - p.beta_m * s.omega_m -
                 friction_torque(s.omega_m, p.alpha_m)) / p.Jm;
    return d;
}

namespace {

PlantState axpy(const PlantState& s, double h, const PlantState& d) {
    PlantState r;
    r.theta_l = s.theta_l + h * d.theta_l;
    r.omega_l = s.omega_l + h * d.omega_l;
    r.theta_m = s.theta_m + h * d.theta_m;
    r.omega_m = s.omega_m + h * d.omega_m;
    r.i_m = s.i_m + h * d.i_m;
    return r;
}

bool finite(const PlantState& s) {
    return std::isfinite(s.theta_l) && std::isfinite(s.omega_l) &&
           std::isfinite(s.theta_m) && std::isfinite(s.omega_m) && std::isfinite(s.i_m);
}

}  // namespace

PlantState simulate_plant_step(const PlantState& s, double voltage, const ServoParams& p,
                               double sample_time, int substeps) {
    if (!(sample_time > 0.0) || substeps < 1) {
        throw std::invalid_argument("simulate_plant_step: bad step configuration");
    }
    const double V = std::clamp(voltage, -p.v_sat, p.v_sat);
    const double h = sample_time / substeps;

    PlantState x = s;
    for (int k = 0; k < substeps; ++k) {
        const PlantState k1 = plant_derivative(x, V, p);
        const PlantState k2 = plant_derivative(axpy(x, 0.5 * h, k1), V, p);
        const PlantState k3 = plant_derivative(axpy(x, 0.5 * h, k2), V, p);
        const PlantState k4 = plant_derivative(axpy(x, h, k3), V, p);

        PlantState incr;
        incr.theta_l = (k1.theta_l + 2.0 * k2.theta_l + 2.0 * k3.theta_l + k4.theta_l) / 6.0;
        incr.omega_l = (k1.omega_l + 2.0 * k2.omega_l + 2.0 * k3.omega_l + k4.omega_l) / 6.0;
        incr.theta_m = (k1.theta_m + 2.0 * k2.theta_m + 2.0 * k3.theta_m + k4.theta_m) / 6.0;
        incr.omega_m = (k1.omega_m + 2.0 * k2.omega_m + 2.0 * k3.omega_m + k4.omega_m) / 6.0;
        incr.i_m = (k1.i_m + 2.0 * k2.i_m + 2.0 * k3.i_m + k4.i_m) / 6.0;
        x = axpy(x, h, incr);

        if (!finite(x)) {
            throw DivergenceError("simulate_plant_step: state left the representable range");
        }
    }
    return x;
}

NoiseSpec NoiseSpec::servo_default() {
    NoiseSpec ns;
    ns.process_std = Eigen::VectorXd::Zero(4);
    ns.process_std << 0.0, 0.01, 0.0, 0.1;
    ns.meas_std = 0.01;
    return ns;
}

void NoiseSpec::validate(Eigen::Index n) const {
    if (process_std.size() != n) {
        throw std::invalid_argument("NoiseSpec: process_std length must match state count");
    }
    if (process_std.minCoeff() < 0.0 || meas_std <= 0.0) {
        throw std::invalid_argument("NoiseSpec: standard deviations must be nonnegative "
                                    "(measurement strictly positive)");
    }
}

ContinuousModel build_nominal_continuous(const ServoParams& p, const NoiseSpec& noise) {
    p.validate();
    noise.validate(4);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
    A(0, 1) = 1.0;
    A(1, 0) = -p.k_theta / p.Jl;
    A(1, 1) = -p.beta_l / p.Jl;
    A(1, 2) = p.k_theta / (p.rho * p.Jl);
    A(2, 3) = 1.0;
    A(3, 0) = p.k_theta / (p.rho * p.Jm);
    A(3, 2) = -p.k_theta / (p.rho * p.rho * p.Jm);
    A(3, 3) = -(p.beta_m + p.Kt * p.Kt / p.R) / p.Jm;

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 1);
    B(3, 0) = p.Kt / (p.R * p.Jm);

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, 4);
    C(0, 0) = 1.0;

    // Disjoint noise channels: four process columns, one measurement
    // column, so G D^T = 0 holds by block structure.
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(4, 5);
    G.leftCols(4) = noise.process_std.asDiagonal();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(1, 5);
    D(0, 4) = noise.meas_std;

    return ContinuousModel(A, B, C, G, D);
}

LinearModel build_nominal_linear(const ServoParams& p, const NoiseSpec& noise,
                                 double sample_time) {
    return discretize_zoh(build_nominal_continuous(p, noise), sample_time);
}

}  // namespace rmpc
