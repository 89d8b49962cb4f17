#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmpc/mpc.hpp"
#include "rmpc/servo.hpp"
#include "rmpc/statespace.hpp"

namespace rmpc {

/// Periodic square wave, high for the first duty*period of each period
/// (left-closed sample intervals).
double square_wave(double t, double period, double duty, double low, double high);

struct Waveform {
    enum class Kind { Square, Constant };
    Kind kind = Kind::Constant;
    double period = 1.0;
    double duty = 0.5;
    double low = 0.0;
    double high = 0.0;

    static Waveform square(double period, double duty, double low, double high);
    static Waveform constant(double level);
    double value(double t) const;
    bool operator==(const Waveform&) const = default;
};

enum class PlantKind { LinearNominal, NonlinearPerturbed };
enum class ControllerKind { Smpc, Rmpc };

/// One closed-loop experiment: plant selection, controller selection,
/// reference, horizons/weights and noise realization seed. Within one
/// sample period the order is fixed: measure, filter update, control,
/// filter predict, integrate.
struct Scenario {
    std::string name = "scenario";
    PlantKind plant = PlantKind::LinearNominal;
    ControllerKind controller = ControllerKind::Smpc;
    double c = 0.0;  // KL tolerance for the robust filter runs
    double duration = 200.0;
    double sample_time = 0.1;
    Waveform reference;
    std::uint64_t seed = 1;
    MpcConfig mpc;
    NoiseSpec noise = NoiseSpec::servo_default();
    bool inject_noise = true;
    int substeps = 100;
    bool randomized_perturbation = false;
    std::optional<GaussianBelief> prior;  // default: zero mean, covariance G G^T

    /// Volts per normalized input unit. The filter and the MPC work on
    /// the nominal model with the input normalized by the actuator range
    /// (so the scalar weights act on comparable magnitudes, as in the
    /// original benchmark formulation); the plant receives volts.
    double input_scale = 440.0;

    /// When true the controller is fed the true future reference over
    /// the horizon; the optimal plan then leaves the current level up to
    /// Hp steps before every edge. Default is the causal policy (hold
    /// the current reference), whose transients stay next to the edge.
    bool preview_reference = false;

    void validate() const;
    std::string controller_label() const;  // "S-MPC" or "R-MPC(c=...)"
};

struct Metrics {
    double tracking_rmse_settled = 0.0;  // RMSE of y_true - r outside transient windows
    double control_energy = 0.0;         // sum u^2 * T over the full run
    double smoothness = 0.0;             // sum (u_k - u_{k-1})^2 outside transient windows
    double max_overshoot = 0.0;          // worst post-settling excursion per edge
};

struct ScenarioResult {
    std::string name;
    ControllerKind controller = ControllerKind::Smpc;
    double c = 0.0;
    double sample_time = 0.1;
    int n_states = 0;  // keeps the CSV schema stable even for empty traces

    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> y;       // measured output
    std::vector<double> y_true;  // noiseless load angle
    std::vector<double> u;       // voltage applied to the plant
    std::vector<double> theta;   // robust deflation parameter (NaN for S-MPC)
    std::vector<Eigen::VectorXd> x_hat;

    Metrics metrics;
    bool failed = false;
    std::string failure;
};

/// Metrics from raw traces; the transient window after each reference
/// edge (the start counts as one) is excluded from the RMSE.
Metrics compute_metrics(const std::vector<double>& t, const std::vector<double>& r,
                        const std::vector<double>& y_true, const std::vector<double>& u,
                        double sample_time, double settle_window = 10.0);

ScenarioResult run_scenario(const Scenario& sc);

/// Run independent scenarios, optionally in parallel (OpenMP). Results
/// are joined by index and are identical between the two modes; the
/// serial path is the reference the parallel one is tested against.
std::vector<ScenarioResult> run_batch(const std::vector<Scenario>& scenarios, bool parallel);

struct ComparisonTable {
    std::vector<ScenarioResult> results;  // one per controller, input order
    std::vector<std::size_t> ranking;     // indices sorted by settled RMSE
    std::string format() const;
};

/// Run one scenario per controller (shared plant/reference required) and
/// rank the outcomes.
ComparisonTable compare_controllers(const std::vector<Scenario>& scenarios);

/// Built-in benchmark roster on the servo: S-MPC, R-MPC with c = 0.1 and
/// R-MPC with c = 1 against a 0-to-pi square wave (period 50 s, 50%
/// duty), 200 s at 0.1 s sampling, horizons 10/3 and scalar weights 0.1.
std::vector<Scenario> benchmark_suite(PlantKind plant, std::uint64_t seed);

}  // namespace rmpc
