#include "rmpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include "rmpc/errors.hpp"
#include "rmpc/kalman.hpp"
#include "rmpc/random.hpp"
#include "rmpc/robust_kalman.hpp"

namespace rmpc {

double square_wave(double t, double period, double duty, double low, double high) {
    if (!(period > 0.0) || !(duty > 0.0) || !(duty < 1.0)) {
        throw std::invalid_argument("square_wave: need period > 0 and duty in (0,1)");
    }
    double phase = std::fmod(t, period);
    if (phase < 0.0) phase += period;
    return phase < duty * period ? high : low;
}

Waveform Waveform::square(double period, double duty, double low, double high) {
    Waveform w;
    w.kind = Kind::Square;
    w.period = period;
    w.duty = duty;
    w.low = low;
    w.high = high;
    return w;
}

Waveform Waveform::constant(double level) {
    Waveform w;
    w.kind = Kind::Constant;
    w.high = level;
    return w;
}

double Waveform::value(double t) const {
    return kind == Kind::Square ? square_wave(t, period, duty, low, high) : high;
}

void Scenario::validate() const {
    if (!(duration > 0.0)) throw std::invalid_argument("Scenario: duration must be positive");
    if (!(sample_time > 0.0)) {
        throw std::invalid_argument("Scenario: sample_time must be positive");
    }
    if (c < 0.0) throw std::invalid_argument("Scenario: tolerance c must be nonnegative");
    if (substeps < 1) throw std::invalid_argument("Scenario: substeps must be >= 1");
    if (!(input_scale > 0.0)) {
        throw std::invalid_argument("Scenario: input_scale must be positive");
    }
    if (reference.kind == Waveform::Kind::Square &&
        (!(reference.period > 0.0) || !(reference.duty > 0.0) || !(reference.duty < 1.0))) {
        throw std::invalid_argument("Scenario: bad square-wave reference");
    }
}

std::string Scenario::controller_label() const {
    if (controller == ControllerKind::Smpc) return "S-MPC";
    std::ostringstream os;
    os << "R-MPC(c=" << c << ")";
    return os.str();
}

namespace {

std::vector<std::size_t> reference_edges(const std::vector<double>& r) {
    std::vector<std::size_t> edges{0};  // the start counts as an edge
    for (std::size_t k = 1; k < r.size(); ++k) {
        if (r[k] != r[k - 1]) edges.push_back(k);
    }
    return edges;
}

}  // namespace

Metrics compute_metrics(const std::vector<double>& t, const std::vector<double>& r,
                        const std::vector<double>& y_true, const std::vector<double>& u,
                        double sample_time, double settle_window) {
    Metrics m;
    const std::size_t n = t.size();
    if (n == 0) return m;

    const std::vector<std::size_t> edges = reference_edges(r);

    // Settled tracking RMSE: drop the settle window after every edge.
    double sq_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        bool transient = false;
        for (std::size_t e : edges) {
            if (t[k] >= t[e] && t[k] - t[e] < settle_window) {
                transient = true;
                break;
            }
        }
        if (transient) continue;
        const double err = y_true[k] - r[k];
        sq_sum += err * err;
        ++count;
    }
    m.tracking_rmse_settled =
        count == 0 ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(sq_sum / count);

    for (double uk : u) m.control_energy += uk * uk * sample_time;

    // Input roughness over the settled samples, same exclusion windows
    // as the RMSE.
    for (std::size_t k = 1; k < u.size(); ++k) {
        bool transient = false;
        for (std::size_t e : edges) {
            if (t[k] >= t[e] && t[k] - t[e] < settle_window) {
                transient = true;
                break;
            }
        }
        if (transient) continue;
        const double d = u[k] - u[k - 1];
        m.smoothness += d * d;
    }

    // Worst excursion after first entering a 5% band around each new
    // reference level; if the band is never reached, the whole window
    // counts.
    m.max_overshoot = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::size_t lo = edges[e];
        const std::size_t hi = e + 1 < edges.size() ? edges[e + 1] : n;
        const double step_size = lo == 0 ? std::abs(r[lo]) : std::abs(r[lo] - r[lo - 1]);
        const double band = 0.05 * std::max(step_size, 1e-12);
        std::size_t entered = hi;
        for (std::size_t k = lo; k < hi; ++k) {
            if (std::abs(y_true[k] - r[k]) <= band) {
                entered = k;
                break;
            }
        }
        for (std::size_t k = entered; k < hi; ++k) {
            m.max_overshoot = std::max(m.max_overshoot, std::abs(y_true[k] - r[k]));
        }
        if (entered == hi && hi > lo) {
            for (std::size_t k = lo; k < hi; ++k) {
                m.max_overshoot = std::max(m.max_overshoot, std::abs(y_true[k] - r[k]));
            }
        }
    }
    return m;
}

namespace {

struct LinearTruth {
    Eigen::VectorXd x;
};

struct NonlinearTruth {
    PlantState x;
    ServoParams params;
};

}  // namespace

ScenarioResult run_scenario(const Scenario& sc) {
    sc.validate();

    ScenarioResult res;
    res.name = sc.name;
    res.controller = sc.controller;
    res.c = sc.controller == ControllerKind::Rmpc ? sc.c : 0.0;
    res.sample_time = sc.sample_time;

    const ServoParams nominal = nominal_params();
    const LinearModel volts_model = build_nominal_linear(nominal, sc.noise, sc.sample_time);
    // Filter and controller see the input in normalized actuator units.
    const LinearModel model(volts_model.A(), volts_model.B() * sc.input_scale,
                            volts_model.C(), volts_model.G(), volts_model.D());
    const PredictionMatrices pm = build_prediction(model, sc.mpc);
    const Eigen::Index n = model.n();
    res.n_states = static_cast<int>(n);
    const Eigen::Index m = model.m();

    const GaussianBelief prior =
        sc.prior ? *sc.prior : GaussianBelief(Eigen::VectorXd::Zero(n), model.process_cov());

    Rng rng(sc.seed);

    // True initial state ~ N(0, G G^T), except the load angle which
    // starts exactly at zero.
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    if (sc.inject_noise) {
        x0 = model.G() * rng.gaussian_vector(m);
        x0(0) = 0.0;
    }

    LinearTruth linear{x0};
    NonlinearTruth nonlinear;
    if (sc.plant == PlantKind::NonlinearPerturbed) {
        nonlinear.params = sc.randomized_perturbation
                               ? randomized_perturbed_params(sc.seed ^ 0x9e3779b97f4a7c15ULL)
                               : perturbed_params();
        nonlinear.x.theta_l = x0(0);
        nonlinear.x.omega_l = x0(1);
        nonlinear.x.theta_m = x0(2);
        nonlinear.x.omega_m = x0(3);
        nonlinear.x.i_m = 0.0;
    }

    FilterState kf;
    RobustFilterState rkf;
    const bool robust = sc.controller == ControllerKind::Rmpc;
    if (robust) {
        rkf = rkf_init(prior, sc.c);
    } else {
        kf = kf_init(prior);
    }

    const long steps = std::lround(sc.duration / sc.sample_time);
    res.t.reserve(steps);

    auto r_at_step = [&sc](long step) {
        Eigen::VectorXd r(1);
        r << sc.reference.value(static_cast<double>(step) * sc.sample_time);
        return r;
    };
    auto r_held_at = [&sc](long step) {
        Eigen::VectorXd r(1);
        r << sc.reference.value(static_cast<double>(step) * sc.sample_time);
        return [r](long) { return r; };
    };

    Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(model.q());

    try {
        for (long k = 0; k < steps; ++k) {
            const double t_k = static_cast<double>(k) * sc.sample_time;
            const Eigen::VectorXd v = sc.inject_noise ? rng.gaussian_vector(m)
                                                      : Eigen::VectorXd::Zero(m);

            // (1) Measure.
            double y_true_k;
            if (sc.plant == PlantKind::LinearNominal) {
                y_true_k = (model.C() * linear.x)(0);
            } else {
                y_true_k = nonlinear.x.theta_l;
            }
            const double y_k = y_true_k + (model.D() * v)(0);
            if (!std::isfinite(y_k)) {
                throw DivergenceError("run_scenario: measurement is non-finite");
            }
            Eigen::VectorXd y_vec(1);
            y_vec << y_k;

            // (2) Filter measurement update.
            Eigen::VectorXd x_filt;
            double theta_k = std::numeric_limits<double>::quiet_NaN();
            if (robust) {
                rkf = rkf_update(rkf, model, y_vec);
                x_filt = rkf.x_filt;
                theta_k = rkf.theta;
            } else {
                kf = kf_update(kf, model, y_vec);
                x_filt = kf.x_filt;
            }

            // (3) Control from the filtered estimate and the stacked
            //     reference (true future samples or the held current one).
            const Eigen::VectorXd r_stack =
                sc.preview_reference ? stack_reference(r_at_step, k, sc.mpc.Hp)
                                     : stack_reference(r_held_at(k), k, sc.mpc.Hp);
            const MpcSolution sol = solve_mpc(pm, sc.mpc, x_filt, r_stack, u_prev);
            const Eigen::VectorXd u_cmd = sol.u_now;
            if (!u_cmd.allFinite()) {
                throw DivergenceError("run_scenario: control command is non-finite");
            }

            // (4) Filter time update.
            if (robust) {
                rkf = rkf_predict(rkf, model, y_vec, u_cmd);
            } else {
                kf = kf_predict(kf, model, y_vec, u_cmd);
            }

            // (5) Plant integrates one sample period under the held input
            //     (converted back to volts).
            double u_applied = sc.input_scale * u_cmd(0);
            if (sc.plant == PlantKind::LinearNominal) {
                linear.x = model.A() * linear.x + model.B() * u_cmd + model.G() * v;
            } else {
                u_applied = std::clamp(u_applied, -nonlinear.params.v_sat,
                                       nonlinear.params.v_sat);
                nonlinear.x = simulate_plant_step(nonlinear.x, u_applied, nonlinear.params,
                                                  sc.sample_time, sc.substeps);
            }

            res.t.push_back(t_k);
            res.r.push_back(sc.reference.value(t_k));
            res.y.push_back(y_k);
            res.y_true.push_back(y_true_k);
            res.u.push_back(u_applied);
            res.theta.push_back(theta_k);
            res.x_hat.push_back(x_filt);
            u_prev = u_cmd;
        }
    } catch (const NumericalError& e) {
        res.failed = true;
        res.failure = e.what();
    }

    res.metrics = compute_metrics(res.t, res.r, res.y_true, res.u, sc.sample_time);
    if (res.failed) {
        res.metrics.tracking_rmse_settled = std::numeric_limits<double>::infinity();
    }
    return res;
}

std::vector<ScenarioResult> run_batch(const std::vector<Scenario>& scenarios, bool parallel) {
    std::vector<ScenarioResult> results(scenarios.size());
    if (!parallel) {
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            results[i] = run_scenario(scenarios[i]);
        }
        return results;
    }

    std::exception_ptr first_error;
    const long count = static_cast<long>(scenarios.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        try {
            results[static_cast<std::size_t>(i)] =
                run_scenario(scenarios[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::string ComparisonTable::format() const {
    std::ostringstream os;
    os << "scenario            controller      rmse_settled  energy        smoothness    "
          "overshoot   status\n";
    for (const auto& r : results) {
        char line[256];
        const char* kind = r.controller == ControllerKind::Smpc ? "S-MPC" : "R-MPC";
        std::snprintf(line, sizeof(line),
                      "%-19s %-6s c=%-6.3g %-13.6g %-13.6g %-13.6g %-11.6g %s\n",
                      r.name.c_str(), kind, r.c, r.metrics.tracking_rmse_settled,
                      r.metrics.control_energy, r.metrics.smoothness,
                      r.metrics.max_overshoot, r.failed ? "FAILED" : "ok");
        os << line;
    }
    os << "ranking by settled RMSE:";
    for (std::size_t idx : ranking) {
        os << " " << results[idx].name;
    }
    os << "\n";
    return os.str();
}

std::vector<Scenario> benchmark_suite(PlantKind plant, std::uint64_t seed) {
    Scenario base;
    base.plant = plant;
    base.duration = 200.0;
    base.sample_time = 0.1;
    base.reference = Waveform::square(50.0, 0.5, 0.0, M_PI);
    base.seed = seed;
    base.mpc = MpcConfig::uniform_scalar(10, 3, 0.1, 0.1);
    base.noise = NoiseSpec::servo_default();

    const std::string prefix = plant == PlantKind::LinearNominal ? "sim1" : "sim2";
    std::vector<Scenario> suite(3, base);
    suite[0].name = prefix + "_smpc";
    suite[0].controller = ControllerKind::Smpc;
    suite[1].name = prefix + "_rmpc1";
    suite[1].controller = ControllerKind::Rmpc;
    suite[1].c = 0.1;
    suite[2].name = prefix + "_rmpc2";
    suite[2].controller = ControllerKind::Rmpc;
    suite[2].c = 1.0;
    return suite;
}

ComparisonTable compare_controllers(const std::vector<Scenario>& scenarios) {
    if (scenarios.empty()) {
        throw std::invalid_argument("compare_controllers: no scenarios");
    }
    for (const auto& sc : scenarios) {
        if (sc.plant != scenarios.front().plant ||
            !(sc.reference == scenarios.front().reference) ||
            sc.duration != scenarios.front().duration ||
            sc.sample_time != scenarios.front().sample_time) {
            throw std::invalid_argument(
                "compare_controllers: scenarios must share plant and reference");
        }
    }
    ComparisonTable table;
    table.results = run_batch(scenarios, true);
    table.ranking.resize(table.results.size());
    std::iota(table.ranking.begin(), table.ranking.end(), std::size_t{0});
    std::stable_sort(table.ranking.begin(), table.ranking.end(),
                     [&table](std::size_t a, std::size_t b) {
                         return table.results[a].metrics.tracking_rmse_settled <
                                table.results[b].metrics.tracking_rmse_settled;
                     });
    return table;
}

}  // namespace rmpc
