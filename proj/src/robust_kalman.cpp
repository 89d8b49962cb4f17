#include "rmpc/robust_kalman.hpp"

#include <cmath>
#include <limits>

#include "rmpc/errors.hpp"

namespace rmpc {

namespace {

Eigen::VectorXd covariance_eigenvalues(const Eigen::MatrixXd& P) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (P + P.transpose()),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalError("robust_kalman: eigendecomposition of P failed");
    }
    return es.eigenvalues();
}

// gamma over the spectrum; +inf once theta reaches the admissible
// boundary, which is what bracket expansion relies on.
double kl_radius_from_eigenvalues(const Eigen::VectorXd& lambda, double theta) {
    double value = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double s = 1.0 - theta * lambda(i);
        if (s <= 0.0) return std::numeric_limits<double>::infinity();
        value += std::log(s) + 1.0 / s - 1.0;
    }
    return value;
}

double solve_theta_from_eigenvalues(const Eigen::VectorXd& lambda, double c, double tol) {
    if (!(c > 0.0)) {
        throw std::domain_error("solve_theta: tolerance c must be positive");
    }
    if (!(tol > 0.0)) {
        throw std::domain_error("solve_theta: residual tolerance must be positive");
    }
    const double lambda_max = lambda.maxCoeff();
    if (!(lambda_max > 0.0)) {
        throw std::domain_error("solve_theta: P must have a positive eigenvalue");
    }

    // Push the upper endpoint toward 1/lambda_max until gamma exceeds c;
    // gamma diverges at the boundary so this terminates quickly.
    double hi = 0.0;
    bool bracketed = false;
    for (int k = 1; k <= 60; ++k) {
        hi = (1.0 - std::pow(2.0, -k)) / lambda_max;
        if (kl_radius_from_eigenvalues(lambda, hi) > c) {
            bracketed = true;
            break;
        }
    }
    if (!bracketed) {
        throw NumericalError("solve_theta: failed to bracket the root");
    }

    double lo = 0.0;
    double mid = 0.5 * (lo + hi);
    const double width_goal = 1e-13 * std::max(1.0, hi);
    for (int it = 0; it < 128; ++it) {
        mid = 0.5 * (lo + hi);
        const double g = kl_radius_from_eigenvalues(lambda, mid);
        if (std::abs(g - c) <= tol && (hi - lo) <= width_goal) {
            return mid;
        }
        if (g < c) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // The interval collapsed to machine precision; accept if the residual
    // meets the contract, otherwise report failure.
    if (std::abs(kl_radius_from_eigenvalues(lambda, mid) - c) <= tol) return mid;
    throw NumericalError("solve_theta: bisection did not converge");
}

}  // namespace

double kl_radius(const Eigen::MatrixXd& P, double theta) {
    const Eigen::VectorXd lambda = covariance_eigenvalues(P);
    if (theta < 0.0) {
        throw std::domain_error("kl_radius: theta must be nonnegative");
    }
    const double lambda_max = lambda.maxCoeff();
    if (lambda_max > 0.0 && theta >= 1.0 / lambda_max) {
        throw std::domain_error("kl_radius: theta outside [0, 1/lambda_max(P))");
    }
    return kl_radius_from_eigenvalues(lambda, theta);
}

double solve_theta(const Eigen::MatrixXd& P, double c, double tol) {
    return solve_theta_from_eigenvalues(covariance_eigenvalues(P), c, tol);
}

RobustFilterState rkf_init(const GaussianBelief& prior, double c) {
    if (c < 0.0) throw std::domain_error("rkf_init: tolerance c must be nonnegative");
    RobustFilterState st;
    st.x_pred = prior.mean();
    st.P = prior.covariance();
    st.t = 0;
    st.c = c;
    return st;
}

RobustFilterState rkf_update(const RobustFilterState& st, const LinearModel& model,
                             const Eigen::VectorXd& y) {
    RobustFilterState out = st;

    if (st.c == 0.0) {
        out.theta = 0.0;
        out.V = st.P;
    } else {
        out.theta = solve_theta(st.P, st.c);
        // V = (P^-1 - theta I)^-1 computed as the solution of
        // (I - theta P) V = P, which never inverts P itself.
        const Eigen::Index n = st.P.rows();
        const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - out.theta * st.P;
        Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (lhs + lhs.transpose()));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("rkf_update: I - theta P lost definiteness");
        }
        const Eigen::MatrixXd V = llt.solve(st.P);
        out.V = 0.5 * (V + V.transpose());
        if (!out.V.allFinite()) {
            throw NumericalError("rkf_update: deflated covariance is non-finite");
        }
    }

    const Eigen::MatrixXd S =
        model.C() * out.V * model.C().transpose() + model.measurement_cov();
    Eigen::LLT<Eigen::MatrixXd> llt_s(S);
    if (llt_s.info() != Eigen::Success) {
        throw NumericalError("rkf_update: singular innovation covariance");
    }
    out.L = llt_s.solve(model.C() * out.V).transpose();
    out.K = model.A() * out.L;
    out.x_filt = st.x_pred + out.L * (y - model.C() * st.x_pred);
    out.updated = true;
    return out;
}

RobustFilterState rkf_predict(const RobustFilterState& st, const LinearModel& model,
                              const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
    if (!st.updated) {
        throw std::logic_error("rkf_predict: measurement update missing at this step");
    }
    RobustFilterState out = st;
    const Eigen::MatrixXd S =
        model.C() * st.V * model.C().transpose() + model.measurement_cov();
    out.x_pred = model.A() * st.x_pred + st.K * (y - model.C() * st.x_pred) + model.B() * u;
    out.P = psd_project(model.A() * st.V * model.A().transpose() -
                        st.K * S * st.K.transpose() + model.process_cov());
    out.t = st.t + 1;
    out.updated = false;
    return out;
}

RobustFilterState rkf_step(const RobustFilterState& st, const LinearModel& model,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
    return rkf_predict(rkf_update(st, model, y), model, y, u);
}

std::vector<RobustFilterState> rkf_run(const LinearModel& model, const GaussianBelief& prior,
                                       double c, const std::vector<Eigen::VectorXd>& ys,
                                       const std::vector<Eigen::VectorXd>& us) {
    if (ys.size() != us.size()) {
        throw std::invalid_argument("rkf_run: measurement/input sequences differ in length");
    }
    std::vector<RobustFilterState> trace;
    trace.reserve(ys.size());
    RobustFilterState st = rkf_init(prior, c);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        st = rkf_step(st, model, ys[i], us[i]);
        trace.push_back(st);
    }
    return trace;
}

}  // namespace rmpc
