#include "rmpc/kalman.hpp"

#include "rmpc/errors.hpp"

namespace rmpc {

namespace {

// L = P C^T S^-1 through an SPD factorization of the innovation
// covariance S; throws instead of returning garbage when S is singular.
Eigen::MatrixXd gain_from_covariance(const Eigen::MatrixXd& P, const LinearModel& model,
                                     Eigen::MatrixXd& S_out) {
    S_out = model.C() * P * model.C().transpose() + model.measurement_cov();
    Eigen::LLT<Eigen::MatrixXd> llt(S_out);
    if (llt.info() != Eigen::Success || !S_out.allFinite()) {
        throw NumericalError("kalman: singular innovation covariance");
    }
    return llt.solve(model.C() * P).transpose();
}

}  // namespace

FilterState kf_init(const GaussianBelief& prior) {
    FilterState st;
    st.x_pred = prior.mean();
    st.P = prior.covariance();
    st.t = 0;
    return st;
}

FilterState kf_update(const FilterState& st, const LinearModel& model,
                      const Eigen::VectorXd& y) {
    FilterState out = st;
    Eigen::MatrixXd S;
    out.L = gain_from_covariance(st.P, model, S);
    out.K = model.A() * out.L;
    out.x_filt = st.x_pred + out.L * (y - model.C() * st.x_pred);
    out.updated = true;
    return out;
}

FilterState kf_predict(const FilterState& st, const LinearModel& model,
                       const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
    if (!st.updated) {
        throw std::logic_error("kf_predict: measurement update missing at this step");
    }
    FilterState out = st;
    const Eigen::MatrixXd S =
        model.C() * st.P * model.C().transpose() + model.measurement_cov();
    out.x_pred = model.A() * st.x_pred + st.K * (y - model.C() * st.x_pred) + model.B() * u;
    out.P = psd_project(model.A() * st.P * model.A().transpose() -
                        st.K * S * st.K.transpose() + model.process_cov());
    out.t = st.t + 1;
    out.updated = false;
    return out;
}

FilterState kf_step(const FilterState& st, const LinearModel& model,
                    const Eigen::VectorXd& y, const Eigen::VectorXd& u) {
    return kf_predict(kf_update(st, model, y), model, y, u);
}

std::vector<FilterState> kf_run(const LinearModel& model, const GaussianBelief& prior,
                                const std::vector<Eigen::VectorXd>& ys,
                                const std::vector<Eigen::VectorXd>& us) {
    if (ys.size() != us.size()) {
        throw std::invalid_argument("kf_run: measurement/input sequences differ in length");
    }
    std::vector<FilterState> trace;
    trace.reserve(ys.size());
    FilterState st = kf_init(prior);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        st = kf_step(st, model, ys[i], us[i]);
        trace.push_back(st);
    }
    return trace;
}

}  // namespace rmpc
