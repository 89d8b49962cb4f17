#include "rmpc/mpc.hpp"

#include <string>

#include "rmpc/errors.hpp"

namespace rmpc {

MpcConfig MpcConfig::uniform(int Hp, int Hu, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                             InputPenalty penalize) {
    MpcConfig cfg;
    cfg.Hp = Hp;
    cfg.Hu = Hu;
    cfg.Qk = {std::move(Q)};
    cfg.Rk = {std::move(R)};
    cfg.penalize = penalize;
    return cfg;
}

MpcConfig MpcConfig::uniform_scalar(int Hp, int Hu, double q, double r,
                                    InputPenalty penalize) {
    Eigen::MatrixXd Q(1, 1), R(1, 1);
    Q << q;
    R << r;
    return uniform(Hp, Hu, Q, R, penalize);
}

const Eigen::MatrixXd& MpcConfig::Q_at(int k) const {
    return Qk.size() == 1 ? Qk.front() : Qk.at(static_cast<std::size_t>(k));
}

const Eigen::MatrixXd& MpcConfig::R_at(int k) const {
    return Rk.size() == 1 ? Rk.front() : Rk.at(static_cast<std::size_t>(k));
}

void MpcConfig::validate(Eigen::Index p, Eigen::Index q) const {
    if (Hu < 1 || Hu > Hp) {
        throw std::invalid_argument("MpcConfig: horizons must satisfy 1 <= Hu <= Hp");
    }
    if (Qk.size() != 1 && Qk.size() != static_cast<std::size_t>(Hp)) {
        throw std::invalid_argument("MpcConfig: Qk must have 1 or Hp entries");
    }
    if (Rk.size() != 1 && Rk.size() != static_cast<std::size_t>(Hu)) {
        throw std::invalid_argument("MpcConfig: Rk must have 1 or Hu entries");
    }
    for (const auto& Q : Qk) {
        if (Q.rows() != p || Q.cols() != p) {
            throw std::invalid_argument("MpcConfig: Qk blocks must be p x p");
        }
    }
    for (const auto& R : Rk) {
        if (R.rows() != q || R.cols() != q) {
            throw std::invalid_argument("MpcConfig: Rk blocks must be q x q");
        }
    }
}

PredictionMatrices build_prediction(const LinearModel& model, const MpcConfig& cfg) {
    cfg.validate(model.p(), model.q());
    const Eigen::Index n = model.n();
    const Eigen::Index p = model.p();
    const Eigen::Index q = model.q();
    const int Hp = cfg.Hp;
    const int Hu = cfg.Hu;

    // Markov blocks M_s = C A^s B and the running powers C A^i.
    std::vector<Eigen::MatrixXd> markov(static_cast<std::size_t>(Hp));
    Eigen::MatrixXd CA = model.C();  // C A^0 so far
    PredictionMatrices pm;
    pm.Psi.setZero(p * Hp, n);
    pm.Theta.setZero(p * Hp, q * Hu);

    for (int s = 0; s < Hp; ++s) {
        markov[static_cast<std::size_t>(s)] = CA * model.B();
        CA = CA * model.A();
        pm.Psi.middleRows(p * s, p) = CA;  // C A^{s+1}
    }

    for (int i = 1; i <= Hp; ++i) {
        for (int j = 1; j <= std::min(i, Hu); ++j) {
            Eigen::Ref<Eigen::MatrixXd> block =
                pm.Theta.block(p * (i - 1), q * (j - 1), p, q);
            if (j < Hu) {
                block = markov[static_cast<std::size_t>(i - j)];
            } else {
                // Held input: partial sum of Markov blocks.
                for (int s = 0; s <= i - Hu; ++s) {
                    block += markov[static_cast<std::size_t>(s)];
                }
            }
        }
    }
    return pm;
}

namespace {

// Block-diagonal stacking of per-step weights.
Eigen::MatrixXd stack_weights(const MpcConfig& cfg, bool outputs, Eigen::Index block,
                              int count) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(block * count, block * count);
    for (int k = 0; k < count; ++k) {
        W.block(block * k, block * k, block, block) = outputs ? cfg.Q_at(k) : cfg.R_at(k);
    }
    return W;
}

// First-difference lifting over the Hu input blocks: (S u)_k = u_k - u_{k-1}
// with the k = 0 block differenced against u_prev by the caller.
Eigen::MatrixXd difference_lifting(Eigen::Index q, int Hu) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(q * Hu, q * Hu);
    for (int k = 1; k < Hu; ++k) {
        S.block(q * k, q * (k - 1), q, q) = -Eigen::MatrixXd::Identity(q, q);
    }
    return S;
}

}  // namespace

MpcSolution solve_mpc(const PredictionMatrices& pm, const MpcConfig& cfg,
                      const Eigen::VectorXd& x_hat, const Eigen::VectorXd& r_stack,
                      const Eigen::VectorXd& u_prev) {
    const Eigen::Index pHp = pm.Psi.rows();
    const Eigen::Index qHu = pm.Theta.cols();
    const Eigen::Index q = qHu / cfg.Hu;
    const Eigen::Index p = pHp / cfg.Hp;
    if (r_stack.size() != pHp) {
        throw std::invalid_argument("solve_mpc: reference stack has wrong length");
    }
    if (x_hat.size() != pm.Psi.cols() || u_prev.size() != q) {
        throw std::invalid_argument("solve_mpc: state or input dimension mismatch");
    }

    const Eigen::MatrixXd Q = stack_weights(cfg, true, p, cfg.Hp);
    const Eigen::MatrixXd R = stack_weights(cfg, false, q, cfg.Hu);
    const Eigen::VectorXd tracking_err = r_stack - pm.Psi * x_hat;

    Eigen::MatrixXd H = pm.Theta.transpose() * Q * pm.Theta;
    Eigen::VectorXd g = pm.Theta.transpose() * Q * tracking_err;
    Eigen::MatrixXd S;                                  // input lifting (identity in U mode)
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(qHu);
    if (cfg.penalize == InputPenalty::DeltaU) {
        S = difference_lifting(q, cfg.Hu);
        offset.head(q) = u_prev;
        H += S.transpose() * R * S;
        g += S.transpose() * R * offset;
    } else {
        S = Eigen::MatrixXd::Identity(qHu, qHu);
        H += R;
    }

    // Fail loudly on a singular quadratic instead of regularizing.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    const double eig_min = es.eigenvalues().minCoeff();
    const double eig_max = es.eigenvalues().maxCoeff();
    if (!(eig_min > 1e-13 * std::max(eig_max, 1.0))) {
        throw IllPosedError("solve_mpc: normal-equations matrix is singular");
    }

    MpcSolution sol;
    sol.u_plan = Eigen::LLT<Eigen::MatrixXd>(H).solve(g);
    sol.u_now = sol.u_plan.head(q);
    sol.predicted_outputs = pm.Psi * x_hat + pm.Theta * sol.u_plan;

    const Eigen::VectorXd out_res = pm.Theta * sol.u_plan - tracking_err;
    const Eigen::VectorXd in_res = S * sol.u_plan - offset;
    sol.cost = out_res.dot(Q * out_res) + in_res.dot(R * in_res);
    return sol;
}

Eigen::VectorXd stack_reference(const std::function<Eigen::VectorXd(long)>& r_fn,
                                long t, int Hp) {
    const Eigen::VectorXd first = r_fn(t + 1);
    const Eigen::Index p = first.size();
    Eigen::VectorXd stacked(p * Hp);
    stacked.head(p) = first;
    for (int k = 2; k <= Hp; ++k) {
        stacked.segment(p * (k - 1), p) = r_fn(t + k);
    }
    return stacked;
}

}  // namespace rmpc
