#include <doctest.h>

#include <cmath>
#include <vector>

#include "rmpc/errors.hpp"
#include "rmpc/kalman.hpp"
#include "rmpc/random.hpp"
#include "rmpc/servo.hpp"

using namespace rmpc;

namespace {

// Scalar model A, B, C with unit process/measurement covariances on
// disjoint channels.
LinearModel scalar_model(double A, double B, double C, double g = 1.0, double d = 1.0) {
    Eigen::MatrixXd Am(1, 1), Bm(1, 1), Cm(1, 1), Gm(1, 2), Dm(1, 2);
    Am << A;
    Bm << B;
    Cm << C;
    Gm << g, 0;
    Dm << 0, d;
    return LinearModel(Am, Bm, Cm, Gm, Dm);
}

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

GaussianBelief scalar_prior(double mean, double var) {
    Eigen::MatrixXd P(1, 1);
    P << var;
    return GaussianBelief(vec1(mean), P);
}

LinearModel random_model(Rng& rng, int n) {
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n * n; ++i) A(i / n, i % n) = rng.uniform(-1.0, 1.0);
    A *= 0.9 / std::max(0.9, A.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::MatrixXd B(n, 1);
    for (int i = 0; i < n; ++i) B(i, 0) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd C(1, n);
    for (int i = 0; i < n; ++i) C(0, i) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n + 1);
    for (int i = 0; i < n; ++i) G(i, i) = rng.uniform(0.1, 1.0);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(1, n + 1);
    D(0, n) = rng.uniform(0.2, 1.0);
    return LinearModel(A, B, C, G, D);
}

}  // namespace

TEST_SUITE_BEGIN("kalman");

TEST_CASE("kf_init stores the prior verbatim") {
    const FilterState st = kf_init(scalar_prior(0.0, 1.0));
    CHECK(st.x_pred(0) == 0.0);
    CHECK(st.P(0, 0) == 1.0);
    CHECK(st.t == 0);
    CHECK_FALSE(st.updated);

    const FilterState st2 =
        kf_init(GaussianBelief(Eigen::Vector2d(1, 2),
                               Eigen::MatrixXd(Eigen::Vector2d(3, 4).asDiagonal())));
    CHECK(st2.x_pred(0) == 1.0);
    CHECK(st2.x_pred(1) == 2.0);
    CHECK(st2.P(0, 0) == 3.0);
    CHECK(st2.P(1, 1) == 4.0);
}

TEST_CASE("scalar hand-evaluated step") {
    const LinearModel m = scalar_model(1.0, 0.0, 1.0);
    const FilterState st = kf_step(kf_init(scalar_prior(0.0, 1.0)), m, vec1(1.0), vec1(0.0));
    CHECK(st.L(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(st.x_filt(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(st.K(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(st.x_pred(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(st.P(0, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(st.t == 1);
}

TEST_CASE("no information: C = 0 gives open-loop prediction") {
    const LinearModel m = scalar_model(0.8, 0.0, 0.0);
    FilterState st = kf_init(scalar_prior(2.0, 3.0));
    st = kf_step(st, m, vec1(5.0), vec1(0.0));
    CHECK(st.L(0, 0) == 0.0);
    CHECK(st.x_filt(0) == 2.0);
    // P' = A P A^T + G G^T
    CHECK(st.P(0, 0) == doctest::Approx(0.64 * 3.0 + 1.0).epsilon(1e-14));
}

TEST_CASE("noise-free measurements drive P to zero like P/(P+1)") {
    // A = 1, C = 1, G = 0, D = 1.
    Eigen::MatrixXd Am(1, 1), Bm(1, 1), Cm(1, 1), Gm(1, 1), Dm(1, 1);
    Am << 1;
    Bm << 0;
    Cm << 1;
    Gm << 0;
    Dm << 1;
    const LinearModel m(Am, Bm, Cm, Gm, Dm);

    const double P0 = 4.0;
    FilterState st = kf_init(scalar_prior(0.0, P0));
    double closed_form = P0;
    for (int t = 1; t <= 200; ++t) {
        const double prev = st.P(0, 0);
        st = kf_step(st, m, vec1(0.0), vec1(0.0));
        closed_form = closed_form / (closed_form + 1.0);
        CHECK(st.P(0, 0) < prev);
        CHECK(st.P(0, 0) == doctest::Approx(closed_form).epsilon(1e-9));
    }
    CHECK(st.P(0, 0) == doctest::Approx(P0 / (1.0 + 200.0 * P0)).epsilon(1e-6));
}

TEST_CASE("kf_run edge cases and fold semantics") {
    const LinearModel m = scalar_model(1.0, 0.5, 1.0);
    const GaussianBelief prior = scalar_prior(0.0, 1.0);

    CHECK(kf_run(m, prior, {}, {}).empty());

    const auto single = kf_run(m, prior, {vec1(1.0)}, {vec1(0.25)});
    const FilterState direct = kf_step(kf_init(prior), m, vec1(1.0), vec1(0.25));
    REQUIRE(single.size() == 1);
    CHECK(single[0].x_pred(0) == direct.x_pred(0));
    CHECK(single[0].P(0, 0) == direct.P(0, 0));

    CHECK_THROWS_AS((void)kf_run(m, prior, {vec1(1.0)}, {}), std::invalid_argument);
}

TEST_CASE("100-step scalar run matches a hand-rolled loop") {
    const double A = 0.9, B = 0.3, C = 1.0;
    const LinearModel m = scalar_model(A, B, C);
    Rng rng(19);
    std::vector<Eigen::VectorXd> ys, us;
    for (int k = 0; k < 100; ++k) {
        ys.push_back(vec1(rng.next_gaussian()));
        us.push_back(vec1(rng.uniform(-1.0, 1.0)));
    }
    const auto trace = kf_run(m, scalar_prior(0.0, 2.0), ys, us);

    // Plain-double re-implementation of the recursion.
    double x = 0.0, P = 2.0;
    for (int k = 0; k < 100; ++k) {
        const double S = C * P * C + 1.0;
        const double L = P * C / S;
        const double K = A * L;
        const double innov = ys[k](0) - C * x;
        const double x_next = A * x + K * innov + B * us[k](0);
        const double P_next = A * P * A - K * S * K + 1.0;
        x = x_next;
        P = P_next;
        CHECK(trace[k].x_pred(0) == doctest::Approx(x).epsilon(1e-12));
        CHECK(trace[k].P(0, 0) == doctest::Approx(P).epsilon(1e-12));
    }
}

TEST_CASE("P stays symmetric PSD and K = A L across random models") {
    Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 4);
        const LinearModel m = random_model(rng, n);
        FilterState st = kf_init(
            GaussianBelief(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n)));
        for (int k = 0; k < 5; ++k) {
            st = kf_step(st, m, vec1(rng.next_gaussian()), vec1(rng.next_gaussian()));
            CHECK((st.P - st.P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.P, Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
            CHECK((st.K - m.A() * st.L).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("innovations are white at steady state") {
    const double A = 0.9;
    const LinearModel m = scalar_model(A, 0.0, 1.0);
    Rng rng(5);

    const int N = 10000;
    double x_true = 0.0;
    FilterState st = kf_init(scalar_prior(0.0, 1.0));
    std::vector<double> innov;
    innov.reserve(N);
    for (int k = 0; k < N; ++k) {
        const double y = x_true + rng.next_gaussian();
        innov.push_back(y - st.x_pred(0));
        st = kf_step(st, m, vec1(y), vec1(0.0));
        x_true = A * x_true + rng.next_gaussian();
    }
    innov.erase(innov.begin(), innov.begin() + 100);  // discard the transient

    const int M = static_cast<int>(innov.size());
    double mean = 0.0;
    for (double e : innov) mean += e;
    mean /= M;
    double var = 0.0;
    for (double e : innov) var += (e - mean) * (e - mean);
    var /= M;
    for (int lag = 1; lag <= 5; ++lag) {
        double acf = 0.0;
        for (int k = lag; k < M; ++k) acf += (innov[k] - mean) * (innov[k - lag] - mean);
        acf /= (M - lag) * var;
        CHECK(std::abs(acf) <= 4.0 / std::sqrt(static_cast<double>(M)));
    }
}

TEST_CASE("P converges on the servo nominal model") {
    const LinearModel m =
        build_nominal_linear(nominal_params(), NoiseSpec::servo_default(), 0.1);
    FilterState st = kf_init(
        GaussianBelief(Eigen::VectorXd::Zero(4), m.process_cov()));
    Eigen::VectorXd y(1), u(1);
    y << 0.0;
    u << 0.0;
    Eigen::MatrixXd prev = st.P;
    for (int k = 0; k < 3000; ++k) {
        prev = st.P;
        st = kf_step(st, m, y, u);
    }
    CHECK((st.P - prev).norm() <= 1e-9);
}

TEST_CASE("kf_predict before kf_update is rejected") {
    const LinearModel m = scalar_model(1.0, 0.0, 1.0);
    const FilterState st = kf_init(scalar_prior(0.0, 1.0));
    CHECK_THROWS_AS((void)kf_predict(st, m, vec1(0.0), vec1(0.0)), std::logic_error);
}

TEST_CASE("overflowing innovation covariance raises a numerical error") {
    const LinearModel m = scalar_model(1.0, 0.0, 1e200);
    const FilterState st = kf_init(scalar_prior(0.0, 1e308));
    CHECK_THROWS_AS((void)kf_update(st, m, vec1(1.0)), NumericalError);
}

TEST_SUITE_END();
