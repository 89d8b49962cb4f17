#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "rmpc/errors.hpp"
#include "rmpc/random.hpp"
#include "rmpc/statespace.hpp"

using namespace rmpc;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

Eigen::MatrixXd row(double a, double b) {
    Eigen::MatrixXd m(1, 2);
    m << a, b;
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("statespace");

TEST_CASE("matrix exponential of zero is the identity") {
    CHECK((matrix_exponential(Eigen::MatrixXd::Zero(2, 2)) -
           Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("matrix exponential of a nilpotent matrix terminates") {
    const Eigen::MatrixXd E = matrix_exponential(mat2(0, 1, 0, 0));
    CHECK((E - mat2(1, 1, 0, 1)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("matrix exponential of a diagonal matrix") {
    const Eigen::MatrixXd E =
        matrix_exponential(Eigen::MatrixXd(Eigen::Vector2d(std::log(2.0), std::log(3.0)).asDiagonal()));
    CHECK(E(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(E(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(E(0, 1)) < 1e-14);
}

TEST_CASE("exp(M) exp(-M) = I for random matrices") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 6);
        Eigen::MatrixXd M(n, n);
        for (int i = 0; i < n * n; ++i) M(i / n, i % n) = rng.uniform(-1.0, 1.0);
        M *= 5.0 / std::max(1.0, M.norm());
        const Eigen::MatrixXd P = matrix_exponential(M) * matrix_exponential(-M);
        CHECK((P - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("matrix exponential rejects non-finite input") {
    Eigen::MatrixXd M = mat2(0, 1, 0, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS((void)matrix_exponential(M), std::invalid_argument);
}

TEST_CASE("psd_project fixed points and clipping") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    CHECK((psd_project(I) - I).cwiseAbs().maxCoeff() == 0.0);

    CHECK((psd_project(mat2(1, 2, 0, 1)) - mat2(1, 1, 1, 1)).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::MatrixXd clipped =
        psd_project(Eigen::MatrixXd(Eigen::Vector2d(1.0, -1e-15).asDiagonal()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(clipped);
    CHECK(es.eigenvalues().minCoeff() >= 0.0);
    CHECK(clipped(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("psd_project output is PSD, close to input, idempotent") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        Eigen::MatrixXd S(n, n);
        for (int i = 0; i < n * n; ++i) S(i / n, i % n) = rng.uniform(-2.0, 2.0);
        const Eigen::MatrixXd P = psd_project(S);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
        CHECK(es.eigenvalues().minCoeff() >= -1e-14);
        CHECK((psd_project(P) - P).cwiseAbs().maxCoeff() < 1e-12);
        // never further from S than the asymmetry plus the clipped mass
        const double asym = 0.5 * (S - S.transpose()).norm();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_es(0.5 * (S + S.transpose()));
        const double clip = sym_es.eigenvalues().cwiseMin(0.0).norm();
        CHECK((P - S).norm() <= asym + clip + 1e-12);
    }
}

TEST_CASE("LinearModel enforces exact noise-channel orthogonality") {
    const Eigen::MatrixXd A = mat2(1, 0, 0, 1);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd C(1, 2);
    C << 1, 0;
    CHECK_NOTHROW(LinearModel(A, B, C, mat2(1, 0, 0, 0), row(0, 1)));
    // Shared channel, however small: rejected.
    CHECK_THROWS_AS(LinearModel(A, B, C, mat2(1, 1e-30, 0, 0), row(0, 1)),
                    std::invalid_argument);
    // Singular measurement covariance.
    CHECK_THROWS_AS(LinearModel(A, B, C, mat2(1, 0, 0, 0), row(0, 0)),
                    std::invalid_argument);
    // Dimension mismatch.
    CHECK_THROWS_AS(LinearModel(A, Eigen::MatrixXd::Zero(3, 1), C, mat2(1, 0, 0, 0),
                                row(0, 1)),
                    std::invalid_argument);
}

TEST_CASE("GaussianBelief validates its covariance") {
    CHECK_NOTHROW(GaussianBelief(Eigen::Vector2d(1, 2),
                                 Eigen::MatrixXd(Eigen::Vector2d(3, 4).asDiagonal())));
    CHECK_THROWS_AS(GaussianBelief(Eigen::Vector2d(0, 0), mat2(1, 0.1, 0, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(GaussianBelief(Eigen::Vector2d(0, 0), mat2(1, 0, 0, -1)),
                    std::invalid_argument);
}

TEST_CASE("zoh: zero drift integrates the input matrix") {
    Eigen::MatrixXd Ac(1, 1), Bc(1, 1), Cc(1, 1);
    Ac << 0.0;
    Bc << 1.0;
    Cc << 1.0;
    const LinearModel m =
        discretize_zoh(ContinuousModel(Ac, Bc, Cc, row(1, 0), row(0, 1)), 0.1);
    CHECK(m.A()(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.B()(0, 0) == doctest::Approx(0.1).epsilon(1e-14));

    // A = I, B = T*Bc for any zero-drift system.
    Rng rng(3);
    Eigen::MatrixXd Bc2(3, 2);
    for (int i = 0; i < 6; ++i) Bc2(i / 2, i % 2) = rng.uniform(-2.0, 2.0);
    Eigen::MatrixXd Gc2 = Eigen::MatrixXd::Zero(3, 6);
    Gc2.leftCols(3) = Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd Dc2 = Eigen::MatrixXd::Zero(3, 6);
    Dc2.rightCols(3) = Eigen::MatrixXd::Identity(3, 3);
    const LinearModel m2 = discretize_zoh(
        ContinuousModel(Eigen::MatrixXd::Zero(3, 3), Bc2, Eigen::MatrixXd::Identity(3, 3),
                        Gc2, Dc2),
        0.25);
    CHECK((m2.A() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((m2.B() - 0.25 * Bc2).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zoh: double integrator closed form") {
    Eigen::MatrixXd Ac = mat2(0, 1, 0, 0);
    Eigen::MatrixXd Bc(2, 1);
    Bc << 0, 1;
    Eigen::MatrixXd Cc(1, 2);
    Cc << 1, 0;
    Eigen::MatrixXd Gc(2, 3);
    Gc << 1, 0, 0, 0, 1, 0;
    Eigen::MatrixXd Dc(1, 3);
    Dc << 0, 0, 1;
    const LinearModel m = discretize_zoh(ContinuousModel(Ac, Bc, Cc, Gc, Dc), 0.1);
    CHECK((m.A() - mat2(1, 0.1, 0, 1)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(m.B()(0, 0) == doctest::Approx(0.005).epsilon(1e-13));
    CHECK(m.B()(1, 0) == doctest::Approx(0.1).epsilon(1e-13));
}

TEST_CASE("zoh: stable drift gives spectral radius below one") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 3);
        Eigen::MatrixXd Ac(n, n);
        for (int i = 0; i < n * n; ++i) Ac(i / n, i % n) = rng.uniform(-1.0, 1.0);
        const double shift = Ac.eigenvalues().real().maxCoeff();
        Ac -= (shift + 0.2) * Eigen::MatrixXd::Identity(n, n);

        Eigen::MatrixXd Gc = Eigen::MatrixXd::Zero(n, n + 1);
        Gc.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd Dc = Eigen::MatrixXd::Zero(1, n + 1);
        Dc(0, n) = 1.0;
        const LinearModel m = discretize_zoh(
            ContinuousModel(Ac, Eigen::MatrixXd::Zero(n, 1), Eigen::MatrixXd::Ones(1, n),
                            Gc, Dc),
            0.5);
        CHECK(m.A().eigenvalues().cwiseAbs().maxCoeff() < 1.0);
    }
}

TEST_CASE("zoh: discrete process noise matches the quadrature oracle") {
    Eigen::MatrixXd Ac = mat2(0, 1, -4, -0.5);
    Eigen::MatrixXd Gc(2, 3);
    Gc << 0.2, 0, 0, 0, 0.7, 0;
    Eigen::MatrixXd Dc(1, 3);
    Dc << 0, 0, 0.05;
    Eigen::MatrixXd Cc(1, 2);
    Cc << 1, 0;
    const LinearModel m =
        discretize_zoh(ContinuousModel(Ac, Eigen::MatrixXd::Zero(2, 1), Cc, Gc, Dc), 0.1);

    const Eigen::MatrixXd expected =
        oracles::noise_integral_quadrature(Ac, Gc * Gc.transpose(), 0.1);
    CHECK((m.process_cov() - expected).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((m.G() * m.D().transpose()).isZero(0.0));
    CHECK((m.measurement_cov() - Dc * Dc.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("zoh rejects a non-positive sample time") {
    Eigen::MatrixXd Ac(1, 1), Bc(1, 1), Cc(1, 1);
    Ac << 0.0;
    Bc << 1.0;
    Cc << 1.0;
    const ContinuousModel cm(Ac, Bc, Cc, row(1, 0), row(0, 1));
    CHECK_THROWS_AS((void)discretize_zoh(cm, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)discretize_zoh(cm, -1.0), std::invalid_argument);
}

TEST_SUITE_END();
