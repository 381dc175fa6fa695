#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaussdyn {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kDefaultTol = 1e-9;

/// Mass and frequency of the two identical oscillators (hbar = 1 units).
struct OscillatorSpec {
    double m = 1.0;
    double omega = 1.0;

    OscillatorSpec() = default;
    OscillatorSpec(double mass, double freq) : m(mass), omega(freq) {
        if (!(std::isfinite(m) && std::isfinite(omega)))
            throw std::invalid_argument("OscillatorSpec: non-finite input");
        if (m <= 0.0 || omega <= 0.0)
            throw std::invalid_argument("OscillatorSpec: m and omega must be positive");
    }
};

/// Dissipation rate plus the ten diffusion coefficients of the environment
/// coefficient matrix. Plain data; validity is checked by validate_environment.
struct EnvironmentSpec {
    double lambda = 0.0;
    double d_xx = 0.0, d_xpx = 0.0, d_pxpx = 0.0;
    double d_yy = 0.0, d_ypy = 0.0, d_pypy = 0.0;
    double d_xy = 0.0, d_xpy = 0.0, d_ypx = 0.0, d_pxpy = 0.0;

    bool all_finite() const {
        for (double v : {lambda, d_xx, d_xpx, d_pxpx, d_yy, d_ypy, d_pypy,
                         d_xy, d_xpy, d_ypx, d_pxpy})
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// The complex Hermitian coefficient matrix whose positivity encodes
    /// complete positivity of the semigroup.
    Eigen::Matrix4cd coefficient_matrix() const {
        using namespace std::complex_literals;
        Eigen::Matrix4cd h;
        const std::complex<double> il = 0.5i * lambda;
        h << d_xx, -d_xpx - il, d_xy, -d_xpy,
             -d_xpx + il, d_pxpx, -d_ypx, d_pxpy,
             d_xy, -d_ypx, d_yy, -d_ypy - il,
             -d_xpy, d_pxpy, -d_ypy + il, d_pypy;
        return h;
    }
};

struct ConstraintViolation {
    std::string name;
    double residual;  // signed slack; negative means violated
};

struct ValidationResult {
    bool ok = true;
    std::vector<ConstraintViolation> violations;

    bool has(const std::string& name) const {
        for (const auto& v : violations)
            if (v.name == name) return true;
        return false;
    }
};

/// Checks lambda > 0, the six Cauchy-Schwarz minor inequalities, and
/// positive semidefiniteness of the full coefficient matrix.
inline ValidationResult validate_environment(const EnvironmentSpec& env,
                                             double tol = kDefaultTol) {
    if (!env.all_finite() || !std::isfinite(tol) || tol < 0.0)
        throw std::invalid_argument("validate_environment: non-finite input");

    ValidationResult r;
    auto check = [&](const std::string& name, double slack) {
        if (slack < -tol) {
            r.ok = false;
            r.violations.push_back({name, slack});
        }
    };

    check("lambda_positive", env.lambda);
    const double q = env.lambda * env.lambda / 4.0;
    check("cs_xx_pxpx", env.d_xx * env.d_pxpx - env.d_xpx * env.d_xpx - q);
    check("cs_yy_pypy", env.d_yy * env.d_pypy - env.d_ypy * env.d_ypy - q);
    check("cs_xx_yy", env.d_xx * env.d_yy - env.d_xy * env.d_xy);
    check("cs_xx_pypy", env.d_xx * env.d_pypy - env.d_xpy * env.d_xpy);
    check("cs_yy_pxpx", env.d_yy * env.d_pxpx - env.d_ypx * env.d_ypx);
    check("cs_pxpx_pypy", env.d_pxpx * env.d_pypy - env.d_pxpy * env.d_pxpy);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(env.coefficient_matrix(),
                                                       Eigen::EigenvaluesOnly);
    check("coefficient_matrix_psd", es.eigenvalues().minCoeff());
    return r;
}

/// Environment with equal diagonal sub-blocks and symmetric coupling block:
/// d_yy = d_xx, d_ypy = d_xpx, d_pypy = d_pxpx, d_ypx = d_xpy.
inline EnvironmentSpec symmetric_environment(double lambda, double d_xx,
                                             double d_xpx, double d_pxpx,
                                             double d_xy, double d_xpy,
                                             double d_pxpy) {
    EnvironmentSpec e;
    e.lambda = lambda;
    e.d_xx = d_xx;
    e.d_xpx = d_xpx;
    e.d_pxpx = d_pxpx;
    e.d_yy = d_xx;
    e.d_ypy = d_xpx;
    e.d_pypy = d_pxpx;
    e.d_xy = d_xy;
    e.d_xpy = d_xpy;
    e.d_ypx = d_xpy;
    e.d_pxpy = d_pxpy;
    return e;
}

/// Symmetric environment whose asymptotic state is thermal-like:
/// m^2 w^2 d_xx = d_pxpx, d_xpx = 0, m^2 w^2 d_xy = d_pxpy.
inline EnvironmentSpec gibbs_environment(const OscillatorSpec& osc, double lambda,
                                         double d_xx, double d_xy, double d_xpy) {
    const double mw2 = osc.m * osc.m * osc.omega * osc.omega;
    return symmetric_environment(lambda, d_xx, 0.0, mw2 * d_xx, d_xy, d_xpy,
                                 mw2 * d_xy);
}

/// Real symmetric 4x4 second-moment matrix in (x, p_x, y, p_y) ordering.
/// Symmetry is exact by construction from the upper triangle.
class CovarianceMatrix {
public:
    CovarianceMatrix() : m_(Mat4::Zero()) {}

    static CovarianceMatrix from_matrix(const Mat4& m, double tol = kDefaultTol) {
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol)
            throw std::invalid_argument("CovarianceMatrix: input not symmetric");
        Mat4 s;
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) s(i, j) = s(j, i) = m(i, j);
        return CovarianceMatrix(s);
    }

    /// Row-major upper triangle: xx, xpx, xy, xpy, pxpx, ypx, pxpy, yy, ypy, pypy.
    static CovarianceMatrix from_upper(const std::array<double, 10>& u) {
        Mat4 s;
        s(0, 0) = u[0];
        s(0, 1) = s(1, 0) = u[1];
        s(0, 2) = s(2, 0) = u[2];
        s(0, 3) = s(3, 0) = u[3];
        s(1, 1) = u[4];
        s(1, 2) = s(2, 1) = u[5];
        s(1, 3) = s(3, 1) = u[6];
        s(2, 2) = u[7];
        s(2, 3) = s(3, 2) = u[8];
        s(3, 3) = u[9];
        return CovarianceMatrix(s);
    }

    static CovarianceMatrix vacuum() {
        return CovarianceMatrix(Mat4(0.5 * Mat4::Identity()));
    }

    const Mat4& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    explicit CovarianceMatrix(const Mat4& m) : m_(m) {}
    Mat4 m_;

    friend CovarianceMatrix symmetrized(const Mat4& m);
};

/// Exact symmetrization (m + m^T)/2, for outputs of numerical pipelines.
inline CovarianceMatrix symmetrized(const Mat4& m) {
    Mat4 s = 0.5 * (m + m.transpose());
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) s(j, i) = s(i, j);
    return CovarianceMatrix(s);
}

struct TwoModeBlocks {
    Mat2 a, b, c;

    Mat4 reassemble() const {
        Mat4 m;
        m.topLeftCorner<2, 2>() = a;
        m.topRightCorner<2, 2>() = c;
        m.bottomLeftCorner<2, 2>() = c.transpose();
        m.bottomRightCorner<2, 2>() = b;
        return m;
    }
};

inline TwoModeBlocks blocks(const CovarianceMatrix& sigma) {
    const Mat4& m = sigma.matrix();
    return {m.topLeftCorner<2, 2>(), m.bottomRightCorner<2, 2>(),
            m.topRightCorner<2, 2>()};
}

/// 2x2 symplectic unit.
inline Mat2 symplectic_j() {
    Mat2 j;
    j << 0, 1, -1, 0;
    return j;
}

/// Two-mode symplectic form J + J in (x, p_x, y, p_y) ordering.
inline Mat4 symplectic_form() {
    Mat4 w = Mat4::Zero();
    w.topLeftCorner<2, 2>() = symplectic_j();
    w.bottomRightCorner<2, 2>() = symplectic_j();
    return w;
}

/// Symplectic eigenvalues of a symmetric 4x4 matrix: the two distinct moduli
/// of the eigenvalues of i*Omega*sigma, ascending.
inline std::array<double, 2> symplectic_eigenvalues(const Mat4& sigma) {
    Eigen::EigenSolver<Mat4> es(symplectic_form() * sigma, false);
    std::array<double, 4> mods;
    for (int i = 0; i < 4; ++i) mods[i] = std::abs(es.eigenvalues()(i));
    std::sort(mods.begin(), mods.end());
    return {0.5 * (mods[0] + mods[1]), 0.5 * (mods[2] + mods[3])};
}

struct PhysicalityReport {
    std::array<double, 2> symplectic_eigenvalues;  // ascending
    bool is_physical;
    double min_margin;  // nu_minus - 1/2
};

/// Uncertainty-principle gate: physical iff the smallest symplectic
/// eigenvalue is >= 1/2 within tolerance.
inline PhysicalityReport check_physical(const CovarianceMatrix& sigma,
                                        double tol = kDefaultTol) {
    auto nu = symplectic_eigenvalues(sigma.matrix());
    const double margin = nu[0] - 0.5;
    return {nu, margin >= -tol, margin};
}

}  // namespace gaussdyn
