#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

#include "gaussdyn/core.hpp"

namespace gaussdyn {

/// Drift matrix Y: block-diagonal, per mode [[-lambda, 1/m], [-m w^2, -lambda]].
struct DriftMatrix {
    Mat4 entries;
    double lambda, m, omega;
};

inline DriftMatrix build_drift(const OscillatorSpec& osc, const EnvironmentSpec& env) {
    Mat2 blk;
    blk << -env.lambda, 1.0 / osc.m, -osc.m * osc.omega * osc.omega, -env.lambda;
    Mat4 y = Mat4::Zero();
    y.topLeftCorner<2, 2>() = blk;
    y.bottomRightCorner<2, 2>() = blk;
    return {y, env.lambda, osc.m, osc.omega};
}

struct DiffusionMatrix {
    Mat4 entries;
};

inline DiffusionMatrix build_diffusion(const EnvironmentSpec& e) {
    Mat4 d;
    d << e.d_xx, e.d_xpx, e.d_xy, e.d_xpy,
         e.d_xpx, e.d_pxpx, e.d_ypx, e.d_pxpy,
         e.d_xy, e.d_ypx, e.d_yy, e.d_ypy,
         e.d_xpy, e.d_pxpy, e.d_ypy, e.d_pypy;
    return {d};
}

struct Propagator {
    Mat4 entries;
    double t;
};

/// exp(Yt) via the exact per-block closed form
/// e^{-lt} [[cos wt, sin wt/(m w)], [-m w sin wt, cos wt]].
inline Propagator propagator(const DriftMatrix& y, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("propagator: t must be >= 0");
    const double decay = std::exp(-y.lambda * t);
    const double c = std::cos(y.omega * t);
    const double s = std::sin(y.omega * t);
    const double mw = y.m * y.omega;
    Mat2 blk;
    blk << c, s / mw, -mw * s, c;
    blk *= decay;
    Mat4 m = Mat4::Zero();
    m.topLeftCorner<2, 2>() = blk;
    m.bottomRightCorner<2, 2>() = blk;
    return {m, t};
}

/// Generic scaling-and-squaring exponential; cross-check path only.
inline Mat4 propagator_generic(const Mat4& y, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("propagator_generic: t must be >= 0");
    return Mat4(y * t).exp();
}

/// Solves Y s + s Y^T = -2 D by the 16x16 Kronecker-sum linear system.
inline CovarianceMatrix steady_state(const DriftMatrix& y, const DiffusionMatrix& d) {
    if (!(y.lambda > 0.0))
        throw std::invalid_argument("steady_state: lambda must be > 0 (Y Hurwitz)");
    using Mat16 = Eigen::Matrix<double, 16, 16>;
    using Vec16 = Eigen::Matrix<double, 16, 1>;
    Mat16 k = Mat16::Zero();
    const Mat4& Y = y.entries;
    // vec(Y s + s Y^T) = (I kron Y + Y kron I) vec(s), column-major vec
    for (int i = 0; i < 4; ++i) {
        k.block<4, 4>(4 * i, 4 * i) += Y;
        for (int j = 0; j < 4; ++j)
            k.block<4, 4>(4 * i, 4 * j) += Y(i, j) * Mat4::Identity();
    }
    Vec16 rhs = -2.0 * Eigen::Map<const Vec16>(d.entries.data());
    Eigen::FullPivLU<Mat16> lu(k);
    if (!lu.isInvertible())
        throw std::runtime_error("steady_state: singular Lyapunov system");
    Vec16 x = lu.solve(rhs);
    return symmetrized(Eigen::Map<Mat4>(x.data()));
}

/// Precomputed (Y, D, sigma_inf) bundle for repeated evaluation along a trajectory.
struct Evolution {
    DriftMatrix y;
    DiffusionMatrix d;
    Mat4 sigma_inf;

    Evolution(const OscillatorSpec& osc, const EnvironmentSpec& env)
        : y(build_drift(osc, env)),
          d(build_diffusion(env)),
          sigma_inf(steady_state(y, d).matrix()) {}

    CovarianceMatrix at(const CovarianceMatrix& sigma0, double t) const {
        if (t == 0.0) return sigma0;  // exact, avoids (s0 - si) + si roundoff
        const Mat4 m = propagator(y, t).entries;
        return symmetrized(m * (sigma0.matrix() - sigma_inf) * m.transpose() +
                           sigma_inf);
    }
};

/// sigma(t) = M(t) (sigma0 - sigma_inf) M^T(t) + sigma_inf.
inline CovarianceMatrix evolve(const CovarianceMatrix& sigma0, const DriftMatrix& y,
                               const DiffusionMatrix& d, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be >= 0");
    if (t == 0.0) return sigma0;
    const Mat4 si = steady_state(y, d).matrix();
    const Mat4 m = propagator(y, t).entries;
    return symmetrized(m * (sigma0.matrix() - si) * m.transpose() + si);
}

/// Fixed-step RK4 integration of ds/dt = Y s + s Y^T + 2 D.
/// Independent of the closed-form path; used for cross-validation.
inline CovarianceMatrix evolve_ode_oracle(const CovarianceMatrix& sigma0,
                                          const DriftMatrix& y,
                                          const DiffusionMatrix& d, double t,
                                          double dt = 1e-3) {
    if (!(t >= 0.0)) throw std::invalid_argument("evolve_ode_oracle: t must be >= 0");
    if (t == 0.0) return sigma0;
    if (!(dt > 0.0) || dt > t)
        throw std::invalid_argument("evolve_ode_oracle: need 0 < dt <= t");

    const Mat4& Y = y.entries;
    const Mat4 twoD = 2.0 * d.entries;
    auto rhs = [&](const Mat4& s) -> Mat4 {
        return Y * s + s * Y.transpose() + twoD;
    };

    Mat4 s = sigma0.matrix();
    const auto n_full = static_cast<long>(std::floor(t / dt));
    double covered = 0.0;
    auto step = [&](double h) {
        const Mat4 k1 = rhs(s);
        const Mat4 k2 = rhs(s + 0.5 * h * k1);
        const Mat4 k3 = rhs(s + 0.5 * h * k2);
        const Mat4 k4 = rhs(s + h * k3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    for (long i = 0; i < n_full; ++i) step(dt);
    covered = static_cast<double>(n_full) * dt;
    if (t - covered > 1e-14 * t) step(t - covered);
    return symmetrized(s);
}

}  // namespace gaussdyn
