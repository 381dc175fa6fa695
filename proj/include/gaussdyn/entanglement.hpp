#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "gaussdyn/core.hpp"
#include "gaussdyn/dynamics.hpp"

namespace gaussdyn {

inline constexpr double kVerdictBand = 1e-12;

enum class Verdict { separable, entangled, boundary };

struct SimonValue {
    double s;
    Verdict verdict;
};

inline Verdict verdict_of(double s) {
    if (std::abs(s) <= kVerdictBand) return Verdict::boundary;
    return s < 0.0 ? Verdict::entangled : Verdict::separable;
}

/// Simon separability function
/// S = det A det B + (1/4 - |det C|)^2 - Tr[A J C J B J C^T J] - (det A + det B)/4.
/// Separable iff S >= 0.
inline SimonValue simon_s(const CovarianceMatrix& sigma) {
    const TwoModeBlocks bl = blocks(sigma);
    const Mat2 j = symplectic_j();
    const double det_a = bl.a.determinant();
    const double det_b = bl.b.determinant();
    const double det_c = bl.c.determinant();
    const double quarter_minus = 0.25 - std::abs(det_c);
    const double tr = (bl.a * j * bl.c * j * bl.b * j * bl.c.transpose() * j).trace();
    const double s = det_a * det_b + quarter_minus * quarter_minus - tr -
                     0.25 * (det_a + det_b);
    return {s, verdict_of(s)};
}

struct NegativityValue {
    double e;                // logarithmic negativity, bits; +inf if f clamped to 0
    double f;                // the f(sigma) intermediate
    double nu_tilde_minus;   // smallest PT-symplectic eigenvalue
    bool clamped = false;    // f fell in (-tol, 0] and was clamped
    bool entangled() const { return e > 0.0; }
};

/// Partial transpose in phase space: flip the sign of mode-2 momentum.
inline Mat4 partial_transpose(const Mat4& sigma) {
    Mat4 p = Mat4::Identity();
    p(3, 3) = -1.0;
    return p * sigma * p;
}

/// Logarithmic negativity E = -(1/2) log2(4 f) with
/// f = g - sqrt(g^2 - det sigma), g = (det A + det B)/2 - det C.
/// Cross-checked against the PT-symplectic spectrum: f must equal nu~_-^2.
inline NegativityValue log_negativity(const CovarianceMatrix& sigma,
                                      double tol = kDefaultTol) {
    const TwoModeBlocks bl = blocks(sigma);
    const double g = 0.5 * (bl.a.determinant() + bl.b.determinant()) -
                     bl.c.determinant();
    const double disc = g * g - sigma.matrix().determinant();
    if (disc < -tol)
        throw std::domain_error("log_negativity: negative discriminant");
    const double f = g - std::sqrt(std::max(disc, 0.0));
    if (f <= -tol)
        throw std::domain_error("log_negativity: degenerate covariance (f <= 0)");

    const double nu = symplectic_eigenvalues(partial_transpose(sigma.matrix()))[0];
    if (std::abs(f - nu * nu) > 1e-10)
        throw std::runtime_error(
            "log_negativity: formula and PT spectrum disagree beyond 1e-10");

    NegativityValue out{0.0, f, nu, false};
    if (f <= 0.0) {
        out.f = 0.0;
        out.e = std::numeric_limits<double>::infinity();
        out.clamped = true;
        return out;
    }
    out.e = -0.5 * std::log2(4.0 * f);
    return out;
}

namespace detail {

inline void require_symmetric_env(const EnvironmentSpec& e, double tol) {
    if (std::abs(e.d_yy - e.d_xx) > tol || std::abs(e.d_ypy - e.d_xpx) > tol ||
        std::abs(e.d_pypy - e.d_pxpx) > tol || std::abs(e.d_ypx - e.d_xpy) > tol)
        throw std::invalid_argument(
            "asymptotic closed form requires the symmetric environment");
}

inline void require_gibbs_env(const OscillatorSpec& osc, const EnvironmentSpec& e,
                              double tol) {
    require_symmetric_env(e, tol);
    const double mw2 = osc.m * osc.m * osc.omega * osc.omega;
    if (std::abs(mw2 * e.d_xx - e.d_pxpx) > tol || std::abs(e.d_xpx) > tol ||
        std::abs(mw2 * e.d_xy - e.d_pxpy) > tol)
        throw std::invalid_argument(
            "asymptotic closed form requires the Gibbs-case environment");
}

// Shared kernel for the three asymptotic correlation elements; feeding the
// (d_xx, d_xpx, d_pxpx) coefficients instead yields the diagonal block.
inline Mat2 asymptotic_block(const OscillatorSpec& osc, const EnvironmentSpec& env,
                             double dq, double dqp, double dpp) {
    const double m = osc.m, w = osc.omega, l = env.lambda;
    const double lw = l * l + w * w;
    const double s_qq = (m * m * (2.0 * l * l + w * w) * dq + 2.0 * m * l * dqp + dpp) /
                        (2.0 * m * m * l * lw);
    const double s_qp = (-m * m * w * w * dq + 2.0 * m * l * dqp + dpp) /
                        (2.0 * m * lw);
    const double s_pp = (m * m * w * w * w * w * dq - 2.0 * m * w * w * l * dqp +
                         (2.0 * l * l + w * w) * dpp) /
                        (2.0 * l * lw);
    Mat2 out;
    out << s_qq, s_qp, s_qp, s_pp;
    return out;
}

}  // namespace detail

/// Asymptotic cross-correlation block C(inf) of the symmetric environment.
inline Mat2 asymptotic_c_block(const OscillatorSpec& osc, const EnvironmentSpec& env,
                               double tol = kDefaultTol) {
    detail::require_symmetric_env(env, tol);
    return detail::asymptotic_block(osc, env, env.d_xy, env.d_xpy, env.d_pxpy);
}

/// Asymptotic diagonal block A(inf) = B(inf) (same kernel with x = y).
inline Mat2 asymptotic_a_block(const OscillatorSpec& osc, const EnvironmentSpec& env,
                               double tol = kDefaultTol) {
    detail::require_symmetric_env(env, tol);
    return detail::asymptotic_block(osc, env, env.d_xx, env.d_xpx, env.d_pxpx);
}

inline double asymptotic_det_c(const OscillatorSpec& osc, const EnvironmentSpec& env,
                               double tol = kDefaultTol) {
    detail::require_symmetric_env(env, tol);
    const double m = osc.m, w = osc.omega, l = env.lambda;
    const double a = m * w * w * env.d_xy + env.d_pxpy / m;
    return (a * a + 4.0 * l * l * (env.d_xy * env.d_pxpy - env.d_xpy * env.d_xpy)) /
           (4.0 * l * l * (l * l + w * w));
}

/// S(inf) closed form for the Gibbs-case environment.
inline double asymptotic_simon_gibbs(const OscillatorSpec& osc,
                                     const EnvironmentSpec& env,
                                     double tol = kDefaultTol) {
    detail::require_gibbs_env(osc, env, tol);
    const double m = osc.m, w = osc.omega, l = env.lambda;
    const double lw = l * l + w * w;
    const double mw2 = m * m * w * w;
    const double a = mw2 * (env.d_xx * env.d_xx - env.d_xy * env.d_xy) / (l * l) +
                     env.d_xpy * env.d_xpy / lw - 0.25;
    const double s = a * a - 4.0 * mw2 * env.d_xx * env.d_xx * env.d_xpy * env.d_xpy /
                                 (l * l * lw);
    // The quartic above absorbs |det C(inf)| assuming det C(inf) <= 0; correct
    // for the opposite branch, reached once d_xy dominates d_xpy.
    const double det_c = mw2 * env.d_xy * env.d_xy / (l * l) -
                         env.d_xpy * env.d_xpy / lw;
    return det_c > 0.0 ? s - det_c : s;
}

/// d_xpy band in which S(inf) < 0 for the Gibbs case with d_xy = 0:
/// sqrt(l^2 + w^2) * (m w d_xx / l -/+ 1/2).
inline std::pair<double, double> entanglement_interval(const OscillatorSpec& osc,
                                                       const EnvironmentSpec& env,
                                                       double tol = kDefaultTol) {
    detail::require_gibbs_env(osc, env, tol);
    if (std::abs(env.d_xy) > tol)
        throw std::invalid_argument("entanglement_interval: requires d_xy = 0");
    const double ratio = osc.m * osc.omega * env.d_xx / env.lambda;
    if (ratio < 0.5 - tol)
        throw std::invalid_argument(
            "entanglement_interval: unimodal uncertainty condition "
            "m w d_xx / lambda >= 1/2 violated");
    const double root = std::sqrt(env.lambda * env.lambda + osc.omega * osc.omega);
    return {root * (ratio - 0.5), root * (ratio + 0.5)};
}

/// E(inf) = -log2( 2 | m w d_xx / l - d_xpy / sqrt(l^2 + w^2) | ),
/// Gibbs case with d_xy = 0. Independent of the initial Gaussian state.
inline double asymptotic_negativity(const OscillatorSpec& osc,
                                    const EnvironmentSpec& env,
                                    double tol = kDefaultTol) {
    detail::require_gibbs_env(osc, env, tol);
    if (std::abs(env.d_xy) > tol)
        throw std::invalid_argument("asymptotic_negativity: requires d_xy = 0");
    // the PT symplectic pair is m w d_xx / lambda -/+ |d_xpy| / sqrt(l^2+w^2)
    const double x = osc.m * osc.omega * env.d_xx / env.lambda -
                     std::abs(env.d_xpy) / std::sqrt(env.lambda * env.lambda +
                                                     osc.omega * osc.omega);
    return -std::log2(2.0 * std::abs(x));
}

}  // namespace gaussdyn
