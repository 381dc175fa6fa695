#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaussdyn/core.hpp"
#include "gaussdyn/dynamics.hpp"
#include "gaussdyn/entanglement.hpp"

namespace gaussdyn {

inline constexpr double kDefaultTraceTmaxOverInvLambda = 20.0;
inline constexpr int kDefaultTraceSamples = 2000;

/// Sampled S(t), E(t) along a trajectory. e_values is +inf where f was
/// clamped to zero and NaN where the negativity is undefined.
struct EntanglementTrace {
    std::vector<double> times;
    std::vector<double> s_values;
    std::vector<double> e_values;
    std::vector<double> nu_values;  // smallest PT-symplectic eigenvalue
};

inline EntanglementTrace trace(const CovarianceMatrix& sigma0,
                               const OscillatorSpec& osc, const EnvironmentSpec& env,
                               double t_max, int n_samples) {
    if (!(t_max > 0.0)) throw std::invalid_argument("trace: t_max must be > 0");
    if (n_samples < 2) throw std::invalid_argument("trace: n_samples must be >= 2");

    const Evolution ev(osc, env);
    EntanglementTrace tr;
    tr.times.reserve(n_samples);
    tr.s_values.reserve(n_samples);
    tr.e_values.reserve(n_samples);
    tr.nu_values.reserve(n_samples);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < n_samples; ++i) {
        const double t = t_max * static_cast<double>(i) / (n_samples - 1);
        const CovarianceMatrix s = ev.at(sigma0, t);
        tr.times.push_back(t);
        tr.s_values.push_back(simon_s(s).s);
        try {
            const NegativityValue n = log_negativity(s);
            tr.e_values.push_back(n.e);
            tr.nu_values.push_back(n.nu_tilde_minus);
        } catch (const std::exception&) {
            tr.e_values.push_back(nan);
            tr.nu_values.push_back(nan);
        }
    }
    return tr;
}

enum class Classification {
    separable_throughout,
    entangled_throughout,
    generation,
    sudden_death,
    collapse_and_revival,
    temporary_generation,
};

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::separable_throughout: return "separable-throughout";
        case Classification::entangled_throughout: return "entangled-throughout";
        case Classification::generation: return "generation";
        case Classification::sudden_death: return "sudden-death";
        case Classification::collapse_and_revival: return "collapse-and-revival";
        case Classification::temporary_generation: return "temporary-generation";
    }
    return "?";
}

struct Crossing {
    double t;
    bool to_entangled;
};

struct EventReport {
    std::vector<Crossing> crossings;
    Classification classification;
    int asymptotic_verdict;  // sign of S(inf): -1 entangled, 0 boundary, +1 separable
    double asymptotic_s;
    std::vector<std::string> warnings;
};

/// Sign-change detection on the sampled trace, bisection refinement on the
/// closed-form S(sigma(t)), and phenomenology classification.
inline EventReport detect_events(const EntanglementTrace& tr,
                                 const OscillatorSpec& osc,
                                 const EnvironmentSpec& env,
                                 const CovarianceMatrix& sigma0,
                                 double refine_tol = 1e-12) {
    if (tr.times.size() < 2 || tr.times.size() != tr.s_values.size())
        throw std::invalid_argument("detect_events: malformed trace");

    const Evolution ev(osc, env);
    auto s_at = [&](double t) { return simon_s(ev.at(sigma0, t)).s; };

    EventReport rep;
    for (std::size_t i = 0; i + 1 < tr.times.size(); ++i) {
        double sa = tr.s_values[i], sb = tr.s_values[i + 1];
        if (!(sa * sb < 0.0)) continue;
        double a = tr.times[i], b = tr.times[i + 1];
        // closed-form values may disagree in sign with the sampled trace only
        // if the grid is too coarse to bracket cleanly
        double fa = s_at(a);
        if (fa * sa < 0.0) {
            rep.warnings.push_back(
                "sign flip within one grid cell; increase n_samples");
            continue;
        }
        for (int it = 0; it < 60 && (b - a) > refine_tol; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = s_at(mid);
            if (fm == 0.0) { a = b = mid; break; }
            if (fa * fm < 0.0) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        rep.crossings.push_back({0.5 * (a + b), sb < 0.0});
    }

    double s_inf;
    try {
        s_inf = asymptotic_simon_gibbs(osc, env);
    } catch (const std::invalid_argument&) {
        s_inf = simon_s(steady_state(build_drift(osc, env), build_diffusion(env))).s;
    }
    rep.asymptotic_s = s_inf;
    rep.asymptotic_verdict =
        (std::abs(s_inf) <= kVerdictBand) ? 0 : (s_inf < 0.0 ? -1 : 1);

    const bool initially_entangled = tr.s_values.front() < 0.0;
    const std::size_t n = rep.crossings.size();
    if (n == 0) {
        rep.classification = initially_entangled
                                 ? Classification::entangled_throughout
                                 : Classification::separable_throughout;
    } else if (n == 1) {
        rep.classification = rep.crossings.front().to_entangled
                                 ? Classification::generation
                                 : Classification::sudden_death;
    } else {
        const bool ends_separable = rep.asymptotic_verdict >= 0 &&
                                    !(tr.s_values.back() < 0.0);
        if (rep.crossings.front().to_entangled && ends_separable)
            rep.classification = Classification::temporary_generation;
        else
            rep.classification = Classification::collapse_and_revival;
    }
    return rep;
}

}  // namespace gaussdyn
