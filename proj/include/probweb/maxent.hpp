#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "probweb/error.hpp"
#include "probweb/expansion.hpp"
#include "probweb/model.hpp"
#include "probweb/scoring.hpp"

namespace probweb {

struct MaxentResult {
    JointDistribution joint;  // the maximum-entropy member of the consistent set
    int iterations = 0;
    double residual = 0.0;
    double entropy = 0.0;  // equals -log_score(joint)
};

namespace detail {

// Shared IPF error mapping: a stalled residual at or above the consistency
// threshold means the constraint set is empty; anything else that failed to
// reach tol is a convergence failure.
[[noreturn]] inline void throw_ipf_failure(const IpfResult& fit, double consistency_tol) {
    if (fit.status == IpfStatus::stalled && fit.residual >= consistency_tol)
        throw Error(errc::inconsistent,
                    "component tables admit no common joint (residual " +
                        std::to_string(fit.residual) + ")");
    throw Error(errc::not_converged,
                "proportional fitting did not reach tolerance (residual " +
                    std::to_string(fit.residual) + ")");
}

}  // namespace detail

/**
 * Maximum-entropy member of the consistent set: the limit of proportional
 * fitting started from the uniform joint, which is the I-projection of
 * uniform onto the constraint set. The run doubles as the consistency check;
 * an empty constraint set raises Inconsistent.
 */
inline MaxentResult maxent_fit(const ProbabilitySystem& sys, double tol = 1e-10,
                               int max_iter = 10000) {
    IpfOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    IpfResult fit = ipf_fit(sys, uniform_distribution(sys.space), opts);
    if (fit.status != IpfStatus::converged) detail::throw_ipf_failure(fit, 1e-9);
    MaxentResult result;
    result.iterations = fit.sweeps;
    result.residual = fit.residual;
    result.entropy = -log_score(fit.joint);
    result.joint = std::move(fit.joint);
    return result;
}

/// Strictly positive random joint: one uniform(0,1) draw per state, floored
/// at 1e-12, then normalized.
inline JointDistribution random_positive_joint(const JointSpace& space, std::mt19937_64& rng) {
    std::vector<double> values(space.size());
    for (double& v : values) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = u < 1e-12 ? 1e-12 : u;
    }
    JointDistribution joint(space, std::move(values));
    joint.normalize();
    return joint;
}

/**
 * Draws `count` members of the consistent set, each the IPF limit from an
 * independent strictly positive random initial joint. Sample i is seeded
 * with seed + i, so any sample can be regenerated alone.
 */
inline std::vector<JointDistribution> sample_K(const ProbabilitySystem& sys, std::uint64_t seed,
                                               int count, double tol = 1e-10,
                                               int max_iter = 10000) {
    std::vector<JointDistribution> samples;
    samples.reserve(static_cast<std::size_t>(count));
    IpfOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
        IpfResult fit = ipf_fit(sys, random_positive_joint(sys.space, rng), opts);
        if (fit.status != IpfStatus::converged) detail::throw_ipf_failure(fit, 1e-9);
        samples.push_back(std::move(fit.joint));
    }
    return samples;
}

struct GuaranteeViolation {
    std::size_t sample_index = 0;
    std::string check;  // "self-vs-relative", "relative-vs-maxent", "pythagorean"
    double amount = 0.0;
};

struct GuaranteeChainReport {
    int checked = 0;
    double maxent_entropy = 0.0;
    std::vector<GuaranteeViolation> violations;
    bool ok() const { return violations.empty(); }
};

/**
 * Checks, for each supplied member P of the consistent set, the chain
 * G(P) ≥ G(P, P') ≥ G(P') against the fitted maxent joint P', plus the
 * I-projection identity G(P, P') = G(P') that makes the lower guarantee
 * attainable. Violations are collected, not thrown.
 */
inline GuaranteeChainReport verify_guarantee_chain(const ProbabilitySystem& sys,
                                                   const std::vector<JointDistribution>& samples,
                                                   double tol_chain = 1e-8,
                                                   double tol_pyth = 1e-6) {
    MaxentResult maxent = maxent_fit(sys);
    const double g_prime = log_score(maxent.joint);
    GuaranteeChainReport report;
    report.maxent_entropy = maxent.entropy;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double g_p = log_score(samples[i]);
        const double g_rel = relative_score(samples[i], maxent.joint);
        ++report.checked;
        if (g_p < g_rel - tol_chain)
            report.violations.push_back({i, "self-vs-relative", g_rel - g_p});
        if (g_rel < g_prime - tol_chain)
            report.violations.push_back({i, "relative-vs-maxent", g_prime - g_rel});
        if (std::abs(g_rel - g_prime) >= tol_pyth)
            report.violations.push_back({i, "pythagorean", std::abs(g_rel - g_prime)});
    }
    return report;
}

}  // namespace probweb
