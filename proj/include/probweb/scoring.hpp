#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probweb/error.hpp"
#include "probweb/expansion.hpp"
#include "probweb/model.hpp"
#include "probweb/web.hpp"

namespace probweb {

/// Expected self-score Σ p ln p in natural log, with 0 ln 0 = 0. This is the
/// negative Shannon entropy; always ≤ 0 for a normalized distribution.
inline double log_score(std::span<const double> p) {
    double g = 0.0;
    for (double v : p)
        if (v > 0.0) g += v * std::log(v);
    return g;
}

inline double log_score(const ProbTable& t) { return log_score(std::span<const double>(t.values())); }

inline double log_score(const JointDistribution& j) {
    return log_score(std::span<const double>(j.values));
}

/// Relative score Σ p ln q. Negative infinity is a first-class value,
/// returned when some state has p > 0 but q = 0.
inline double relative_score(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw Error(errc::space_mismatch, "relative score needs equally sized distributions");
    double g = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return -std::numeric_limits<double>::infinity();
        g += p[i] * std::log(q[i]);
    }
    return g;
}

inline double relative_score(const JointDistribution& p, const JointDistribution& q) {
    if (!(p.space == q.space))
        throw Error(errc::space_mismatch, "relative score needs a common space");
    return relative_score(std::span<const double>(p.values), std::span<const double>(q.values));
}

inline double relative_score(const ProbTable& p, const ProbTable& q) {
    if (!(p.space() == q.space()))
        throw Error(errc::space_mismatch, "relative score needs a common scope");
    return relative_score(std::span<const double>(p.values()), std::span<const double>(q.values()));
}

struct ScoreTerm {
    std::string label;
    double value = 0.0;
};

/**
 * Score summary for a system under one unpacking. The guaranteed values are
 * assembled from the stored term lists, so g_guaranteed_standard always
 * equals Σ component_terms − Σ overlap_terms and g_guaranteed_alt equals
 * Σ component_terms − Σ intersection_terms + ln_k, reproducibly.
 *
 * Operations that skip a value leave it NaN (or nullopt for the optional
 * joint-level scores): guaranteed_score_standard never normalizes the
 * alternative model, so its reports carry no g_guaranteed_alt and no
 * intersection terms.
 */
struct ScoreReport {
    std::optional<double> g_self;      // G of the enumerated product extension
    std::optional<double> g_relative;  // G(reference, product extension)
    double g_guaranteed_standard = std::numeric_limits<double>::quiet_NaN();
    double g_guaranteed_alt = std::numeric_limits<double>::quiet_NaN();
    double ln_k = 0.0;
    double uniform_baseline = 0.0;
    std::vector<ScoreTerm> component_terms;
    std::vector<ScoreTerm> overlap_terms;
    std::vector<ScoreTerm> intersection_terms;
};

inline double reassemble_standard(const ScoreReport& r) {
    double c = 0.0;
    for (const auto& t : r.component_terms) c += t.value;
    double o = 0.0;
    for (const auto& t : r.overlap_terms) o += t.value;
    return c - o;
}

inline double reassemble_alt(const ScoreReport& r) {
    double c = 0.0;
    for (const auto& t : r.component_terms) c += t.value;
    double i = 0.0;
    for (const auto& t : r.intersection_terms) i += t.value;
    return c - i + r.ln_k;
}

namespace detail {

struct TermSet {
    std::vector<ScoreTerm> component;
    std::vector<ScoreTerm> overlap;
    std::vector<ScoreTerm> intersection;
};

// Every G is taken from the unpacking step's own component table, matching
// the expansion convention for overlap marginals.
inline TermSet score_terms(const ProbabilitySystem& sys, const Unpacking& unpacking,
                           bool with_intersections) {
    TermSet ts;
    for (const auto& step : unpacking.steps) {
        const ProbTable& table = sys.table_for(step.component_index);
        ts.component.push_back({join_names(step.component), log_score(table)});
        if (!step.overlap.empty())
            ts.overlap.push_back(
                {join_names(step.overlap), log_score(marginalize(table, step.overlap))});
        if (with_intersections)
            for (const auto& ostar : step.intersection_overlaps)
                ts.intersection.push_back(
                    {join_names(ostar), log_score(marginalize(table, ostar))});
    }
    return ts;
}

}  // namespace detail

/**
 * The guaranteed relative score of the product extension: for any consistent
 * joint P, G(P, P^x) collapses to Σ G(P(C_i)) − Σ G(P(O_i)), computed here
 * purely from the component tables with no joint enumeration.
 */
inline ScoreReport guaranteed_score_standard(const ProbabilitySystem& sys,
                                             const Unpacking& unpacking) {
    auto ts = detail::score_terms(sys, unpacking, false);
    ScoreReport r;
    r.component_terms = std::move(ts.component);
    r.overlap_terms = std::move(ts.overlap);
    r.g_guaranteed_standard = reassemble_standard(r);
    r.ln_k = 0.0;
    r.uniform_baseline = -std::log(static_cast<double>(sys.space.size()));
    return r;
}

/**
 * The guaranteed relative score of the alternative model: for any consistent
 * joint P, G(P, P*) = Σ G(P(C_i)) − Σ G(P(O*)) + ln k. Normalizing k requires
 * running the alternative model itself; the marginal terms stay local. The
 * standard value is filled in as well, since its terms come for free.
 */
inline ScoreReport guaranteed_score_alt(const ProbabilitySystem& sys, const Unpacking& unpacking) {
    auto ts = detail::score_terms(sys, unpacking, true);
    ScoreReport r;
    r.component_terms = std::move(ts.component);
    r.overlap_terms = std::move(ts.overlap);
    r.intersection_terms = std::move(ts.intersection);
    r.g_guaranteed_standard = reassemble_standard(r);
    ExpansionResult alt = alternative_model(sys, unpacking);
    r.ln_k = std::log(alt.k);
    r.g_guaranteed_alt = reassemble_alt(r);
    r.uniform_baseline = -std::log(static_cast<double>(sys.space.size()));
    return r;
}

/**
 * Both guaranteed scores plus, when enumeration is requested, the product
 * extension's self-score and its relative score against a reference joint
 * (typically a consistency witness).
 */
inline ScoreReport full_score_report(const ProbabilitySystem& sys, const Unpacking& unpacking,
                                     bool enumerate_joint = true,
                                     const JointDistribution* reference = nullptr) {
    ScoreReport r = guaranteed_score_alt(sys, unpacking);
    if (enumerate_joint) {
        ExpansionResult px = product_extension(sys, unpacking);
        r.g_self = log_score(px.joint);
        if (reference) r.g_relative = relative_score(*reference, px.joint);
    }
    return r;
}

}  // namespace probweb
