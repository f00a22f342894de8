#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "probweb/error.hpp"
#include "probweb/model.hpp"
#include "probweb/web.hpp"

namespace probweb {

/**
 * A probability system: a variable space, a structure over it, and one
 * normalized joint table per component (scope order matching the component's
 * variable list).
 */
struct ProbabilitySystem {
    JointSpace space;
    Structure structure;
    std::vector<ProbTable> tables;

    ProbabilitySystem() = default;
    ProbabilitySystem(JointSpace sp, Structure st, std::vector<ProbTable> tb)
        : space(std::move(sp)), structure(std::move(st)), tables(std::move(tb)) {
        validate();
    }

    void validate(double norm_tol = 1e-9) const {
        structure.validate();
        if (tables.size() != structure.components.size())
            throw Error(errc::invalid_argument, "one table per component required");
        for (std::size_t i = 0; i < tables.size(); ++i) {
            const auto& comp = structure.components[i];
            const auto& scope = tables[i].scope();
            if (scope.size() != comp.size())
                throw Error(errc::invalid_argument, "table scope does not match component");
            for (std::size_t j = 0; j < comp.size(); ++j) {
                if (scope[j].name != comp[j])
                    throw Error(errc::invalid_argument,
                                "table scope order does not match component '" + comp[j] + "'");
                std::size_t pos = space.position_of(comp[j]);
                if (pos == JointSpace::npos)
                    throw Error(errc::invalid_argument,
                                "component variable '" + comp[j] + "' not in space");
                if (space.variables()[pos].cardinality != scope[j].cardinality)
                    throw Error(errc::invalid_argument,
                                "cardinality mismatch for variable '" + comp[j] + "'");
            }
            if (!tables[i].is_normalized(norm_tol))
                throw Error(errc::invalid_argument, "component table " + std::to_string(i) +
                                                        " is not normalized");
        }
        // every variable of the space must be covered by some component
        for (const auto& v : space.variables()) {
            bool covered = false;
            for (const auto& comp : structure.components)
                if (detail::contains(comp, v.name)) {
                    covered = true;
                    break;
                }
            if (!covered)
                throw Error(errc::invalid_argument,
                            "variable '" + v.name + "' occurs in no component");
        }
    }

    const ProbTable& table_for(std::size_t component_index) const {
        return tables[component_index];
    }
};

/// Deterministic unpacking of a system's structure, enriched with
/// intersection overlaps. Throws when the structure is not a web.
inline Unpacking default_unpacking(const ProbabilitySystem& sys,
                                   OstarRule rule = OstarRule::maximal) {
    auto u = unpack(sys.structure);
    if (!u) throw Error(errc::not_a_web, "structure has no terminal component at some stage");
    return intersection_overlaps(sys.structure, std::move(*u), rule);
}

enum class ModelKind { standard, alternative };

inline const char* to_string(ModelKind m) {
    return m == ModelKind::standard ? "standard" : "alternative";
}

/// A fully expanded joint distribution, labeled by model. k is the
/// normalizing constant of the alternative model (exactly 1 for standard).
struct ExpansionResult {
    JointDistribution joint;
    ModelKind model = ModelKind::standard;
    double k = 1.0;
    Unpacking unpacking_used;
};

namespace detail {

inline std::vector<std::string> scope_names(const ProbTable& t) {
    std::vector<std::string> names;
    names.reserve(t.scope().size());
    for (const auto& v : t.scope()) names.push_back(v.name);
    return names;
}

}  // namespace detail

/**
 * The product extension: the product over unpacking steps of the
 * conditionals P(tail | overlap), each taken from the step's own component
 * table. Sums to 1 by telescoping whether or not the component tables agree
 * on shared marginals.
 */
inline ExpansionResult product_extension(const ProbabilitySystem& sys, const Unpacking& unpacking) {
    std::vector<double> values(sys.space.size(), 1.0);
    for (const auto& step : unpacking.steps) {
        const ProbTable& table = sys.table_for(step.component_index);
        ConditionResult cond = condition(table, step.overlap);
        auto proj = detail::projection_indices(sys.space, table.scope());
        for (std::size_t s = 0; s < values.size(); ++s) values[s] *= cond.table[proj[s]];
    }
    ExpansionResult result;
    result.joint = JointDistribution(sys.space, std::move(values));
    result.model = ModelKind::standard;
    result.k = 1.0;
    result.unpacking_used = unpacking;
    return result;
}

namespace detail {

// Shared by the web and non-web variants of the alternative model: divide
// the running product by a marginal of `table` over `vars`, mapping zero
// marginals to zero weight (the numerator vanishes on those states too).
inline void divide_by_marginal(std::vector<double>& values, const JointSpace& space,
                               const ProbTable& table, const std::vector<std::string>& vars) {
    ProbTable marg = marginalize(table, vars);
    auto proj = projection_indices(space, marg.scope());
    for (std::size_t s = 0; s < values.size(); ++s) {
        double denom = marg[proj[s]];
        values[s] = denom > 0.0 ? values[s] / denom : 0.0;
    }
}

inline ExpansionResult normalize_alternative(const ProbabilitySystem& sys,
                                             std::vector<double> weights, Unpacking unpacking) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0)
        throw Error(errc::all_zero_weight, "alternative model weights sum to zero");
    double k = 1.0 / total;
    for (double& w : weights) w *= k;
    ExpansionResult result;
    result.joint = JointDistribution(sys.space, std::move(weights));
    result.model = ModelKind::alternative;
    result.k = k;
    result.unpacking_used = std::move(unpacking);
    return result;
}

}  // namespace detail

/**
 * The alternative model: product of the component tables divided by the
 * marginals of each step's intersection overlaps (every marginal taken from
 * the step's own component table), then normalized. The unpacking must carry
 * intersection overlaps (see intersection_overlaps / default_unpacking).
 */
inline ExpansionResult alternative_model(const ProbabilitySystem& sys, const Unpacking& unpacking) {
    std::vector<double> weights(sys.space.size(), 1.0);
    for (const auto& step : unpacking.steps) {
        const ProbTable& table = sys.table_for(step.component_index);
        auto proj = detail::projection_indices(sys.space, table.scope());
        for (std::size_t s = 0; s < weights.size(); ++s) weights[s] *= table[proj[s]];
        for (const auto& ostar : step.intersection_overlaps)
            detail::divide_by_marginal(weights, sys.space, table, ostar);
    }
    return detail::normalize_alternative(sys, std::move(weights), unpacking);
}

/**
 * Order-free alternative model for structures that need not be webs: the
 * intersection overlaps are the distinct nonempty intersections over all
 * unordered component pairs (reduced per the rule), and each one's marginal
 * is taken from the lexicographically smallest component containing it.
 */
inline ExpansionResult alternative_model_nonweb(const ProbabilitySystem& sys,
                                                OstarRule rule = OstarRule::maximal) {
    const auto& comps = sys.structure.components;
    std::vector<std::vector<std::string>> isects;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        auto a = detail::sorted_names(comps[i]);
        for (std::size_t j = i + 1; j < comps.size(); ++j) {
            auto b = detail::sorted_names(comps[j]);
            std::vector<std::string> inter;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(inter));
            if (!inter.empty()) isects.push_back(std::move(inter));
        }
    }
    isects = detail::reduce_intersections(std::move(isects), rule);

    std::vector<double> weights(sys.space.size(), 1.0);
    for (std::size_t i = 0; i < comps.size(); ++i) {
        auto proj = detail::projection_indices(sys.space, sys.tables[i].scope());
        for (std::size_t s = 0; s < weights.size(); ++s) weights[s] *= sys.tables[i][proj[s]];
    }
    for (const auto& ostar : isects) {
        std::size_t owner = comps.size();
        std::vector<std::string> owner_key;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            auto key = detail::sorted_names(comps[i]);
            if (std::includes(key.begin(), key.end(), ostar.begin(), ostar.end())) {
                if (owner == comps.size() || key < owner_key) {
                    owner = i;
                    owner_key = std::move(key);
                }
            }
        }
        detail::divide_by_marginal(weights, sys.space, sys.tables[owner], ostar);
    }
    return detail::normalize_alternative(sys, std::move(weights), Unpacking{});
}

// ---------------------------------------------------------------------------
// Iterative proportional fitting
// ---------------------------------------------------------------------------

struct IpfOptions {
    double tol = 1e-10;       // residual target (max abs marginal deviation)
    int max_iter = 10000;     // sweeps
    int stall_window = 100;   // sweeps over which a stall is judged
    double stall_eps = 1e-14; // minimum residual decrease over the window
};

enum class IpfStatus { converged, stalled, iteration_limit };

struct IpfResult {
    JointDistribution joint;
    int sweeps = 0;
    double residual = 0.0;
    IpfStatus status = IpfStatus::converged;
};

/**
 * Cyclic proportional fitting of a joint onto the system's component
 * marginals. Converges to the I-projection of the initial distribution onto
 * the consistent set K when K is nonempty; a residual that stops decreasing
 * while above tol is reported as stalled.
 */
inline IpfResult ipf_fit(const ProbabilitySystem& sys, JointDistribution initial,
                         const IpfOptions& opts = {},
                         const std::function<void(const JointDistribution&, int)>& per_sweep = {}) {
    if (!(initial.space == sys.space))
        throw Error(errc::space_mismatch, "initial joint is not over the system's space");

    const std::size_t n = sys.space.size();
    const std::size_t m = sys.tables.size();
    std::vector<std::vector<std::size_t>> proj(m);
    std::vector<std::vector<double>> marg(m);
    for (std::size_t i = 0; i < m; ++i) {
        proj[i] = detail::projection_indices(sys.space, sys.tables[i].scope());
        marg[i].resize(sys.tables[i].size());
    }

    JointDistribution joint = std::move(initial);
    auto residual_of = [&]() {
        double r = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            std::fill(marg[i].begin(), marg[i].end(), 0.0);
            for (std::size_t s = 0; s < n; ++s) marg[i][proj[i][s]] += joint.values[s];
            for (std::size_t c = 0; c < marg[i].size(); ++c)
                r = std::max(r, std::abs(marg[i][c] - sys.tables[i][c]));
        }
        return r;
    };

    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(opts.max_iter) + 1);
    IpfResult result;
    result.residual = residual_of();
    if (result.residual < opts.tol) {
        result.joint = std::move(joint);
        result.status = IpfStatus::converged;
        return result;
    }

    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
        for (std::size_t i = 0; i < m; ++i) {
            std::fill(marg[i].begin(), marg[i].end(), 0.0);
            for (std::size_t s = 0; s < n; ++s) marg[i][proj[i][s]] += joint.values[s];
            for (std::size_t s = 0; s < n; ++s) {
                double denom = marg[i][proj[i][s]];
                if (denom > 0.0) joint.values[s] *= sys.tables[i][proj[i][s]] / denom;
            }
        }
        double total = joint.sum();
        if (total > 0.0)
            for (double& v : joint.values) v /= total;

        result.sweeps = sweep;
        result.residual = residual_of();
        if (per_sweep) per_sweep(joint, sweep);
        if (result.residual < opts.tol) {
            result.joint = std::move(joint);
            result.status = IpfStatus::converged;
            return result;
        }
        history.push_back(result.residual);
        if (static_cast<int>(history.size()) > opts.stall_window) {
            double before = history[history.size() - 1 - opts.stall_window];
            if (before - result.residual < opts.stall_eps) {
                result.joint = std::move(joint);
                result.status = IpfStatus::stalled;
                return result;
            }
        }
    }
    result.joint = std::move(joint);
    result.status = IpfStatus::iteration_limit;
    return result;
}

// ---------------------------------------------------------------------------
// Consistency
// ---------------------------------------------------------------------------

enum class ConsistencyStatus { consistent, inconsistent, undetermined };

inline const char* to_string(ConsistencyStatus s) {
    switch (s) {
        case ConsistencyStatus::consistent: return "consistent";
        case ConsistencyStatus::inconsistent: return "inconsistent";
        case ConsistencyStatus::undetermined: return "undetermined";
    }
    return "?";
}

struct ConsistencyVerdict {
    ConsistencyStatus status = ConsistencyStatus::undetermined;
    double residual = 0.0;
    int iterations = 0;
    std::optional<JointDistribution> witness;  // present when consistent
};

/**
 * Decide whether some joint distribution matches every component table, by
 * proportional fitting from the uniform joint. A residual under tol yields
 * `consistent` with the fitted joint as witness; a stalled positive residual
 * yields `inconsistent`; hitting the iteration limit yields `undetermined`.
 */
inline ConsistencyVerdict check_consistency(const ProbabilitySystem& sys, double tol = 1e-9,
                                            int max_iter = 10000) {
    IpfOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    IpfResult fit = ipf_fit(sys, uniform_distribution(sys.space), opts);
    ConsistencyVerdict verdict;
    verdict.residual = fit.residual;
    verdict.iterations = fit.sweeps;
    switch (fit.status) {
        case IpfStatus::converged:
            verdict.status = ConsistencyStatus::consistent;
            verdict.witness = std::move(fit.joint);
            break;
        case IpfStatus::stalled:
            verdict.status = ConsistencyStatus::inconsistent;
            break;
        case IpfStatus::iteration_limit:
            verdict.status = ConsistencyStatus::undetermined;
            break;
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Conditional consistency
// ---------------------------------------------------------------------------

struct ConditionalDeviation {
    std::size_t component_index = 0;
    std::string component_label;
    double max_deviation = 0.0;
};

struct ConditionalReport {
    std::vector<ConditionalDeviation> per_component;
    double max_deviation = 0.0;
};

namespace detail {

inline std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += n;
    return out;
}

}  // namespace detail

/**
 * Compare a joint's conditionals P(tail | overlap) against the system's, per
 * unpacking step, on overlap states the joint gives positive probability.
 * The product extension agrees exactly; the alternative model generally
 * does not.
 */
inline ConditionalReport check_conditional_consistency(const JointDistribution& joint,
                                                       const ProbabilitySystem& sys,
                                                       const Unpacking& unpacking) {
    if (!(joint.space == sys.space))
        throw Error(errc::space_mismatch, "joint is not over the system's space");
    ConditionalReport report;
    for (const auto& step : unpacking.steps) {
        const ProbTable& table = sys.table_for(step.component_index);
        auto names = detail::scope_names(table);
        ProbTable joint_comp = marginal_of(joint, names);
        double dev = 0.0;
        if (step.overlap.empty()) {
            for (std::size_t s = 0; s < table.size(); ++s)
                dev = std::max(dev, std::abs(joint_comp[s] - table[s]));
        } else {
            ConditionResult sys_cond = condition(table, step.overlap);
            ConditionResult joint_cond = condition(joint_comp, step.overlap);
            ProbTable joint_over = marginalize(joint_comp, step.overlap);
            auto over_scope = detail::resolve_names(table.space(), step.overlap);
            auto proj = detail::projection_indices(table.space(), over_scope);
            for (std::size_t s = 0; s < table.size(); ++s) {
                if (joint_over[proj[s]] <= 0.0) continue;
                dev = std::max(dev, std::abs(joint_cond.table[s] - sys_cond.table[s]));
            }
        }
        report.per_component.push_back(
            {step.component_index, detail::join_names(step.component), dev});
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    return report;
}

}  // namespace probweb
