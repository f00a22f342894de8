#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "probweb/error.hpp"

namespace probweb {

/// A discrete variable: a unique name and a number of states >= 2.
/// States are plain integers 0..cardinality-1.
struct Variable {
    std::string name;
    int cardinality = 2;

    friend bool operator==(const Variable&, const Variable&) = default;
};

/**
 * The joint state space of an ordered list of variables.
 *
 * States are enumerated row-major with the LAST listed variable varying
 * fastest, so the flat index of a state is sum(state[i] * stride[i]) with
 * stride[last] = 1.
 */
class JointSpace {
public:
    JointSpace() = default;

    explicit JointSpace(std::vector<Variable> vars) : vars_(std::move(vars)) {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].cardinality < 2)
                throw Error(errc::invalid_argument,
                            "variable '" + vars_[i].name + "' has cardinality < 2");
            for (std::size_t j = i + 1; j < vars_.size(); ++j)
                if (vars_[i].name == vars_[j].name)
                    throw Error(errc::invalid_argument,
                                "duplicate variable name '" + vars_[i].name + "'");
        }
        strides_.assign(vars_.size(), 1);
        for (std::size_t i = vars_.size(); i-- > 1;)
            strides_[i - 1] = strides_[i] * static_cast<std::size_t>(vars_[i].cardinality);
        size_ = 1;
        for (const auto& v : vars_) size_ *= static_cast<std::size_t>(v.cardinality);
    }

    const std::vector<Variable>& variables() const { return vars_; }
    std::size_t arity() const { return vars_.size(); }
    std::size_t size() const { return size_; }
    const std::vector<std::size_t>& strides() const { return strides_; }

    // Position of a variable by name, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t position_of(std::string_view name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name == name) return i;
        return npos;
    }

    std::vector<int> state_of(std::size_t index) const {
        std::vector<int> state(vars_.size());
        for (std::size_t i = 0; i < vars_.size(); ++i)
            state[i] = static_cast<int>(index / strides_[i] %
                                        static_cast<std::size_t>(vars_[i].cardinality));
        return state;
    }

    std::size_t index_of(std::span<const int> state) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            idx += static_cast<std::size_t>(state[i]) * strides_[i];
        return idx;
    }

    friend bool operator==(const JointSpace& a, const JointSpace& b) {
        return a.vars_ == b.vars_;
    }

private:
    std::vector<Variable> vars_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 1;
};

/// All states of a space in flat-index order (last variable fastest).
inline std::vector<std::vector<int>> enumerate_states(const JointSpace& space) {
    std::vector<std::vector<int>> states;
    states.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) states.push_back(space.state_of(i));
    return states;
}

/**
 * A table of real weights over the joint states of an ordered variable scope.
 *
 * Probability tables are normalized (values sum to 1); conditional tables
 * produced by condition() reuse the same representation but sum to 1 per
 * conditioning slice instead. Use is_normalized()/normalize() where the
 * distinction matters.
 */
class ProbTable {
public:
    ProbTable() = default;

    ProbTable(std::vector<Variable> scope, std::vector<double> values)
        : space_(std::move(scope)), values_(std::move(values)) {
        if (values_.size() != space_.size())
            throw Error(errc::invalid_argument,
                        "table has " + std::to_string(values_.size()) + " values, scope needs " +
                            std::to_string(space_.size()));
    }

    const std::vector<Variable>& scope() const { return space_.variables(); }
    const JointSpace& space() const { return space_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    std::size_t size() const { return values_.size(); }

    double at(std::span<const int> state) const { return values_[space_.index_of(state)]; }
    double operator[](std::size_t i) const { return values_[i]; }

    double sum() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s;
    }

    double normalization_error() const { return std::abs(sum() - 1.0); }
    bool is_normalized(double tol = 1e-9) const { return normalization_error() <= tol; }

    void normalize() {
        double s = sum();
        if (s <= 0.0)
            throw Error(errc::invalid_argument, "cannot normalize a table with zero total mass");
        for (double& v : values_) v /= s;
    }

    friend bool operator==(const ProbTable& a, const ProbTable& b) {
        return a.space_ == b.space_ && a.values_ == b.values_;
    }

private:
    JointSpace space_;
    std::vector<double> values_;
};

/// A dense probability distribution over the full joint space.
struct JointDistribution {
    JointSpace space;
    std::vector<double> values;

    JointDistribution() = default;
    JointDistribution(JointSpace s, std::vector<double> v)
        : space(std::move(s)), values(std::move(v)) {
        if (values.size() != space.size())
            throw Error(errc::invalid_argument, "joint value count does not match space size");
    }

    double sum() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }

    void normalize() {
        double s = sum();
        if (s <= 0.0)
            throw Error(errc::all_zero_weight, "joint distribution has zero total mass");
        for (double& v : values) v /= s;
    }
};

inline ProbTable as_table(const JointDistribution& joint) {
    return ProbTable(joint.space.variables(), joint.values);
}

namespace detail {

// Per-source-state flat index into a sub-scope table. scope variables must
// all occur in `space`; the projection honors the requested scope order.
inline std::vector<std::size_t> projection_indices(const JointSpace& space,
                                                   const std::vector<Variable>& scope) {
    JointSpace target(scope);
    // dst = sum over scope vars of (digit of source state) * target stride
    std::vector<std::size_t> src_stride(scope.size()), src_card(scope.size()),
        dst_stride(scope.size());
    for (std::size_t j = 0; j < scope.size(); ++j) {
        std::size_t pos = space.position_of(scope[j].name);
        if (pos == JointSpace::npos)
            throw Error(errc::scope_error, "variable '" + scope[j].name + "' not in scope");
        if (space.variables()[pos].cardinality != scope[j].cardinality)
            throw Error(errc::scope_error,
                        "cardinality mismatch for variable '" + scope[j].name + "'");
        src_stride[j] = space.strides()[pos];
        src_card[j] = static_cast<std::size_t>(space.variables()[pos].cardinality);
        dst_stride[j] = target.strides()[j];
    }
    std::vector<std::size_t> map(space.size());
    for (std::size_t s = 0; s < space.size(); ++s) {
        std::size_t d = 0;
        for (std::size_t j = 0; j < scope.size(); ++j)
            d += (s / src_stride[j] % src_card[j]) * dst_stride[j];
        map[s] = d;
    }
    return map;
}

inline std::vector<Variable> resolve_names(const JointSpace& space,
                                           const std::vector<std::string>& names) {
    std::vector<Variable> out;
    out.reserve(names.size());
    for (const auto& n : names) {
        std::size_t pos = space.position_of(n);
        if (pos == JointSpace::npos)
            throw Error(errc::scope_error, "variable '" + n + "' not in scope");
        out.push_back(space.variables()[pos]);
    }
    return out;
}

}  // namespace detail

/// Sum a table down to the named variables. The result scope follows the
/// order of `keep`; total mass is preserved.
inline ProbTable marginalize(const ProbTable& table, const std::vector<std::string>& keep) {
    std::vector<Variable> scope = detail::resolve_names(table.space(), keep);
    auto map = detail::projection_indices(table.space(), scope);
    JointSpace target(scope);
    std::vector<double> out(target.size(), 0.0);
    for (std::size_t s = 0; s < table.size(); ++s) out[map[s]] += table[s];
    return ProbTable(std::move(scope), std::move(out));
}

/// Marginal of a full joint distribution onto the named variables.
inline ProbTable marginal_of(const JointDistribution& joint,
                             const std::vector<std::string>& scope_names) {
    return marginalize(as_table(joint), scope_names);
}

/// Result of conditioning: a table over the full source scope whose entries
/// are P(rest | given). Slices at zero-probability given-states are filled
/// uniformly and flagged.
struct ConditionResult {
    ProbTable table;
    bool zero_marginal = false;
};

/// Conditional P(scope \ given | given), entry-for-entry over the source
/// scope. Each slice with positive given-marginal sums to 1; zero-marginal
/// slices are uniform over the remaining variables.
inline ConditionResult condition(const ProbTable& table, const std::vector<std::string>& given) {
    if (given.empty()) return ConditionResult{table, false};
    std::vector<Variable> gscope = detail::resolve_names(table.space(), given);
    ProbTable gmarg = marginalize(table, given);
    auto map = detail::projection_indices(table.space(), gscope);
    std::size_t rest_states = table.size() / gmarg.size();
    std::vector<double> out(table.size());
    bool flagged = false;
    for (std::size_t s = 0; s < table.size(); ++s) {
        double denom = gmarg[map[s]];
        if (denom > 0.0) {
            out[s] = table[s] / denom;
        } else {
            out[s] = 1.0 / static_cast<double>(rest_states);
            flagged = true;
        }
    }
    return ConditionResult{ProbTable(table.scope(), std::move(out)), flagged};
}

/// The uniform distribution over a space.
inline JointDistribution uniform_distribution(const JointSpace& space) {
    return JointDistribution(space,
                             std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())));
}

}  // namespace probweb
