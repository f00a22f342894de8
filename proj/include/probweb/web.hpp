#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "probweb/error.hpp"

namespace probweb {

/**
 * A structure: a list of components, each an ordered list of variable names.
 * Webs are the structures that can be fully unpacked by repeatedly removing
 * a terminal component (one owning at least one variable found nowhere else).
 */
struct Structure {
    std::vector<std::vector<std::string>> components;

    std::size_t component_count() const { return components.size(); }

    // Union of all component variables, in first-appearance order.
    std::vector<std::string> all_variables() const {
        std::vector<std::string> out;
        for (const auto& comp : components)
            for (const auto& v : comp)
                if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
        return out;
    }

    void validate() const {
        if (components.empty())
            throw Error(errc::invalid_argument, "structure has no components");
        std::set<std::set<std::string>> seen;
        for (const auto& comp : components) {
            if (comp.empty()) throw Error(errc::invalid_argument, "empty component");
            std::set<std::string> key(comp.begin(), comp.end());
            if (key.size() != comp.size())
                throw Error(errc::invalid_argument, "component repeats a variable");
            if (!seen.insert(key).second)
                throw Error(errc::invalid_argument, "duplicate component");
        }
    }
};

namespace detail {

inline std::vector<std::string> sorted_names(const std::vector<std::string>& comp) {
    std::vector<std::string> s = comp;
    std::sort(s.begin(), s.end());
    return s;
}

inline bool contains(const std::vector<std::string>& comp, const std::string& v) {
    return std::find(comp.begin(), comp.end(), v) != comp.end();
}

// Terminal components of the sub-structure given by `active` indices:
// those with at least one variable occurring in no other active component.
inline std::vector<std::size_t> terminals_of(const Structure& s,
                                             const std::vector<std::size_t>& active) {
    std::vector<std::size_t> result;
    for (std::size_t i : active) {
        bool has_unique = false;
        for (const auto& v : s.components[i]) {
            bool elsewhere = false;
            for (std::size_t j : active) {
                if (j == i) continue;
                if (contains(s.components[j], v)) {
                    elsewhere = true;
                    break;
                }
            }
            if (!elsewhere) {
                has_unique = true;
                break;
            }
        }
        if (has_unique) result.push_back(i);
    }
    return result;
}

// Tail/overlap split of component `i` against the other active components.
inline void split_tail_overlap(const Structure& s, std::size_t i,
                               const std::vector<std::size_t>& active,
                               std::vector<std::string>& tail,
                               std::vector<std::string>& overlap) {
    tail.clear();
    overlap.clear();
    for (const auto& v : s.components[i]) {
        bool elsewhere = false;
        for (std::size_t j : active) {
            if (j == i) continue;
            if (contains(s.components[j], v)) {
                elsewhere = true;
                break;
            }
        }
        (elsewhere ? overlap : tail).push_back(v);
    }
    std::sort(tail.begin(), tail.end());
    std::sort(overlap.begin(), overlap.end());
}

inline std::vector<std::size_t> without(const std::vector<std::size_t>& active, std::size_t i) {
    std::vector<std::size_t> rest;
    rest.reserve(active.size() - 1);
    for (std::size_t j : active)
        if (j != i) rest.push_back(j);
    return rest;
}

}  // namespace detail

/// Indices of the terminal components of a structure (possibly none).
inline std::vector<std::size_t> find_terminals(const Structure& s) {
    s.validate();
    std::vector<std::size_t> all(s.components.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return detail::terminals_of(s, all);
}

/// One stage of an unpacking: the removed component, its tail (variables
/// unique to it at removal time), its overlap with the remaining structure,
/// and optionally the overlap recomputed as per-remaining-component set
/// intersections (filled in by intersection_overlaps()).
struct UnpackingStep {
    std::size_t component_index = 0;
    std::vector<std::string> component;  // as listed in the structure
    std::vector<std::string> tail;       // sorted
    std::vector<std::string> overlap;    // sorted
    std::vector<std::vector<std::string>> intersection_overlaps;  // each sorted
};

struct Unpacking {
    std::vector<UnpackingStep> steps;
};

/**
 * Deterministic unpacking by successive terminal removal, or nullopt when
 * some stage has no terminal (the structure is not a web). Ties among
 * simultaneous terminals go to the lexicographically greatest component key
 * (sorted variable names), which pins a single canonical order.
 */
inline std::optional<Unpacking> unpack(const Structure& s) {
    s.validate();
    std::vector<std::size_t> active(s.components.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;

    Unpacking result;
    while (!active.empty()) {
        auto terminals = detail::terminals_of(s, active);
        if (terminals.empty()) return std::nullopt;
        std::size_t pick = terminals.front();
        auto pick_key = detail::sorted_names(s.components[pick]);
        for (std::size_t t : terminals) {
            auto key = detail::sorted_names(s.components[t]);
            if (key > pick_key) {
                pick = t;
                pick_key = std::move(key);
            }
        }
        UnpackingStep step;
        step.component_index = pick;
        step.component = s.components[pick];
        detail::split_tail_overlap(s, pick, active, step.tail, step.overlap);
        result.steps.push_back(std::move(step));
        active = detail::without(active, pick);
    }
    return result;
}

/// Which intersections count as a step's intersection overlaps.
enum class OstarRule {
    maximal,      // distinct nonempty intersections, maximal under inclusion
    all_distinct  // every distinct nonempty intersection
};

inline const char* to_string(OstarRule rule) {
    return rule == OstarRule::maximal ? "maximal" : "all-distinct";
}

namespace detail {

inline std::vector<std::vector<std::string>> reduce_intersections(
    std::vector<std::vector<std::string>> sets, OstarRule rule) {
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    if (rule == OstarRule::maximal) {
        std::vector<std::vector<std::string>> keep;
        for (const auto& a : sets) {
            bool dominated = false;
            for (const auto& b : sets) {
                if (a == b) continue;
                if (std::includes(b.begin(), b.end(), a.begin(), a.end())) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) keep.push_back(a);
        }
        return keep;
    }
    return sets;
}

}  // namespace detail

/**
 * Enrich an unpacking with intersection overlaps: for step i, the distinct
 * nonempty intersections of its component with each individually remaining
 * component (later steps), reduced per the rule. Every such set is a subset
 * of the step's overlap.
 */
inline Unpacking intersection_overlaps(const Structure& s, Unpacking unpacking,
                                       OstarRule rule = OstarRule::maximal) {
    for (std::size_t i = 0; i < unpacking.steps.size(); ++i) {
        auto& step = unpacking.steps[i];
        auto comp = detail::sorted_names(step.component);
        std::vector<std::vector<std::string>> isects;
        for (std::size_t j = i + 1; j < unpacking.steps.size(); ++j) {
            auto other = detail::sorted_names(unpacking.steps[j].component);
            std::vector<std::string> inter;
            std::set_intersection(comp.begin(), comp.end(), other.begin(), other.end(),
                                  std::back_inserter(inter));
            if (!inter.empty()) isects.push_back(std::move(inter));
        }
        step.intersection_overlaps = detail::reduce_intersections(std::move(isects), rule);
    }
    (void)s;
    return unpacking;
}

/// Whether a step's intersection overlaps partition its overlap: pairwise
/// disjoint with union equal to the overlap. (Trivially true when both are
/// empty.)
inline bool ostar_partitions_overlap(const UnpackingStep& step) {
    std::vector<std::string> pooled;
    for (const auto& set : step.intersection_overlaps)
        pooled.insert(pooled.end(), set.begin(), set.end());
    std::sort(pooled.begin(), pooled.end());
    if (std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end()) return false;
    return pooled == step.overlap;
}

/// Whether every step of the unpacking satisfies ostar_partitions_overlap.
inline bool ostar_partitions_everywhere(const Unpacking& unpacking) {
    for (const auto& step : unpacking.steps)
        if (!ostar_partitions_overlap(step)) return false;
    return true;
}

enum class StructureLabel { non_web, web, dag_like, hypertree };

inline const char* to_string(StructureLabel label) {
    switch (label) {
        case StructureLabel::non_web: return "non_web";
        case StructureLabel::web: return "web";
        case StructureLabel::dag_like: return "dag_like";
        case StructureLabel::hypertree: return "hypertree";
    }
    return "?";
}

namespace detail {

// Memoized existence search over terminal-removal orders. `admits` decides
// whether removing component i from the active set is allowed at this stage.
template <typename StepPredicate>
bool exists_unpacking(const Structure& s, std::vector<std::size_t> active,
                      std::map<std::uint64_t, bool>& memo, const StepPredicate& admits) {
    if (active.empty()) return true;
    std::uint64_t mask = 0;
    for (std::size_t i : active) mask |= (std::uint64_t{1} << i);
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    bool ok = false;
    for (std::size_t t : terminals_of(s, active)) {
        if (!admits(t, active)) continue;
        if (exists_unpacking(s, without(active, t), memo, admits)) {
            ok = true;
            break;
        }
    }
    memo[mask] = ok;
    return ok;
}

}  // namespace detail

/**
 * Full label set of a structure. non_web when no unpacking exists; otherwise
 * web, plus dag_like if some unpacking has all unit tails, plus hypertree if
 * some unpacking keeps every overlap inside one single remaining component.
 * Labels co-occur; the search backtracks over all terminal choices.
 */
inline std::set<StructureLabel> classify(const Structure& s) {
    s.validate();
    if (s.components.size() > 20)
        throw Error(errc::cutoff, "classification limited to 20 components");
    if (!unpack(s)) return {StructureLabel::non_web};

    std::set<StructureLabel> labels{StructureLabel::web};
    std::vector<std::size_t> all(s.components.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    std::vector<std::string> tail, overlap;
    std::map<std::uint64_t, bool> memo_dag;
    bool dag = detail::exists_unpacking(
        s, all, memo_dag, [&](std::size_t t, const std::vector<std::size_t>& active) {
            detail::split_tail_overlap(s, t, active, tail, overlap);
            return tail.size() == 1;
        });
    if (dag) labels.insert(StructureLabel::dag_like);

    std::map<std::uint64_t, bool> memo_tree;
    bool tree = detail::exists_unpacking(
        s, all, memo_tree, [&](std::size_t t, const std::vector<std::size_t>& active) {
            detail::split_tail_overlap(s, t, active, tail, overlap);
            if (overlap.empty()) return true;
            for (std::size_t j : active) {
                if (j == t) continue;
                auto other = detail::sorted_names(s.components[j]);
                if (std::includes(other.begin(), other.end(), overlap.begin(), overlap.end()))
                    return true;
            }
            return false;
        });
    if (tree) labels.insert(StructureLabel::hypertree);

    return labels;
}

/**
 * Every admissible unpacking of a web, by exhaustive backtracking. Throws
 * a cutoff error above `max_components` components or when the number of
 * orders exceeds `max_count`.
 */
inline std::vector<Unpacking> all_unpackings(const Structure& s,
                                             std::size_t max_components = 10,
                                             std::size_t max_count = 20000) {
    s.validate();
    if (s.components.size() > max_components)
        throw Error(errc::cutoff, "unpacking enumeration limited to " +
                                      std::to_string(max_components) + " components");
    std::vector<Unpacking> result;
    std::vector<std::size_t> active(s.components.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
    Unpacking current;

    auto rec = [&](auto&& self, std::vector<std::size_t> act) -> void {
        if (act.empty()) {
            if (result.size() >= max_count)
                throw Error(errc::cutoff,
                            "more than " + std::to_string(max_count) + " admissible unpackings");
            result.push_back(current);
            return;
        }
        for (std::size_t t : detail::terminals_of(s, act)) {
            UnpackingStep step;
            step.component_index = t;
            step.component = s.components[t];
            detail::split_tail_overlap(s, t, act, step.tail, step.overlap);
            current.steps.push_back(std::move(step));
            self(self, detail::without(act, t));
            current.steps.pop_back();
        }
    };
    rec(rec, active);
    return result;
}

}  // namespace probweb
