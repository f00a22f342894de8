#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "probweb/error.hpp"
#include "probweb/expansion.hpp"
#include "probweb/maxent.hpp"
#include "probweb/model.hpp"
#include "probweb/scoring.hpp"
#include "probweb/web.hpp"

namespace probweb {

/// A named structure together with the variable space it lives on.
struct StructureTemplate {
    std::string name;
    JointSpace space;
    Structure structure;
};

inline StructureTemplate preset_fig1() {
    StructureTemplate t;
    t.name = "fig1";
    t.space = JointSpace({{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}});
    t.structure.components = {{"A", "B"}, {"A", "C"}, {"B", "C", "D"}};
    return t;
}

/// Chain of n two-variable components X1X2, X2X3, ..., Xn X(n+1).
inline StructureTemplate preset_chain(int components, int cardinality = 2) {
    if (components < 1) throw Error(errc::invalid_argument, "chain needs at least 1 component");
    StructureTemplate t;
    t.name = "chain" + std::to_string(components);
    std::vector<Variable> vars;
    for (int i = 1; i <= components + 1; ++i)
        vars.push_back({"X" + std::to_string(i), cardinality});
    t.space = JointSpace(vars);
    for (int i = 1; i <= components; ++i)
        t.structure.components.push_back({"X" + std::to_string(i), "X" + std::to_string(i + 1)});
    return t;
}

/// Star of n two-variable components H X1, H X2, ..., H Xn around a hub.
inline StructureTemplate preset_star(int leaves, int cardinality = 2) {
    if (leaves < 1) throw Error(errc::invalid_argument, "star needs at least 1 leaf");
    StructureTemplate t;
    t.name = "star" + std::to_string(leaves);
    std::vector<Variable> vars{{"H", cardinality}};
    for (int i = 1; i <= leaves; ++i) vars.push_back({"X" + std::to_string(i), cardinality});
    t.space = JointSpace(vars);
    for (int i = 1; i <= leaves; ++i) t.structure.components.push_back({"H", "X" + std::to_string(i)});
    return t;
}

/// Parses "fig1", "chainN", or "starN" into a template.
inline StructureTemplate parse_preset(const std::string& text) {
    if (text == "fig1") return preset_fig1();
    auto numbered = [&](const std::string& prefix, int& n) {
        if (text.size() <= prefix.size() || text.compare(0, prefix.size(), prefix) != 0)
            return false;
        n = 0;
        for (std::size_t i = prefix.size(); i < text.size(); ++i) {
            char c = text[i];
            if (c < '0' || c > '9') return false;
            n = n * 10 + (c - '0');
            if (n > 1000) return false;
        }
        return n >= 1;
    };
    int n = 0;
    if (numbered("chain", n)) return preset_chain(n);
    if (numbered("star", n)) return preset_star(n);
    throw Error(errc::invalid_argument, "unknown structure preset '" + text + "'");
}

/**
 * A consistent system by construction: draws a strictly positive random
 * joint over the space and takes each component table as its exact marginal,
 * so the generator joint is a consistency witness. Deterministic per seed.
 */
inline ProbabilitySystem random_consistent_system(const JointSpace& space,
                                                  const Structure& structure,
                                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    JointDistribution p0 = random_positive_joint(space, rng);
    std::vector<ProbTable> tables;
    tables.reserve(structure.components.size());
    for (const auto& comp : structure.components) tables.push_back(marginal_of(p0, comp));
    return ProbabilitySystem(space, structure, std::move(tables));
}

inline ProbabilitySystem random_consistent_system(const StructureTemplate& t, std::uint64_t seed) {
    return random_consistent_system(t.space, t.structure, seed);
}

/**
 * A generally inconsistent system: every component table is drawn
 * independently, so overlap marginals disagree across components almost
 * surely. Deterministic per seed.
 */
inline ProbabilitySystem random_mismatched_system(const JointSpace& space,
                                                  const Structure& structure,
                                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<ProbTable> tables;
    tables.reserve(structure.components.size());
    for (const auto& comp : structure.components) {
        auto scope = detail::resolve_names(space, comp);
        JointDistribution draw = random_positive_joint(JointSpace(scope), rng);
        tables.emplace_back(scope, std::move(draw.values));
    }
    return ProbabilitySystem(space, structure, std::move(tables));
}

inline ProbabilitySystem random_mismatched_system(const StructureTemplate& t, std::uint64_t seed) {
    return random_mismatched_system(t.space, t.structure, seed);
}

// ---------------------------------------------------------------------------
// Unpacking invariance probe
// ---------------------------------------------------------------------------

/// How much the product extension and its guaranteed score vary across all
/// admissible unpackings of one system.
struct InvarianceProbe {
    std::size_t unpacking_count = 0;
    double max_px_deviation = 0.0;          // max over states of (max - min) P^x
    double max_guaranteed_deviation = 0.0;  // spread of the guaranteed standard score
};

inline InvarianceProbe unpacking_invariance_probe(const ProbabilitySystem& sys,
                                                  std::size_t max_components = 10,
                                                  std::size_t max_orders = 20000) {
    auto orders = all_unpackings(sys.structure, max_components, max_orders);
    InvarianceProbe probe;
    probe.unpacking_count = orders.size();
    if (orders.empty()) return probe;

    const std::size_t n = sys.space.size();
    std::vector<double> lo(n, std::numeric_limits<double>::infinity());
    std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
    double g_lo = std::numeric_limits<double>::infinity();
    double g_hi = -std::numeric_limits<double>::infinity();
    for (const auto& u : orders) {
        ExpansionResult px = product_extension(sys, u);
        for (std::size_t s = 0; s < n; ++s) {
            lo[s] = std::min(lo[s], px.joint.values[s]);
            hi[s] = std::max(hi[s], px.joint.values[s]);
        }
        double g = guaranteed_score_standard(sys, u).g_guaranteed_standard;
        g_lo = std::min(g_lo, g);
        g_hi = std::max(g_hi, g);
    }
    for (std::size_t s = 0; s < n; ++s)
        probe.max_px_deviation = std::max(probe.max_px_deviation, hi[s] - lo[s]);
    probe.max_guaranteed_deviation = g_hi - g_lo;
    return probe;
}

// ---------------------------------------------------------------------------
// Experiment
// ---------------------------------------------------------------------------

enum class Winner { alt, standard, tie };

inline const char* to_string(Winner w) {
    switch (w) {
        case Winner::alt: return "alt";
        case Winner::standard: return "standard";
        case Winner::tie: return "tie";
    }
    return "?";
}

inline Winner winner_of(double gap, double tol = 1e-12) {
    if (gap > tol) return Winner::alt;
    if (gap < -tol) return Winner::standard;
    return Winner::tie;
}

struct ExperimentConfig {
    StructureTemplate structure;
    int trials = 1;
    std::uint64_t seed = 0;
    OstarRule ostar_rule = OstarRule::maximal;
    std::string out_path;  // empty: no CSV file written
};

struct ExperimentRecord {
    int trial = 0;
    double k = 1.0;
    double ln_k = 0.0;
    double g_standard = 0.0;
    double g_alt = 0.0;
    double gap = 0.0;  // g_alt - g_standard
    bool partition = false;
    Winner winner = Winner::tie;
};

struct ExperimentSummary {
    int trials = 0;
    int completed = 0;
    int failures = 0;
    std::string failure_note;  // first failure message, if any
    int alt_wins = 0;
    int standard_wins = 0;
    int ties = 0;
    double mean_gap = 0.0;
    double min_gap = 0.0;
    double max_gap = 0.0;
    int k_below_one = 0;
    int k_at_least_one = 0;
    int alt_wins_k_below_one = 0;
    int alt_wins_k_at_least_one = 0;
    int partition_holds = 0;
    // sign of G(P^x) - g_standard per trial; both positive counts witness that
    // the self-score can land on either side of the guaranteed value
    int self_above_guaranteed = 0;
    int self_below_guaranteed = 0;
    int self_at_guaranteed = 0;

    double alt_win_fraction() const {
        return completed > 0 ? static_cast<double>(alt_wins) / completed : 0.0;
    }
};

struct ExperimentResult {
    ExperimentSummary summary;
    std::vector<ExperimentRecord> records;
    bool probe_ran = false;
    InvarianceProbe probe;  // on the first trial's system, when within cutoff
};

// 12 significant digits; positional notation for magnitudes down to 1e-4,
// exponent notation only below that.
inline std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_row(const ExperimentRecord& r) {
    std::string row = std::to_string(r.trial);
    row += ',';
    row += csv_double(r.k);
    row += ',';
    row += csv_double(r.ln_k);
    row += ',';
    row += csv_double(r.g_standard);
    row += ',';
    row += csv_double(r.g_alt);
    row += ',';
    row += csv_double(r.gap);
    row += ',';
    row += r.partition ? "true" : "false";
    row += ',';
    row += to_string(r.winner);
    row += '\n';
    return row;
}

inline constexpr const char* kExperimentCsvHeader = "trial,k,ln_k,g_standard,g_alt,gap,partition,winner";

inline void write_experiment_csv(std::ostream& os, const std::vector<ExperimentRecord>& records) {
    os << kExperimentCsvHeader << '\n';
    for (const auto& r : records) os << csv_row(r);
}

inline std::string experiment_csv(const std::vector<ExperimentRecord>& records) {
    std::string out = kExperimentCsvHeader;
    out += '\n';
    for (const auto& r : records) out += csv_row(r);
    return out;
}

inline void write_experiment_csv_file(const std::string& path,
                                      const std::vector<ExperimentRecord>& records) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(errc::io_error, "cannot open '" + path + "' for writing");
    write_experiment_csv(file, records);
    file.flush();
    if (!file) throw Error(errc::io_error, "failed writing '" + path + "'");
}

/**
 * Monte Carlo comparison of the two models over random consistent systems on
 * one structure. Trial i uses seed + i, so runs are reproducible row by row
 * and any trial can be regenerated alone. Per-trial errors are counted, not
 * fatal.
 */
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.trials < 1) throw Error(errc::invalid_argument, "trials must be at least 1");
    ExperimentResult result;
    ExperimentSummary& sum = result.summary;
    sum.trials = config.trials;
    double gap_total = 0.0;
    double gap_min = std::numeric_limits<double>::infinity();
    double gap_max = -std::numeric_limits<double>::infinity();

    for (int trial = 0; trial < config.trials; ++trial) {
        try {
            ProbabilitySystem sys = random_consistent_system(
                config.structure, config.seed + static_cast<std::uint64_t>(trial));
            Unpacking unpacking = default_unpacking(sys, config.ostar_rule);
            ExpansionResult alt = alternative_model(sys, unpacking);
            ScoreReport scores = guaranteed_score_alt(sys, unpacking);
            double g_self = log_score(product_extension(sys, unpacking).joint);

            ExperimentRecord rec;
            rec.trial = trial;
            rec.k = alt.k;
            rec.ln_k = scores.ln_k;
            rec.g_standard = scores.g_guaranteed_standard;
            rec.g_alt = scores.g_guaranteed_alt;
            rec.gap = rec.g_alt - rec.g_standard;
            rec.partition = ostar_partitions_everywhere(unpacking);
            rec.winner = winner_of(rec.gap);

            ++sum.completed;
            if (rec.winner == Winner::alt) ++sum.alt_wins;
            else if (rec.winner == Winner::standard) ++sum.standard_wins;
            else ++sum.ties;
            gap_total += rec.gap;
            gap_min = std::min(gap_min, rec.gap);
            gap_max = std::max(gap_max, rec.gap);
            if (rec.k < 1.0) {
                ++sum.k_below_one;
                if (rec.winner == Winner::alt) ++sum.alt_wins_k_below_one;
            } else {
                ++sum.k_at_least_one;
                if (rec.winner == Winner::alt) ++sum.alt_wins_k_at_least_one;
            }
            if (rec.partition) ++sum.partition_holds;
            if (g_self > rec.g_standard + 1e-12) ++sum.self_above_guaranteed;
            else if (g_self < rec.g_standard - 1e-12) ++sum.self_below_guaranteed;
            else ++sum.self_at_guaranteed;

            result.records.push_back(rec);
        } catch (const Error& e) {
            ++sum.failures;
            if (sum.failure_note.empty()) sum.failure_note = e.what();
        }
    }
    if (sum.completed > 0) {
        sum.mean_gap = gap_total / sum.completed;
        sum.min_gap = gap_min;
        sum.max_gap = gap_max;
    }

    try {
        ProbabilitySystem first = random_consistent_system(config.structure, config.seed);
        result.probe = unpacking_invariance_probe(first);
        result.probe_ran = true;
    } catch (const Error&) {
        result.probe_ran = false;
    }

    if (!config.out_path.empty()) write_experiment_csv_file(config.out_path, result.records);
    return result;
}

}  // namespace probweb
