#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "probweb/probweb.hpp"

namespace {

using namespace probweb;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt_res(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string braced(const std::vector<std::string>& names) {
    std::string out = "{";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ',';
        out += names[i];
    }
    out += '}';
    return out;
}

std::string braced_sets(const std::vector<std::vector<std::string>>& sets) {
    if (sets.empty()) return "{}";
    std::string out;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (i) out += ',';
        out += braced(sets[i]);
    }
    return out;
}

std::string concat(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += n;
    return out;
}

OstarRule parse_ostar(const std::string& text) {
    if (text == "maximal") return OstarRule::maximal;
    if (text == "all-distinct") return OstarRule::all_distinct;
    throw Error(errc::invalid_argument, "unknown O* rule '" + text + "' (maximal, all-distinct)");
}

std::string classification_line(const Structure& structure) {
    try {
        std::string out;
        for (auto label : classify(structure)) {
            if (!out.empty()) out += ' ';
            out += to_string(label);
        }
        return out;
    } catch (const Error&) {
        return "unclassified (component cutoff)";
    }
}

void print_joint(std::ostream& os, const JointDistribution& joint) {
    os << "#";
    for (const auto& v : joint.space.variables()) os << ' ' << v.name;
    os << " p\n";
    auto states = enumerate_states(joint.space);
    for (std::size_t s = 0; s < states.size(); ++s) {
        for (int value : states[s]) os << value << ' ';
        os << csv_double(joint.values[s]) << '\n';
    }
}

int cmd_validate(const std::string& path) {
    std::vector<std::string> warnings;
    ProbabilitySystem sys = load_system_file(path, &warnings);
    std::cout << "file: " << path << '\n';
    std::cout << "variables: " << sys.space.arity() << " (joint states: " << sys.space.size()
              << ")\n";
    std::cout << "components: " << sys.structure.component_count() << '\n';
    for (std::size_t i = 0; i < sys.tables.size(); ++i)
        std::cout << "  component " << i << " " << concat(sys.structure.components[i]) << ": "
                  << sys.tables[i].size() << " entries, normalization error "
                  << fmt_res(sys.tables[i].normalization_error()) << '\n';
    for (const auto& w : warnings) std::cout << "warning: " << w << '\n';
    std::cout << "structure: " << classification_line(sys.structure) << '\n';
    std::cout << "valid\n";
    return 0;
}

int cmd_unpack(const std::string& path, const std::string& ostar) {
    ProbabilitySystem sys = load_system_file(path);
    std::cout << "structure: " << classification_line(sys.structure) << '\n';
    Unpacking u = default_unpacking(sys, parse_ostar(ostar));
    for (std::size_t i = 0; i < u.steps.size(); ++i) {
        const auto& step = u.steps[i];
        std::cout << "step " << (i + 1) << ": component " << concat(step.component) << " | tail "
                  << braced(step.tail) << " | overlap " << braced(step.overlap) << " | O* "
                  << braced_sets(step.intersection_overlaps) << '\n';
    }
    return 0;
}

int cmd_expand(const std::string& path, const std::string& model, const std::string& ostar,
               bool allow_non_web, const std::string& out_path) {
    ProbabilitySystem sys = load_system_file(path);
    OstarRule rule = parse_ostar(ostar);
    if (model != "standard" && model != "alt")
        throw Error(errc::invalid_argument, "unknown model '" + model + "' (standard, alt)");

    ExpansionResult res;
    if (model == "standard") {
        res = product_extension(sys, default_unpacking(sys, rule));
    } else if (allow_non_web && !unpack(sys.structure)) {
        res = alternative_model_nonweb(sys, rule);
    } else {
        res = alternative_model(sys, default_unpacking(sys, rule));
    }

    std::ostringstream text;
    text << "model: " << to_string(res.model) << '\n';
    text << "k = " << csv_double(res.k) << '\n';
    print_joint(text, res.joint);

    if (out_path.empty()) {
        std::cout << text.str();
    } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) throw Error(errc::io_error, "cannot open '" + out_path + "' for writing");
        file << text.str();
        file.flush();
        if (!file) throw Error(errc::io_error, "failed writing '" + out_path + "'");
        std::cout << "wrote " << out_path << '\n';
    }
    return 0;
}

void print_terms(const char* title, const std::vector<ScoreTerm>& terms) {
    std::cout << title << ":\n";
    if (terms.empty()) {
        std::cout << "  (none)\n";
        return;
    }
    for (const auto& t : terms) std::cout << "  " << t.label << ": " << fmt6(t.value) << '\n';
}

int cmd_score(const std::string& path, const std::string& ostar) {
    ProbabilitySystem sys = load_system_file(path);
    Unpacking u = default_unpacking(sys, parse_ostar(ostar));

    const bool small_enough = sys.space.size() <= 4096;
    std::optional<JointDistribution> witness;
    if (small_enough) {
        ConsistencyVerdict verdict = check_consistency(sys);
        if (verdict.status == ConsistencyStatus::consistent) witness = std::move(verdict.witness);
    }
    ScoreReport report =
        full_score_report(sys, u, small_enough, witness ? &*witness : nullptr);

    std::cout << "g_standard = " << fmt6(report.g_guaranteed_standard) << '\n';
    std::cout << "g_alt = " << fmt6(report.g_guaranteed_alt) << '\n';
    std::cout << "k = " << fmt6(std::exp(report.ln_k)) << '\n';
    std::cout << "ln_k = " << fmt6(report.ln_k) << '\n';
    std::cout << "uniform = " << fmt6(report.uniform_baseline) << '\n';
    print_terms("component terms", report.component_terms);
    print_terms("overlap terms", report.overlap_terms);
    print_terms("intersection overlap terms", report.intersection_terms);

    if (report.g_self)
        std::cout << "self score of product extension = " << fmt6(*report.g_self) << '\n';
    if (witness && report.g_relative) {
        ExpansionResult alt = alternative_model(sys, u);
        double direct_alt = relative_score(*witness, alt.joint);
        std::cout << "cross-check against a fitted consistent joint:\n";
        std::cout << "  direct standard = " << fmt6(*report.g_relative) << " (|diff| = "
                  << fmt_res(std::abs(*report.g_relative - report.g_guaranteed_standard)) << ")\n";
        std::cout << "  direct alt = " << fmt6(direct_alt) << " (|diff| = "
                  << fmt_res(std::abs(direct_alt - report.g_guaranteed_alt)) << ")\n";
    } else if (small_enough) {
        std::cout << "cross-check skipped: tables are not consistent\n";
    } else {
        std::cout << "cross-check skipped: joint too large to enumerate\n";
    }
    return 0;
}

int cmd_consistency(const std::string& path, double tol, int max_iter) {
    ProbabilitySystem sys = load_system_file(path);
    ConsistencyVerdict verdict = check_consistency(sys, tol, max_iter);
    std::cout << "status: " << to_string(verdict.status) << '\n';
    std::cout << "residual = " << fmt_res(verdict.residual) << '\n';
    std::cout << "iterations = " << verdict.iterations << '\n';
    switch (verdict.status) {
        case ConsistencyStatus::consistent: return 0;
        case ConsistencyStatus::inconsistent: return 1;
        case ConsistencyStatus::undetermined: return 2;
    }
    return 2;
}

int cmd_maxent(const std::string& path, double tol, int max_iter) {
    ProbabilitySystem sys = load_system_file(path);
    MaxentResult res = maxent_fit(sys, tol, max_iter);
    std::cout << "entropy = " << fmt6(res.entropy) << '\n';
    std::cout << "iterations = " << res.iterations << '\n';
    std::cout << "residual = " << fmt_res(res.residual) << '\n';
    try {
        ExpansionResult px = product_extension(sys, default_unpacking(sys));
        double entropy_px = -log_score(px.joint);
        double gap = res.entropy - entropy_px;
        std::cout << "product extension entropy = " << fmt6(entropy_px) << '\n';
        std::cout << "entropy gap = " << fmt_res(gap) << '\n';
        if (gap < 1e-6)
            std::cout << "note: gap below 1e-6, product extension is within tolerance of the "
                         "maximum entropy joint\n";
    } catch (const Error& e) {
        std::cout << "product extension unavailable: " << e.what() << '\n';
    }
    return 0;
}

int cmd_experiment(const std::string& structure, int trials, std::uint64_t seed,
                   const std::string& ostar, const std::string& out_path) {
    ExperimentConfig config;
    std::ifstream probe_file(structure);
    if (probe_file.good())
        config.structure = load_structure_template(structure);
    else
        config.structure = parse_preset(structure);
    config.trials = trials;
    config.seed = seed;
    config.ostar_rule = parse_ostar(ostar);
    config.out_path = out_path;

    ExperimentResult result = run_experiment(config);
    const ExperimentSummary& s = result.summary;
    std::cout << "structure: " << config.structure.name << " ("
              << config.structure.structure.component_count() << " components, "
              << config.structure.space.size() << " joint states)\n";
    std::cout << "trials: " << s.trials << ", completed: " << s.completed
              << ", failures: " << s.failures << '\n';
    if (!s.failure_note.empty()) std::cout << "first failure: " << s.failure_note << '\n';
    std::cout << "winners: alt " << s.alt_wins << ", standard " << s.standard_wins << ", ties "
              << s.ties << " (alt-win fraction " << csv_double(s.alt_win_fraction()) << ")\n";
    std::cout << "gap (alt - standard): mean " << csv_double(s.mean_gap) << ", min "
              << csv_double(s.min_gap) << ", max " << csv_double(s.max_gap) << '\n';
    std::cout << "k < 1: " << s.k_below_one << " trials, alt wins " << s.alt_wins_k_below_one
              << '\n';
    std::cout << "k >= 1: " << s.k_at_least_one << " trials, alt wins "
              << s.alt_wins_k_at_least_one << '\n';
    std::cout << "partition condition held: " << s.partition_holds << " trials\n";
    std::cout << "self score vs guaranteed: above " << s.self_above_guaranteed << ", below "
              << s.self_below_guaranteed << ", at " << s.self_at_guaranteed << '\n';
    if (result.probe_ran)
        std::cout << "unpacking probe: " << result.probe.unpacking_count
                  << " orders, max joint deviation " << fmt_res(result.probe.max_px_deviation)
                  << ", max score deviation " << fmt_res(result.probe.max_guaranteed_deviation)
                  << '\n';
    else
        std::cout << "unpacking probe: skipped (enumeration cutoff)\n";
    if (!out_path.empty())
        std::cout << "csv: " << out_path << " (" << result.records.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Belief network webs: product extensions, the intersection-overlap "
                 "alternative model, guaranteed logarithmic scores, and a maximum-entropy "
                 "fitter."};
    app.require_subcommand(1);

    std::string file;
    std::string model = "standard";
    std::string ostar = "maximal";
    std::string out_path;
    std::string structure;
    bool allow_non_web = false;
    double tol = 1e-9;
    int max_iter = 10000;
    double maxent_tol = 1e-10;
    int trials = 100;
    std::uint64_t seed = 0;

    auto* validate = app.add_subcommand("validate", "Check a system file and report its shape");
    validate->add_option("file", file, "system JSON file")->required();

    auto* unpack_cmd = app.add_subcommand("unpack", "Print unpacking steps and classification");
    unpack_cmd->add_option("file", file, "system JSON file")->required();
    unpack_cmd->add_option("--ostar", ostar, "intersection overlap rule (maximal, all-distinct)");

    auto* expand = app.add_subcommand("expand", "Expand a system to a full joint distribution");
    expand->add_option("file", file, "system JSON file")->required();
    expand->add_option("--model", model, "expansion model (standard, alt)");
    expand->add_option("--ostar", ostar, "intersection overlap rule (maximal, all-distinct)");
    expand->add_flag("--allow-non-web", allow_non_web,
                     "permit the order-free alternative model on non-web structures");
    expand->add_option("--out", out_path, "write the table to this file instead of stdout");

    auto* score = app.add_subcommand("score", "Guaranteed scores with per-term breakdown");
    score->add_option("file", file, "system JSON file")->required();
    score->add_option("--ostar", ostar, "intersection overlap rule (maximal, all-distinct)");

    auto* consistency = app.add_subcommand("consistency", "Decide whether the tables admit a joint");
    consistency->add_option("file", file, "system JSON file")->required();
    consistency->add_option("--tol", tol, "residual tolerance");
    consistency->add_option("--max-iter", max_iter, "fitting sweep limit");

    auto* maxent = app.add_subcommand("maxent", "Fit the maximum-entropy consistent joint");
    maxent->add_option("file", file, "system JSON file")->required();
    maxent->add_option("--tol", maxent_tol, "residual tolerance");
    maxent->add_option("--max-iter", max_iter, "fitting sweep limit");

    auto* experiment = app.add_subcommand("experiment", "Monte Carlo model comparison");
    experiment->add_option("--structure", structure, "preset (fig1, chainN, starN) or system file")
        ->required();
    experiment->add_option("--trials", trials, "number of trials");
    experiment->add_option("--seed", seed, "base seed; trial i uses seed + i");
    experiment->add_option("--ostar", ostar, "intersection overlap rule (maximal, all-distinct)");
    experiment->add_option("--out", out_path, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << '\n';
        return 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(file);
        if (unpack_cmd->parsed()) return cmd_unpack(file, ostar);
        if (expand->parsed()) return cmd_expand(file, model, ostar, allow_non_web, out_path);
        if (score->parsed()) return cmd_score(file, ostar);
        if (consistency->parsed()) return cmd_consistency(file, tol, max_iter);
        if (maxent->parsed()) return cmd_maxent(file, maxent_tol, max_iter);
        if (experiment->parsed()) return cmd_experiment(structure, trials, seed, ostar, out_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
