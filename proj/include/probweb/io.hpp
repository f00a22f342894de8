#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "probweb/error.hpp"
#include "probweb/expansion.hpp"
#include "probweb/harness.hpp"
#include "probweb/model.hpp"
#include "probweb/web.hpp"

namespace probweb {

// System file layout:
//   { "variables":  [ {"name": "A", "card": 2}, ... ],
//     "components": [ {"vars": ["A","B"], "probs": [...]}, ... ] }
// probs are row-major with the LAST listed variable fastest, states 0..card-1.

namespace detail {

inline std::string read_text_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(errc::io_error, "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    if (file.bad()) throw Error(errc::io_error, "failed reading '" + path + "'");
    return buffer.str();
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::parse_error, origin + ": " + e.what());
    }
}

inline std::vector<Variable> variables_from_json(const nlohmann::json& doc) {
    if (!doc.contains("variables") || !doc["variables"].is_array() || doc["variables"].empty())
        throw Error(errc::parse_error, "'variables' must be a nonempty array");
    std::vector<Variable> vars;
    for (const auto& v : doc["variables"]) {
        if (!v.is_object() || !v.contains("name") || !v["name"].is_string() ||
            !v.contains("card") || !v["card"].is_number_integer())
            throw Error(errc::parse_error, "each variable needs a string 'name' and integer 'card'");
        vars.push_back({v["name"].get<std::string>(), v["card"].get<int>()});
    }
    return vars;
}

inline std::vector<std::string> component_vars_from_json(const nlohmann::json& comp,
                                                         std::size_t index) {
    if (!comp.is_object() || !comp.contains("vars") || !comp["vars"].is_array() ||
        comp["vars"].empty())
        throw Error(errc::parse_error,
                    "component " + std::to_string(index) + " needs a nonempty 'vars' array");
    std::vector<std::string> names;
    for (const auto& n : comp["vars"]) {
        if (!n.is_string())
            throw Error(errc::parse_error,
                        "component " + std::to_string(index) + " has a non-string variable name");
        names.push_back(n.get<std::string>());
    }
    return names;
}

}  // namespace detail

/**
 * Parses a full system document. Each probability list must have one entry
 * per scope state, values in [0, 1], and sum to 1 within 1e-6; lists are
 * renormalized after parsing, with a warning collected when the deviation
 * exceeds 1e-9.
 */
inline ProbabilitySystem system_from_json(const nlohmann::json& doc,
                                          std::vector<std::string>* warnings = nullptr) {
    JointSpace space(detail::variables_from_json(doc));
    if (!doc.contains("components") || !doc["components"].is_array() || doc["components"].empty())
        throw Error(errc::parse_error, "'components' must be a nonempty array");

    Structure structure;
    std::vector<ProbTable> tables;
    std::size_t index = 0;
    for (const auto& comp : doc["components"]) {
        auto names = detail::component_vars_from_json(comp, index);
        auto scope = detail::resolve_names(space, names);
        std::size_t states = 1;
        for (const auto& v : scope) states *= static_cast<std::size_t>(v.cardinality);

        if (!comp.contains("probs") || !comp["probs"].is_array())
            throw Error(errc::parse_error,
                        "component " + std::to_string(index) + " needs a 'probs' array");
        const auto& probs = comp["probs"];
        if (probs.size() != states)
            throw Error(errc::invalid_argument,
                        "component " + std::to_string(index) + " needs " + std::to_string(states) +
                            " probabilities, got " + std::to_string(probs.size()));
        std::vector<double> values;
        values.reserve(states);
        double sum = 0.0;
        for (const auto& p : probs) {
            if (!p.is_number())
                throw Error(errc::parse_error,
                            "component " + std::to_string(index) + " has a non-numeric probability");
            double v = p.get<double>();
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(errc::invalid_argument, "component " + std::to_string(index) +
                                                        " has a probability outside [0, 1]");
            values.push_back(v);
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw Error(errc::invalid_argument,
                        "component " + std::to_string(index) + " probabilities sum to " +
                            std::to_string(sum) + ", expected 1");
        if (warnings && std::abs(sum - 1.0) > 1e-9)
            warnings->push_back("component " + std::to_string(index) + " sum deviates from 1 by " +
                                std::to_string(std::abs(sum - 1.0)) + "; renormalized");
        for (double& v : values) v /= sum;

        structure.components.push_back(std::move(names));
        tables.emplace_back(std::move(scope), std::move(values));
        ++index;
    }
    return ProbabilitySystem(std::move(space), std::move(structure), std::move(tables));
}

inline ProbabilitySystem load_system_file(const std::string& path,
                                          std::vector<std::string>* warnings = nullptr) {
    return system_from_json(detail::parse_json_text(detail::read_text_file(path), path), warnings);
}

/// Loads only the variables and component scopes of a system document;
/// 'probs' entries are permitted but ignored. The template is named after
/// the file (basename without extension).
inline StructureTemplate load_structure_template(const std::string& path) {
    nlohmann::json doc = detail::parse_json_text(detail::read_text_file(path), path);
    StructureTemplate t;
    t.space = JointSpace(detail::variables_from_json(doc));
    if (!doc.contains("components") || !doc["components"].is_array() || doc["components"].empty())
        throw Error(errc::parse_error, "'components' must be a nonempty array");
    std::size_t index = 0;
    for (const auto& comp : doc["components"])
        t.structure.components.push_back(detail::component_vars_from_json(comp, index++));
    t.structure.validate();

    std::string base = path;
    std::size_t slash = base.find_last_of("/\\");
    if (slash != std::string::npos) base = base.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    t.name = base;
    return t;
}

inline nlohmann::json system_to_json(const ProbabilitySystem& sys) {
    nlohmann::json doc;
    doc["variables"] = nlohmann::json::array();
    for (const auto& v : sys.space.variables())
        doc["variables"].push_back({{"name", v.name}, {"card", v.cardinality}});
    doc["components"] = nlohmann::json::array();
    for (std::size_t i = 0; i < sys.tables.size(); ++i) {
        nlohmann::json comp;
        comp["vars"] = sys.structure.components[i];
        comp["probs"] = sys.tables[i].values();
        doc["components"].push_back(std::move(comp));
    }
    return doc;
}

inline void save_system_file(const std::string& path, const ProbabilitySystem& sys) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(errc::io_error, "cannot open '" + path + "' for writing");
    file << system_to_json(sys).dump(2) << '\n';
    file.flush();
    if (!file) throw Error(errc::io_error, "failed writing '" + path + "'");
}

}  // namespace probweb
