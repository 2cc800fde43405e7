#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resilient/errors.hpp"
#include "resilient/linalg.hpp"
#include "resilient/system.hpp"

namespace resilient {

// One additive drift term: row `row` of f(x) gets
//   sin: coeff * sin(frequency * x[state_index])
//   cos: coeff * cos(frequency * x[state_index])
//   const: coeff
struct DriftTerm {
    enum class Kind { Sin, Cos, Const };
    Kind kind = Kind::Const;
    double coeff = 0.0;
    int state_index = 0;
    int row = 0;
    double frequency = 1.0;

    double evaluate(const Vector& x) const {
        switch (kind) {
            case Kind::Sin: return coeff * std::sin(frequency * x(state_index));
            case Kind::Cos: return coeff * std::cos(frequency * x(state_index));
            case Kind::Const: return coeff;
        }
        return 0.0;
    }
};

/// A linear-plus-sinusoidal-drift system read from JSON, with its optional
/// nominal initial and target states.
struct SystemDefinition {
    ControlSystem system;
    Matrix a;
    Matrix bc;
    Matrix buc;
    std::vector<DriftTerm> drift_terms;
    std::optional<Vector> x0;
    std::optional<Vector> xtg;
};

namespace detail {

inline Matrix json_matrix(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError("system field '" + field + "': expected a non-empty 2-D array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw ConfigError("system field '" + field + "': rows must be arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError("system field '" + field + "': row " + std::to_string(r) + " has the wrong length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw ConfigError("system field '" + field + "' [" + std::to_string(r) + "][" + std::to_string(c) +
                                  "]: not a number");
            }
            m(r, c) = v.get<double>();
        }
    }
    if (!m.allFinite()) throw ConfigError("system field '" + field + "': non-finite entry");
    return m;
}

inline Vector json_vector(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError("field '" + field + "': expected a non-empty array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError("field '" + field + "'[" + std::to_string(i) + "]: not a number");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    if (!v.allFinite()) throw ConfigError("field '" + field + "': non-finite entry");
    return v;
}

inline double json_number(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field)) throw ConfigError("missing field '" + field + "'");
    if (!j.at(field).is_number()) throw ConfigError("field '" + field + "': not a number");
    return j.at(field).get<double>();
}

}  // namespace detail

inline SystemDefinition system_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("system definition must be a JSON object");
    for (const char* key : {"A", "Bc", "Buc", "Df", "Dg"}) {
        if (!j.contains(key)) throw ConfigError(std::string("system definition: missing field '") + key + "'");
    }
    SystemDefinition def;
    def.a = detail::json_matrix(j.at("A"), "A");
    def.bc = detail::json_matrix(j.at("Bc"), "Bc");
    def.buc = detail::json_matrix(j.at("Buc"), "Buc");
    const auto d = static_cast<int>(def.a.rows());
    if (def.a.cols() != d) throw ConfigError("system field 'A': must be square");
    if (def.bc.rows() != d) throw ConfigError("system field 'Bc': must have " + std::to_string(d) + " rows");
    if (def.buc.rows() != d) throw ConfigError("system field 'Buc': must have " + std::to_string(d) + " rows");

    if (j.contains("drift_terms")) {
        const auto& terms = j.at("drift_terms");
        if (!terms.is_array()) throw ConfigError("system field 'drift_terms': expected an array");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& t = terms[i];
            const std::string where = "drift_terms[" + std::to_string(i) + "]";
            if (!t.is_object() || !t.contains("kind")) throw ConfigError(where + ": expected an object with 'kind'");
            DriftTerm term;
            const auto kind = t.at("kind").get<std::string>();
            if (kind == "sin") {
                term.kind = DriftTerm::Kind::Sin;
            } else if (kind == "cos") {
                term.kind = DriftTerm::Kind::Cos;
            } else if (kind == "const") {
                term.kind = DriftTerm::Kind::Const;
            } else {
                throw ConfigError(where + ": unknown kind '" + kind + "' (expected sin, cos or const)");
            }
            term.coeff = detail::json_number(t, "coeff");
            term.state_index = t.value("state_index", 0);
            term.row = t.value("row", term.state_index);
            term.frequency = t.value("frequency", 1.0);
            if (term.state_index < 0 || term.state_index >= d || term.row < 0 || term.row >= d) {
                throw ConfigError(where + ": state_index/row out of range for d = " + std::to_string(d));
            }
            def.drift_terms.push_back(term);
        }
    }
    if (j.contains("x0")) def.x0 = detail::json_vector(j.at("x0"), "x0");
    if (j.contains("xtg")) def.xtg = detail::json_vector(j.at("xtg"), "xtg");
    for (const auto& v : {def.x0, def.xtg}) {
        if (v && v->size() != d) throw ConfigError("system x0/xtg: dimension must be " + std::to_string(d));
    }

    ControlSystem& sys = def.system;
    sys.name = j.value("name", std::string("json-system"));
    sys.state_dim = d;
    sys.controlled_dim = static_cast<int>(def.bc.cols());
    sys.uncontrolled_dim = static_cast<int>(def.buc.cols());
    sys.lipschitz_f = detail::json_number(j, "Df");
    sys.lipschitz_g = detail::json_number(j, "Dg");
    sys.drift = [a = def.a, terms = def.drift_terms](const Vector& x) -> Vector {
        Vector out = a * x;
        for (const auto& t : terms) out(t.row) += t.evaluate(x);
        return out;
    };
    sys.controlled_map = [b = def.bc](const Vector&) -> Matrix { return b; };
    sys.uncontrolled_map = [b = def.buc](const Vector&) -> Matrix { return b; };
    if (j.contains("state_space_bound")) {
        sys.state_space_bound = detail::json_number(j, "state_space_bound");
    } else if (def.x0 && def.xtg) {
        sys.state_space_bound = default_state_space_bound(*def.x0, *def.xtg);
    }
    sys.validate();
    return def;
}

inline SystemDefinition load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open system file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("system file '" + path + "': " + e.what());
    }
    return system_from_json(j);
}

}  // namespace resilient
