#pragma once

#include "momentbound/assembly.hpp"
#include "momentbound/parser.hpp"
#include "momentbound/solve.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace momentbound {

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problem description file, schema "specfile-v1". Polynomials are grammar
// strings over the declared variables; rationals may be written as decimal
// literals and are converted exactly. Unknown fields are rejected.
struct ProblemSpec {
    std::vector<std::string> variables;
    std::vector<Polynomial> drift;
    std::optional<std::vector<std::vector<Polynomial>>> sigma;
    std::optional<std::vector<std::vector<Polynomial>>> diffusion_matrix;
    std::vector<Polynomial> varieties;
    bool compact_support = false;

    std::optional<Polynomial> objective;        // single-measure objective
    PiecewiseObjective pieces;                  // or piecewise blocks
    std::optional<int> degree;
    std::optional<std::pair<int, int>> degree_range;
    std::optional<std::vector<Rat>> scale;
    SolverSettings solver;

    SdeModel model() const {
        return SdeModel(static_cast<int>(variables.size()), drift, sigma, diffusion_matrix,
                        varieties, compact_support);
    }
};

namespace detail {

inline void require_fields(const nlohmann::json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw SpecError("unknown field '" + key + "' in " + where);
    }
}

inline std::vector<std::vector<Polynomial>> parse_matrix(const nlohmann::json& j,
                                                         const std::vector<std::string>& vars,
                                                         const std::string& what) {
    if (!j.is_array()) throw SpecError(what + " must be an array of rows");
    std::vector<std::vector<Polynomial>> out;
    for (const auto& row : j) {
        if (!row.is_array()) throw SpecError(what + " rows must be arrays");
        std::vector<Polynomial> r;
        for (const auto& cell : row) r.push_back(parse_polynomial(cell.get<std::string>(), vars));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace detail

inline ProblemSpec parse_problem_spec(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SpecError("spec file must contain a JSON object");
    detail::require_fields(doc,
                           {"version", "variables", "drift", "sigma", "diffusion_matrix",
                            "varieties", "compact_support", "objective", "degree", "degree_range",
                            "scale", "solver"},
                           "spec file");
    if (!doc.contains("version") || doc.at("version").get<std::string>() != "specfile-v1")
        throw SpecError("spec file must declare version \"specfile-v1\"");

    ProblemSpec spec;
    if (!doc.contains("variables") || !doc.at("variables").is_array() || doc.at("variables").empty())
        throw SpecError("spec file needs a non-empty 'variables' list");
    for (const auto& v : doc.at("variables")) spec.variables.push_back(v.get<std::string>());

    if (!doc.contains("drift")) throw SpecError("spec file needs 'drift'");
    for (const auto& b : doc.at("drift"))
        spec.drift.push_back(parse_polynomial(b.get<std::string>(), spec.variables));

    if (doc.contains("sigma"))
        spec.sigma = detail::parse_matrix(doc.at("sigma"), spec.variables, "sigma");
    if (doc.contains("diffusion_matrix"))
        spec.diffusion_matrix =
            detail::parse_matrix(doc.at("diffusion_matrix"), spec.variables, "diffusion_matrix");
    if (!spec.sigma && !spec.diffusion_matrix)
        throw SpecError("spec file needs 'sigma' or 'diffusion_matrix'");

    if (doc.contains("varieties"))
        for (const auto& g : doc.at("varieties"))
            spec.varieties.push_back(parse_polynomial(g.get<std::string>(), spec.variables));
    if (doc.contains("compact_support")) spec.compact_support = doc.at("compact_support").get<bool>();

    if (doc.contains("objective")) {
        const auto& obj = doc.at("objective");
        if (obj.is_string()) {
            spec.objective = parse_polynomial(obj.get<std::string>(), spec.variables);
        } else if (obj.is_object()) {
            detail::require_fields(obj, {"pieces"}, "objective");
            for (const auto& pj : obj.at("pieces")) {
                detail::require_fields(pj, {"f", "equalities", "inequalities"}, "objective piece");
                Piece piece;
                piece.f = parse_polynomial(pj.at("f").get<std::string>(), spec.variables);
                if (pj.contains("equalities"))
                    for (const auto& p : pj.at("equalities"))
                        piece.equalities.push_back(
                            parse_polynomial(p.get<std::string>(), spec.variables));
                if (pj.contains("inequalities"))
                    for (const auto& q : pj.at("inequalities"))
                        piece.inequalities.push_back(
                            parse_polynomial(q.get<std::string>(), spec.variables));
                spec.pieces.push_back(std::move(piece));
            }
        } else {
            throw SpecError("'objective' must be a polynomial string or {\"pieces\": [...]}");
        }
    }

    if (doc.contains("degree")) spec.degree = doc.at("degree").get<int>();
    if (doc.contains("degree_range")) {
        const auto& r = doc.at("degree_range");
        if (!r.is_array() || r.size() != 2) throw SpecError("'degree_range' must be [lo, hi]");
        spec.degree_range = {r.at(0).get<int>(), r.at(1).get<int>()};
    }
    if (doc.contains("scale")) {
        std::vector<Rat> z;
        for (const auto& s : doc.at("scale"))
            z.push_back(s.is_string() ? rat_from_string(s.get<std::string>())
                                      : rat_from_double(s.get<double>()));
        spec.scale = std::move(z);
    }
    if (doc.contains("solver")) {
        const auto& s = doc.at("solver");
        detail::require_fields(s, {"tolerance", "max_iterations"}, "solver settings");
        if (s.contains("tolerance")) spec.solver.tolerance = s.at("tolerance").get<double>();
        if (s.contains("max_iterations"))
            spec.solver.max_iterations = s.at("max_iterations").get<long>();
    }
    return spec;
}

inline ProblemSpec load_problem_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("malformed JSON in " + path + ": " + e.what());
    }
    try {
        return parse_problem_spec(doc);
    } catch (const ParseError& e) {
        throw SpecError(std::string("polynomial syntax error: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Reports: one record per solve, rendered as CSV or a machine JSON document.
// Infinities appear as "unbounded" in CSV and null-with-status in JSON.
// ---------------------------------------------------------------------------

struct ReportRecord {
    std::vector<std::pair<std::string, std::string>> fields;  // ordered

    void add(const std::string& key, const std::string& value) { fields.emplace_back(key, value); }
    void add(const std::string& key, double value, int precision = 12) {
        if (std::isinf(value)) {
            fields.emplace_back(key, "unbounded");
        } else if (std::isnan(value)) {
            fields.emplace_back(key, "");
        } else {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*g", precision, value);
            fields.emplace_back(key, buf);
        }
    }
    void add(const std::string& key, long value) { fields.emplace_back(key, std::to_string(value)); }
};

struct Report {
    std::vector<std::string> columns;
    std::vector<ReportRecord> records;
    std::vector<std::pair<std::string, std::string>> metadata;

    std::string to_csv() const {
        std::ostringstream os;
        for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& rec : records) {
            for (size_t i = 0; i < columns.size(); ++i) {
                if (i) os << ",";
                for (const auto& [k, v] : rec.fields)
                    if (k == columns[i]) {
                        os << v;
                        break;
                    }
            }
            os << "\n";
        }
        return os.str();
    }

    std::string to_json() const {
        nlohmann::ordered_json doc;
        for (const auto& [k, v] : metadata) doc["meta"][k] = v;
        doc["records"] = nlohmann::ordered_json::array();
        for (const auto& rec : records) {
            nlohmann::ordered_json r;
            for (const auto& [k, v] : rec.fields) {
                if (v == "unbounded" || v.empty()) {
                    r[k] = nullptr;
                } else {
                    char* end = nullptr;
                    double d = std::strtod(v.c_str(), &end);
                    if (end && *end == '\0')
                        r[k] = d;
                    else
                        r[k] = v;
                }
            }
            doc["records"].push_back(std::move(r));
        }
        return doc.dump(2) + "\n";
    }
};

// Atomic write: no partial tables on failure.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out.good()) throw std::runtime_error("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move " + tmp + " into place");
}

}  // namespace momentbound
