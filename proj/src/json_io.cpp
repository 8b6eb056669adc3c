#include "hmmar/json_io.hpp"

#include "hmmar/errors.hpp"
#include "hmmar/series_io.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace hmmar {

namespace {

using nlohmann::json;

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw InvalidModel(where + " must be a number");
    return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && std::floor(d) == d) return static_cast<std::size_t>(d);
    }
    throw InvalidModel(where + " must be a non-negative integer");
}

Eigen::VectorXd as_vector(const json& v, const std::string& where) {
    if (!v.is_array()) throw InvalidModel(where + " must be an array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] =
            as_number(v[i], where + "[" + std::to_string(i) + "]");
    }
    return out;
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& where) {
    if (!v.is_array()) throw InvalidModel(where + " must be an array of arrays");
    const std::size_t rows = v.size();
    std::size_t cols = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array()) throw InvalidModel(where + "[" + std::to_string(i) + "] must be an array");
        if (i == 0) cols = v[i].size();
        if (v[i].size() != cols) throw InvalidModel(where + " rows have unequal lengths");
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        out.row(static_cast<Eigen::Index>(i)) =
            as_vector(v[i], where + "[" + std::to_string(i) + "]").transpose();
    }
    return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
    return out;
}

void write_string(std::ostream& os, const std::string& s) { os << json(s).dump(); }

void dump_value(std::ostream& os, const json& v, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (v.type()) {
        case json::value_t::object: {
            if (v.empty()) {
                os << "{}";
                return;
            }
            os << '{' << nl;
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad;
                write_string(os, it.key());
                os << (indent > 0 ? ": " : ":");
                dump_value(os, it.value(), indent, depth + 1);
            }
            os << nl << close_pad << '}';
            return;
        }
        case json::value_t::array: {
            // Arrays of scalars stay on one line; nested arrays break.
            bool scalar = true;
            for (const auto& e : v) scalar = scalar && !e.is_structured();
            if (v.empty()) {
                os << "[]";
                return;
            }
            if (scalar) {
                os << '[';
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) os << (indent > 0 ? ", " : ",");
                    dump_value(os, v[i], indent, depth + 1);
                }
                os << ']';
                return;
            }
            os << '[' << nl;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) os << ',' << nl;
                os << pad;
                dump_value(os, v[i], indent, depth + 1);
            }
            os << nl << close_pad << ']';
            return;
        }
        case json::value_t::number_float: {
            const double d = v.get<double>();
            if (std::isfinite(d)) {
                std::string text = format_double(d);
                // Keep the value a float on re-parse (preserves -0.0).
                if (text.find_first_of(".eE") == std::string::npos) text += ".0";
                os << text;
            } else {
                os << "null";
            }
            return;
        }
        default:
            os << v.dump();
    }
}

}  // namespace

HmMarModel model_from_json(const json& doc) {
    if (!doc.is_object()) throw InvalidModel("model document must be a JSON object");
    static const std::set<std::string> known = {"k", "p", "coeffs", "sigmas", "transition", "rho"};
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!known.count(it.key())) throw InvalidModel("unknown field '" + it.key() + "'");
    }
    for (const auto& name : known) {
        if (!doc.contains(name)) throw InvalidModel("missing field '" + name + "'");
    }
    HmMarModel m;
    m.k = as_count(doc["k"], "k");
    m.p = as_count(doc["p"], "p");
    m.coeffs = as_matrix(doc["coeffs"], "coeffs");
    m.sigmas = as_vector(doc["sigmas"], "sigmas");
    m.transition = as_matrix(doc["transition"], "transition");
    m.rho = as_vector(doc["rho"], "rho");
    return m;
}

json model_to_json(const HmMarModel& m) {
    json doc = json::object();
    doc["k"] = m.k;
    doc["p"] = m.p;
    doc["coeffs"] = matrix_to_json(m.coeffs);
    doc["sigmas"] = vector_to_json(m.sigmas);
    doc["transition"] = matrix_to_json(m.transition);
    doc["rho"] = vector_to_json(m.rho);
    return doc;
}

HmMarModel parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidModel(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(doc);
}

HmMarModel load_model(const std::string& path) { return parse_model(read_file(path)); }

std::string dump_json(const json& doc, int indent) {
    std::ostringstream os;
    dump_value(os, doc, indent, 0);
    os << '\n';
    return os.str();
}

}  // namespace hmmar
