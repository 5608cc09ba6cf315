#pragma once

/// Machine-readable reports: JSON check records (nlohmann/json), RFC-4180
/// CSV tables, and a minimal structural validator for the shipped schema.
/// All numbers print through one fixed %.17g formatter so identical inputs
/// produce byte-identical reports.

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavekahler/errors.hpp"

namespace wk {

using nlohmann::json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One verification record, mirroring the shipped schema.
struct CheckOutcome {
    std::string check;
    std::string structure;
    int points = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    json per_point;  // optional array

    json to_json() const {
        json j;
        j["check"] = check;
        j["structure"] = structure;
        j["points"] = points;
        // serialize residuals as strings formatted once, so byte output is stable
        j["max_residual"] = format_double(max_residual);
        j["tolerance"] = format_double(tolerance);
        j["pass"] = pass;
        if (!per_point.is_null()) j["per_point"] = per_point;
        return j;
    }
};

struct Report {
    std::uint64_t seed = 0;
    std::vector<CheckOutcome> checks;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    json to_json() const {
        json j;
        j["seed"] = seed;
        j["pass"] = pass();
        j["checks"] = json::array();
        for (const auto& c : checks) j["checks"].push_back(c.to_json());
        return j;
    }

    std::string serialize() const { return to_json().dump(2) + "\n"; }
};

inline const char* report_schema_text() {
    return R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "wavekahler report",
  "type": "object",
  "required": ["seed", "pass", "checks"],
  "properties": {
    "seed": {"type": "integer"},
    "pass": {"type": "boolean"},
    "checks": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["check", "structure", "points", "max_residual", "tolerance", "pass"],
        "properties": {
          "check": {"type": "string"},
          "structure": {"type": "string"},
          "points": {"type": "integer"},
          "max_residual": {"type": "string"},
          "tolerance": {"type": "string"},
          "pass": {"type": "boolean"},
          "per_point": {"type": "array"}
        }
      }
    }
  }
}
)";
}

/// Structural validation against the shipped schema: required keys and types
/// of the report and of every check record.
inline void validate_report_json(const json& j) {
    auto need = [](const json& o, const char* key, const char* type) {
        if (!o.contains(key))
            throw numeric_error(std::string("report missing required key '") + key + "'");
        const json& v = o.at(key);
        const std::string t = type;
        const bool ok = (t == "integer" && v.is_number_integer()) ||
                        (t == "boolean" && v.is_boolean()) || (t == "string" && v.is_string()) ||
                        (t == "array" && v.is_array());
        if (!ok)
            throw numeric_error(std::string("report key '") + key + "' is not of type " + type);
    };
    need(j, "seed", "integer");
    need(j, "pass", "boolean");
    need(j, "checks", "array");
    for (const json& c : j.at("checks")) {
        need(c, "check", "string");
        need(c, "structure", "string");
        need(c, "points", "integer");
        need(c, "max_residual", "string");
        need(c, "tolerance", "string");
        need(c, "pass", "boolean");
        if (c.contains("per_point")) need(c, "per_point", "array");
    }
}

/// RFC-4180 field quoting: fields containing comma, quote or newline are
/// wrapped in double quotes with internal quotes doubled.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

class CsvWriter {
  public:
    void header(const std::vector<std::string>& names) { row_strings(names); }

    void row(const std::vector<double>& values) {
        std::vector<std::string> s;
        s.reserve(values.size());
        for (double v : values) s.push_back(format_double(v));
        row_strings(s);
    }

    void row_strings(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) text_ += ',';
            text_ += csv_field(fields[i]);
        }
        text_ += "\r\n";
    }

    const std::string& text() const { return text_; }

  private:
    std::string text_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw numeric_error("cannot open output file '" + path + "'");
    out << content;
}

}  // namespace wk
