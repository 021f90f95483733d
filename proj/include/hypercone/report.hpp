// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_REPORT_HPP
#define HYPERCONE_REPORT_HPP

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypercone/gridset.hpp"
#include "hypercone/params.hpp"

namespace hypercone {

using json = nlohmann::ordered_json;

/// Named table: JSON carries {columns, rows}; CSV repeats the same rows.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    Table& add(std::vector<json> row) {
        if (row.size() != columns.size()) throw PreconditionError("row width differs from table '" + name + "'");
        rows.push_back(std::move(row));
        return *this;
    }
};

struct Report {
    std::string op;
    json params = json::object();
    std::uint64_t seed = 0;
    json values = json::object();
    std::vector<Table> tables;
    double runtime_ms = 0.0;

    Table& table(std::string name, std::vector<std::string> columns) {
        tables.push_back(Table{std::move(name), std::move(columns), {}});
        return tables.back();
    }

    json to_json() const {
        json t = json::object();
        for (const auto& tb : tables) t[tb.name] = {{"columns", tb.columns}, {"rows", tb.rows}};
        return {{"op", op}, {"params", params}, {"seed", seed}, {"values", values}, {"tables", t},
                {"runtime_ms", runtime_ms}};
    }

    /// One block per table: a "# table <name>" line, the header, then rows.
    /// Scalar values come first as a two-column "values" block.
    std::string to_csv() const {
        std::ostringstream os;
        os << "# op," << op << "\n# seed," << seed << "\n# runtime_ms," << csv_cell(runtime_ms) << "\n";
        os << "# table values\nkey,value\n";
        for (const auto& [k, v] : values.items()) os << csv_cell(k) << ',' << csv_cell(v) << '\n';
        for (const auto& tb : tables) {
            os << "\n# table " << tb.name << '\n';
            for (std::size_t i = 0; i < tb.columns.size(); ++i) os << (i ? "," : "") << csv_cell(tb.columns[i]);
            os << '\n';
            for (const auto& row : tb.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
                os << '\n';
            }
        }
        return os.str();
    }

    static std::string csv_cell(const json& v) {
        if (v.is_number_float()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
            return buf;
        }
        if (v.is_string()) return quote(v.get<std::string>());
        if (v.is_null()) return "";
        return quote(v.dump());
    }

private:
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + '"';
    }
};

inline json to_json(const Resolution& r) { return json::array({r.l1, r.l2, r.l3}); }

inline json to_json(const Params& p, const Resolution& r) {
    return {{"q", p.q},           {"res", to_json(r)}, {"R", p.grid.half_width}, {"h", p.grid.step},
            {"subdiv", p.subdivision}, {"B", p.B},    {"C", p.C},                {"A", p.A()},
            {"C0", p.C0()}};
}

inline json to_json(const Tile& t) {
    return {{"j", t.x.scale}, {"a", t.x.index}, {"k", t.y.scale}, {"b", t.y.index}};
}

} // namespace hypercone

#endif
