#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "seqclone/cli.hpp"

namespace seqclone::cli {

namespace {

std::string cell_text(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) {
        return format_real(*d);
    }
    if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        return std::to_string(*i);
    }
    return std::get<std::string>(cell);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

nlohmann::ordered_json cell_json(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) {
        // go through the 12-digit text so both formats carry the same value
        return std::stod(format_real(*d));
    }
    if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        return *i;
    }
    return std::get<std::string>(cell);
}

} // namespace

std::string format_real(double v) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument("non-finite value in output table");
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void OutputRecord::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw std::invalid_argument("output row has " + std::to_string(row.size()) + " cells for " +
                                    std::to_string(columns.size()) + " columns");
    }
    for (const auto& cell : row) {
        if (const auto* d = std::get_if<double>(&cell); d && !std::isfinite(*d)) {
            throw std::invalid_argument("non-finite value in output table");
        }
    }
    rows.push_back(std::move(row));
}

std::string to_csv(const OutputRecord& record) {
    std::ostringstream os;
    os << "# schema_version=" << record.schema_version << '\n';
    os << "# command=" << record.command << '\n';
    for (const auto& [key, value] : record.parameters) {
        os << "# " << key << '=' << value << '\n';
    }
    for (std::size_t c = 0; c < record.columns.size(); ++c) {
        os << (c ? "," : "") << csv_escape(record.columns[c]);
    }
    os << '\n';
    for (const auto& row : record.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            os << (c ? "," : "") << csv_escape(cell_text(row[c]));
        }
        os << '\n';
    }
    return os.str();
}

std::string to_json(const OutputRecord& record) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = record.schema_version;
    doc["command"] = record.command;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [key, value] : record.parameters) {
        params[key] = value;
    }
    doc["parameters"] = params;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : record.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            obj[record.columns[c]] = cell_json(row[c]);
        }
        rows.push_back(std::move(obj));
    }
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

} // namespace seqclone::cli
