// Command-line front end and its table output.
//
// CSV files start with "# key=value" comment lines (schema_version first,
// then command and parameters), followed by a header row and one line per
// row. JSON files hold {schema_version, command, parameters, rows}. Real
// numbers are printed with 12 significant digits in both formats.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace seqclone::cli {

inline constexpr const char* kSchemaVersion = "1.0";

using Cell = std::variant<double, std::int64_t, std::string>;

struct OutputRecord {
    std::string schema_version = kSchemaVersion;
    std::string command;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    /// Throws std::invalid_argument if the row width differs from the column
    /// count or a real cell is not finite.
    void add_row(std::vector<Cell> row);
};

/// "%.12g"; throws std::invalid_argument for NaN or infinity.
std::string format_real(double v);

std::string to_csv(const OutputRecord& record);
std::string to_json(const OutputRecord& record);

/// Runs one command. args excludes the program name. Returns the process exit
/// code: 0 on success, 1 when a computation or hard check fails, 2 for an
/// infeasible optimization target, and CLI11's code for flag errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace seqclone::cli
