#pragma once

#include "mfhp/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mfhp {

/// Generic reader for the CSV files the tool emits: one header line, then
/// comma-separated cells. Empty cells read back as NaN through number().
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws Error("cli", ...) when absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

CsvTable read_csv_table(std::istream& in);

/// Adaptive run: writes the run directory and prints one line per iteration.
/// Returns the process exit status; errors propagate as exceptions.
int run_command(const RunConfig& config, std::ostream& out);

/// Unrefined convergence study over the config's study grid.
int study_command(const RunConfig& config, std::ostream& out);

/// Analytic self-tests; returns 0 when every check passes.
int check_command(std::ostream& out);

/// Entry point of the `mfhp` executable. Usage errors return 2, run-time
/// errors 1 (reported on `err` with their module prefix).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfhp
