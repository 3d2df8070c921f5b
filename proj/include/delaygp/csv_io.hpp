#pragma once

// CSV output: header row, LF line endings, 17 significant digits.

#include "delaygp/delayed_loop.hpp"
#include "delaygp/experiments.hpp"

#include <string>
#include <vector>

namespace delaygp {

/// printf "%.17g"; NaN is written as "nan".
std::string format_real(double v);

std::string results_csv(const ResultTable& table);
std::string aggregate_csv(const std::vector<Aggregate>& rows);
std::string trace_csv(const SimTrace& trace);
std::string delta_tilde_csv(const std::vector<DeltaTildeRow>& rows);

/// Inverse of results_csv; throws InvalidArgument on malformed input.
ResultTable parse_results_csv(const std::string& text);

/// Writes `content` verbatim, creating parent directories.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// results.csv, aggregate.csv and traces/<series>_<sweep>.csv under `dir`.
/// Returns the written paths.
std::vector<std::string> write_experiment(const std::string& dir, const ExperimentOutput& out);

}  // namespace delaygp
