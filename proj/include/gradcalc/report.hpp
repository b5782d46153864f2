#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gradcalc {

enum class ReportStatus { pass, fail, inconclusive, error };

std::string status_name(ReportStatus s);

// Outcome of one workspace command. timing_ms is pinned to zero: reports for
// a fixed input and seed must be byte-stable, so no wall-clock reading may
// leak into them.
struct CheckReport {
    std::string command;
    ReportStatus status = ReportStatus::error;
    std::vector<std::string> witnesses;
    long long timing_ms = 0;
    uint64_t seed = 0;
};

enum class ReportFormat { text, structured };

// text: a one-line verdict followed by indented witnesses; structured: one
// JSON object per report on a single line, keys in the fixed order
// command, status, witnesses, timing_ms, seed.
std::string emit_report(const CheckReport& r, ReportFormat fmt);

// Process exit code for a batch of reports: 1 if any errored, else 2 if any
// failed, else 3 if any came back inconclusive, else 0.
int exit_code_for(const std::vector<CheckReport>& reports);

} // namespace gradcalc
