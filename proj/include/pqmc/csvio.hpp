#pragma once
#include <string>
#include <vector>

#include "pqmc/harness.hpp"

namespace pqmc {

// Replicate rows. Columns exactly:
// integrand,method,construction,m,n,replicate,estimate,seconds
void write_report_csv(const std::string& path, const ExperimentReport& report);

// Summary rows. Columns exactly:
// integrand,method,construction,m,n,rmse,stderr,slope
void write_summary_csv(const std::string& path, const ExperimentReport& report);

// Timing rows: integrand,method,construction,n,reps,seconds,gradient_seconds
void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows);

// Round-trip readers (doubles are written with %.17g, so values survive
// exactly). Unknown headers or malformed rows throw std::runtime_error.
ExperimentReport read_report_csv(const std::string& path);
std::vector<TimingRow> read_timing_csv(const std::string& path);

}  // namespace pqmc
