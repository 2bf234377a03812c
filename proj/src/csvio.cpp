#include "pqmc/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pqmc {

namespace {

constexpr const char* kReportHeader =
    "integrand,method,construction,m,n,replicate,estimate,seconds";
constexpr const char* kSummaryHeader =
    "integrand,method,construction,m,n,rmse,stderr,slope";
constexpr const char* kTimingHeader =
    "integrand,method,construction,n,reps,seconds,gradient_seconds";

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_row(const std::string& line, size_t expect,
                                   const std::string& path, size_t lineno) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    if (out.size() != expect) {
        std::ostringstream os;
        os << path << ":" << lineno << ": expected " << expect
           << " fields, got " << out.size();
        throw std::runtime_error(os.str());
    }
    return out;
}

double parse_double(const std::string& s, const std::string& path, size_t lineno) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": malformed number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const std::string& path, size_t lineno) {
    size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": malformed integer '" + s + "'");
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path, const char* header) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::string first;
    if (!std::getline(is, first) || first != header)
        throw std::runtime_error(path + ": missing header '" + std::string(header) + "'");
    return is;
}

}  // namespace

void write_report_csv(const std::string& path, const ExperimentReport& report) {
    std::ofstream os = open_out(path);
    os << kReportHeader << "\n";
    for (const ReportRow& r : report.rows)
        os << r.integrand << ',' << r.method << ',' << r.construction << ','
           << r.m << ',' << r.n << ',' << r.replicate << ','
           << fmt17(r.estimate) << ',' << fmt17(r.seconds) << "\n";
}

void write_summary_csv(const std::string& path, const ExperimentReport& report) {
    std::ofstream os = open_out(path);
    os << kSummaryHeader << "\n";
    for (const SummaryRow& r : report.summary)
        os << r.integrand << ',' << r.method << ',' << r.construction << ','
           << r.m << ',' << r.n << ',' << fmt17(r.rmse) << ',' << fmt17(r.se)
           << ',' << fmt17(r.slope) << "\n";
}

void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows) {
    std::ofstream os = open_out(path);
    os << kTimingHeader << "\n";
    for (const TimingRow& r : rows)
        os << r.integrand << ',' << r.method << ',' << r.construction << ','
           << r.n << ',' << r.reps << ',' << fmt17(r.seconds) << ','
           << fmt17(r.gradient_seconds) << "\n";
}

ExperimentReport read_report_csv(const std::string& path) {
    std::ifstream is = open_in(path, kReportHeader);
    ExperimentReport report;
    std::string line;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_row(line, 8, path, lineno);
        ReportRow r;
        r.integrand = f[0];
        r.method = f[1];
        r.construction = f[2];
        r.m = static_cast<int>(parse_int(f[3], path, lineno));
        r.n = static_cast<size_t>(parse_int(f[4], path, lineno));
        r.replicate = static_cast<int>(parse_int(f[5], path, lineno));
        r.estimate = parse_double(f[6], path, lineno);
        r.seconds = parse_double(f[7], path, lineno);
        report.rows.push_back(r);
    }
    return report;
}

std::vector<TimingRow> read_timing_csv(const std::string& path) {
    std::ifstream is = open_in(path, kTimingHeader);
    std::vector<TimingRow> rows;
    std::string line;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_row(line, 7, path, lineno);
        TimingRow r;
        r.integrand = f[0];
        r.method = f[1];
        r.construction = f[2];
        r.n = static_cast<size_t>(parse_int(f[3], path, lineno));
        r.reps = static_cast<int>(parse_int(f[4], path, lineno));
        r.seconds = parse_double(f[5], path, lineno);
        r.gradient_seconds = parse_double(f[6], path, lineno);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace pqmc
