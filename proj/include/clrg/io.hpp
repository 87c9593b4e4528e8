#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "clrg/bench.hpp"
#include "clrg/dynamics.hpp"
#include "clrg/errors.hpp"
#include "clrg/sem.hpp"

namespace clrg {

// 17 significant digits round-trip doubles exactly through text.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_samples_csv(std::ostream& out, const std::vector<EnvSample>& samples) {
    if (samples.empty()) throw EmptySample("write_samples_csv: no samples");
    const std::size_t d = samples.front().x.cols();
    out << "env,y";
    for (std::size_t j = 0; j < d; ++j) out << ",x" << (j + 1);
    out << "\n";
    for (const auto& s : samples) {
        if (s.x.cols() != d) throw DimensionMismatch("write_samples_csv: feature dims differ");
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << (s.env_index + 1) << "," << format_double(s.y[i]);
            for (std::size_t j = 0; j < d; ++j) out << "," << format_double(s.x(i, j));
            out << "\n";
        }
    }
}

inline void write_samples_csv(const std::string& path, const std::vector<EnvSample>& samples) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_samples_csv(out, samples);
}

// Reads the env,y,x1..xd layout back into per-environment samples, ordered
// by ascending environment label.
inline std::vector<EnvSample> read_samples_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("read_samples_csv: empty input");
    std::size_t d = 0;
    {
        std::stringstream header(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(header, col, ',')) cols.push_back(col);
        if (cols.size() < 3 || cols[0] != "env" || cols[1] != "y")
            throw Error("read_samples_csv: expected header env,y,x1,...");
        d = cols.size() - 2;
    }
    std::map<long, std::vector<std::vector<double>>> by_env;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() != d + 2)
            throw Error("read_samples_csv: wrong column count at line " +
                        std::to_string(line_no));
        by_env[static_cast<long>(values[0])].push_back(std::move(values));
    }
    if (by_env.empty()) throw EmptySample("read_samples_csv: no data rows");
    std::vector<EnvSample> samples;
    std::size_t env_idx = 0;
    for (auto& [label, rows] : by_env) {
        EnvSample s;
        s.env_index = env_idx++;
        s.x = Matrix(rows.size(), d);
        s.y.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            s.y[i] = rows[i][1];
            for (std::size_t j = 0; j < d; ++j) s.x(i, j) = rows[i][j + 2];
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

inline std::vector<EnvSample> read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    return read_samples_csv(in);
}

inline void write_trace_csv(std::ostream& out, const DynamicsTrace& trace) {
    out << "round,env,component,value\n";
    for (const auto& round : trace.rounds) {
        for (std::size_t e = 0; e < round.strategies.size(); ++e)
            for (std::size_t j = 0; j < round.strategies[e].size(); ++j)
                out << round.round << "," << (e + 1) << "," << (j + 1) << ","
                    << format_double(round.strategies[e][j]) << "\n";
        for (std::size_t j = 0; j < round.ensemble.size(); ++j)
            out << round.round << ",ensemble," << (j + 1) << ","
                << format_double(round.ensemble[j]) << "\n";
    }
}

inline void write_trace_csv(const std::string& path, const DynamicsTrace& trace) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_trace_csv(out, trace);
}

inline void write_report_csv(std::ostream& out, const ExperimentReport& report) {
    out << "setting,method,n,mean_error,stderr,trials\n";
    const std::string setting = to_string(report.spec.setting);
    for (Method method : report.spec.methods) {
        for (std::size_t n : report.spec.sample_sizes) {
            const CellResult& cell = report.cells.at({method, n});
            out << setting << "," << to_string(method) << "," << n << ","
                << format_double(cell.mean_error) << "," << format_double(cell.stderr_error)
                << "," << cell.errors.size() << "\n";
        }
    }
}

inline void write_report_csv(const std::string& path, const ExperimentReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_report_csv(out, report);
}

}  // namespace clrg
