#include "fcsim/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fcsim {

namespace {

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::invalid_argument("trace csv: malformed number '" + s + "'");
    return v;
}

long parse_long(const std::string& s) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw std::invalid_argument("trace csv: malformed integer '" + s + "'");
    return v;
}

// Counts consecutive header columns named <prefix>_0, <prefix>_1, ...
int count_prefixed(const std::vector<std::string>& header, size_t start, const std::string& prefix) {
    int count = 0;
    for (size_t i = start; i < header.size(); ++i) {
        if (header[i] == prefix + "_" + std::to_string(count)) {
            ++count;
        } else {
            break;
        }
    }
    return count;
}

}  // namespace

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
    if (trace.empty()) throw std::invalid_argument("trace_to_csv: empty trace");
    const Eigen::Index n = trace.front().y_meas.size();
    const Eigen::Index m = trace.front().rates.size();

    std::string out;
    out += "step";
    for (Eigen::Index i = 0; i < n; ++i) out += ",y_meas_" + std::to_string(i);
    for (Eigen::Index i = 0; i < n; ++i) out += ",y_raw_" + std::to_string(i);
    for (Eigen::Index j = 0; j < m; ++j) out += ",rate_" + std::to_string(j);
    for (Eigen::Index j = 0; j < m; ++j) out += ",u_cmd_" + std::to_string(j);
    out += ",miss_ratio,pred_err_norm,cost";
    out += ",faults_injected,faults_masked,faults_reexecuted,faults_unrecovered";
    for (Eigen::Index j = 0; j < m; ++j) out += ",clamped_" + std::to_string(j);
    out += "\n";

    for (const TraceRecord& rec : trace) {
        if (rec.y_meas.size() != n || rec.y_raw.size() != n || rec.rates.size() != m ||
            rec.u_cmd.size() != m || static_cast<Eigen::Index>(rec.clamped.size()) != m)
            throw std::invalid_argument("trace_to_csv: inconsistent record dimensions");
        out += std::to_string(rec.step);
        for (Eigen::Index i = 0; i < n; ++i) {
            out += ',';
            append_double(out, rec.y_meas[i]);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            out += ',';
            append_double(out, rec.y_raw[i]);
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            out += ',';
            append_double(out, rec.rates[j]);
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            out += ',';
            append_double(out, rec.u_cmd[j]);
        }
        out += ',';
        append_double(out, rec.miss_ratio);
        out += ',';
        append_double(out, rec.pred_err_norm);
        out += ',';
        append_double(out, rec.cost);
        out += ',' + std::to_string(rec.faults_injected);
        out += ',' + std::to_string(rec.faults_masked);
        out += ',' + std::to_string(rec.faults_reexecuted);
        out += ',' + std::to_string(rec.faults_unrecovered);
        for (Eigen::Index j = 0; j < m; ++j) {
            out += ',' + std::to_string(rec.clamped[static_cast<size_t>(j)]);
        }
        out += '\n';
    }
    return out;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << trace_to_csv(trace);
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<TraceRecord> parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("trace csv: missing header");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty() || header[0] != "step")
        throw std::invalid_argument("trace csv: header must start with 'step'");

    const int n = count_prefixed(header, 1, "y_meas");
    if (n < 1) throw std::invalid_argument("trace csv: no y_meas columns");
    const int m = count_prefixed(header, 1 + 2 * static_cast<size_t>(n), "rate");
    if (m < 1) throw std::invalid_argument("trace csv: no rate columns");
    const size_t expect = 1 + 2 * static_cast<size_t>(n) + 3 * static_cast<size_t>(m) + 7;
    if (header.size() != expect)
        throw std::invalid_argument("trace csv: header has " + std::to_string(header.size()) +
                                    " columns, expected " + std::to_string(expect));

    std::vector<TraceRecord> trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != expect)
            throw std::invalid_argument("trace csv: row has " + std::to_string(f.size()) +
                                        " fields, expected " + std::to_string(expect));
        TraceRecord rec;
        size_t at = 0;
        rec.step = parse_long(f[at++]);
        rec.y_meas.resize(n);
        for (int i = 0; i < n; ++i) rec.y_meas[i] = parse_double(f[at++]);
        rec.y_raw.resize(n);
        for (int i = 0; i < n; ++i) rec.y_raw[i] = parse_double(f[at++]);
        rec.rates.resize(m);
        for (int j = 0; j < m; ++j) rec.rates[j] = parse_double(f[at++]);
        rec.u_cmd.resize(m);
        for (int j = 0; j < m; ++j) rec.u_cmd[j] = parse_double(f[at++]);
        rec.miss_ratio = parse_double(f[at++]);
        rec.pred_err_norm = parse_double(f[at++]);
        rec.cost = parse_double(f[at++]);
        rec.faults_injected = parse_long(f[at++]);
        rec.faults_masked = parse_long(f[at++]);
        rec.faults_reexecuted = parse_long(f[at++]);
        rec.faults_unrecovered = parse_long(f[at++]);
        rec.clamped.resize(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j)
            rec.clamped[static_cast<size_t>(j)] = static_cast<int>(parse_long(f[at++]));
        trace.push_back(std::move(rec));
    }
    return trace;
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_trace_csv(ss.str());
}

}  // namespace fcsim
