#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "resilient/errors.hpp"
#include "resilient/simulator.hpp"

namespace resilient::io {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

namespace detail {

inline void write_row(std::ostream& os, double t, const Vector& x, const Vector& uc, const Vector& uuc) {
    os << format_double(t);
    for (const Vector* v : {&x, &uc, &uuc}) {
        for (Eigen::Index i = 0; i < v->size(); ++i) os << ',' << format_double((*v)(i));
    }
    os << '\n';
}

}  // namespace detail

/// Header t,x1..xd,uc1..ucm,uuc1..uucp followed by one row per time sample.
inline void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
    if (trace.states.empty()) {
        os << "t\n";
        return;
    }
    const auto d = trace.states.front().size();
    const auto m = trace.uc_values.front().size();
    const auto p = trace.uuc_values.front().size();
    os << 't';
    for (Eigen::Index i = 1; i <= d; ++i) os << ",x" << i;
    for (Eigen::Index i = 1; i <= m; ++i) os << ",uc" << i;
    for (Eigen::Index i = 1; i <= p; ++i) os << ",uuc" << i;
    os << '\n';
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        detail::write_row(os, trace.times[k], trace.states[k], trace.uc_values[k], trace.uuc_values[k]);
    }
}

inline void write_node_csv(std::ostream& os, const SimulationTrace& trace) {
    os << "n,t_n,err,bound\n";
    for (const auto& node : trace.node_errors) {
        os << node.n << ',' << format_double(node.t_n) << ',' << format_double(node.error) << ','
           << format_double(node.bound) << '\n';
    }
}

inline nlohmann::json summary_json(const SimulationTrace& trace, const TraceDiagnostics& diag, double runtime_seconds) {
    nlohmann::json j;
    j["final_error"] = trace.final_error;
    j["constraint_max"] = trace.constraint_max;
    j["violations"] = {{"bound", diag.bound_violations},
                       {"constraint", diag.constraint_violations},
                       {"final_error_ok", diag.final_error_ok},
                       {"notes", diag.notes}};
    j["runtime_seconds"] = runtime_seconds;
    j["diverged"] = trace.diverged;
    return j;
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    writer(out);
    if (!out) throw Error("failed writing '" + path + "'");
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace resilient::io
