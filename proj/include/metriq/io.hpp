// Serialization and artifact plumbing: JSON forms for operators, observables,
// configs, and quadratures; CSV writers for tabular grids; and the run
// manifest that makes every output reproducible (command + resolved-config
// hash + seed; deliberately no timestamps, so reruns are byte-identical).
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/coherent.hpp"
#include "metriq/config.hpp"
#include "metriq/errors.hpp"
#include "metriq/fock.hpp"
#include "metriq/observable.hpp"

namespace metriq {

using Json = nlohmann::json;

inline Json complex_to_json(const Complex& z) {
    return Json{{"re", z.real()}, {"im", z.imag()}};
}

inline Complex complex_from_json(const Json& j) {
    return Complex(j.at("re").get<double>(), j.at("im").get<double>());
}

// Operators as {dim, label, entries} with entries row-major [re, im] pairs.
inline Json operator_to_json(const FockOperator& op) {
    Json entries = Json::array();
    for (int r = 0; r < op.dim; ++r)
        for (int c = 0; c < op.dim; ++c)
            entries.push_back(Json::array({op.entries(r, c).real(), op.entries(r, c).imag()}));
    return Json{{"dim", op.dim}, {"label", op.label}, {"entries", entries}};
}

inline FockOperator operator_from_json(const Json& j) {
    FockOperator op;
    op.dim = j.at("dim").get<int>();
    op.label = j.value("label", "");
    const auto& entries = j.at("entries");
    if (op.dim < 1 || static_cast<int>(entries.size()) != op.dim * op.dim)
        throw InvalidParameter("operator JSON: entries size does not match dim^2");
    op.entries = CMatrix::Zero(op.dim, op.dim);
    int k = 0;
    for (int r = 0; r < op.dim; ++r)
        for (int c = 0; c < op.dim; ++c, ++k)
            op.entries(r, c) =
                Complex(entries[k].at(0).get<double>(), entries[k].at(1).get<double>());
    return op;
}

// Observables as {"chart": id, "terms": [[coeff, i, j], ...]}.
inline ClassicalObservable observable_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("terms"))
        throw InvalidParameter("observable JSON must be an object with a 'terms' array");
    Poly2 terms;
    for (const auto& t : j.at("terms")) {
        if (!t.is_array() || t.size() != 3)
            throw InvalidParameter("observable term must be [coeff, i, j]");
        const double c = t.at(0).get<double>();
        const int i = t.at(1).get<int>(), jj = t.at(2).get<int>();
        if (i < 0 || jj < 0)
            throw InvalidParameter("observable powers must be nonnegative integers");
        terms.push_back({c, i, jj});
    }
    return make_polynomial_observable(terms, j.value("chart", std::string("cartesian")));
}

inline Json observable_to_json(const ClassicalObservable& h) {
    if (!h.is_polynomial())
        throw InvalidParameter("only polynomial observables have a JSON form");
    Json terms = Json::array();
    for (const auto& t : h.terms) terms.push_back(Json::array({t.coeff, t.i, t.j}));
    return Json{{"chart", h.chart_id}, {"terms", terms}};
}

inline Json config_to_json(const GlobalConfig& cfg, const FiducialSpec& fid) {
    return Json{{"hbar", cfg.hbar},
                {"fock_dim", cfg.fock_dim},
                {"tail_fraction", cfg.tail_fraction},
                {"tol_linalg", cfg.tol_linalg},
                {"omega", fid.omega}};
}

inline void config_from_json(const Json& j, GlobalConfig& cfg, FiducialSpec& fid) {
    cfg.hbar = j.value("hbar", cfg.hbar);
    cfg.fock_dim = j.value("fock_dim", cfg.fock_dim);
    cfg.tail_fraction = j.value("tail_fraction", cfg.tail_fraction);
    cfg.tol_linalg = j.value("tol_linalg", cfg.tol_linalg);
    fid.omega = j.value("omega", fid.omega);
    cfg.validate();
    fid.validate();
}

inline Json quadrature_to_json(const PhaseSpaceQuadrature& quad) {
    return Json{{"scheme", quad.scheme},
                {"radius_sigmas", quad.radius_sigmas()},
                {"nodes_radial", quad.nodes_radial},
                {"nodes_angular", quad.nodes_angular}};
}

inline PhaseSpaceQuadrature quadrature_from_json(const Json& j, const GlobalConfig& cfg,
                                                 const FiducialSpec& fid) {
    if (j.value("scheme", std::string("disk-gl")) != "disk-gl")
        throw InvalidParameter("unknown quadrature scheme");
    return default_quadrature(cfg, fid, j.value("radius_sigmas", 10.0),
                              j.value("nodes_radial", 120), j.value("nodes_angular", 120));
}

// FNV-1a 64-bit over the canonical (sorted-key) dump of the resolved config.
inline std::string config_hash(const Json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string metriq_versions() {
    return "metriq 1.0.0; eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." +
           std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION) +
           "; nlohmann-json " + std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
           std::to_string(NLOHMANN_JSON_VERSION_PATCH);
}

struct RunManifest {
    std::string command;
    std::string config_digest; // config_hash() of the resolved config
    std::uint64_t seed = 0;
    std::string versions = metriq_versions();
    std::vector<std::string> outputs;
};

inline Json manifest_to_json(const RunManifest& m) {
    return Json{{"command", m.command},
                {"config_hash", m.config_digest},
                {"seed", m.seed},
                {"versions", m.versions},
                {"outputs", m.outputs}};
}

// Fixed "%.17g" formatting: round-trip exact and byte-stable across runs.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidParameter("cannot open output file: " + path);
    out << content;
    if (!out) throw InvalidParameter("failed writing output file: " + path);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i)
        s += (i ? "," : "") + header[i];
    s += "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw InvalidParameter("write_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i)
            s += (i ? "," : "") + format_double(row[i]);
        s += "\n";
    }
    write_text_file(path, s);
}

} // namespace metriq
