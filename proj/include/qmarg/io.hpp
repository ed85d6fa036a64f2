#pragma once

#include <chrono>
#include <cstdint>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "compare.hpp"
#include "errors.hpp"
#include "lie_data.hpp"
#include "multiplicity.hpp"
#include "sampler.hpp"

namespace qmarg {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

//! Shortest round-trip decimal form; the same double always prints the same way.
inline std::string fmt(double v) {
    if (v == 0) return "0";
    char buf[32];
    for (int p = 6; p <= 17; ++p) {
        std::snprintf(buf, sizeof buf, "%.*g", p, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

//! Parse "a,b,c" into numbers.
inline Vec parse_vector(std::string const& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(item, &pos);
        } catch (std::exception const&) {
            throw ValidationError("not a number: '" + item + "'");
        }
        while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
        if (pos != item.size()) throw ValidationError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("empty list");
    return Eigen::Map<Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

//! A spectrum from a JSON file: either a bare array or {"lambda": [...]}.
inline Vec read_lambda_file(std::string const& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (std::exception const& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (j.is_object() && j.contains("lambda")) j = j["lambda"];
    if (!j.is_array() || j.empty()) throw ValidationError(path + ": expected an array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ValidationError(path + ": expected an array of numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

inline json to_json(Vec const& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json to_json(IVec const& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json to_json(HistGrid const& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"bins", g.bins}}; }

inline json to_json(MultiplicityTable const& t, std::vector<int> const& factors) {
    json rows = json::array();
    for (auto const& [mu, m] : t.normalized(factors)) rows.push_back({{"mu", mu}, {"mult", m}, {"dim", weyl_dim(factors, mu)}});
    return {{"setting", t.setting}, {"lambda", t.lambda}, {"dim", t.dim_g}, {"entries", rows}};
}

inline json to_json(LineCandidate const& c) { return {{"a", c.a}, {"b", c.b}, {"offset", c.offset}, {"run", c.run}}; }

inline json to_json(Discrepancy const& d) {
    return {{"sup", d.sup}, {"l1", d.l1}, {"peak", d.peak}, {"sup_relative", d.sup_rel}};
}

//! Columns over the cells of a grid: bin-center coordinates first, then the named values.
inline std::string grid_csv(HistGrid const& g, std::vector<std::string> const& names,
                            std::vector<std::vector<double>> const& cols, std::string const& run_id) {
    if (names.size() != cols.size()) throw InternalError("grid_csv: names and columns differ");
    std::ostringstream os;
    os << "# run " << run_id << "\n";
    for (int a = 0; a < g.dim(); ++a) os << "f" << a << ",";
    for (std::size_t c = 0; c < names.size(); ++c) os << names[c] << (c + 1 < names.size() ? "," : "\n");
    for (long long i = 0; i < g.size(); ++i) {
        auto cell = g.unflatten(i);
        for (int a = 0; a < g.dim(); ++a) os << fmt(g.center(a, cell[a])) << ",";
        for (std::size_t c = 0; c < cols.size(); ++c) os << fmt(cols[c][i]) << (c + 1 < cols.size() ? "," : "\n");
    }
    return os.str();
}

//! JSON array of grid rows, the same content as grid_csv.
inline json grid_json(HistGrid const& g, std::vector<std::string> const& names,
                      std::vector<std::vector<double>> const& cols) {
    json rows = json::array();
    for (long long i = 0; i < g.size(); ++i) {
        auto cell = g.unflatten(i);
        json r = json::object();
        std::vector<double> f;
        for (int a = 0; a < g.dim(); ++a) f.push_back(g.center(a, cell[a]));
        r["f"] = f;
        for (std::size_t c = 0; c < cols.size(); ++c) r[names[c]] = cols[c][i];
        rows.push_back(r);
    }
    return rows;
}

//! 64-bit FNV-1a, hex.
inline std::string fnv1a_hex(std::string const& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

/*!
 * Provenance for one CLI invocation. The id is a hash of the command and
 * its resolved parameters, so identical runs share it; timestamps live
 * only here, never in the payloads.
 */
struct RunRecord {
    std::string id;
    std::string command;
    std::string setting;
    std::vector<double> lambda;
    std::uint64_t seed = 0;
    std::string seed_source = "default";
    json parameters = json::object();
    std::vector<std::string> artifacts;
    std::string started;
    double wall_seconds = 0;
    int exit_code = 0;
    std::string error;

    void finalize_id() {
        json key = {{"command", command}, {"setting", setting}, {"lambda", lambda}, {"seed", seed}, {"parameters", parameters}};
        id = fnv1a_hex(key.dump());
    }

    json to_json() const {
        return {{"id", id},
                {"command", command},
                {"setting", setting},
                {"lambda", lambda},
                {"seed", seed},
                {"seed_source", seed_source},
                {"parameters", parameters},
                {"artifacts", artifacts},
                {"tool_version", kToolVersion},
                {"started", started},
                {"wall_seconds", wall_seconds},
                {"exit_code", exit_code},
                {"error", error}};
    }
};

inline std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline void write_file(std::filesystem::path const& p, std::string const& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << content;
}

}  // namespace qmarg
