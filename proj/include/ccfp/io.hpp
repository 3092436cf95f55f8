#pragma once

// File formats: problem instances and solve results as JSON documents,
// small CSV emitters for tabular output, and a content digest that ties
// a result file to the exact instance it was produced from.
//
// The canonical byte form of a JSON document is nlohmann's compact dump
// (object keys lexicographically sorted); the digest is 64-bit FNV-1a
// over those bytes, rendered as "fnv1a:%016x".  Any semantic change to
// the instance changes the digest; whitespace and key order do not.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ccfp/linalg.hpp"
#include "ccfp/model.hpp"
#include "ccfp/version.hpp"

namespace ccfp {

using json = nlohmann::json;

// ---------------------------------------------------------------------
// Digests.

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string digest_string(std::string_view bytes) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

inline std::string instance_digest(const json& doc) { return digest_string(doc.dump()); }

// ---------------------------------------------------------------------
// Parse helpers: every failure names the offending key path.

namespace detail {

inline const json& require_field(const json& obj, const char* key,
                                 const std::string& path) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!obj.is_object() || !obj.contains(key))
        throw std::invalid_argument("instance file: missing field " + full);
    return obj.at(key);
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number())
        throw std::invalid_argument("instance file: " + path + " must be a number");
    return j.get<double>();
}

inline std::size_t as_count(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0)
        return static_cast<std::size_t>(j.get<long long>());
    throw std::invalid_argument("instance file: " + path +
                                " must be a nonnegative integer");
}

inline Vec as_vec(const json& j, const std::string& path, std::size_t expected) {
    if (!j.is_array())
        throw std::invalid_argument("instance file: " + path + " must be an array");
    if (j.size() != expected)
        throw std::invalid_argument("instance file: " + path + " must have " +
                                    std::to_string(expected) + " entries, got " +
                                    std::to_string(j.size()));
    Vec out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// Bound arrays use null for an absent (infinite) bound.
inline Vec as_bounds(const json& j, const std::string& path, std::size_t expected,
                     double infinity) {
    if (!j.is_array() || j.size() != expected)
        throw std::invalid_argument("instance file: " + path + " must be an array of " +
                                    std::to_string(expected) + " numbers or nulls");
    Vec out;
    out.reserve(expected);
    for (std::size_t i = 0; i < expected; ++i)
        out.push_back(j[i].is_null()
                          ? infinity
                          : as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline FunctionSpec as_function_spec(const json& j, const std::string& path,
                                     std::size_t n, std::size_t m) {
    FunctionSpec spec;
    const json& kind_field = require_field(j, "kind", path);
    if (!kind_field.is_string())
        throw std::invalid_argument("instance file: " + path + ".kind must be a string");
    const std::string kind = kind_field.get<std::string>();
    if (kind == "affine")
        spec.kind = SpecKind::affine;
    else if (kind == "exp-affine")
        spec.kind = SpecKind::exp_affine;
    else
        throw std::invalid_argument("instance file: " + path +
                                    ".kind must be \"affine\" or \"exp-affine\"");
    const json& rows = require_field(j, "W", path);
    if (!rows.is_array() || rows.size() != n)
        throw std::invalid_argument("instance file: " + path + ".W must have " +
                                    std::to_string(n) + " rows");
    spec.W = Mat(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec row = as_vec(rows[i], path + ".W[" + std::to_string(i) + "]", m);
        for (std::size_t c = 0; c < m; ++c) spec.W(i, c) = row[c];
    }
    spec.v = as_vec(require_field(j, "v", path), path + ".v", n);
    return spec;
}

inline json function_spec_to_json(const FunctionSpec& spec) {
    json rows = json::array();
    for (std::size_t i = 0; i < spec.W.rows; ++i) {
        json row = json::array();
        for (std::size_t c = 0; c < spec.W.cols; ++c) row.push_back(spec.W(i, c));
        rows.push_back(std::move(row));
    }
    return {{"kind", spec.kind == SpecKind::affine ? "affine" : "exp-affine"},
            {"W", std::move(rows)},
            {"v", spec.v}};
}

}  // namespace detail

// ---------------------------------------------------------------------
// Instances.

inline ProblemInstance parse_instance(const json& doc) {
    using detail::as_bounds;
    using detail::as_count;
    using detail::as_number;
    using detail::as_vec;
    using detail::require_field;

    if (!doc.is_object())
        throw std::invalid_argument("instance file: top level must be an object");
    const std::size_t version = as_count(require_field(doc, "schema_version", ""),
                                         "schema_version");
    if (version != 1)
        throw std::invalid_argument("instance file: unsupported schema_version " +
                                    std::to_string(version));

    ProblemInstance inst;
    inst.m = as_count(require_field(doc, "m", ""), "m");
    inst.n = as_count(require_field(doc, "n", ""), "n");
    if (inst.m == 0 || inst.n == 0)
        throw std::invalid_argument("instance file: m and n must be positive");

    inst.mu0 = as_vec(require_field(doc, "mu0", ""), "mu0", inst.n);
    inst.c0_spec = detail::as_function_spec(require_field(doc, "c0_spec", ""), "c0_spec",
                                            inst.n, inst.m);
    inst.mu1 = as_vec(require_field(doc, "mu1", ""), "mu1", inst.n);
    inst.l1 = as_number(require_field(doc, "l1", ""), "l1");

    const std::size_t dim = inst.n + 1;
    const Vec gamma_flat =
        as_vec(require_field(doc, "gamma_cov", ""), "gamma_cov", dim * dim);
    inst.gamma_cov = Mat(dim, dim);
    inst.gamma_cov.data = gamma_flat;

    const json& scenarios = require_field(doc, "scenarios", "");
    if (!scenarios.is_array() || scenarios.empty())
        throw std::invalid_argument("instance file: scenarios must be a nonempty array");
    for (std::size_t j = 0; j < scenarios.size(); ++j) {
        const std::string path = "scenarios[" + std::to_string(j) + "]";
        Scenario sc;
        sc.p = as_number(require_field(scenarios[j], "p", path), path + ".p");
        sc.a2 = as_vec(require_field(scenarios[j], "a2", path), path + ".a2", inst.n);
        sc.b2 = as_number(require_field(scenarios[j], "b2", path), path + ".b2");
        sc.r = as_number(require_field(scenarios[j], "r", path), path + ".r");
        inst.scenarios.push_back(std::move(sc));
    }

    inst.epsilon = as_number(require_field(doc, "epsilon", ""), "epsilon");
    inst.c_spec = detail::as_function_spec(require_field(doc, "c_spec", ""), "c_spec",
                                           inst.n, inst.m);

    const json& fs = require_field(doc, "feasible_set", "");
    inst.feasible_set.lower =
        as_bounds(require_field(fs, "lower", "feasible_set"), "feasible_set.lower",
                  inst.m, -inf);
    inst.feasible_set.upper =
        as_bounds(require_field(fs, "upper", "feasible_set"), "feasible_set.upper",
                  inst.m, inf);
    const json& ranges = require_field(fs, "ranges", "feasible_set");
    if (!ranges.is_array())
        throw std::invalid_argument("instance file: feasible_set.ranges must be an array");
    for (std::size_t r = 0; r < ranges.size(); ++r) {
        const std::string path = "feasible_set.ranges[" + std::to_string(r) + "]";
        LinearRange range;
        range.a = as_vec(require_field(ranges[r], "a", path), path + ".a", inst.m);
        const json& lo = require_field(ranges[r], "lo", path);
        const json& hi = require_field(ranges[r], "hi", path);
        range.lo = lo.is_null() ? -inf : as_number(lo, path + ".lo");
        range.hi = hi.is_null() ? inf : as_number(hi, path + ".hi");
        inst.feasible_set.ranges.push_back(std::move(range));
    }
    return inst;
}

inline json instance_to_json(const ProblemInstance& inst) {
    json scenarios = json::array();
    for (const Scenario& sc : inst.scenarios)
        scenarios.push_back({{"p", sc.p}, {"a2", sc.a2}, {"b2", sc.b2}, {"r", sc.r}});

    auto bounds = [](const Vec& v, double infinity) {
        json arr = json::array();
        for (double b : v) {
            if (b == infinity)
                arr.push_back(nullptr);
            else
                arr.push_back(b);
        }
        return arr;
    };
    json ranges = json::array();
    for (const LinearRange& range : inst.feasible_set.ranges) {
        json r = {{"a", range.a}};
        if (range.lo == -inf)
            r["lo"] = nullptr;
        else
            r["lo"] = range.lo;
        if (range.hi == inf)
            r["hi"] = nullptr;
        else
            r["hi"] = range.hi;
        ranges.push_back(std::move(r));
    }

    return {{"schema_version", 1},
            {"m", inst.m},
            {"n", inst.n},
            {"mu0", inst.mu0},
            {"c0_spec", detail::function_spec_to_json(inst.c0_spec)},
            {"mu1", inst.mu1},
            {"l1", inst.l1},
            {"gamma_cov", inst.gamma_cov.data},
            {"scenarios", std::move(scenarios)},
            {"epsilon", inst.epsilon},
            {"c_spec", detail::function_spec_to_json(inst.c_spec)},
            {"feasible_set",
             {{"lower", bounds(inst.feasible_set.lower, -inf)},
              {"upper", bounds(inst.feasible_set.upper, inf)},
              {"ranges", std::move(ranges)}}}};
}

inline json load_json(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open file: " + path);
    try {
        return json::parse(file);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline ProblemInstance load_instance(const std::string& path) {
    return parse_instance(load_json(path));
}

// ---------------------------------------------------------------------
// Result files.

struct ResultFile {
    std::string instance_digest;
    std::string method;  // "exact", "secant", or "tangent"
    int K = 0;
    double z_max = 0.0;
    std::string sense = "max";
    std::string status;
    double objective = 0.0;
    Vec x, z, s;
    double kkt_stationarity = 0.0;
    double kkt_complementarity = 0.0;
    double violation = 0.0;
    double wall_ms = 0.0;

    double p_exact = 0.0;
    Vec exact_per_scenario;
    std::optional<double> p_mc;
    std::optional<double> mc_halfwidth;
    std::optional<std::uint64_t> mc_samples;
    std::optional<std::uint64_t> mc_seed;

    std::string tool_name{ccfp::tool_name};
    std::string tool_version{ccfp::tool_version};
};

inline json result_to_json(const ResultFile& r) {
    json validation = {{"p_exact", r.p_exact},
                       {"per_scenario", r.exact_per_scenario}};
    validation["p_mc"] = r.p_mc ? json(*r.p_mc) : json(nullptr);
    validation["mc_halfwidth"] = r.mc_halfwidth ? json(*r.mc_halfwidth) : json(nullptr);
    validation["samples"] = r.mc_samples ? json(*r.mc_samples) : json(nullptr);
    validation["seed"] = r.mc_seed ? json(*r.mc_seed) : json(nullptr);

    return {{"schema_version", 1},
            {"instance_digest", r.instance_digest},
            {"variant", {{"method", r.method}, {"K", r.K}, {"z_max", r.z_max}}},
            {"sense", r.sense},
            {"status", r.status},
            {"objective", r.objective},
            {"x", r.x},
            {"z", r.z},
            {"s", r.s},
            {"kkt",
             {{"stationarity", r.kkt_stationarity},
              {"complementarity", r.kkt_complementarity}}},
            {"violation", r.violation},
            {"wall_ms", r.wall_ms},
            {"validation", std::move(validation)},
            {"tool", {{"name", r.tool_name}, {"version", r.tool_version}}}};
}

inline ResultFile parse_result(const json& doc) {
    using detail::as_number;
    using detail::require_field;

    ResultFile r;
    r.instance_digest = require_field(doc, "instance_digest", "").get<std::string>();
    const json& variant = require_field(doc, "variant", "");
    r.method = require_field(variant, "method", "variant").get<std::string>();
    r.K = require_field(variant, "K", "variant").get<int>();
    r.z_max = as_number(require_field(variant, "z_max", "variant"), "variant.z_max");
    r.sense = require_field(doc, "sense", "").get<std::string>();
    r.status = require_field(doc, "status", "").get<std::string>();
    r.objective = as_number(require_field(doc, "objective", ""), "objective");
    r.x = require_field(doc, "x", "").get<Vec>();
    r.z = require_field(doc, "z", "").get<Vec>();
    r.s = require_field(doc, "s", "").get<Vec>();
    const json& kkt = require_field(doc, "kkt", "");
    r.kkt_stationarity =
        as_number(require_field(kkt, "stationarity", "kkt"), "kkt.stationarity");
    r.kkt_complementarity =
        as_number(require_field(kkt, "complementarity", "kkt"), "kkt.complementarity");
    r.violation = as_number(require_field(doc, "violation", ""), "violation");
    r.wall_ms = as_number(require_field(doc, "wall_ms", ""), "wall_ms");

    const json& validation = require_field(doc, "validation", "");
    r.p_exact =
        as_number(require_field(validation, "p_exact", "validation"), "validation.p_exact");
    r.exact_per_scenario =
        require_field(validation, "per_scenario", "validation").get<Vec>();
    const json& p_mc = require_field(validation, "p_mc", "validation");
    if (!p_mc.is_null()) r.p_mc = p_mc.get<double>();
    const json& halfwidth = require_field(validation, "mc_halfwidth", "validation");
    if (!halfwidth.is_null()) r.mc_halfwidth = halfwidth.get<double>();
    const json& samples = require_field(validation, "samples", "validation");
    if (!samples.is_null()) r.mc_samples = samples.get<std::uint64_t>();
    const json& seed = require_field(validation, "seed", "validation");
    if (!seed.is_null()) r.mc_seed = seed.get<std::uint64_t>();

    const json& tool = require_field(doc, "tool", "");
    r.tool_name = require_field(tool, "name", "tool").get<std::string>();
    r.tool_version = require_field(tool, "version", "tool").get<std::string>();
    return r;
}

inline void save_json(const std::string& path, const json& doc) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write file: " + path);
    file << doc.dump(2) << '\n';
}

inline ResultFile load_result(const std::string& path) {
    return parse_result(load_json(path));
}

// ---------------------------------------------------------------------
// CSV.

inline std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<Vec>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << '\n';
    for (const Vec& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << csv_number(row[i]);
        os << '\n';
    }
}

}  // namespace ccfp
