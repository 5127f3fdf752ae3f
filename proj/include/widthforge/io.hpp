#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "errors.hpp"
#include "functionals.hpp"
#include "harmonics.hpp"
#include "optimizer.hpp"
#include "width_floor.hpp"

namespace widthforge {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// ---- coefficient files ----------------------------------------------------

/// {"lmax": L, "entries": [[l, m, value], ...]}. Every slot is written,
/// zeros included, so equal bodies give equal files.
inline json coeffs_to_json(const OddHarmonicCoeffs& c)
{
    json entries = json::array();
    for (int l = c.include_degree_one() ? 1 : 3; l <= c.lmax(); l += 2)
        for (int m = -l; m <= l; ++m) entries.push_back(json::array({l, m, c.get(l, m)}));
    return json{{"lmax", c.lmax()}, {"entries", entries}};
}

inline OddHarmonicCoeffs coeffs_from_json(const json& j)
{
    if (!j.is_object()) throw ValidationError("coefficients: expected a JSON object");
    if (!j.contains("lmax") || !j["lmax"].is_number_integer()) throw ValidationError("coefficients: missing integer \"lmax\"");
    if (!j.contains("entries") || !j["entries"].is_array()) throw ValidationError("coefficients: missing array \"entries\"");
    for (const auto& [key, _] : j.items())
        if (key != "lmax" && key != "entries" && key != "manifest" && key != "reference")
            throw ValidationError("coefficients: unknown key \"" + key + "\"");
    const int lmax = j["lmax"].get<int>();
    if (lmax < 1 || lmax % 2 == 0) throw ValidationError("coefficients: lmax must be odd and >= 1");

    bool degree_one = false;
    for (const auto& e : j["entries"]) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() || !e[2].is_number())
            throw ValidationError("coefficients: each entry must be [l, m, value]");
        const int l = e[0].get<int>();
        if (l % 2 == 0) throw ValidationError("coefficients: even degree l=" + std::to_string(l) + " (h must be odd)");
        if (l == 1 && e[2].get<double>() != 0.0) degree_one = true;
    }
    OddHarmonicCoeffs c(lmax, degree_one);
    std::set<std::pair<int, int>> seen;
    for (const auto& e : j["entries"]) {
        const int l = e[0].get<int>(), m = e[1].get<int>();
        const double v = e[2].get<double>();
        if (l < 1 || l > lmax || std::abs(m) > l)
            throw ValidationError("coefficients: entry (" + std::to_string(l) + ", " + std::to_string(m) + ") out of range");
        if (!std::isfinite(v)) throw ValidationError("coefficients: non-finite value");
        if (!seen.insert({l, m}).second)
            throw ValidationError("coefficients: duplicate entry (" + std::to_string(l) + ", " + std::to_string(m) + ")");
        if (l == 1 && v == 0.0) continue;
        c.set(l, m, v);
    }
    return c;
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(what + ": malformed JSON (" + e.what() + ")");
    }
}

// ---- serialization ----------------------------------------------------------

/// Doubles are written in the shortest form that reads back to the same value
/// (at most 17 significant digits); non-finite values become null.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream ss;
    for (unsigned int k = 0; k < len; ++k) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
    return ss.str();
}

inline json to_json(const FunctionalReport& r)
{
    return json{{"w", r.w},
                {"energy", r.energy},
                {"energy_quadrature", r.energy_quadrature},
                {"volume", r.volume},
                {"area", r.area},
                {"ratio", r.ratio},
                {"volume_direct", r.volume_direct},
                {"area_direct", r.area_direct},
                {"blaschke_residual", r.blaschke_residual},
                {"lemmaH_residual", r.lemmaH_residual},
                {"min_density", r.min_density}};
}

inline json to_json(const WidthFloorResult& r)
{
    json steps = json::array();
    for (const auto& s : r.refinement_record)
        steps.push_back({{"level", s.level}, {"w0", s.w0}, {"theta", s.theta}, {"phi", s.phi}, {"evals", s.evals}});
    return json{{"w0", r.w0},
                {"grid_max", r.grid_max},
                {"argmax_nodes", r.argmax_nodes},
                {"argmax_theta", r.argmax_theta},
                {"argmax_phi", r.argmax_phi},
                {"argmax_density", r.argmax_density},
                {"refinement_record", steps}};
}

inline json to_json(const VerificationReport& r)
{
    return json{{"antipodal_vanishing_score", r.antipodal_vanishing_score},
                {"k2_deviation", r.k2_deviation},
                {"k2_is_smaller", r.k2_is_smaller},
                {"smooth_fraction", r.smooth_fraction},
                {"delta_smooth", r.delta_smooth},
                {"tolerance", r.tolerance},
                {"w", r.w},
                {"pass", r.pass}};
}

inline json to_json(const CandidateBody& c)
{
    return json{{"coefficients", coeffs_to_json(c.coeffs)},
                {"w0", c.w0},
                {"ratio", c.ratio},
                {"objective", c.objective},
                {"verification", to_json(c.verification)},
                {"restart", c.restart},
                {"evaluations", c.evaluations}};
}

inline json to_json(const RestartRecord& r)
{
    return json{{"restart", r.restart},
                {"start_objective", r.start_objective},
                {"best_objective", r.best_objective},
                {"evaluations", r.evaluations},
                {"rounds", r.rounds},
                {"trace", r.trace}};
}

inline json to_json(const OptimizerConfig& c)
{
    json j{{"lmax", c.lmax},
           {"grid_theta", c.n_theta},
           {"grid_phi", c.n_phi},
           {"seed", c.seed},
           {"restarts", c.restarts},
           {"max_iters", c.max_iters},
           {"objective_tolerance", c.objective_tolerance},
           {"initial_step", c.initial_step},
           {"x_tolerance", c.x_tolerance},
           {"soft_max_temperature", c.soft_max_temperature},
           {"normalization", c.normalization},
           {"axisymmetric", c.axisymmetric},
           {"continuation", c.continuation},
           {"continuation_noise", c.continuation_noise},
           {"refine_levels", c.refine_levels},
           {"delta_smooth", c.delta_smooth},
           {"verify_tolerance", c.verify_tolerance}};
    j["initial"] = c.initial ? coeffs_to_json(*c.initial) : json(nullptr);
    return j;
}

/// Reads an optimizer config; absent keys keep their defaults, unknown keys
/// and wrong types are rejected.
inline OptimizerConfig optimizer_config_from_json(const json& j)
{
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    OptimizerConfig c;
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        using T = std::decay_t<decltype(field)>;
        const json& v = j[key];
        bool ok = false;
        if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
        else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) ok = v.is_number_unsigned();
        else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
        else ok = v.is_number();
        if (!ok) throw ValidationError(std::string("config: wrong type for \"") + key + "\"");
        field = v.get<T>();
    };
    static const std::set<std::string> known{"lmax", "grid_theta", "grid_phi", "seed", "restarts", "max_iters",
                                             "objective_tolerance", "initial_step", "x_tolerance",
                                             "soft_max_temperature", "normalization", "axisymmetric", "continuation",
                                             "continuation_noise", "refine_levels", "delta_smooth",
                                             "verify_tolerance", "initial"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ValidationError("config: unknown key \"" + key + "\"");
    get("lmax", c.lmax);
    get("grid_theta", c.n_theta);
    get("grid_phi", c.n_phi);
    get("seed", c.seed);
    get("restarts", c.restarts);
    get("max_iters", c.max_iters);
    get("objective_tolerance", c.objective_tolerance);
    get("initial_step", c.initial_step);
    get("x_tolerance", c.x_tolerance);
    get("soft_max_temperature", c.soft_max_temperature);
    get("normalization", c.normalization);
    get("axisymmetric", c.axisymmetric);
    get("continuation", c.continuation);
    get("continuation_noise", c.continuation_noise);
    get("refine_levels", c.refine_levels);
    get("delta_smooth", c.delta_smooth);
    get("verify_tolerance", c.verify_tolerance);
    if (j.contains("initial") && !j["initial"].is_null()) c.initial = coeffs_from_json(j["initial"]);
    c.validate();
    return c;
}

// ---- run manifest -----------------------------------------------------------

struct FileDigest
{
    std::string path;
    std::string sha256;
};

struct RunManifest
{
    std::string command;
    json config = json::object();
    std::vector<std::uint64_t> seeds;
    int grid_theta = 0;
    int grid_phi = 0;
    std::string version = kVersion;
    double wall_clock_seconds = 0.0;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;

    void add_input(const std::string& path, const std::string& bytes) { inputs.push_back({path, sha256_hex(bytes)}); }
    void add_output(const std::string& path, const std::string& bytes) { outputs.push_back({path, sha256_hex(bytes)}); }
};

/// With timing off the manifest is a pure function of the run's inputs.
inline json to_json(const RunManifest& m, bool timing = true)
{
    auto files = [](const std::vector<FileDigest>& v) {
        json a = json::array();
        for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
        return a;
    };
    json j{{"command", m.command},
           {"config", m.config},
           {"seeds", m.seeds},
           {"grid", {{"n_theta", m.grid_theta}, {"n_phi", m.grid_phi}}},
           {"version", m.version},
           {"inputs", files(m.inputs)},
           {"outputs", files(m.outputs)}};
    if (timing) j["wall_clock_seconds"] = m.wall_clock_seconds;
    return j;
}

/// Attaches the manifest and a digest of the document body (everything but
/// the manifest), so the body can be checked after the fact.
inline json with_manifest(json body, const RunManifest& m, bool timing = true)
{
    const std::string payload = sha256_hex(body.dump());
    body["manifest"] = to_json(m, timing);
    body["manifest"]["payload_sha256"] = payload;
    return body;
}

class Stopwatch
{
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace widthforge
