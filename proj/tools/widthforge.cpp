// widthforge command-line tool.
//
// Exit codes: 0 success, 1 usage error, 2 input validation error,
// 3 `verify` ran but an identity failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "widthforge/bodies.hpp"
#include "widthforge/functionals.hpp"
#include "widthforge/io.hpp"
#include "widthforge/mesh.hpp"
#include "widthforge/optimizer.hpp"
#include "widthforge/verify_suite.hpp"
#include "widthforge/width_floor.hpp"

namespace fs = std::filesystem;
using namespace widthforge;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIdentityFailed = 3;

struct CommonOptions
{
    int grid_theta = 0;
    int grid_phi = 0;
    std::optional<std::uint64_t> seed;
    std::optional<int> lmax;
    std::string out;
    std::string w = "floor";
    std::string config;
};

const CLI::Validator kWidthValue(
    [](std::string& s) -> std::string {
        if (s == "floor") return {};
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size() || !(v > 0.0)) return "must be a positive number or 'floor'";
        } catch (const std::exception&) {
            return "must be a positive number or 'floor'";
        }
        return {};
    },
    "VALUE|floor");

void add_grid(CLI::App* cmd, CommonOptions& o, int factor = 1)
{
    const std::string t = std::to_string(2 * factor), p = std::to_string(4 * factor);
    cmd->add_option("--grid-theta", o.grid_theta, "Gauss-Legendre rings (default " + t + "L+" + t + ")")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--grid-phi", o.grid_phi, "Longitudes, even (default " + p + "L+" + p + ")")->check(CLI::PositiveNumber);
}

struct Input
{
    std::string path;
    std::string bytes;
    OddHarmonicCoeffs coeffs;
};

/// Coefficient file, or any document holding one under "coefficients"
/// (candidate files written by `optimize`).
Input load_coeffs(const std::string& path)
{
    Input in{path, read_text_file(path), {}};
    json j = parse_json_text(in.bytes, path);
    if (j.is_object() && j.contains("coefficients")) j = j["coefficients"];
    in.coeffs = coeffs_from_json(j);
    return in;
}

SphereGrid resolve_grid(const CommonOptions& o, int lmax)
{
    if (o.grid_theta == 0 && o.grid_phi == 0) return default_grid(lmax);
    const SphereGrid d = default_grid(lmax);
    return SphereGrid(o.grid_theta ? o.grid_theta : d.n_theta(), o.grid_phi ? o.grid_phi : d.n_phi());
}

WidthFloorResult floor_of(const OddHarmonicCoeffs& c, const SphereGrid& grid, const SupportJet& jet)
{
    WidthFloorOptions opt;
    opt.refine_levels = 3;
    return w_floor(c, grid, jet, opt);
}

double resolve_w(const std::string& w, double w0) { return w == "floor" ? w0 : std::stod(w); }

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + path);
    os << text;
}

RunManifest manifest_for(const std::string& command, const SphereGrid& grid)
{
    RunManifest m;
    m.command = command;
    m.grid_theta = grid.n_theta();
    m.grid_phi = grid.n_phi();
    return m;
}

// ---- subcommands --------------------------------------------------------------

int cmd_eval(const CommonOptions& o, const std::string& file)
{
    const Stopwatch clock;
    const Input in = load_coeffs(file);
    const SphereGrid grid = resolve_grid(o, in.coeffs.lmax());
    const SupportJet jet = synth_jet(in.coeffs, grid);
    const WidthFloorResult fl = floor_of(in.coeffs, grid, jet);
    const double w = resolve_w(o.w, fl.w0);

    json body;
    body["coefficients"] = coeffs_to_json(in.coeffs);
    body["w"] = w;
    body["below_floor"] = w < fl.w0 * (1.0 - kExportFloorSlack);
    FunctionalReport fr = evaluate_functionals(in.coeffs, jet, w, grid);
    // the floor is attained between nodes; include the refined touching point
    const JetSample top = evaluate_jet(in.coeffs, fl.argmax_theta, fl.argmax_phi);
    fr.min_density = std::min(fr.min_density, area_density(alpha_of(top), beta_of(top), w));
    body["functionals"] = to_json(fr);
    body["width_floor"] = to_json(fl);
    body["verification"] = to_json(verify_necessary_conditions(jet, w, grid));

    RunManifest m = manifest_for("eval", grid);
    m.config = {{"coeffs", file}, {"w", o.w}};
    m.add_input(file, in.bytes);
    m.wall_clock_seconds = clock.seconds();
    emit(o.out, dump(with_manifest(body, m)));
    return 0;
}

int cmd_optimize(const CommonOptions& o, const std::string& trajectory_path)
{
    const Stopwatch clock;
    OptimizerConfig cfg;
    std::string config_bytes;
    if (!o.config.empty()) {
        config_bytes = read_text_file(o.config);
        cfg = optimizer_config_from_json(parse_json_text(config_bytes, o.config));
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.lmax) cfg.lmax = *o.lmax;
    if (o.grid_theta) cfg.n_theta = o.grid_theta;
    if (o.grid_phi) cfg.n_phi = o.grid_phi;
    if ((cfg.n_theta == 0) != (cfg.n_phi == 0)) {
        const SphereGrid d = optimizer_grid(cfg.lmax);
        if (cfg.n_theta == 0) cfg.n_theta = d.n_theta();
        if (cfg.n_phi == 0) cfg.n_phi = d.n_phi();
    }
    cfg.validate();

    const OptimizeResult res = optimize(cfg);
    const SphereGrid grid = cfg.grid();

    RunManifest m = manifest_for("optimize", grid);
    m.config = to_json(cfg);
    m.seeds = {cfg.seed};
    if (!o.config.empty()) m.add_input(o.config, config_bytes);

    json candidate = to_json(res.best);
    candidate["canonical_coefficients"] = coeffs_to_json(canonicalize(res.best.coeffs));
    candidate["baseline_objective"] = res.baseline_objective;
    candidate["baseline_ratio"] = res.baseline_ratio;
    // no timing here, so equal seeds give byte-identical candidate files
    const std::string candidate_text = dump(with_manifest(candidate, m, false));
    emit(o.out, candidate_text);

    std::string traj = trajectory_path;
    if (traj.empty() && !o.out.empty() && o.out != "-") {
        fs::path p(o.out);
        traj = (p.parent_path() / (p.stem().string() + ".trajectory.json")).string();
    }
    if (!traj.empty()) {
        json t;
        t["restarts"] = json::array();
        for (const auto& r : res.restarts) t["restarts"].push_back(to_json(r));
        t["best_restart"] = res.best.restart;
        t["verification"] = to_json(res.best.verification);
        if (!o.out.empty() && o.out != "-") m.add_output(o.out, candidate_text);
        m.wall_clock_seconds = clock.seconds();
        emit(traj, dump(with_manifest(t, m)));
    }
    return 0;
}

int cmd_flow(const CommonOptions& o, const std::string& file, const std::string& w_end_arg, int steps)
{
    const Stopwatch clock;
    const Input in = load_coeffs(file);
    const SphereGrid grid = resolve_grid(o, in.coeffs.lmax());
    const SupportJet jet = synth_jet(in.coeffs, grid);
    const double w0 = floor_of(in.coeffs, grid, jet).w0;
    const double w_start = resolve_w(o.w, w0), w_end = resolve_w(w_end_arg, w0);
    const auto flow = normal_flow(in.coeffs, w_start, w_end, steps, grid);

    json body;
    body["w0"] = w0;
    body["steps"] = json::array();
    for (const auto& r : flow) body["steps"].push_back(to_json(r));

    RunManifest m = manifest_for("flow", grid);
    m.config = {{"coeffs", file}, {"w_start", o.w}, {"w_end", w_end_arg}, {"steps", steps}};
    m.add_input(file, in.bytes);
    m.wall_clock_seconds = clock.seconds();
    emit(o.out, dump(with_manifest(body, m)));
    return 0;
}

int cmd_export(const CommonOptions& o, const std::string& file)
{
    const Stopwatch clock;
    if (o.out.empty() || o.out == "-") throw ValidationError("export: --out PATH.obj is required");
    const Input in = load_coeffs(file);
    const SphereGrid check = default_grid(in.coeffs.lmax());
    const double w0 = floor_of(in.coeffs, check, synth_jet(in.coeffs, check)).w0;
    const double w = resolve_w(o.w, w0);
    const int nt = o.grid_theta ? o.grid_theta : 64, np = o.grid_phi ? o.grid_phi : 128;
    const Mesh mesh = build_mesh(in.coeffs, w, nt, np);

    RunManifest m;
    m.command = "export";
    m.grid_theta = nt;
    m.grid_phi = np;
    m.config = {{"coeffs", file}, {"w", o.w}};
    m.add_input(file, in.bytes);

    std::ostringstream obj;
    write_obj(obj, mesh, {std::string("widthforge ") + kVersion + " mesh", "w " + json(w).dump(),
                          "manifest " + to_json(m, false).dump()});
    emit(o.out, obj.str());

    json body;
    body["mesh"] = o.out;
    body["w"] = w;
    body["w0"] = w0;
    body["vertices"] = mesh.vertices.size();
    body["triangles"] = mesh.triangles.size();
    body["mesh_volume"] = mesh_volume(mesh);
    body["volume"] = volume(in.coeffs, w);
    body["mesh_area"] = mesh_area(mesh);
    body["area"] = area(in.coeffs, w);
    body["width_deviation"] = mesh_width_deviation(mesh);
    m.add_output(o.out, obj.str());
    m.wall_clock_seconds = clock.seconds();
    std::cout << dump(with_manifest(body, m));
    return 0;
}

int cmd_reference(const CommonOptions& o, const std::string& name)
{
    const double w = o.w == "floor" ? 1.0 : std::stod(o.w);
    OddHarmonicCoeffs c;
    int lmax = 0;
    if (name == "ball") {
        lmax = o.lmax.value_or(3);
        c = ball(lmax);
    } else if (name == "rotated-reuleaux") {
        lmax = o.lmax.value_or(13);
        c = profile_to_coeffs(rotated_reuleaux(2.0 * w), lmax);
    } else {
        throw ValidationError("reference: unknown body '" + name + "' (ball, rotated-reuleaux)");
    }
    json body = coeffs_to_json(c);
    body["reference"] = {{"name", name}, {"w", w}};
    RunManifest m;
    m.command = "reference";
    m.config = {{"name", name}, {"lmax", lmax}, {"w", w}};
    if (name == "rotated-reuleaux") {
        const SphereGrid g = profile_projection_grid(lmax);
        m.grid_theta = g.n_theta();
        m.grid_phi = g.n_phi();
    }
    emit(o.out, dump(with_manifest(body, m, false)));
    return 0;
}

int cmd_verify(const CommonOptions& o, int samples, const std::string& corrupt)
{
    const Stopwatch clock;
    VerifySuiteOptions opt;
    opt.seed = o.seed.value_or(1);
    opt.samples = samples;
    opt.corruption = corrupt == "erratum-discriminant" ? Corruption::ErratumDiscriminant : Corruption::None;
    const VerifySuiteReport rep = run_verify_suite(opt);
    RunManifest m;
    m.command = "verify";
    m.config = {{"samples", samples}, {"corrupt", corrupt}};
    m.seeds = {opt.seed};
    m.wall_clock_seconds = clock.seconds();
    emit(o.out, dump(with_manifest(to_json(rep), m)));
    for (const auto& c : rep.checks)
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << " worst=" << c.worst << " threshold=" << c.threshold << '\n';
    return rep.all_pass() ? 0 : kExitIdentityFailed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"widthforge: constant-width bodies from odd support functions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOptions o;
    std::string file, name, w_end = "floor", trajectory, corrupt = "none";
    int steps = 10, samples = 20;

    auto* eval = app.add_subcommand("eval", "Functionals, width floor and verification for a coefficient file");
    eval->add_option("coeffs", file, "Coefficient JSON")->required();
    eval->add_option("--w", o.w, "Half-width w, or 'floor' for w0(h)")->check(kWidthValue);
    add_grid(eval, o);
    eval->add_option("--out", o.out, "Report path (default stdout)");

    auto* opt = app.add_subcommand("optimize", "Search for maximizers of E / w0^2");
    opt->add_option("--config", o.config, "Optimizer config JSON")->check(CLI::ExistingFile);
    opt->add_option("--seed", o.seed, "Seed (overrides the config)");
    opt->add_option("--lmax", o.lmax, "Largest odd degree (overrides the config)");
    add_grid(opt, o, 2);
    opt->add_option("--out", o.out, "Candidate path (default stdout)");
    opt->add_option("--trajectory", trajectory, "Trajectory log path (default <out>.trajectory.json)");

    auto* flow = app.add_subcommand("flow", "Normal flow: the parallel bodies from --w down to --w-end");
    flow->add_option("coeffs", file, "Coefficient JSON")->required();
    flow->add_option("--w", o.w, "Starting w")->check(kWidthValue)->required();
    flow->add_option("--w-end", w_end, "Final w, or 'floor'")->check(kWidthValue);
    flow->add_option("--steps", steps, "Number of w values, >= 2")->check(CLI::Range(2, 100000));
    add_grid(flow, o);
    flow->add_option("--out", o.out, "Report path (default stdout)");

    auto* exp = app.add_subcommand("export", "Write the boundary as an OBJ mesh");
    exp->add_option("coeffs", file, "Coefficient JSON")->required();
    exp->add_option("--w", o.w, "Half-width w, or 'floor'")->check(kWidthValue);
    exp->add_option("--grid-theta", o.grid_theta, "Rings between the poles (default 64)")->check(CLI::PositiveNumber);
    exp->add_option("--grid-phi", o.grid_phi, "Meridians, even (default 128)")->check(CLI::PositiveNumber);
    exp->add_option("--out", o.out, "OBJ path")->required();

    auto* ref = app.add_subcommand("reference", "Coefficients of a reference body");
    ref->add_option("name", name, "ball | rotated-reuleaux")->required()->check(CLI::IsMember({"ball", "rotated-reuleaux"}));
    ref->add_option("--lmax", o.lmax, "Largest odd degree (default 3 for ball, 13 otherwise)");
    ref->add_option("--w", o.w, "Half-width (default 1)")->check(kWidthValue);
    ref->add_option("--out", o.out, "Output path (default stdout)");

    auto* ver = app.add_subcommand("verify", "Run the identity suite on seeded random bodies");
    ver->add_option("--seed", o.seed, "Seed (default 1)");
    ver->add_option("--samples", samples, "Random bodies per identity")->check(CLI::Range(1, 100000));
    ver->add_option("--corrupt", corrupt, "Test hook: inject a known bug")
        ->check(CLI::IsMember({"none", "erratum-discriminant"}));
    ver->add_option("--out", o.out, "Report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*eval) return cmd_eval(o, file);
        if (*opt) return cmd_optimize(o, trajectory);
        if (*flow) return cmd_flow(o, file, w_end, steps);
        if (*exp) return cmd_export(o, file);
        if (*ref) return cmd_reference(o, name);
        if (*ver) return cmd_verify(o, samples, corrupt);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitUsage;
}
