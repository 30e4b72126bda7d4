// Command-line front end: Monte Carlo coverage studies, tensor-field alpha
// maps, and one-shot tensor computations (distances, means, anisotropy,
// interpolation).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdpower/spdpower.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output; // empty = stdout
    std::string format = "csv";
};

void emit(const GlobalOpts& opts, const std::string& text) {
    if (opts.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.output);
    if (!out) throw spdpower::Error("cannot open output file '" + opts.output + "'");
    out << text;
}

std::vector<double> parse_number_list(const std::string& text, std::size_t expect,
                                      const std::string& what) {
    std::vector<double> values;
    for (const std::string& f : spdpower::split_csv(text)) {
        const auto v = spdpower::parse_double(f);
        if (!v) throw std::invalid_argument(what + ": cannot parse number '" + f + "'");
        values.push_back(*v);
    }
    if (expect != 0 && values.size() != expect)
        throw std::invalid_argument(what + ": expected " + std::to_string(expect) +
                                    " values, got " + std::to_string(values.size()));
    return values;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
    int n_v = 0;
    int n_s = 0;
    int reps = 1000;
    double alpha_true = 0.3;
    double sigma2 = 0.02;
    std::string mu = "2,0,0,1,0,1";
    double grid_lo = -0.1;
    double grid_hi = 0.7;
    double grid_step = 0.02;
    double ci_drop = spdpower::kDefaultCiDrop;
};

int run_simulate(const GlobalOpts& global, const SimulateOpts& opts) {
    spdpower::SimDesign design;
    const std::vector<double> mu = parse_number_list(opts.mu, 0, "--mu");
    if (mu.size() == 3)
        design.m = 2;
    else if (mu.size() == 6)
        design.m = 3;
    else
        throw std::invalid_argument("--mu must have 3 (2x2) or 6 (3x3) vech entries");
    design.mu = mu;
    design.sigma2 = opts.sigma2;
    design.alpha_true = opts.alpha_true;
    design.n_v = opts.n_v;
    design.n_s = opts.n_s;
    design.grid = spdpower::AlphaGrid{opts.grid_lo, opts.grid_hi, opts.grid_step};
    design.ci_drop = opts.ci_drop;
    design.replications = opts.reps;
    design.seed = global.seed;
    design.threads = global.threads;
    design.validate();

    const spdpower::CoverageReport report = spdpower::run_coverage(design);
    if (global.format == "json")
        emit(global, spdpower::coverage_json(report) + "\n");
    else
        emit(global,
             spdpower::coverage_csv_header() + "\n" + spdpower::coverage_csv_row(report) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOpts {
    std::string input;
    std::string input_format = "auto";
    double grid_lo = -0.1;
    double grid_hi = 0.7;
    double grid_step = 0.02;
    double ci_drop = spdpower::kDefaultCiDrop;
    double spacing = 2.0;
    double radius = 0.7;
    int n_v_min = 15;
    std::string normalize = "on";
    int smooth_bandwidth = 2;
    std::string grid_offset = "0,0,0";
    std::string out_map = "alpha_map.csv";
    std::string out_profile = "alpha_profile.csv";
};

int run_fit(const GlobalOpts& global, const FitOpts& opts) {
    spdpower::FieldFormat format = spdpower::FieldFormat::Auto;
    if (opts.input_format == "csv")
        format = spdpower::FieldFormat::Csv;
    else if (opts.input_format == "jsonl")
        format = spdpower::FieldFormat::JsonLines;
    else if (opts.input_format != "auto")
        throw std::invalid_argument("--input-format must be auto, csv or jsonl");

    spdpower::TensorField field = spdpower::load_field(opts.input, format);
    if (opts.normalize == "on")
        field = spdpower::normalize_subjects(field);
    else if (opts.normalize != "off")
        throw std::invalid_argument("--normalize must be on or off");

    const std::vector<double> off = parse_number_list(opts.grid_offset, 3, "--grid-offset");
    const spdpower::AlphaGrid grid{opts.grid_lo, opts.grid_hi, opts.grid_step};
    const std::vector<spdpower::AlphaMapEntry> entries = spdpower::estimate_alpha_map(
        field, grid, opts.spacing, opts.radius, opts.n_v_min, opts.ci_drop, global.threads,
        {off[0], off[1], off[2]});
    const spdpower::SmoothedProfile profile =
        spdpower::smooth_alpha_profile(entries, opts.smooth_bandwidth);

    // render everything before touching the filesystem, so failures leave no
    // partial output behind
    std::ostringstream map_csv;
    spdpower::write_alpha_map_csv(map_csv, entries);
    std::ostringstream profile_csv;
    spdpower::write_profile_csv(profile_csv, profile);

    std::size_t ok = 0;
    double a_min = 0.0, a_max = 0.0;
    for (const spdpower::AlphaMapEntry& e : entries) {
        if (!e.fit) continue;
        const double a = e.fit->alpha_hat;
        if (ok == 0) {
            a_min = a_max = a;
        } else {
            a_min = std::min(a_min, a);
            a_max = std::max(a_max, a);
        }
        ++ok;
    }

    std::ofstream map_out(opts.out_map);
    if (!map_out) throw spdpower::Error("cannot open output file '" + opts.out_map + "'");
    map_out << map_csv.str();
    std::ofstream profile_out(opts.out_profile);
    if (!profile_out)
        throw spdpower::Error("cannot open output file '" + opts.out_profile + "'");
    profile_out << profile_csv.str();

    if (global.format == "json") {
        ordered_json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["neighborhoods"] = entries.size();
        doc["fitted"] = ok;
        if (ok > 0) {
            doc["alpha_hat_min"] = a_min;
            doc["alpha_hat_max"] = a_max;
        }
        doc["smoother"] = "running_mean";
        doc["smooth_bandwidth"] = opts.smooth_bandwidth;
        doc["alpha_map"] = opts.out_map;
        doc["smoothed_profile"] = opts.out_profile;
        emit(global, doc.dump() + "\n");
    } else {
        std::ostringstream summary;
        summary << "neighborhoods: " << entries.size() << " (fitted: " << ok << ")";
        if (ok > 0)
            summary << ", alpha_hat in [" << spdpower::format_double(a_min, 12) << ", "
                    << spdpower::format_double(a_max, 12) << "]";
        summary << "\nalpha map: " << opts.out_map << "\nsmoothed profile: " << opts.out_profile
                << "\n";
        emit(global, summary.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

struct ComputeOpts {
    double alpha = 1.0;
    double t = 0.5;
    std::string metric = "euclidean-power";
    std::string file;
    std::vector<std::string> tensors;
};

std::vector<spdpower::SymMatrix> compute_inputs(const ComputeOpts& opts) {
    std::vector<spdpower::SymMatrix> tensors;
    for (const std::string& lit : opts.tensors)
        tensors.push_back(spdpower::parse_tensor_literal(lit));
    if (!opts.file.empty()) {
        const spdpower::TensorField field = spdpower::load_field(opts.file);
        for (const spdpower::VoxelRecord& rec : field.records) tensors.push_back(rec.tensor);
    }
    return tensors;
}

void emit_scalar(const GlobalOpts& global, const std::string& op, double value) {
    if (global.format == "json") {
        ordered_json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["op"] = op;
        doc["result"] = value;
        emit(global, doc.dump() + "\n");
    } else {
        emit(global, spdpower::format_double(value, 12) + "\n");
    }
}

void emit_tensor(const GlobalOpts& global, const std::string& op,
                 const spdpower::SymMatrix& s) {
    if (global.format == "json") {
        ordered_json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["op"] = op;
        doc["dim"] = s.dim();
        doc["vech"] = s.vech();
        emit(global, doc.dump() + "\n");
    } else {
        emit(global, spdpower::format_vech(s) + "\n");
    }
}

int run_compute_dist(const GlobalOpts& global, const ComputeOpts& opts) {
    const std::vector<spdpower::SymMatrix> in = compute_inputs(opts);
    if (in.size() != 2) throw std::invalid_argument("dist needs exactly two tensors");
    const spdpower::PowerParam p(opts.alpha);
    if (opts.metric == "euclidean-power") {
        emit_scalar(global, "dist", spdpower::dist_power(in[0], in[1], p));
    } else if (opts.metric == "log-euclidean") {
        emit_scalar(global, "dist", spdpower::dist_log_euclidean(in[0], in[1]));
    } else if (opts.metric == "procrustes-power") {
        const spdpower::ProcrustesResult res = spdpower::dist_procrustes_power(in[0], in[1], p);
        if (global.format == "json") {
            ordered_json doc;
            doc["schema_version"] = kSchemaVersion;
            doc["op"] = "dist";
            doc["result"] = res.distance;
            std::vector<std::vector<double>> rot(res.rotation.dim());
            for (int i = 0; i < res.rotation.dim(); ++i)
                for (int j = 0; j < res.rotation.dim(); ++j)
                    rot[i].push_back(res.rotation(i, j));
            doc["rotation"] = rot;
            emit(global, doc.dump() + "\n");
        } else {
            emit(global, spdpower::format_double(res.distance, 12) + "\n");
        }
    } else {
        throw std::invalid_argument("unknown metric '" + opts.metric + "'");
    }
    return 0;
}

int run_compute_mean(const GlobalOpts& global, const ComputeOpts& opts) {
    const std::vector<spdpower::SymMatrix> in = compute_inputs(opts);
    if (in.empty()) throw std::invalid_argument("mean needs at least one tensor");
    emit_tensor(global, "mean",
                spdpower::frechet_mean(in, spdpower::PowerParam(opts.alpha)).mean);
    return 0;
}

int run_compute_fa(const GlobalOpts& global, const ComputeOpts& opts) {
    const std::vector<spdpower::SymMatrix> in = compute_inputs(opts);
    if (in.size() != 1) throw std::invalid_argument("fa needs exactly one tensor");
    emit_scalar(global, "fa",
                spdpower::fractional_anisotropy(in[0], spdpower::PowerParam(opts.alpha)));
    return 0;
}

int run_compute_interp(const GlobalOpts& global, const ComputeOpts& opts) {
    const std::vector<spdpower::SymMatrix> in = compute_inputs(opts);
    if (in.size() != 2) throw std::invalid_argument("interp needs exactly two tensors");
    emit_tensor(global, "interp",
                spdpower::interpolate(in[0], in[1], opts.t, spdpower::PowerParam(opts.alpha)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-Euclidean metrics for symmetric positive semi-definite matrices"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts global;
    app.add_option("--seed", global.seed, "RNG seed");
    app.add_option("--threads", global.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--output", global.output, "write the result here instead of stdout");
    app.add_option("--format", global.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));

    SimulateOpts sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Monte Carlo coverage of the Wilks interval for alpha");
    simulate->add_option("--n-v", sim.n_v, "voxels")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--n-s", sim.n_s, "samples per voxel")
        ->required()
        ->check(CLI::PositiveNumber);
    simulate->add_option("--reps", sim.reps, "Monte Carlo replications")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--alpha-true", sim.alpha_true, "true power parameter");
    simulate->add_option("--sigma2", sim.sigma2, "noise variance")->check(CLI::PositiveNumber);
    simulate->add_option("--mu", sim.mu, "vech of the true mean matrix (comma separated)");
    simulate->add_option("--grid-lo", sim.grid_lo, "alpha grid start");
    simulate->add_option("--grid-hi", sim.grid_hi, "alpha grid end");
    simulate->add_option("--grid-step", sim.grid_step, "alpha grid step")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--ci-drop", sim.ci_drop,
                         "log-likelihood drop defining the interval (2 or 1.9207)")
        ->check(CLI::PositiveNumber);

    FitOpts fit;
    CLI::App* fit_cmd =
        app.add_subcommand("fit", "neighborhood alpha map of a tensor field");
    fit_cmd->add_option("input", fit.input, "tensor field file (CSV or JSON-lines)")
        ->required();
    fit_cmd->add_option("--input-format", fit.input_format, "auto, csv or jsonl")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    fit_cmd->add_option("--grid-lo", fit.grid_lo, "alpha grid start");
    fit_cmd->add_option("--grid-hi", fit.grid_hi, "alpha grid end");
    fit_cmd->add_option("--grid-step", fit.grid_step, "alpha grid step")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--ci-drop", fit.ci_drop, "log-likelihood drop for the interval")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--spacing", fit.spacing, "grid spacing in mm")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--radius", fit.radius, "neighborhood ball radius in mm")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--n-v-min", fit.n_v_min, "minimum voxels per subject in a ball")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--normalize", fit.normalize, "per-subject normalization (on/off)")
        ->check(CLI::IsMember({"on", "off"}));
    fit_cmd->add_option("--smooth-bandwidth", fit.smooth_bandwidth,
                        "half-width of the running-mean smoother")
        ->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--grid-offset", fit.grid_offset, "grid anchor offset (x,y,z)");
    fit_cmd->add_option("--out-map", fit.out_map, "alpha-map CSV path");
    fit_cmd->add_option("--out-profile", fit.out_profile, "smoothed-profile CSV path");

    ComputeOpts comp;
    CLI::App* compute = app.add_subcommand("compute", "one-shot tensor computations");
    compute->require_subcommand(1);
    CLI::App* dist = compute->add_subcommand("dist", "distance between two tensors");
    CLI::App* mean = compute->add_subcommand("mean", "Frechet mean of tensors");
    CLI::App* fa = compute->add_subcommand("fa", "fractional anisotropy");
    CLI::App* interp = compute->add_subcommand("interp", "interpolate between two tensors");
    for (CLI::App* sub : {dist, mean, fa, interp}) {
        sub->add_option("--alpha", comp.alpha, "power parameter (0 = log-Euclidean)");
        sub->add_option("tensors", comp.tensors,
                        "tensor literals, e.g. diag(2,1,1), I, or vech values a,b,c,...");
    }
    dist->add_option("--metric", comp.metric,
                     "euclidean-power, log-euclidean or procrustes-power")
        ->check(CLI::IsMember({"euclidean-power", "log-euclidean", "procrustes-power"}));
    mean->add_option("--file", comp.file, "pool the tensors of this field file");
    interp->add_option("--t", comp.t, "interpolation position in [0,1]")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(global, sim);
        if (fit_cmd->parsed()) return run_fit(global, fit);
        if (compute->parsed()) {
            if (dist->parsed()) return run_compute_dist(global, comp);
            if (mean->parsed()) return run_compute_mean(global, comp);
            if (fa->parsed()) return run_compute_fa(global, comp);
            if (interp->parsed()) return run_compute_interp(global, comp);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const spdpower::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
