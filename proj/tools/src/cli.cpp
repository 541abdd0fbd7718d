#include "cli.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "run_record.hpp"
#include "scr/circuit.hpp"
#include "scr/constants.hpp"
#include "scr/electrons.hpp"
#include "scr/errors.hpp"
#include "scr/io.hpp"
#include "scr/material.hpp"
#include "scr/resonance.hpp"
#include "scr/verify.hpp"
#include "scr/version.hpp"

namespace fs = std::filesystem;

namespace scrkit {

namespace {

using scr::io::format_number;

// Collects inputs and parameters, then owns the run directory.
class Run {
public:
    Run(std::string command, std::string out_dir) : out_dir_(std::move(out_dir)) {
        record_.command = std::move(command);
        record_.version = scr::kVersion;
    }

    void input(const std::string& path) { record_.inputs.emplace_back(path, file_sha256(path)); }

    void param(const std::string& key, const std::string& value) {
        record_.parameters.emplace_back(key, value);
    }
    void param(const std::string& key, double value) { param(key, format_number(value)); }

    // Run directory: --out if given, else $SCRKIT_RUN_ROOT (or ./runs) plus a
    // name derived from the command, parameters and input digests.
    const fs::path& directory() {
        if (!dir_.empty()) {
            return dir_;
        }
        if (!out_dir_.empty()) {
            dir_ = out_dir_;
        } else {
            std::string key = record_.command;
            for (const auto& [p, d] : record_.inputs) {
                key += '\n' + d;
            }
            for (const auto& [k, v] : record_.parameters) {
                key += '\n' + k + '=' + v;
            }
            const char* root = std::getenv("SCRKIT_RUN_ROOT");
            dir_ = fs::path(root != nullptr && *root != '\0' ? root : "runs") /
                   (record_.command + "-" + sha256_hex(key).substr(0, 12));
        }
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw scr::ValidationError("cannot create run directory '" + dir_.string() +
                                       "': " + ec.message());
        }
        return dir_;
    }

    void write(const std::string& name, const std::string& contents) {
        std::lock_guard lock(mutex_);
        scr::io::write_file(directory() / name, contents);
        record_.outputs.push_back(name);
    }

    void finish(std::ostream& out) {
        record_.timestamp = utc_timestamp();
        scr::io::write_file(directory() / "run.json", to_json(record_));
        out << "wrote " << directory().string() << "\n";
    }

private:
    RunRecord record_;
    std::string out_dir_;
    fs::path dir_;
    std::mutex mutex_;
};

void add_out_option(CLI::App* cmd, std::string& out_dir) {
    cmd->add_option("--out", out_dir,
                    "Output directory (default: $SCRKIT_RUN_ROOT/<command>-<digest>)");
}

scr::VerifyOptions verify_options(bool no_feedline, bool no_discount) {
    scr::VerifyOptions v;
    v.include_feedline = !no_feedline;
    v.discount_feedline = !no_discount;
    return v;
}

const scr::CircuitDesign& find_design(const std::vector<scr::CircuitDesign>& designs,
                                      const std::string& name) {
    for (const auto& d : designs) {
        if (d.name == name) {
            return d;
        }
    }
    throw scr::InvalidParameter("no design named '" + name + "'");
}

std::string ghz(double hz) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << hz / 1e9;
    return s.str();
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
    std::string designs;
    double gamma = 0.61;
    bool no_feedline = false;
    bool no_discount_feedline = false;
    std::string out;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
    const auto designs = scr::io::load_designs(a.designs);
    const auto options = verify_options(a.no_feedline, a.no_discount_feedline);
    const auto report = scr::evaluate_family(designs, a.gamma, {}, options);
    const auto family = scr::predict_family(designs, a.gamma, options);

    Run run("simulate", a.out);
    run.input(a.designs);
    run.param("gamma", a.gamma);
    run.param("include_feedline", a.no_feedline ? "false" : "true");
    run.param("discount_feedline", a.no_discount_feedline ? "false" : "true");
    run.write("modes.csv", scr::io::modes_to_csv(family));
    run.write("modes.json", scr::io::modes_to_json(family, a.gamma));
    run.write("report.json", scr::io::report_to_json(report));

    out << "name  f_c [GHz]  f_d [GHz]  split [MHz]  Z_d [ohm]\n";
    for (std::size_t i = 0; i < family.size(); ++i) {
        const auto& m = family[i];
        out << std::left << std::setw(6) << m.name << ghz(m.common.frequency) << "     "
            << ghz(m.differential.frequency) << "     " << std::fixed << std::setprecision(1)
            << std::setw(11) << report.splittings[i].exact / 1e6 << "  " << std::setprecision(0)
            << m.differential.impedance.value_or(0.0) << "\n";
    }
    run.finish(out);
    return kExitSuccess;
}

// ---- couple ------------------------------------------------------------------

struct CoupleArgs {
    std::string designs;
    std::string design;
    double gamma = 0.61;
    std::size_t electrons = 1;
    std::optional<double> field_x;  // 1/um
    std::string arms;
    double dot_min = 0.0;  // Hz
    double dot_max = 0.0;  // Hz
    std::size_t points = 201;
    std::string stiffness = "pair";
    bool no_feedline = false;
    std::string out;
};

int couple(const CoupleArgs& a, std::ostream& out) {
    const auto designs = scr::io::load_designs(a.designs);
    const scr::CircuitDesign& design = find_design(designs, a.design);
    if (a.field_x.has_value() == !a.arms.empty()) {
        throw scr::InvalidParameter("give exactly one of --field-x or --arms");
    }
    const scr::LeverArms arms = a.field_x
                                    ? scr::LeverArms::antisymmetric(a.electrons, *a.field_x / scr::units::um)
                                    : scr::io::load_lever_arms(a.arms);

    scr::CouplingOptions options;
    options.include_feedline = !a.no_feedline;
    options.stiffness = a.stiffness == "hessian" ? scr::CoulombStiffness::full_hessian
                                                 : scr::CoulombStiffness::pair_coefficient;
    const scr::DotSweep sweep{scr::kTwoPi * a.dot_min, scr::kTwoPi * a.dot_max, a.points};
    const auto points = scr::sweep_coupled_modes(design, a.gamma, a.electrons, arms, sweep, options);

    Run run("couple", a.out);
    run.input(a.designs);
    if (!a.arms.empty()) {
        run.input(a.arms);
    }
    run.param("design", a.design);
    run.param("gamma", a.gamma);
    run.param("electrons", std::to_string(a.electrons));
    if (a.field_x) {
        run.param("field_x_per_um", *a.field_x);
    }
    run.param("dot_min_hz", a.dot_min);
    run.param("dot_max_hz", a.dot_max);
    run.param("points", std::to_string(a.points));
    run.param("stiffness", a.stiffness);
    run.write("sweep.csv", scr::io::sweep_to_csv(points));

    const auto bare = scr::split_modes(scr::eigenmodes(scr::build_matrices(
        design, scr::MatrixOptions{options.include_feedline, a.gamma, true})));
    out << design.name << ": f_c = " << ghz(bare.common.frequency)
        << " GHz, f_d = " << ghz(bare.differential.frequency) << " GHz\n";

    const double omega_d = scr::kTwoPi * bare.differential.frequency;
    if (a.electrons == 1 && sweep.omega_min < omega_d && omega_d < sweep.omega_max &&
        a.points >= 3) {
        try {
            const auto gap = scr::avoided_crossing_gap(design, a.gamma, arms, sweep, options);
            out << "avoided crossing: 2g/2pi = " << std::fixed << std::setprecision(3)
                << gap.gap / 1e6 << " MHz at omega_dot/2pi = " << ghz(gap.omega_dot / scr::kTwoPi)
                << " GHz\n";
            run.write("crossing.json", "{\n  \"gap_hz\": " + format_number(gap.gap) +
                                           ",\n  \"omega_dot_over_2pi_hz\": " +
                                           format_number(gap.omega_dot / scr::kTwoPi) + "\n}\n");
        } catch (const scr::InvalidParameter& e) {
            out << "avoided crossing not resolved: " << e.what() << "\n";
        }
    }
    run.finish(out);
    return kExitSuccess;
}

// ---- fit ---------------------------------------------------------------------

struct FitArgs {
    std::vector<std::string> traces;
    std::string format = "auto";
    bool normalize = false;
    bool delay = false;
    std::optional<double> power_dbm;
    std::string out;
};

int fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    const auto format = scr::io::parse_trace_format(a.format);
    std::vector<scr::S21Trace> traces;
    for (const auto& path : a.traces) {
        traces.push_back(scr::io::load_trace(path, format));
    }

    scr::FitOptions options;
    options.normalize_baseline = a.normalize;
    options.fit_delay = a.delay;

    // Traces are independent; fit them concurrently and report in input order.
    std::vector<std::optional<scr::ResonanceFit>> results(traces.size());
    std::vector<std::string> failures(traces.size());
    std::vector<std::jthread> workers;
    const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < std::min(threads, traces.size()); ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < traces.size(); i = next++) {
                try {
                    results[i] = scr::fit_resonance(traces[i], options);
                } catch (const std::exception& e) {
                    failures[i] = e.what();
                }
            }
        });
    }
    workers.clear();

    Run run("fit", a.out);
    for (const auto& path : a.traces) {
        run.input(path);
    }
    run.param("format", a.format);
    run.param("normalize_baseline", a.normalize ? "true" : "false");
    run.param("fit_delay", a.delay ? "true" : "false");
    if (a.power_dbm) {
        run.param("power_dbm", *a.power_dbm);
    }

    std::vector<std::pair<std::string, scr::ResonanceFit>> fits;
    bool failed = false;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const std::string name = fs::path(a.traces[i]).filename().string();
        if (!results[i]) {
            err << name << ": fit failed: " << failures[i] << "\n";
            failed = true;
            continue;
        }
        const auto& r = *results[i];
        out << name << ": f0 = " << std::setprecision(10) << r.params.f0 << " Hz, Qi = "
            << std::setprecision(4) << r.params.qi << ", Qc = " << r.params.qc
            << ", phi = " << r.params.phi;
        if (a.power_dbm) {
            out << ", n = " << scr::photon_number(scr::dbm_to_watts(*a.power_dbm), r.params);
        }
        out << "\n";
        fits.emplace_back(name, r);
    }
    run.write("fits.json", scr::io::fit_to_json(fits));
    run.finish(out);
    return failed ? kExitComputation : kExitSuccess;
}

// ---- verify ------------------------------------------------------------------

struct VerifyArgs {
    std::string designs;
    std::string references;
    std::optional<double> gamma;
    bool no_feedline = false;
    bool no_discount_feedline = false;
    std::string out;
};

int verify(const VerifyArgs& a, std::ostream& out) {
    const auto designs = scr::io::load_designs(a.designs);
    const auto refs = scr::io::load_references(a.references);
    const auto options = verify_options(a.no_feedline, a.no_discount_feedline);
    const auto report = a.gamma ? scr::evaluate_family(designs, *a.gamma, refs, options)
                                : scr::fit_gamma(designs, refs, options);

    Run run("verify", a.out);
    run.input(a.designs);
    run.input(a.references);
    if (a.gamma) {
        run.param("gamma", *a.gamma);
    }
    run.param("include_feedline", a.no_feedline ? "false" : "true");
    run.param("discount_feedline", a.no_discount_feedline ? "false" : "true");
    run.write("report.json", scr::io::report_to_json(report));
    run.write("report.csv", scr::io::report_to_csv(report));

    out << "gamma = " << std::setprecision(6) << report.gamma << ", max |error| = "
        << std::setprecision(3) << 100.0 * report.max_abs_error
        << " %, rms error = " << 100.0 * report.rms_error << " %\n";
    if (report.multiple_minima) {
        out << "warning: the error objective has more than one local minimum in gamma\n";
    }
    run.finish(out);
    return kExitSuccess;
}

// ---- scale -------------------------------------------------------------------

struct ScaleArgs {
    double l = 0.0;
    double w = 0.0;
    double target_l = 0.0;
    double target_w = 0.0;
    double f0 = 1.0;
    double z = 1.0;
    std::string out;
};

int scale(const ScaleArgs& a, std::ostream& out) {
    const scr::ScalingBase base{{a.l, a.w}, a.f0, a.z};
    const scr::Geometry target{a.target_l, a.target_w};
    const auto p = scr::scaling_predict(base, target);

    Run run("scale", a.out);
    run.param("l", a.l);
    run.param("w", a.w);
    run.param("target_l", a.target_l);
    run.param("target_w", a.target_w);
    run.param("f0", a.f0);
    run.param("z", a.z);
    run.write("scale.json", scr::io::scaling_to_json(base, target, p));

    out << "f0 ratio = " << std::setprecision(6) << p.frequency_ratio
        << ", impedance ratio = " << p.impedance_ratio << "\n";
    out << "f0' = " << p.frequency << " Hz, Z' = " << p.impedance << " ohm\n";
    run.finish(out);
    return kExitSuccess;
}

// ---- synth -------------------------------------------------------------------

struct SynthArgs {
    double f0 = 0.0;
    double qi = 0.0;
    double qc = 0.0;
    double phi = 0.0;
    std::optional<double> span;
    std::size_t points = 2001;
    double noise = 0.0;
    std::uint64_t seed = 1;
    std::string out;
};

int synth(const SynthArgs& a, std::ostream& out) {
    const scr::ResonanceParams params{a.f0, a.qi, a.qc, a.phi};
    scr::require(a.qi > 0.0 && a.qc > 0.0, "Qi and Qc must be positive");
    const double q_loaded = 1.0 / (1.0 / a.qi + 1.0 / a.qc);
    const double span = a.span.value_or(10.0 * a.f0 / q_loaded);
    const auto trace = scr::synth_trace(params, span, a.points, a.noise, a.seed);

    Run run("synth", a.out);
    run.param("f0", a.f0);
    run.param("qi", a.qi);
    run.param("qc", a.qc);
    run.param("phi", a.phi);
    run.param("span", span);
    run.param("points", std::to_string(a.points));
    run.param("noise", a.noise);
    run.param("seed", std::to_string(a.seed));
    run.write("trace.csv", scr::io::trace_to_csv(trace));
    run.finish(out);
    return kExitSuccess;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Symmetrically coupled resonator toolkit", "scrkit"};
    app.set_version_flag("--version", std::string(scr::kVersion));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Eigenmodes of every design in a designs file");
    sim_cmd->add_option("designs", sim.designs, "Designs JSON")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--gamma", sim.gamma, "Capacitance discount");
    sim_cmd->add_flag("--no-feedline", sim.no_feedline, "Do not fold feedline capacitance in");
    sim_cmd->add_flag("--no-discount-feedline", sim.no_discount_feedline,
                      "Leave folded feedline capacitance undiscounted");
    add_out_option(sim_cmd, sim.out);

    CoupleArgs cpl;
    auto* cpl_cmd = app.add_subcommand("couple", "Electron-resonator spectrum over a dot sweep");
    cpl_cmd->add_option("designs", cpl.designs, "Designs JSON")->required()->check(CLI::ExistingFile);
    cpl_cmd->add_option("--design", cpl.design, "Design name")->required();
    cpl_cmd->add_option("--gamma", cpl.gamma, "Capacitance discount");
    cpl_cmd->add_option("--electrons", cpl.electrons, "Number of electrons")
        ->check(CLI::PositiveNumber);
    cpl_cmd->add_option("--field-x", cpl.field_x,
                        "Antisymmetric plate field per volt, 1/um");
    cpl_cmd->add_option("--arms", cpl.arms, "Lever-arm JSON")->check(CLI::ExistingFile);
    cpl_cmd->add_option("--dot-min", cpl.dot_min, "Lowest dot curvature omega_dot/2pi, Hz")
        ->required();
    cpl_cmd->add_option("--dot-max", cpl.dot_max, "Highest dot curvature omega_dot/2pi, Hz")
        ->required();
    cpl_cmd->add_option("--points", cpl.points, "Sweep points");
    cpl_cmd->add_option("--stiffness", cpl.stiffness, "Coulomb stiffness: pair or hessian")
        ->check(CLI::IsMember({"pair", "hessian"}));
    cpl_cmd->add_flag("--no-feedline", cpl.no_feedline, "Do not fold feedline capacitance in");
    add_out_option(cpl_cmd, cpl.out);

    FitArgs fitargs;
    auto* fit_cmd = app.add_subcommand("fit", "Fit hanger resonances to one or more traces");
    fit_cmd->add_option("traces", fitargs.traces, "Trace CSV files")
        ->required()
        ->check(CLI::ExistingFile);
    fit_cmd->add_option("--format", fitargs.format, "auto, re-im or db-phase")
        ->check(CLI::IsMember({"auto", "re-im", "db-phase"}));
    fit_cmd->add_flag("--normalize", fitargs.normalize, "Divide out the off-resonant baseline");
    fit_cmd->add_flag("--delay", fitargs.delay, "Fit a cable-delay phase slope");
    fit_cmd->add_option("--power-dbm", fitargs.power_dbm,
                        "Power at the device input, for the photon number");
    add_out_option(fit_cmd, fitargs.out);

    VerifyArgs ver;
    auto* ver_cmd = app.add_subcommand("verify", "Fit gamma against reference frequencies");
    ver_cmd->add_option("designs", ver.designs, "Designs JSON")->required()->check(CLI::ExistingFile);
    ver_cmd->add_option("references", ver.references, "References JSON")
        ->required()
        ->check(CLI::ExistingFile);
    ver_cmd->add_option("--gamma", ver.gamma, "Evaluate at this gamma instead of fitting");
    ver_cmd->add_flag("--no-feedline", ver.no_feedline, "Do not fold feedline capacitance in");
    ver_cmd->add_flag("--no-discount-feedline", ver.no_discount_feedline,
                      "Leave folded feedline capacitance undiscounted");
    add_out_option(ver_cmd, ver.out);

    ScaleArgs sc;
    auto* sc_cmd = app.add_subcommand("scale", "Frequency and impedance under geometric scaling");
    sc_cmd->add_option("--l", sc.l, "Base wire length, m")->required();
    sc_cmd->add_option("--w", sc.w, "Base wire width, m")->required();
    sc_cmd->add_option("--target-l", sc.target_l, "Target wire length, m")->required();
    sc_cmd->add_option("--target-w", sc.target_w, "Target wire width, m")->required();
    sc_cmd->add_option("--f0", sc.f0, "Base frequency, Hz (default 1: ratios only)");
    sc_cmd->add_option("--z", sc.z, "Base impedance, ohm (default 1: ratios only)");
    add_out_option(sc_cmd, sc.out);

    SynthArgs sy;
    auto* sy_cmd = app.add_subcommand("synth", "Synthetic hanger transmission trace");
    sy_cmd->add_option("--f0", sy.f0, "Resonance frequency, Hz")->required();
    sy_cmd->add_option("--qi", sy.qi, "Internal quality factor")->required();
    sy_cmd->add_option("--qc", sy.qc, "Coupling quality factor")->required();
    sy_cmd->add_option("--phi", sy.phi, "Asymmetry phase, rad");
    sy_cmd->add_option("--span", sy.span, "Frequency span, Hz (default 10 linewidths)");
    sy_cmd->add_option("--points", sy.points, "Number of samples");
    sy_cmd->add_option("--noise", sy.noise, "Complex noise RMS");
    sy_cmd->add_option("--seed", sy.seed, "Noise seed");
    add_out_option(sy_cmd, sy.out);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (sim_cmd->parsed()) {
            return simulate(sim, out);
        }
        if (cpl_cmd->parsed()) {
            return couple(cpl, out);
        }
        if (fit_cmd->parsed()) {
            return fit(fitargs, out, err);
        }
        if (ver_cmd->parsed()) {
            return verify(ver, out);
        }
        if (sc_cmd->parsed()) {
            return scale(sc, out);
        }
        if (sy_cmd->parsed()) {
            return synth(sy, out);
        }
    } catch (const scr::Error& e) {
        err << "error (" << scr::to_string(e.kind()) << "): " << e.what() << "\n";
        return e.is_computational() ? kExitComputation : kExitInput;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}

}  // namespace scrkit
