// Command-line front end for the reconstruction toolkit.
//
// Subcommands:
//   probe        write the illumination window as CF2D
//   object       write the test object as CF2D
//   simulate     write the measured intensity stack (MEAS) plus a manifest
//   reconstruct  run one solver and write its artifacts
//   compare      run every [solver NAME] section and write a combined CSV
//   verify       run the full property-check suite
//
// Every flag overrides the matching key of the [experiment] section, whether
// or not a --config file is supplied. Exit codes: 0 success, 1 solver or
// check failure, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "magpie/experiment.hpp"
#include "magpie/io.hpp"
#include "magpie/verify.hpp"

namespace fs = std::filesystem;

namespace {

struct FlagValues {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int n = 0, m = 0, levels = 0, max_epochs = 0;
    double overlap = 0, eta = 0, alpha = 0, tol = 0;
    std::string algorithm;
};

// Appends each supplied flag to the [experiment] section, where it shadows
// any earlier key of the same name (later entries win during config load).
magpie::ExperimentConfig assemble_config(const CLI::App &app, const FlagValues &v) {
    magpie::IniFile ini;
    if (!v.config.empty()) ini = magpie::parse_ini_file(v.config);
    magpie::IniSection *exp = nullptr;
    for (auto &sec : ini.sections)
        if (sec.name == "experiment") exp = &sec;
    if (exp == nullptr) {
        ini.sections.insert(ini.sections.begin(), magpie::IniSection{"experiment", {}});
        exp = &ini.sections.front();
    }

    const auto override_if = [&](const char *flag, const char *key, const std::string &value) {
        if (app.count(flag) > 0) exp->entries.emplace_back(key, value);
    };
    override_if("--seed", "seed", std::to_string(v.seed));
    override_if("--n", "n", std::to_string(v.n));
    override_if("--m", "m", std::to_string(v.m));
    override_if("--levels", "levels", std::to_string(v.levels));
    override_if("--max-epochs", "max_epochs", std::to_string(v.max_epochs));
    override_if("--algorithm", "algorithm", v.algorithm);
    char buf[64];
    const auto override_real = [&](const char *flag, const char *key, double value) {
        if (app.count(flag) == 0) return;
        std::snprintf(buf, sizeof buf, "%.17g", value);
        exp->entries.emplace_back(key, buf);
    };
    override_real("--overlap", "overlap", v.overlap);
    override_real("--eta", "eta", v.eta);
    override_real("--alpha", "alpha", v.alpha);
    override_real("--tol", "tol", v.tol);

    magpie::ExperimentConfig cfg = magpie::load_experiment_config(ini);
    if (app.count("--out") > 0) cfg.out_dir = v.out;
    return cfg;
}

void write_dataset_manifest(const std::string &path, const magpie::ExperimentConfig &cfg,
                            std::uint64_t checksum, std::size_t regions) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(checksum));
    os << "[dataset]\n";
    os << "n = " << cfg.n << "\n";
    os << "m = " << cfg.m << "\n";
    os << "overlap = " << cfg.overlap << "\n";
    os << "eta = " << cfg.eta << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "object = " << cfg.object << "\n";
    os << "aperture = " << cfg.aperture << "\n";
    os << "phase_coeff = " << cfg.phase_coeff << "\n";
    os << "regions = " << regions << "\n";
    os << "checksum = " << hex << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

int run_probe(const magpie::ExperimentConfig &cfg) {
    const magpie::ComplexField2D probe =
        magpie::make_zone_plate_probe(cfg.m, cfg.aperture, cfg.phase_coeff);
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "probe.cf2d").string();
    magpie::write_cf2d(path, probe);
    std::cout << path << "\n";
    return 0;
}

int run_object(const magpie::ExperimentConfig &cfg) {
    const magpie::ComplexField2D obj = magpie::build_object(cfg);
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "object.cf2d").string();
    magpie::write_cf2d(path, obj);
    std::cout << path << "\n";
    return 0;
}

int run_simulate(const magpie::ExperimentConfig &cfg) {
    const magpie::Dataset ds = magpie::build_dataset(cfg);
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    magpie::write_meas((dir / "measurements.meas").string(), ds.measurements);
    magpie::write_cf2d((dir / "probe.cf2d").string(), ds.probe);
    if (ds.ground_truth)
        magpie::write_cf2d((dir / "object.cf2d").string(), *ds.ground_truth);
    write_dataset_manifest((dir / "manifest.ini").string(), cfg, magpie::dataset_checksum(ds),
                           ds.plan.regions.size());
    std::cout << (dir / "measurements.meas").string() << "\n";
    return 0;
}

// One run: the first [solver NAME] section when the config defines any,
// otherwise the merged [experiment] solver defaults.
int run_reconstruct(magpie::ExperimentConfig cfg) {
    if (cfg.solvers.empty()) {
        const std::string name = magpie::algorithm_name(cfg.solver_defaults.algorithm);
        cfg.solvers.emplace_back(name, cfg.solver_defaults);
    } else {
        cfg.solvers.resize(1);
    }
    // a bad solver config is a configuration error (exit 2), not a run failure
    magpie::validate_solver_config(cfg.solvers.front().second, cfg.m);
    const magpie::ExperimentResult result = magpie::run_experiment(cfg);
    const magpie::SolverOutcome &oc = result.outcomes.front();
    if (!oc.ok) {
        std::cerr << "solver " << oc.name << " failed: " << oc.error << "\n";
        return 1;
    }
    const magpie::MetricRow &last = oc.log.rows.back();
    std::cout << oc.name << ": " << oc.log.status << " after " << last.epoch
              << " epochs, residual " << last.residual << ", error " << last.error
              << ", criterion " << last.grad_criterion << "\n";
    std::cout << (fs::path(cfg.out_dir) / oc.name / "recon.cf2d").string() << "\n";
    return 0;
}

int run_compare(const magpie::ExperimentConfig &cfg) {
    for (const auto &[name, scfg] : cfg.solvers) magpie::validate_solver_config(scfg, cfg.m);
    const magpie::ExperimentResult result = magpie::run_experiment(cfg);
    int failures = 0;
    for (const magpie::SolverOutcome &oc : result.outcomes) {
        if (!oc.ok) {
            std::cerr << "solver " << oc.name << " failed: " << oc.error << "\n";
            ++failures;
            continue;
        }
        const magpie::MetricRow &last = oc.log.rows.back();
        std::cout << oc.name << ": " << oc.log.status << " after " << last.epoch
                  << " epochs, residual " << last.residual << ", error " << last.error << "\n";
    }
    std::cout << (fs::path(cfg.out_dir) / "combined.csv").string() << "\n";
    return failures > 0 ? 1 : 0;
}

int run_verify(bool skip_reconstructions) {
    magpie::VerifyOptions opt;
    opt.progress = &std::cerr;
    opt.run_reconstructions = !skip_reconstructions;
    const std::vector<magpie::CheckResult> results = magpie::run_verification(opt);
    const int failures = magpie::report_verification(results, std::cout);
    return failures > 0 ? 1 : 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"ptychographic phase retrieval: simulation, solvers, verification"};
    app.fallthrough();
    app.require_subcommand(1);

    FlagValues v;
    app.add_option("--config", v.config, "INI config file");
    app.add_option("--seed", v.seed, "master seed (object, noise, sweep order)");
    app.add_option("--n", v.n, "object side length");
    app.add_option("--m", v.m, "probe window side length (power of two)");
    app.add_option("--overlap", v.overlap, "scan overlap fraction in [0,1)");
    app.add_option("--eta", v.eta, "photon noise level (0 = noiseless)");
    app.add_option("--alpha", v.alpha, "proximal regularization strength");
    app.add_option("--levels", v.levels, "grid count for the multilevel solver");
    app.add_option("--tol", v.tol, "stopping threshold on the mean gradient");
    app.add_option("--max-epochs", v.max_epochs, "epoch budget");
    app.add_option("--algorithm", v.algorithm, "rpie, exact_surrogate, lbfgs, or magpie");
    app.add_option("--out", v.out, "output directory");

    CLI::App *probe = app.add_subcommand("probe", "write the illumination window (CF2D)");
    CLI::App *object = app.add_subcommand("object", "write the test object (CF2D)");
    CLI::App *simulate = app.add_subcommand("simulate", "write measurements (MEAS) + manifest");
    CLI::App *reconstruct = app.add_subcommand("reconstruct", "run one solver");
    CLI::App *compare = app.add_subcommand("compare", "run all configured solvers");
    CLI::App *verify = app.add_subcommand("verify", "run the property-check suite");
    bool skip_reconstructions = false;
    verify->add_flag("--no-reconstructions", skip_reconstructions,
                     "skip the full-scale reconstruction studies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) return run_verify(skip_reconstructions);
        const magpie::ExperimentConfig cfg = assemble_config(app, v);
        if (probe->parsed()) return run_probe(cfg);
        if (object->parsed()) return run_object(cfg);
        if (simulate->parsed()) return run_simulate(cfg);
        if (reconstruct->parsed()) return run_reconstruct(cfg);
        if (compare->parsed()) return run_compare(cfg);
    } catch (const std::exception &ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
