#pragma once

// Experiment orchestration: builds one dataset from a declarative config,
// runs every configured solver from the same all-ones start, and writes the
// artifacts (per-solver CSV log, reconstruction, rendered images, manifest).
//
// Config files are flat INI: one [experiment] section for the dataset and
// shared solver defaults, plus any number of [solver NAME] sections, each
// describing one run. Command-line flags override [experiment] keys.
//
// CSV layout is fixed: epoch,residual,error,grad_criterion,wall_ms with 17
// significant digits, so parsed values round-trip bit-exactly. wall_ms is
// physical time and is the one column excluded from determinism comparisons.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magpie/io.hpp"
#include "magpie/metrics.hpp"
#include "magpie/simulate.hpp"
#include "magpie/solvers.hpp"

namespace magpie {

// ---- INI parsing -------------------------------------------------------------

struct IniSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string *find(const std::string &key) const {
        for (const auto &kv : entries)
            if (kv.first == key) return &kv.second;
        return nullptr;
    }
};

struct IniFile {
    std::vector<IniSection> sections;

    const IniSection *find(const std::string &name) const {
        for (const auto &s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

namespace detail {

inline std::string trim(const std::string &s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace detail

// Flat INI: [section] headers, key = value lines, comments starting with
// '#' or ';' (whole-line or trailing). Values must not contain those
// characters. Keys outside any section are rejected.
inline IniFile parse_ini(std::istream &is, const std::string &origin) {
    IniFile file;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line.erase(cut);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": unterminated section header");
            IniSection sec;
            sec.name = detail::trim(line.substr(1, line.size() - 2));
            if (sec.name.empty())
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": empty section name");
            file.sections.push_back(std::move(sec));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        if (file.sections.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": key outside any [section]");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        file.sections.back().entries.emplace_back(key, value);
    }
    return file;
}

inline IniFile parse_ini_file(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    return parse_ini(is, path);
}

// ---- experiment configuration --------------------------------------------------

struct ExperimentConfig {
    // dataset
    int n = 512;
    int m = 128;
    double overlap = 0.5;
    double eta = 0.05;
    std::uint64_t seed = 1;
    std::string object = "texture"; // texture, circuit, or pgm (with mag/phase paths)
    std::string mag_path;
    std::string phase_path;
    double aperture = default_aperture_fraction;
    double phase_coeff = default_phase_coeff;

    // solver defaults, inherited by every [solver] section
    SolverConfig solver_defaults;

    // named runs; empty means "whatever single run the caller assembles"
    std::vector<std::pair<std::string, SolverConfig>> solvers;

    std::string out_dir = "out";
};

namespace detail {

inline double to_double(const std::string &v, const std::string &what) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception &) {
        throw std::runtime_error("config: bad numeric value for " + what + ": '" + v + "'");
    }
}

inline int to_int(const std::string &v, const std::string &what) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(d);
    } catch (const std::exception &) {
        throw std::runtime_error("config: bad integer value for " + what + ": '" + v + "'");
    }
}

inline std::uint64_t to_u64(const std::string &v, const std::string &what) {
    try {
        std::size_t pos = 0;
        const unsigned long long d = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(d);
    } catch (const std::exception &) {
        throw std::runtime_error("config: bad unsigned value for " + what + ": '" + v + "'");
    }
}

inline void apply_solver_key(SolverConfig &cfg, const std::string &key, const std::string &value,
                             bool &saw_seed) {
    if (key == "algorithm") cfg.algorithm = parse_algorithm(value);
    else if (key == "alpha") cfg.alpha = to_double(value, key);
    else if (key == "levels") cfg.levels = to_int(value, key);
    else if (key == "tol") cfg.tol = to_double(value, key);
    else if (key == "max_epochs") cfg.max_epochs = to_int(value, key);
    else if (key == "lbfgs_history") cfg.lbfgs_history = to_int(value, key);
    else if (key == "seed") {
        cfg.seed = to_u64(value, key);
        saw_seed = true;
    } else
        throw std::runtime_error("config: unknown solver key '" + key + "'");
}

} // namespace detail

// Builds an ExperimentConfig from a parsed INI file. Solver sections inherit
// the [experiment] solver defaults (and the experiment seed, unless they set
// their own).
inline ExperimentConfig load_experiment_config(const IniFile &ini) {
    ExperimentConfig cfg;
    bool saw_default_seed = false;
    if (const IniSection *exp = ini.find("experiment")) {
        for (const auto &[key, value] : exp->entries) {
            if (key == "n") cfg.n = detail::to_int(value, key);
            else if (key == "m") cfg.m = detail::to_int(value, key);
            else if (key == "overlap") cfg.overlap = detail::to_double(value, key);
            else if (key == "eta") cfg.eta = detail::to_double(value, key);
            else if (key == "seed") cfg.seed = detail::to_u64(value, key);
            else if (key == "object") cfg.object = value;
            else if (key == "mag") cfg.mag_path = value;
            else if (key == "phase") cfg.phase_path = value;
            else if (key == "aperture") cfg.aperture = detail::to_double(value, key);
            else if (key == "phase_coeff") cfg.phase_coeff = detail::to_double(value, key);
            else if (key == "out") cfg.out_dir = value;
            else
                detail::apply_solver_key(cfg.solver_defaults, key, value, saw_default_seed);
        }
    }
    for (const IniSection &sec : ini.sections) {
        if (sec.name.rfind("solver ", 0) != 0) {
            if (sec.name == "solver")
                throw std::runtime_error("config: solver section needs a name: [solver NAME]");
            if (sec.name != "experiment")
                throw std::runtime_error("config: unknown section [" + sec.name + "]");
            continue;
        }
        std::string name = detail::trim(sec.name.substr(7));
        if (name.empty())
            throw std::runtime_error("config: solver section needs a name: [solver NAME]");
        SolverConfig scfg = cfg.solver_defaults;
        bool saw_seed = false;
        for (const auto &[key, value] : sec.entries)
            detail::apply_solver_key(scfg, key, value, saw_seed);
        if (!saw_seed) scfg.seed = cfg.seed;
        cfg.solvers.emplace_back(std::move(name), scfg);
    }
    if (!saw_default_seed) cfg.solver_defaults.seed = cfg.seed;
    return cfg;
}

// ---- dataset construction -------------------------------------------------------

// The object pattern and the photon noise use separate streams derived from
// the experiment seed, so changing the noise level never changes the object.
inline ComplexField2D build_object(const ExperimentConfig &cfg) {
    if (cfg.object == "pgm") {
        if (cfg.mag_path.empty() || cfg.phase_path.empty())
            throw std::runtime_error("config: object=pgm requires mag= and phase= paths");
        return load_grayscale_object(cfg.mag_path, cfg.phase_path, cfg.n);
    }
    return make_synthetic_object(cfg.n, parse_object_kind(cfg.object), mix_seed(cfg.seed, 0x0b7ec7));
}

inline Dataset build_dataset(const ExperimentConfig &cfg) {
    const ComplexField2D obj = build_object(cfg);
    const ComplexField2D probe = make_zone_plate_probe(cfg.m, cfg.aperture, cfg.phase_coeff);
    const ScanPlan plan = scan_positions(cfg.n, cfg.m, cfg.overlap);
    return make_dataset(obj, probe, plan, cfg.eta, cfg.seed);
}

// ---- CSV ---------------------------------------------------------------------------

inline const char *csv_header() { return "epoch,residual,error,grad_criterion,wall_ms"; }

inline std::string format_metric_row(const MetricRow &row) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g", row.epoch, row.residual,
                  row.error, row.grad_criterion, row.wall_ms);
    return buf;
}

inline void write_csv(const std::string &path, const std::vector<MetricRow> &rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << csv_header() << "\n";
    for (const MetricRow &r : rows) os << format_metric_row(r) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<MetricRow> parse_csv(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(is, line) || line != csv_header())
        throw std::runtime_error(path + ": missing or unexpected CSV header");
    std::vector<MetricRow> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        MetricRow row;
        char *end = nullptr;
        const char *p = line.c_str();
        row.epoch = static_cast<int>(std::strtol(p, &end, 10));
        double *fields[4] = {&row.residual, &row.error, &row.grad_criterion, &row.wall_ms};
        for (double *f : fields) {
            if (*end != ',')
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
            p = end + 1;
            *f = std::strtod(p, &end);
        }
        if (*end != '\0')
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": trailing junk");
        rows.push_back(row);
    }
    return rows;
}

// The CSV bytes with the wall_ms column stripped: the payload used for
// determinism comparisons, since elapsed time is physical, not algorithmic.
inline std::string csv_without_timing(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::string out, line;
    while (std::getline(is, line)) {
        const std::size_t cut = line.rfind(',');
        out += cut == std::string::npos ? line : line.substr(0, cut);
        out += '\n';
    }
    return out;
}

// ---- image export --------------------------------------------------------------------

// Renders |z| (scaled to the full 16-bit range against its own maximum) and
// arg(z) (mapped from [-pi, pi] to the full range, so phase 0 is mid-gray).
inline void export_images(const ComplexField2D &z, const std::string &dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const double pi = 3.1415926535897932384626433832795;
    double peak = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) peak = std::max(peak, std::abs(z[i]));
    Field2D<std::uint16_t> mag(z.width(), z.height(), 0);
    Field2D<std::uint16_t> pha(z.width(), z.height(), 0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (peak > 0.0) {
            const double v = std::abs(z[i]) / peak * 65535.0;
            mag[i] = static_cast<std::uint16_t>(std::lround(std::min(65535.0, std::max(0.0, v))));
        }
        const double p = (std::arg(z[i]) + pi) / (2.0 * pi) * 65535.0;
        pha[i] = static_cast<std::uint16_t>(std::lround(std::min(65535.0, std::max(0.0, p))));
    }
    write_pgm16((fs::path(dir) / "magnitude.pgm").string(), mag);
    write_pgm16((fs::path(dir) / "phase.pgm").string(), pha);
}

// ---- experiment runner ------------------------------------------------------------------

struct SolverOutcome {
    std::string name;
    bool ok = false;
    std::string error; // populated when ok is false
    RunLog log;        // valid when ok
};

struct ExperimentResult {
    std::uint64_t dataset_checksum = 0;
    std::vector<SolverOutcome> outcomes;
};

namespace detail {

inline void write_manifest(const std::string &path, const ExperimentConfig &cfg,
                           std::uint64_t checksum, const std::vector<SolverOutcome> &outcomes) {
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
    os << "checksum = " << hex << "\n";
    os << "\n[log]\n";
    os << "rows = one per epoch, where an epoch is one full pass over all regions\n";
    for (const SolverOutcome &oc : outcomes) {
        os << "\n[solver " << oc.name << "]\n";
        if (!oc.ok) {
            os << "status = error\n";
            os << "message = " << oc.error << "\n";
            continue;
        }
        const SolverConfig &sc = oc.log.config;
        os << "algorithm = " << algorithm_name(sc.algorithm) << "\n";
        os << "alpha = " << sc.alpha << "\n";
        os << "levels = " << sc.levels << "\n";
        os << "tol = " << sc.tol << "\n";
        os << "max_epochs = " << sc.max_epochs << "\n";
        os << "seed = " << sc.seed << "\n";
        os << "status = " << oc.log.status << "\n";
        if (!oc.log.rows.empty()) {
            const MetricRow &last = oc.log.rows.back();
            os << "epochs_run = " << last.epoch << "\n";
            os << "final_residual = " << format_metric_row(last) << "\n";
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

} // namespace detail

// Runs every configured solver against one shared dataset, from the same
// all-ones start. Per-solver artifacts go to <out>/<name>/; a failing solver
// is recorded in the manifest without aborting the others.
inline ExperimentResult run_experiment(const ExperimentConfig &cfg) {
    namespace fs = std::filesystem;
    if (cfg.solvers.empty())
        throw std::runtime_error("experiment: no [solver NAME] sections configured");
    fs::create_directories(cfg.out_dir);

    const Dataset ds = build_dataset(cfg);
    ExperimentResult result;
    result.dataset_checksum = dataset_checksum(ds);

    const ComplexField2D z0(cfg.n, cfg.n, cplx(1.0, 0.0));
    for (const auto &[name, scfg] : cfg.solvers) {
        SolverOutcome oc;
        oc.name = name;
        const fs::path dir = fs::path(cfg.out_dir) / name;
        try {
            fs::create_directories(dir);
            RunResult run = run_solver(z0, ds, scfg);
            write_csv((dir / "log.csv").string(), run.log.rows);
            write_cf2d((dir / "recon.cf2d").string(), run.z);
            export_images(run.z, dir.string());
            oc.ok = true;
            oc.log = std::move(run.log);
        } catch (const std::exception &ex) {
            oc.ok = false;
            oc.error = ex.what();
        }
        result.outcomes.push_back(std::move(oc));
    }

    detail::write_manifest((fs::path(cfg.out_dir) / "manifest.ini").string(), cfg,
                           result.dataset_checksum, result.outcomes);

    // side-by-side convergence table for plotting
    std::ofstream combined((fs::path(cfg.out_dir) / "combined.csv").string());
    if (!combined) throw std::runtime_error("cannot write combined.csv");
    combined << "solver," << csv_header() << "\n";
    for (const SolverOutcome &oc : result.outcomes) {
        if (!oc.ok) continue;
        for (const MetricRow &row : oc.log.rows)
            combined << oc.name << "," << format_metric_row(row) << "\n";
    }
    return result;
}

} // namespace magpie
