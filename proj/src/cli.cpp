#include "qembed/cli.hpp"

#include "qembed/construction.hpp"
#include "qembed/errors.hpp"
#include "qembed/io.hpp"
#include "qembed/spectral_verifier.hpp"
#include "qembed/zero_tracker.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace qembed::cli {

namespace fs = std::filesystem;
using io::format_real;
using io::Json;

namespace {

// Thresholds applied by the emit and verify paths.
constexpr double kSingularMismatchTol = 1e-9;
constexpr double kMatchingTol = 1e-8;
constexpr double kPiecewiseSpectralTol = 1e-2;
constexpr double kSquareBoundStateTol = 1e-3;
constexpr double kSquareSpectralTol = 2e-3;
constexpr double kSquareIdentityTol = 1e-10;

// A check that did not hold; reported with exit code 3.
struct CheckFailure : NumericalError {
    using NumericalError::NumericalError;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw CheckFailure(what);
}

std::string prefix_for(Command c) { return c == Command::even_variant ? "even_variant" : "singular"; }

double default_X(const RunConfig& cfg) {
    if (cfg.X) return *cfg.X;
    switch (cfg.command) {
        case Command::hsquare: return 20.0;
        case Command::piecewise:
        case Command::verify: return 25.0 / cfg.k0;
        default: return 25.0;
    }
}

int default_n(const RunConfig& cfg) {
    if (cfg.n) return *cfg.n;
    return cfg.command == Command::hsquare ? 1000 : 1500;
}

std::string csv_text(const EigenfunctionSample& s) {
    std::ostringstream os;
    io::write_eigenfunction_csv(os, s);
    return os.str();
}

std::string column_text(const std::vector<double>& v) {
    std::ostringstream os;
    io::write_column_csv(os, v);
    return os.str();
}

// --- singular / even variant -------------------------------------------------

void check_singular(const SingularExample& ex, std::ostream& log) {
    const double c = ex.interface_position();
    const double core = ex.parity == Parity::odd ? std::sin(c) : std::cos(c);
    require(std::abs(ex.amplitude - core * std::exp(c)) <= 1e-12 * std::max(1.0, ex.amplitude),
            "amplitude does not make the eigenfunction C^1 at the interface");
    const PointInteraction mirror = mirrored(ex.interfaces[1]);
    require(mirror.c == ex.interfaces[0].c && mirror.beta == ex.interfaces[0].beta &&
                mirror.gamma == ex.interfaces[0].gamma,
            "interaction at -c is not the mirror image of the one at +c");
    for (const auto& pi : ex.interfaces) {
        const auto left = ex.jet(pi.c, true);
        const auto right = ex.jet(pi.c, false);
        const InterfaceJumps j = interface_jumps(pi, left[0], left[1]);
        require(std::abs(right[2] - left[2] - j.jump_u2) <= 1e-10 &&
                    std::abs(right[3] - left[3] - j.jump_u3) <= 1e-10,
                "closed-form jumps disagree with the interaction at c = " + format_real(pi.c));
    }
    const double mismatch = shoot_singular(ex, ex.lambda).mismatch;
    log << "shooting mismatch at lambda = " << format_real(ex.lambda) << ": " << mismatch << '\n';
    require(mismatch < kSingularMismatchTol,
            "shooting mismatch " + format_real(mismatch) + " at lambda exceeds 1e-9");
}

int run_singular(const RunConfig& cfg, std::ostream& log) {
    const double hw = default_X(cfg);
    const SingularConstruction sc = cfg.command == Command::even_variant
                                        ? even_variant(cfg.grid_step, hw)
                                        : singular_example(cfg.grid_step, hw);
    const std::string prefix = prefix_for(cfg.command);
    io::write_json_file(cfg.out_dir / (prefix + ".json"), io::to_json(sc.example));
    io::write_text_file(cfg.out_dir / (prefix + "_eigenfunction.csv"), csv_text(sc.sample));

    std::ostringstream scan;
    scan << "lambda,mismatch\n";
    for (int i = 1; i <= 150; ++i) {
        const double lambda = 0.02 * i;
        scan << format_real(lambda) << ',' << format_real(shoot_singular(sc.example, lambda).mismatch)
             << '\n';
    }
    io::write_text_file(cfg.out_dir / (prefix + "_scan.csv"), scan.str());
    log << prefix << ": interfaces at +-" << format_real(sc.example.interface_position())
        << ", (beta, gamma) = (" << format_real(sc.example.interfaces[1].beta) << ", "
        << format_real(sc.example.interfaces[1].gamma) << "), |f|^2 = "
        << format_real(sc.example.norm_squared()) << '\n';
    check_singular(sc.example, log);
    return ok;
}

// --- piecewise ------------------------------------------------------------------

SpectralReport piecewise_spectrum(const EmbeddedPotentialSpec& spec, double X, int n) {
    const GridOperator op = discretize_quartic(spec, X, n);
    const EigenPairs pairs = eigensolve_symmetric(op);
    DetectOptions opts;
    opts.tol = kPiecewiseSpectralTol;
    return detect_embedded(pairs, op, spec.lambda(), spec.k0, opts);
}

void check_piecewise(const EmbeddedPotentialSpec& spec, std::ostream& log) {
    const auto [du1, du3] = shoot_piecewise(spec, spec.lambda());
    log << "matching residual |g'(0)| + |g'''(0)| = " << std::abs(du1) + std::abs(du3) << '\n';
    require(std::abs(du1) + std::abs(du3) < kMatchingTol,
            "matching residual " + format_real(std::abs(du1) + std::abs(du3)) + " exceeds 1e-8");
    const PiecewisePotential q = spec.full_potential();
    for (double bp : q.breakpoints()) {
        const double d = 1e-9 * std::max(1.0, std::abs(bp));
        require(q.value_at(bp + d) == q.value_at(-bp - d) && q.value_at(bp - d) == q.value_at(-bp + d),
                "potential is not even at breakpoint " + format_real(bp));
    }
    std::vector<PotentialPiece> pieces = spec.pieces.pieces();
    for (auto& p : pieces) p.value -= spec.lambda();
    const StateVector4 at_b =
        propagate(PiecewisePotential(pieces), exponential_jet(spec.k0, spec.a), spec.b);
    require(at_b.u > 0.0 && at_b.u1 > 0.0 && at_b.u2 < 0.0 && at_b.u3 < 0.0,
            "jet at b misses the sign pattern (+, +, -, -)");
}

void write_spectrum(const RunConfig& cfg, const std::string& prefix, const SpectralReport& rep) {
    io::write_json_file(cfg.out_dir / (prefix + "_report.json"), io::to_json(rep));
    io::write_text_file(cfg.out_dir / (prefix + "_eigenvalues.csv"), column_text(rep.eigenvalues));
}

void log_report(std::ostream& log, const SpectralReport& rep) {
    log << "nearest eigenvalue " << format_real(rep.nearest) << " (target "
        << format_real(rep.target) << "), ipr " << rep.ipr << " vs threshold "
        << rep.localization_threshold << ", continuum " << rep.continuum_below << " below / "
        << rep.continuum_above << " above: " << to_string(rep.verdict) << '\n';
}

int run_piecewise(const RunConfig& cfg, std::ostream& log) {
    const EmbeddedPotentialSpec spec = build_embedded_potential(cfg.k0, cfg.a, cfg.A);
    log << "piecewise: b = " << format_real(spec.b) << ", a = " << format_real(spec.a)
        << ", B = " << format_real(spec.B) << ", zeta = " << format_real(spec.zeta) << '\n';
    io::write_json_file(cfg.out_dir / "piecewise_spec.json", io::to_json(spec));
    const EigenfunctionSample g = synthesize_eigenfunction(spec, cfg.grid_step);
    io::write_text_file(cfg.out_dir / "piecewise_eigenfunction.csv", csv_text(g));

    std::ostringstream scan;
    scan << "lambda,du1,du3\n";
    for (int i = 0; i <= 200; ++i) {
        const double lambda = spec.lambda() * (0.5 + 0.005 * i);
        const auto [du1, du3] = shoot_piecewise(spec, lambda);
        scan << format_real(lambda) << ',' << format_real(du1) << ',' << format_real(du3) << '\n';
    }
    io::write_text_file(cfg.out_dir / "piecewise_scan.csv", scan.str());
    check_piecewise(spec, log);

    if (cfg.skip_spectral) return ok;
    const SpectralReport rep = piecewise_spectrum(spec, default_X(cfg), default_n(cfg));
    write_spectrum(cfg, "piecewise", rep);
    log_report(log, rep);
    require(rep.verdict == SpectralVerdict::embedded_candidate,
            "discretized operator shows no embedded eigenvalue near k0^4");
    return ok;
}

// --- square of a Schrodinger operator -----------------------------------------------

Json square_document(const SchrodingerSquareSpec& s, double X, int n) {
    Json j;
    j["kind"] = "schrodinger_square";
    j["potential"] = s.name;
    j["X"] = format_real(X);
    j["n"] = n;
    Json kappas = Json::array();
    for (double k : s.kappas) kappas.push_back(format_real(k));
    j["kappas"] = kappas;
    Json predicted = Json::array();
    for (double v : schrodinger_square(s).predicted_eigenvalues) predicted.push_back(format_real(v));
    j["predicted_eigenvalues"] = predicted;
    return j;
}

struct SquareRun {
    std::vector<double> h_values;
    std::vector<double> l_values;
    SpectralReport report;
    double identity_error = 0.0;  // max |lambda_L - lambda_H^2| / |L|
};

SquareRun square_spectrum(const SchrodingerSquareSpec& s, double X, int n) {
    const SquareDiscretization d = discretize_schrodinger_and_square(s.V, X, n);
    const EigenPairs hp = eigensolve_symmetric(d.h_op);
    const EigenPairs lp = eigensolve_symmetric(d.l_op);
    SquareRun out;
    out.h_values.assign(hp.values.data(), hp.values.data() + hp.values.size());
    out.l_values.assign(lp.values.data(), lp.values.data() + lp.values.size());
    std::vector<double> squares;
    for (double v : out.h_values) squares.push_back(v * v);
    std::sort(squares.begin(), squares.end());
    for (std::size_t i = 0; i < squares.size(); ++i) {
        out.identity_error = std::max(out.identity_error, std::abs(squares[i] - out.l_values[i]));
    }
    out.identity_error /= lp.matrix_norm;
    DetectOptions opts;
    opts.tol = kSquareSpectralTol;
    const double kappa = s.kappas.front();
    out.report = detect_embedded(lp, d.l_op, kappa * kappa, std::sqrt(-kappa), opts);
    return out;
}

void check_square(const SchrodingerSquareSpec& s, const SquareRun& r, std::ostream& log) {
    log << "spectral identity error " << r.identity_error << " (relative to |L|)\n";
    require(r.identity_error <= kSquareIdentityTol, "spec(L_n) differs from spec(H_n)^2");
    const double kappa = s.kappas.front();
    double closest = r.h_values.front();
    for (double v : r.h_values) {
        if (std::abs(v - kappa) < std::abs(closest - kappa)) closest = v;
    }
    log << "H bound state " << format_real(closest) << " (expected " << format_real(kappa) << ")\n";
    require(std::abs(closest - kappa) < kSquareBoundStateTol, "H_n has no eigenvalue near kappa");
    log_report(log, r.report);
    require(r.report.verdict == SpectralVerdict::embedded_candidate,
            "L_n shows no embedded eigenvalue near kappa^2");
}

int run_hsquare(const RunConfig& cfg, std::ostream& log) {
    const SchrodingerSquareSpec s = sech2_well();
    const double X = default_X(cfg);
    const int n = default_n(cfg);
    io::write_json_file(cfg.out_dir / "hsquare_spec.json", square_document(s, X, n));
    const SquareRun r = square_spectrum(s, X, n);
    io::write_text_file(cfg.out_dir / "hsquare_h_eigenvalues.csv", column_text(r.h_values));
    io::write_text_file(cfg.out_dir / "hsquare_l_eigenvalues.csv", column_text(r.l_values));
    io::write_json_file(cfg.out_dir / "hsquare_report.json", io::to_json(r.report));
    check_square(s, r, log);
    return ok;
}

// --- verify ---------------------------------------------------------------------------

int run_verify(const RunConfig& cfg, std::ostream& log) {
    const Json doc = io::read_json_file(cfg.spec_path);
    const std::string kind = io::document_kind(doc);
    log << "verify: " << cfg.spec_path.string() << " (" << kind << ")\n";
    if (kind == "singular_example") {
        check_singular(io::singular_from_json(doc), log);
    } else if (kind == "embedded_potential") {
        const EmbeddedPotentialSpec spec = io::embedded_spec_from_json(doc);
        check_piecewise(spec, log);
        if (!cfg.skip_spectral) {
            RunConfig local = cfg;
            local.k0 = spec.k0;
            const SpectralReport rep = piecewise_spectrum(spec, default_X(local), default_n(local));
            log_report(log, rep);
            require(rep.verdict == SpectralVerdict::embedded_candidate,
                    "discretized operator shows no embedded eigenvalue near k0^4");
        }
    } else if (kind == "schrodinger_square") {
        const std::string name = doc.at("potential").get<std::string>();
        if (name != "sech2") throw DomainError("unknown built-in potential '" + name + "'");
        const SchrodingerSquareSpec s = sech2_well();
        const double X = io::parse_real(doc.at("X"));
        const int n = doc.at("n").get<int>();
        if (!(X > 0.0) || n < 50) throw DomainError("schrodinger_square: need X > 0 and n >= 50");
        const Json expected = square_document(s, X, n);
        require(doc.at("kappas") == expected.at("kappas") &&
                    doc.at("predicted_eigenvalues") == expected.at("predicted_eigenvalues"),
                "stored bound-state data disagree with the built-in potential");
        check_square(s, square_spectrum(s, X, n), log);
    } else {
        throw DomainError("verify: unsupported document kind '" + kind + "'");
    }
    log << "verify: all checks passed\n";
    return ok;
}

// --- sweep ----------------------------------------------------------------------------

int run_sweep(const RunConfig& cfg, std::ostream& log) {
    const EmbeddedPotentialSpec spec = build_embedded_potential(cfg.k0, cfg.a, cfg.A);
    std::vector<PotentialPiece> pieces = spec.pieces.pieces();
    for (auto& p : pieces) p.value -= spec.lambda();
    const StateVector4 at_b =
        propagate(PiecewisePotential(pieces), exponential_jet(spec.k0, spec.a), spec.b);
    const RegimeBounds bounds = find_brackets(at_b);
    log << "sweep: B in [" << format_real(bounds.B_flat) << ", " << format_real(bounds.B_sharp)
        << "], B* = " << format_real(spec.B) << '\n';

    auto cell = [](const std::optional<double>& z) {
        return z ? format_real(*z) : std::string("inf");
    };
    std::ostringstream os;
    os << "B,z1,z3,verdict\n";
    const int m = cfg.sweep_points;
    const double ratio = bounds.B_sharp / bounds.B_flat;
    for (int i = 0; i < m; ++i) {
        const double B = bounds.B_flat * std::pow(ratio, static_cast<double>(i) / (m - 1));
        const RaceResult r = z_race(B, at_b);
        os << format_real(B) << ',' << cell(r.z1) << ',' << cell(r.z3) << ','
           << to_string(r.verdict) << '\n';
    }
    io::write_text_file(cfg.out_dir / "sweep.csv", os.str());
    return ok;
}

}  // namespace

const char* to_string(Command c) {
    switch (c) {
        case Command::singular: return "singular";
        case Command::even_variant: return "even-variant";
        case Command::piecewise: return "piecewise";
        case Command::hsquare: return "hsquare";
        case Command::verify: return "verify";
        case Command::sweep: return "sweep";
    }
    return "?";
}

void validate(const RunConfig& cfg) {
    if (!(cfg.k0 > 0.0) || !std::isfinite(cfg.k0)) throw DomainError("k0 must be positive");
    if (!(cfg.a < 0.0) || !std::isfinite(cfg.a)) throw DomainError("a must be negative");
    if (!(cfg.A > 0.0) || !std::isfinite(cfg.A)) throw DomainError("A must be positive");
    if (cfg.n && *cfg.n < 50) throw DomainError("n must be at least 50");
    if (cfg.n && *cfg.n > kDenseEigenCap) throw DomainError("n must not exceed 4000");
    if (cfg.X && !(*cfg.X > 0.0)) throw DomainError("X must be positive");
    if (!(cfg.grid_step > 0.0)) throw DomainError("grid-step must be positive");
    if (cfg.sweep_points < 2) throw DomainError("points must be at least 2");
    if (cfg.command == Command::verify && cfg.spec_path.empty()) {
        throw DomainError("verify needs --spec");
    }
}

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;

    CLI::App app{"Fourth-order operators with embedded eigenvalues", "qembed"};
    app.require_subcommand(1);
    std::string out_dir = cfg.out_dir.string();
    double X = 0.0;
    int n = 0;
    std::string spec_path;

    auto common = [&](CLI::App* sub) { sub->add_option("--out", out_dir, "output directory"); };
    auto geometry = [&](CLI::App* sub) {
        sub->add_option("--X", X, "half-width of the truncated line");
        sub->add_option("--n", n, "interior grid points of the discretization");
    };
    auto params = [&](CLI::App* sub) {
        sub->add_option("--k0", cfg.k0, "eigenvalue is k0^4");
        sub->add_option("--a", cfg.a, "left end of the outer barrier (before the shift)");
        sub->add_option("--A", cfg.A, "height of the outer barrier");
    };

    auto* singular = app.add_subcommand("singular", "delta/delta' example with eigenvalue 1");
    common(singular);
    singular->add_option("--grid-step", cfg.grid_step, "eigenfunction sample spacing");
    singular->add_option("--X", X, "sample half-width");

    auto* even = app.add_subcommand("even-variant", "even delta/delta' example");
    common(even);
    even->add_option("--grid-step", cfg.grid_step, "eigenfunction sample spacing");
    even->add_option("--X", X, "sample half-width");

    auto* piecewise = app.add_subcommand("piecewise", "even piecewise-constant potential");
    common(piecewise);
    params(piecewise);
    geometry(piecewise);
    piecewise->add_option("--grid-step", cfg.grid_step, "eigenfunction sample spacing");
    piecewise->add_flag("--skip-spectral", cfg.skip_spectral, "do not run the dense eigensolve");

    auto* hsquare = app.add_subcommand("hsquare", "square of -d^2/dx^2 - 2 sech^2 x");
    common(hsquare);
    geometry(hsquare);

    auto* verify = app.add_subcommand("verify", "re-run the checks on an emitted document");
    common(verify);
    verify->add_option("--spec", spec_path, "JSON document to verify")->required();
    geometry(verify);
    verify->add_flag("--skip-spectral", cfg.skip_spectral, "do not run the dense eigensolve");

    auto* sweep = app.add_subcommand("sweep", "z1(B) and z3(B) across the continuation bracket");
    common(sweep);
    params(sweep);
    sweep->add_option("--points", cfg.sweep_points, "number of B samples");

    std::vector<std::string> argv_store{"qembed"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const CLI::App* sub : app.get_subcommands()) target = sub;
        throw HelpRequested(target->help());
    } catch (const CLI::ParseError& e) {
        throw DomainError(std::string("invalid arguments: ") + e.what());
    }

    const std::pair<CLI::App*, Command> table[] = {
        {singular, Command::singular}, {even, Command::even_variant},
        {piecewise, Command::piecewise}, {hsquare, Command::hsquare},
        {verify, Command::verify},       {sweep, Command::sweep}};
    for (const auto& [sub, cmd] : table) {
        if (sub->parsed()) {
            cfg.command = cmd;
            if (const auto* o = sub->get_option_no_throw("--X"); o && o->count() > 0) cfg.X = X;
            if (const auto* o = sub->get_option_no_throw("--n"); o && o->count() > 0) cfg.n = n;
        }
    }
    cfg.out_dir = out_dir;
    cfg.spec_path = spec_path;
    validate(cfg);
    return cfg;
}

int run(const RunConfig& cfg, std::ostream& log, std::ostream& diag) {
    auto fail = [&](const char* kind, const std::string& reason, int code) {
        std::string line = reason;
        for (char& ch : line) {
            if (ch == '\n') ch = ' ';
        }
        diag << "qembed: error=" << kind << " reason=" << line << '\n';
        return code;
    };
    try {
        validate(cfg);
        fs::create_directories(cfg.out_dir);
        switch (cfg.command) {
            case Command::singular:
            case Command::even_variant: return run_singular(cfg, log);
            case Command::piecewise: return run_piecewise(cfg, log);
            case Command::hsquare: return run_hsquare(cfg, log);
            case Command::verify: return run_verify(cfg, log);
            case Command::sweep: return run_sweep(cfg, log);
        }
    } catch (const DomainError& e) {
        return fail("validation", e.what(), validation_failure);
    } catch (const fs::filesystem_error& e) {
        return fail("validation", e.what(), validation_failure);
    } catch (const NumericalError& e) {
        return fail("numerical", e.what(), numerical_failure);
    } catch (const nlohmann::json::exception& e) {
        return fail("validation", e.what(), validation_failure);
    }
    return ok;
}

int main_entry(const std::vector<std::string>& args, std::ostream& log, std::ostream& diag) {
    RunConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const HelpRequested& h) {
        log << h.text;
        return ok;
    } catch (const DomainError& e) {
        diag << "qembed: error=validation reason=" << e.what() << '\n';
        return validation_failure;
    }
    return run(cfg, log, diag);
}

}  // namespace qembed::cli
