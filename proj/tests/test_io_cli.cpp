#include "qembed/cli.hpp"
#include "qembed/errors.hpp"
#include "qembed/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qembed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qembed_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Outcome {
    int code;
    std::string log;
    std::string diag;
};

Outcome run_cli(std::vector<std::string> args) {
    std::ostringstream log, diag;
    const int code = cli::main_entry(args, log, diag);
    return {code, log.str(), diag.str()};
}

}  // namespace

TEST_CASE("reals round-trip exactly through their JSON encoding") {
    for (double v : {0.1, -2.858787853743632, 1e-300, 6.02214076e23, M_PI}) {
        CHECK(io::parse_real(io::Json(io::format_real(v))) == v);
    }
    CHECK(std::isinf(io::parse_real(io::Json("-inf"))));
    CHECK(io::parse_real(io::Json(2.5)) == 2.5);
    CHECK_THROWS_AS(io::parse_real(io::Json("1.5abc")), DomainError);
    CHECK_THROWS_AS(io::parse_real(io::Json(true)), DomainError);
}

TEST_CASE("embedded potential document round trip") {
    const EmbeddedPotentialSpec spec = build_embedded_potential(1.0, -3.0, 1.0);
    const io::Json j = io::to_json(spec);
    CHECK(io::document_kind(j) == "embedded_potential");
    const EmbeddedPotentialSpec back = io::embedded_spec_from_json(j);
    CHECK(back.a == spec.a);
    CHECK(back.b == spec.b);
    CHECK(back.B == spec.B);
    CHECK(back.zeta == spec.zeta);
    io::Json stale = j;
    stale["B"] = io::format_real(spec.B + 1e-2);
    CHECK_THROWS_AS(io::embedded_spec_from_json(stale), ConsistencyError);
    io::Json broken = j;
    broken.erase("k0");
    CHECK_THROWS_AS(io::embedded_spec_from_json(broken), DomainError);
}

TEST_CASE("singular example document round trip") {
    const SingularExample ex = singular_example_spec();
    const SingularExample back = io::singular_from_json(io::to_json(ex));
    CHECK(back.amplitude == ex.amplitude);
    CHECK(back.interfaces[0].c == ex.interfaces[0].c);
    CHECK(back.interfaces[1].gamma == ex.interfaces[1].gamma);
    CHECK(back.parity == ex.parity);
    CHECK_THROWS_AS(io::document_kind(io::Json::array()), DomainError);
}

TEST_CASE("eigenfunction CSV round trip") {
    EigenfunctionSample s;
    s.lambda = 1.0;
    s.grid = {-0.5, 0.0, 0.5};
    s.values = {0.1, 1.0 / 3.0, 0.1};
    std::stringstream ss;
    io::write_eigenfunction_csv(ss, s);
    const EigenfunctionSample back = io::read_eigenfunction_csv(ss);
    CHECK(back.lambda == 1.0);
    CHECK(back.grid == s.grid);
    CHECK(back.values == s.values);
    std::stringstream bad("x,y\n");
    CHECK_THROWS_AS(io::read_eigenfunction_csv(bad), DomainError);
}

TEST_CASE("argument parsing and validation") {
    const cli::RunConfig cfg = cli::parse_args({"piecewise", "--k0", "1.5", "--a", "-2", "--A", "3", "--n", "400"});
    CHECK(cfg.command == cli::Command::piecewise);
    CHECK(cfg.k0 == 1.5);
    CHECK(cfg.a == -2.0);
    CHECK(cfg.A == 3.0);
    CHECK(cfg.n == 400);
    CHECK_FALSE(cfg.X.has_value());
    CHECK_THROWS_AS(cli::parse_args({"piecewise", "--k0", "-1"}), DomainError);
    CHECK_THROWS_AS(cli::parse_args({"piecewise", "--a", "0.5"}), DomainError);
    CHECK_THROWS_AS(cli::parse_args({"piecewise", "--n", "20"}), DomainError);
    CHECK_THROWS_AS(cli::parse_args({"verify"}), DomainError);
    CHECK_THROWS_AS(cli::parse_args({"frobnicate"}), DomainError);
    CHECK_THROWS_AS(cli::parse_args({}), DomainError);
}

TEST_CASE("output directory defaults to the environment variable") {
    const fs::path dir = scratch("env");
    ::setenv(cli::kOutDirEnv, dir.c_str(), 1);
    const cli::RunConfig cfg = cli::parse_args({"singular"});
    ::unsetenv(cli::kOutDirEnv);
    CHECK(cfg.out_dir == dir);
    CHECK(cli::parse_args({"singular", "--out", "elsewhere"}).out_dir == fs::path("elsewhere"));
}

TEST_CASE("validation failures exit 2 with a one-line reason") {
    const Outcome o = run_cli({"piecewise", "--k0", "-1", "--a", "-3", "--A", "1"});
    CHECK(o.code == 2);
    CHECK(o.diag.rfind("qembed: error=validation reason=", 0) == 0);
    CHECK(std::count(o.diag.begin(), o.diag.end(), '\n') == 1);
}

TEST_CASE("help exits 0") {
    const Outcome o = run_cli({"piecewise", "--help"});
    CHECK(o.code == 0);
    CHECK(o.log.find("--k0") != std::string::npos);
}

TEST_CASE("singular: emit twice is bit-identical, verify passes") {
    const fs::path d1 = scratch("sing1"), d2 = scratch("sing2");
    REQUIRE(run_cli({"singular", "--out", d1.string()}).code == 0);
    REQUIRE(run_cli({"singular", "--out", d2.string()}).code == 0);
    for (const char* f : {"singular.json", "singular_eigenfunction.csv", "singular_scan.csv"}) {
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    CHECK(run_cli({"verify", "--spec", (d1 / "singular.json").string()}).code == 0);
    REQUIRE(run_cli({"even-variant", "--out", d1.string()}).code == 0);
    CHECK(run_cli({"verify", "--spec", (d1 / "even_variant.json").string()}).code == 0);
}

TEST_CASE("verify: tampered documents") {
    const fs::path dir = scratch("tamper");
    REQUIRE(run_cli({"singular", "--out", dir.string()}).code == 0);
    io::Json j = io::read_json_file(dir / "singular.json");
    j["interfaces"][1]["gamma"] = "4.5";
    io::write_json_file(dir / "bad_gamma.json", j);
    const Outcome o = run_cli({"verify", "--spec", (dir / "bad_gamma.json").string()});
    CHECK(o.code == 3);
    CHECK(o.diag.rfind("qembed: error=numerical reason=", 0) == 0);

    j = io::read_json_file(dir / "singular.json");
    j["kind"] = "mystery";
    io::write_json_file(dir / "bad_kind.json", j);
    CHECK(run_cli({"verify", "--spec", (dir / "bad_kind.json").string()}).code == 2);
    CHECK(run_cli({"verify", "--spec", (dir / "missing.json").string()}).code == 2);
}

TEST_CASE("piecewise without the eigensolve, then verify with B perturbed") {
    const fs::path dir = scratch("piecewise");
    REQUIRE(run_cli({"piecewise", "--out", dir.string(), "--skip-spectral", "--grid-step", "0.01"}).code == 0);
    CHECK(fs::exists(dir / "piecewise_spec.json"));
    CHECK(fs::exists(dir / "piecewise_eigenfunction.csv"));
    CHECK(run_cli({"verify", "--skip-spectral", "--spec", (dir / "piecewise_spec.json").string()}).code == 0);

    io::Json j = io::read_json_file(dir / "piecewise_spec.json");
    const double B = io::parse_real(j["B"]);
    j["B"] = io::format_real(B + 1e-2);
    io::write_json_file(dir / "only_B.json", j);
    CHECK(run_cli({"verify", "--skip-spectral", "--spec", (dir / "only_B.json").string()}).code == 3);

    // consistent rewrite of the perturbed piece as well
    const EmbeddedPotentialSpec orig = io::embedded_spec_from_json(io::read_json_file(dir / "piecewise_spec.json"));
    const EmbeddedPotentialSpec moved =
        make_embedded_spec(orig.k0, orig.a, orig.b, orig.A, orig.B + 1e-2, orig.zeta);
    io::write_json_file(dir / "moved.json", io::to_json(moved));
    const Outcome o = run_cli({"verify", "--skip-spectral", "--spec", (dir / "moved.json").string()});
    CHECK(o.code == 3);
    CHECK(o.diag.find("matching residual") != std::string::npos);
}

TEST_CASE("sweep covers the continuation bracket") {
    const fs::path dir = scratch("sweep");
    REQUIRE(run_cli({"sweep", "--out", dir.string(), "--points", "12"}).code == 0);
    std::istringstream in(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "B,z1,z3,verdict");
    int rows = 0;
    bool saw_z1 = false, saw_z3 = false;
    while (std::getline(in, line)) {
        ++rows;
        saw_z1 = saw_z1 || line.find("Z1_FIRST") != std::string::npos;
        saw_z3 = saw_z3 || line.find("Z3_FIRST") != std::string::npos;
    }
    CHECK(rows == 12);
    CHECK(saw_z1);
    CHECK(saw_z3);
}

TEST_CASE("unwritable output directory is a validation failure") {
    const fs::path dir = scratch("blocked");
    std::ofstream(dir / "file") << "x";
    const Outcome o = run_cli({"singular", "--out", (dir / "file" / "sub").string()});
    CHECK(o.code == 2);
}
