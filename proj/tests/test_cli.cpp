#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cli_parse.hpp"
#include "kacpf/errors.hpp"

#ifndef KACPF_CLI_PATH
#error "KACPF_CLI_PATH must name the kacpf executable"
#endif

namespace fs = std::filesystem;
using kacpf::cli::parse_complex;

namespace {

struct RunResult {
    int status = -1;
    std::string out;
};

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "kacpf_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Runs the CLI with stdout captured to a file and stderr discarded.
RunResult run(const std::string& args, const std::string& tag) {
    const fs::path out = scratch_dir() / (tag + ".out");
    const std::string cmd = std::string("\"") + KACPF_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                            (scratch_dir() / (tag + ".err")).string() + "\"";
    const int raw = std::system(cmd.c_str());
    RunResult r;
#ifdef WEXITSTATUS
    r.status = WEXITSTATUS(raw);
#else
    r.status = raw;
#endif
    r.out = slurp(out);
    return r;
}

double last_value(const std::string& csv) {
    const auto line_end = csv.find_last_not_of('\n');
    const auto line_start = csv.rfind('\n', line_end);
    const std::string line = csv.substr(line_start + 1, line_end - line_start);
    return std::stod(line.substr(line.rfind(',') + 1));
}

}  // namespace

TEST_CASE("complex literal parsing") {
    CHECK(parse_complex("0.3+0.4i") == std::complex<double>(0.3, 0.4));
    CHECK(parse_complex("-0.3-0.4i") == std::complex<double>(-0.3, -0.4));
    CHECK(parse_complex("0.5i") == std::complex<double>(0.0, 0.5));
    CHECK(parse_complex("-i") == std::complex<double>(0.0, -1.0));
    CHECK(parse_complex("i") == std::complex<double>(0.0, 1.0));
    CHECK(parse_complex("0.25") == std::complex<double>(0.25, 0.0));
    CHECK(parse_complex("1e-3+2e-1i") == std::complex<double>(1e-3, 0.2));
    CHECK(parse_complex("1.5e+0-2E-1i") == std::complex<double>(1.5, -0.2));
    CHECK_THROWS_AS(parse_complex(""), kacpf::InputError);
    CHECK_THROWS_AS(parse_complex("0.3+0.4"), kacpf::InputError);
    CHECK_THROWS_AS(parse_complex("abc"), kacpf::InputError);
    CHECK_THROWS_AS(parse_complex("0.3+0.4j"), kacpf::InputError);
    CHECK(parse_complex(kacpf::cli::format_complex({0.1, -0.2})) == std::complex<double>(0.1, -0.2));
}

TEST_CASE("sample output is byte-identical for a fixed seed") {
    const std::string args = "--L 1 --M 8 --samples 20 --seed 5 sample --ensemble truncated";
    const auto a = run(args + " --threads 1", "det_a");
    const auto b = run(args + " --threads 3", "det_b");
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("draw_index,kind,re,im\n", 0) == 0);
    const auto c = run("--L 1 --M 8 --samples 20 --seed 6 sample --ensemble truncated", "det_c");
    CHECK(c.out != a.out);
}

TEST_CASE("invalid configurations are rejected") {
    CHECK(run("--M 7 sample", "odd_m").status == 2);
    CHECK(run("--L 0 sample", "zero_l").status != 0);
    CHECK(run("verify --suite nonsense", "bad_suite").status == 2);
    CHECK(run("eval --method bleher-di --real 0.1 --real 0.1", "coincident").status == 2);
    CHECK(run("eval --method prosen --complex 0.2-0.3i", "lower_half").status == 2);
}

TEST_CASE("eval prints the one-point density") {
    const auto r = run("eval --method pfaffian --real 0.0", "eval_zero");
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("x1,value\n", 0) == 0);
    CHECK(last_value(r.out) == doctest::Approx(0.3183098861837908).epsilon(1e-14));

    const auto pf = run("eval --method pfaffian --complex 0.1+0.3i --complex -0.2+0.5i", "eval_pf");
    const auto pr = run("eval --method prosen --complex 0.1+0.3i --complex -0.2+0.5i", "eval_pr");
    REQUIRE(pf.status == 0);
    REQUIRE(pr.status == 0);
    CHECK(last_value(pr.out) == doctest::Approx(last_value(pf.out)).epsilon(1e-8));

    const auto grid = run("eval --grid -0.5 0.5 5", "eval_grid");
    REQUIRE(grid.status == 0);
    CHECK(std::count(grid.out.begin(), grid.out.end(), '\n') == 6);
}

TEST_CASE("verify exits zero when every check passes") {
    const auto r = run("--M 6 verify --suite identity --trials 5", "verify_identity");
    CHECK(r.status == 0);
    CHECK(r.out.rfind("check,achieved,tolerance,pass,detail\n", 0) == 0);
}

TEST_CASE("config file supplies option defaults") {
    const fs::path cfg = scratch_dir() / "run.ini";
    {
        std::ofstream f(cfg);
        f << "L=1\nM=8\nsamples=20\nseed=5\n";
    }
    const auto from_file = run("--config \"" + cfg.string() + "\" sample", "cfg_file");
    const auto from_flags = run("--L 1 --M 8 --samples 20 --seed 5 sample", "cfg_flags");
    REQUIRE(from_file.status == 0);
    CHECK(from_file.out == from_flags.out);
}

TEST_CASE("output file option") {
    const fs::path out = scratch_dir() / "density.csv";
    fs::remove(out);
    const auto r = run("--L 1 --M 8 --samples 200 --seed 1 --out \"" + out.string() +
                           "\" density --kind real --lo -0.9 --hi 0.9 --bins 6",
                       "density_out");
    CHECK(r.status <= 1);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("bin_lo,bin_hi,density,stderr\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}
