#pragma once

// Named verification suites shared by the CLI and the test drivers.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace kacpf {

struct CheckResult {
    std::string name;
    double achieved = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;

    bool pass() const noexcept;
    std::size_t passed() const noexcept;
};

struct VerifyOptions {
    int L = 1;
    int M = 6;
    int trials = 20;
    int jmax = 3;
    std::string grid = "coarse";  // coarse | fine
    std::uint64_t seed = 0;
    std::size_t samples = 10'000;
    int threads = 0;
};

/// Suites: identity, skew-orth, convergence, equivalence, empirical.
/// Unknown names throw InputError.
SuiteReport run_suite(std::string_view suite, const VerifyOptions& options);
std::vector<std::string_view> suite_names();

/// check,achieved,tolerance,pass,detail
void write_suite_csv(std::ostream& out, const SuiteReport& report);
/// One human-readable line per check plus a summary line.
void write_suite_text(std::ostream& out, const SuiteReport& report);

}  // namespace kacpf
