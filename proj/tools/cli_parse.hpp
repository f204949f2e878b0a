#pragma once

#include <complex>
#include <string>
#include <string_view>

namespace kacpf::cli {

/// Parses "a+bi", "a-bi", "bi", "-bi", "i" or a bare real "a". Locale-free.
/// Throws InputError on anything else.
std::complex<double> parse_complex(std::string_view text);

std::string format_complex(std::complex<double> z);

}  // namespace kacpf::cli
