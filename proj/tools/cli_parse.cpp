#include "cli_parse.hpp"

#include <charconv>
#include <system_error>

#include "kacpf/csv.hpp"
#include "kacpf/errors.hpp"

namespace kacpf::cli {
namespace {

double parse_real(std::string_view s, std::string_view whole) {
    if (s == "" || s == "+") return 1.0;
    if (s == "-") return -1.0;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size())
        throw InputError("cannot parse complex literal '" + std::string(whole) + "'");
    return v;
}

}  // namespace

std::complex<double> parse_complex(std::string_view text) {
    if (text.empty()) throw InputError("empty complex literal");
    if (text.back() != 'i') return {parse_real(text, text), 0.0};
    const std::string_view body = text.substr(0, text.size() - 1);
    // Split at the last sign that is not leading and not an exponent sign.
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string_view::npos) return {0.0, parse_real(body, text)};
    const double re = parse_real(body.substr(0, split), text);
    return {re, parse_real(body.substr(split), text)};
}

std::string format_complex(std::complex<double> z) {
    std::string out = csv_number(z.real());
    if (!(z.imag() < 0.0)) out += '+';
    return out + csv_number(z.imag()) + "i";
}

}  // namespace kacpf::cli
