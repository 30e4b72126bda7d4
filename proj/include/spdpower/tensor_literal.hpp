#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "spdpower/matrix.hpp"
#include "spdpower/textio.hpp"

namespace spdpower {

/// Parses a command-line tensor literal. Accepted forms:
///   I, I3          3x3 identity            I2           2x2 identity
///   diag(a,b)      2x2 diagonal            diag(a,b,c)  3x3 diagonal
///   a,b,c          vech of a 2x2 tensor    a,...,f      vech of a 3x3 tensor (6 values)
///   4 / 9 values   full row-major 2x2 / 3x3 matrix, checked for symmetry
inline SymMatrix parse_tensor_literal(std::string_view text) {
    const auto fail = [&](const std::string& why) -> SymMatrix {
        throw std::invalid_argument("bad tensor literal '" + std::string(text) + "': " + why);
    };

    std::string_view t = text;
    while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
    while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
    if (t.empty()) return fail("empty");

    if (t == "I" || t == "I3") return SymMatrix::identity(3);
    if (t == "I2") return SymMatrix::identity(2);

    if (t.starts_with("diag(")) {
        if (!t.ends_with(')')) return fail("missing ')'");
        std::vector<double> d;
        for (const std::string& f : split_csv(t.substr(5, t.size() - 6))) {
            const auto v = parse_double(f);
            if (!v) return fail("cannot parse number '" + f + "'");
            d.push_back(*v);
        }
        if (d.size() != 2 && d.size() != 3) return fail("diag() takes 2 or 3 values");
        return SymMatrix::diagonal(std::span<const double>(d.data(), d.size()));
    }

    std::vector<double> values;
    for (const std::string& f : split_csv(t)) {
        const auto v = parse_double(f);
        if (!v) return fail("cannot parse number '" + f + "'");
        values.push_back(*v);
    }
    if (values.size() == 3) return unvech(values, 2);
    if (values.size() == 6) return unvech(values, 3);
    if (values.size() == 4 || values.size() == 9) {
        const int m = values.size() == 4 ? 2 : 3;
        SymMatrix s(m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                const double upper = values[static_cast<std::size_t>(i) * m + j];
                const double lower = values[static_cast<std::size_t>(j) * m + i];
                if (std::abs(upper - lower) > 1e-9 * std::max(1.0, std::abs(upper)))
                    return fail("matrix is not symmetric");
                s.set(i, j, upper);
            }
        return s;
    }
    return fail("expected 3 or 6 vech values, 4 or 9 matrix values, diag(...), or I");
}

/// vech of a tensor as a comma-separated literal (the same shape
/// parse_tensor_literal accepts).
inline std::string format_vech(const SymMatrix& s, int significant = 12) {
    std::string out;
    for (std::size_t k = 0; k < s.vech().size(); ++k)
        out += (k ? "," : "") + format_double(s.vech()[k], significant);
    return out;
}

} // namespace spdpower
