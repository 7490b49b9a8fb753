#include "kconn/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace kconn::csv {

namespace {

std::string strip_spaces(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n') out.push_back(c);
    }
    return out;
}

double to_double(std::string_view token, std::string_view whole) {
    if (token.empty()) {
        throw ParseError("malformed complex literal '" + std::string(whole) + "'");
    }
    // from_chars rejects a leading '+'
    if (token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
        throw ParseError("malformed complex literal '" + std::string(whole) + "'");
    }
    return value;
}

// Position of the sign that separates real and imaginary parts, skipping the
// leading sign and exponent signs such as 1e-3.
std::size_t split_position(const std::string& s) {
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') return i;
    }
    return std::string::npos;
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

cplx parse_complex(std::string_view text) {
    const std::string s = strip_spaces(text);
    if (s.empty()) throw ParseError("empty complex literal");
    if (s.back() != 'i') return {to_double(s, text), 0.0};

    const std::string body = s.substr(0, s.size() - 1);
    const std::size_t cut = split_position(body);
    auto imag_of = [&](const std::string& token) {
        if (token.empty() || token == "+") return 1.0;
        if (token == "-") return -1.0;
        return to_double(token, text);
    };
    if (cut == std::string::npos) return {0.0, imag_of(body)};
    return {to_double(body.substr(0, cut), text), imag_of(body.substr(cut))};
}

std::string format_complex(cplx value) {
    std::string out = format_double(value.real());
    const double im = value.imag();
    if (std::signbit(im)) {
        out += "-" + format_double(-im);
    } else {
        out += "+" + format_double(im);
    }
    out += "i";
    return out;
}

CVector parse_vector(std::string_view text) {
    std::vector<cplx> entries;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        entries.push_back(parse_complex(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    CVector v(static_cast<Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<Index>(i)) = entries[i];
    return v;
}

std::string format_vector(const CVector& v) {
    std::string out;
    for (Index i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_complex(v(i));
    }
    return out;
}

CMatrix read_matrix(std::istream& in) {
    std::vector<CVector> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (strip_spaces(line).empty()) continue;
        rows.push_back(parse_vector(line));
        if (rows.back().size() != rows.front().size()) {
            throw ParseError("ragged CSV matrix: row " + std::to_string(rows.size()) + " has " +
                             std::to_string(rows.back().size()) + " entries, expected " +
                             std::to_string(rows.front().size()));
        }
    }
    if (rows.empty()) throw ParseError("empty CSV matrix");
    CMatrix m(static_cast<Index>(rows.size()), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Index>(r)) = rows[r].transpose();
    return m;
}

CMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file '" + path + "'");
    return read_matrix(in);
}

void write_matrix(std::ostream& out, const CMatrix& m) {
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_complex(m(r, c));
        }
        out << '\n';
    }
}

void write_matrix_file(const std::string& path, const CMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file '" + path + "'");
    write_matrix(out, m);
}

}  // namespace kconn::csv
