#pragma once

#include "kconn/numerics.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kconn::csv {

class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Complex literals use the grammar  <real>[(+|-)<real>i]  or  <real>i,
// e.g. "1.5-0.25i", "2", "-3i". Whitespace around tokens is ignored.
cplx parse_complex(std::string_view text);

/// Shortest text that round-trips the exact double values: "a+bi" / "a-bi".
std::string format_complex(cplx value);

/// Comma-separated complex literals, e.g. "1,0.5+2i".
CVector parse_vector(std::string_view text);
std::string format_vector(const CVector& v);

/// One matrix row per line, entries comma separated.
CMatrix read_matrix(std::istream& in);
CMatrix read_matrix_file(const std::string& path);
void write_matrix(std::ostream& out, const CMatrix& m);
void write_matrix_file(const std::string& path, const CMatrix& m);

}  // namespace kconn::csv
