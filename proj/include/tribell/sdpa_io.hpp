#pragma once

// SDPA sparse format (.dat-s) for problems in the solver's standard form.
//
// SDPA solves  min c'x  s.t.  sum_i F_i x_i - F_0 >= 0.  The writer maps
// maximize c'y + c0 s.t. F0 + sum y_i F_i >= 0 onto it with x = y, c -> -c and
// F_0 -> -F0. Linear equalities a'y = b become a pair of diagonal entries
// a'y - b >= 0 and b - a'y >= 0 in one extra diagonal block. The objective
// constant is not representable and is written as a comment.

#include <iosfwd>
#include <string>

#include "tribell/sdp.hpp"

namespace tribell::sdp {

void write_sdpa(std::ostream& out, const StandardForm& problem, const std::string& comment = {});
std::string to_sdpa(const StandardForm& problem, const std::string& comment = {});

/// Reads the format back into standard form (diagonal blocks become 1x1
/// blocks, no equalities). Throws ParseError with the line number.
StandardForm read_sdpa(std::istream& in);
StandardForm from_sdpa(const std::string& text);

}  // namespace tribell::sdp
