// Surface-syntax parser.
//
// Hand-written lexer + recursive descent.  Every input either yields an AST
// or throws ParseError with a location and the token class that was
// expected; no input panics or crashes (a recursion-depth guard covers
// pathologically nested inputs).

#pragma once

#include <string>

#include "mezzo/error.hpp"
#include "mezzo/syntax.hpp"

namespace mezzo {

Program parse_program(const std::string& source, const std::string& filename = "<input>");

// Parses a standalone type; used by tests and diagnostics tooling.
Type parse_type(const std::string& source);

}  // namespace mezzo
