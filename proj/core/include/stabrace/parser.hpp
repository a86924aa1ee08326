#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "stabrace/ast.hpp"

namespace stabrace {

class ParseError : public std::runtime_error {
public:
  enum class Kind {
    Syntax,
    /// `push`/`pop` written in source.
    ReservedConstruct,
    /// argN used where N exceeds the method's arity, or non-contiguous formals.
    FormalOutOfRange,
    UnknownMethod,
    ArityMismatch,
    DuplicateMethod,
  };

  ParseError(Kind kind, SourcePos pos, std::string expected,
             std::string message);

  Kind kind() const { return kind_; }
  SourcePos pos() const { return pos_; }
  /// What the parser was looking for (syntax errors only).
  const std::string& expected() const { return expected_; }

private:
  Kind kind_;
  SourcePos pos_;
  std::string expected_;
};

std::string_view to_string(ParseError::Kind kind);

/// Parses the surface syntax. Every method body is prefixed with an
/// implicit `skip`; entries default to all methods in declaration order.
Program parse_program(std::string_view source);

}  // namespace stabrace
