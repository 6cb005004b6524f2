#pragma once

#include <stdexcept>
#include <string>

namespace dcm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DatasetErrc {
    io,
    bad_dictionary,
    missing_column,
    duplicate_column,
    non_finite_value,
    bad_availability,
    bad_choice,
    choice_unavailable,
    too_few_available,
};

class DatasetError : public Error {
public:
    DatasetError(DatasetErrc code, const std::string& what) : Error(what), code_(code) {}
    DatasetErrc code() const noexcept { return code_; }

private:
    DatasetErrc code_;
};

enum class SpecErrc {
    syntax,
    undeclared_parameter,
    duplicate_parameter,
    unknown_function,
    invalid_asc,
    unknown_variable,
    domain_violation,
    missing_alternative,
};

/// Spec parse/bind failure. line and col are 1-based; 0 when not tied to a source position.
class SpecError : public Error {
public:
    SpecError(SpecErrc code, const std::string& what, int line = 0, int col = 0)
        : Error(line > 0 ? std::to_string(line) + ":" + std::to_string(col) + ": " + what : what),
          code_(code), line_(line), col_(col) {}
    SpecErrc code() const noexcept { return code_; }
    int line() const noexcept { return line_; }
    int col() const noexcept { return col_; }

private:
    SpecErrc code_;
    int line_;
    int col_;
};

/// A utility expression evaluated to NaN or infinity.
class NonFiniteUtility : public Error {
public:
    using Error::Error;
};

class MissingCoefficient : public Error {
public:
    using Error::Error;
};

}  // namespace dcm
