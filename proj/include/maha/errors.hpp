#pragma once

#include <stdexcept>
#include <string>

namespace maha {

// Error taxonomy shared across the engine. The CLI maps each class to a
// distinct exit code (see README), the HTTP service to a status code.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures: missing files, unwritable paths.
class io_error : public error {
public:
    using error::error;
};

// Malformed persisted data: parse failures, schema version mismatches,
// checksum failures, truncated files.
class format_error : public error {
public:
    using error::error;
};

// Corpus or dataset invariant failures.
class validation_error : public error {
public:
    using error::error;
};

// Bad call arguments: dimension mismatches, unknown ids, invalid params.
class invalid_argument_error : public error {
public:
    using error::error;
};

// Remote provider failures: transport errors, contract violations.
class provider_error : public error {
public:
    using error::error;
};

} // namespace maha
