#pragma once

#include <stdexcept>
#include <string>

namespace pcond {

// Scenario file is malformed or violates the schema. CLI exit code 2.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Minimization failed (iteration cap, fallback exhaustion). CLI exit code 3.
class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reconstruction could not produce a conclusive answer. CLI exit code 4.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pcond
