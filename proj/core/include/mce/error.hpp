#pragma once

#include <stdexcept>
#include <string>

namespace mce {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed mesh input, with the offending line when parsing.
class MeshError : public Error {
public:
    using Error::Error;
};

/// Geometry that the macro element cannot handle (needle triangles, degenerate splits).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Invalid coefficients, boundary setups or run configurations.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Linear solve failure. `block()` names the dof block responsible when known.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::string block = {})
        : Error(what), block_(std::move(block)) {}
    const std::string& block() const noexcept { return block_; }

private:
    std::string block_;
};

}  // namespace mce
