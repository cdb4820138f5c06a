#pragma once

#include <stdexcept>
#include <string>

namespace sphere {

// Argument outside the domain of a density or geometric routine.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// An improper integral that does not converge.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// A required verdict (e.g. Condition A or B) does not hold.
class PrereqError : public std::runtime_error {
public:
    explicit PrereqError(const std::string& what) : std::runtime_error(what) {}
};

// Mesh or sample budget exceeded, or the request is too small to discretize.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

class UnreachableError : public std::runtime_error {
public:
    explicit UnreachableError(const std::string& what) : std::runtime_error(what) {}
};

// Curve or ball whose defining data collapse (coincident endpoints, empty ball).
class DegenerateError : public std::runtime_error {
public:
    explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configuration or graph file.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sphere
