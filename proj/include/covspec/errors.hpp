#pragma once

#include <stdexcept>
#include <string>

namespace covspec {

// Invalid input data: malformed graphs, broken involutions, bad config values.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A configured cap or search budget was exceeded.
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// A numeric routine failed to converge; carries the iteration count reached.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, long iterations)
        : std::runtime_error(what + " (iterations: " + std::to_string(iterations) + ")"),
          iterations_(iterations) {}
    long iterations() const { return iterations_; }

private:
    long iterations_;
};

}  // namespace covspec
