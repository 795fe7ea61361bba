#ifndef DEGCRAFT_ERRORS_HPP
#define DEGCRAFT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace degcraft {

// Bad parameters, malformed data, contract violations. CLI exit code 1.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and codec failures. CLI exit code 2.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace degcraft

#endif
