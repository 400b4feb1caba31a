#pragma once

#include <stdexcept>
#include <string>

namespace qfcsim {

// Maps onto the CLI exit codes: usage/config = 2, data = 3, convergence = 4.
enum class ErrorKind { invalid_argument, data, convergence };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw InvalidArgument(message);
}

}  // namespace qfcsim
