#pragma once

#include <stdexcept>
#include <string>

namespace doblab {

/// Raised for every precondition violation and numerical failure in the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace doblab
