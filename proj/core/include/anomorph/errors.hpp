#pragma once

#include <stdexcept>
#include <string>

namespace anomorph {

// Precondition and input-validation failures. The CLI maps these to exit
// code 2; everything else derived from std::exception maps to 1.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace anomorph
