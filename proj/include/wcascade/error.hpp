#pragma once

#include <stdexcept>
#include <string>

namespace wcascade {

// Precondition and input-validation failures are reported as std::invalid_argument.
// The two types below cover the remaining failure classes the CLI maps to exit codes.

// A stage of an analysis could not produce a result from otherwise valid input.
class analysis_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reading or writing a file failed.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wcascade
