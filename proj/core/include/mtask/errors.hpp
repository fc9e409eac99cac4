#ifndef MTASK_ERRORS_HPP
#define MTASK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mtask {

/// Bad parameters or malformed/inconsistent data. Maps to exit code 1 in the CLI.
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing or unreadable/unwritable files. Maps to exit code 2 in the CLI.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mtask

#endif
