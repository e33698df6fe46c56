#pragma once

#include <stdexcept>
#include <string>

namespace spidersom {

/// Malformed or inconsistent input data (bad cells, ragged rows, dimension mismatch).
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spidersom
