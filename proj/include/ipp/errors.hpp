#pragma once

#include <stdexcept>
#include <string>

namespace ipp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-domain input: files, datasets, argument ranges.
struct DataError : Error {
    using Error::Error;
};

} // namespace ipp
