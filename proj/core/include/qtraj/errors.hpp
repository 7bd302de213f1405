#ifndef QTRAJ_ERRORS_HPP
#define QTRAJ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qtraj {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad model definition: dimension mismatches, invalid couplings, broken
// state/operator invariants.
struct ModelError : Error {
    using Error::Error;
};

// Invalid run configuration (CLI / config file level).
struct ConfigError : Error {
    using Error::Error;
};

// Numerical failure during integration (blow-up, positivity loss).
struct IntegrationError : Error {
    using Error::Error;
};

} // namespace qtraj

#endif
