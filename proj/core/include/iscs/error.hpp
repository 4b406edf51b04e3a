#pragma once

#include <stdexcept>
#include <string>

namespace iscs {

// Failure categories map one-to-one onto CLI exit codes (2, 3, 4).

/// Bad input: unreadable file, malformed format, invalid parameter.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data integrity failure: checksum or model/manifest hash mismatch.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant did not hold. Always a bug.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace iscs
