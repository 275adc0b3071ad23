#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsv {

/// Runtime numerical breakdown: solution blow-up, a failed internal
/// consistency identity, an eigensolver that did not converge.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A checked invariant of the library was violated by actual data.
class invariant_violation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gram-Schmidt hit a numerically dependent vector.  Carries the index of
/// the offending frame member so callers can shrink the frame.
class rank_deficiency_error : public numerical_error {
public:
    rank_deficiency_error(std::size_t index, const std::string& what)
        : numerical_error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace nsv
