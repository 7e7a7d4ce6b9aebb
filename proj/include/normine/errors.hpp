#ifndef NORMINE_ERRORS_HPP
#define NORMINE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace normine {

// Base error for everything thrown by this library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unusable caller input: missing files, malformed data, bad arguments.
// The CLI maps this to exit code 2.
struct input_error : error {
  using error::error;
};

// Broken internal invariant. Always a bug, never a data problem.
// The CLI maps this to exit code 3.
struct internal_error : error {
  using error::error;
};

inline void require_input(bool ok, const std::string& msg) {
  if (!ok) throw input_error(msg);
}

inline void require_invariant(bool ok, const std::string& msg) {
  if (!ok) throw internal_error(msg);
}

}  // namespace normine

#endif
