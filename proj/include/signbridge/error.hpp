#pragma once

#include <stdexcept>
#include <string>

namespace signbridge {

// Malformed input files or datasets that do not fit a model (CLI exit 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Remote corrector could not be reached within the retry budget.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Remote corrector answered, but not with exactly three usable candidates.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace signbridge
