#pragma once

#include <stdexcept>

#include "trellis_astar/bits.hpp"

namespace trellis_astar {

// CapacityError lives in bits.hpp since the bit sets raise it.

/// Parameters outside an operation's domain (empty tree lists, lambda <= 0, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The cost model does not fit the data (negative Dasgupta weights, wrong heuristic).
class ObjectiveMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A cluster was looked up in a trellis that does not contain it.
class MissingNodeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// No complete hierarchy is reachable through the trellis.
class SearchExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or document.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trellis_astar
