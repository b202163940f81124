#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtest {

using Index = std::uint32_t;

// Error types. Everything derives from std::runtime_error so callers that do
// not care about the category can catch one type.

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AsymmetryError : public std::runtime_error {
 public:
  AsymmetryError(Index i, Index j, const std::string& what)
      : std::runtime_error(what), i_(i), j_(j) {}
  Index i() const { return i_; }
  Index j() const { return j_; }

 private:
  Index i_;
  Index j_;
};

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotClean : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ProvenanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }
inline std::uint64_t choose3(std::uint64_t n) { return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6; }
inline std::uint64_t choose4(std::uint64_t n) {
  return n < 4 ? 0 : n * (n - 1) * (n - 2) * (n - 3) / 24;
}

}  // namespace mtest
