#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gjra {

// ---------------------------------------------------------------------------
// Error kinds. Each maps to a distinct CLI exit code (see cli.hpp).
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant; carries the offending field name.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error("invalid " + field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

/// An allocation cannot be evaluated; carries (device, position, constraint).
/// Indices are -1 when not applicable.
class InfeasibleError : public Error {
 public:
  InfeasibleError(int device, int position, std::string constraint)
      : Error("infeasible: device " + std::to_string(device) + ", position " +
              std::to_string(position) + ": " + constraint),
        device_(device),
        position_(position),
        constraint_(std::move(constraint)) {}
  int device() const noexcept { return device_; }
  int position() const noexcept { return position_; }
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  int device_;
  int position_;
  std::string constraint_;
};

/// Exhaustive search refused: the candidate space exceeds the enumeration cap.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// dB <-> linear. The single conversion pair used everywhere; stored pathloss
// values are dB, stored gains are linear.
// ---------------------------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// ---------------------------------------------------------------------------
// Dense row-major matrix, value semantics.
// ---------------------------------------------------------------------------

template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows),
        cols_(cols),
        v_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
           fill) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  bool empty() const noexcept { return v_.empty(); }

  T& operator()(int r, int c) {
    return v_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const T& operator()(int r, int c) const {
    return v_[static_cast<std::size_t>(r) * cols_ + c];
  }

  void fill(T value) { v_.assign(v_.size(), value); }

  bool operator==(const Grid&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> v_;
};

// ---------------------------------------------------------------------------
// Deterministic random draws. std::mt19937_64 is fully specified by the
// standard; the distribution adaptors are not, so the mappings live here and
// results are reproducible across platforms.
// ---------------------------------------------------------------------------

/// 53-bit uniform in [0, 1).
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

/// Unbiased uniform draw from {0, ..., n-1} via rejection.
inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  std::uint64_t x;
  do {
    x = gen();
  } while (x < threshold);
  return x % n;
}

/// Derives an independent stream seed from (seed, tag); splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Fixed text formatting for CSV emission: 12 significant digits, so that
// identical runs produce identical bytes.
// ---------------------------------------------------------------------------

inline std::string fmt_g12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace gjra
