/**
 * @file rational.hpp
 * @brief Exact rational scalars and small helpers shared across the engine.
 *
 * All series coefficients in this library are exact rationals (GMP mpq).
 * Nothing here ever rounds.
 */
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace frobjet {

using Rat = mpq_class;

/// Error taxonomy used across the engine. `kind` drives CLI exit codes.
struct Error : std::runtime_error {
  enum class Kind {
    parse,        ///< malformed model file / CLI input
    dimension,    ///< shape mismatch between operands
    composition,  ///< substitution precondition violated
    depth,        ///< requested data beyond computed truncation
    gauge,        ///< normalization / gauge fixing failed
    internal,     ///< invariant broken inside the engine
  };
  Kind kind;
  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

[[noreturn]] inline void fail(Error::Kind k, const std::string& msg) {
  throw Error(k, msg);
}

/// Parse "p", "-p" or "p/q" (q > 0 after canonicalization). Throws Error::parse.
Rat rat_parse(const std::string& s);

/// Render canonical "p" or "p/q" with q > 1 only when needed.
std::string rat_str(const Rat& r);

Rat rat_factorial(unsigned n);
Rat rat_binomial(unsigned n, unsigned k);

/// r^n for n >= 0.
Rat rat_pow(const Rat& r, unsigned n);

inline bool rat_is_zero(const Rat& r) { return sgn(r) == 0; }

/// True when r is an integer; if so *out receives it (must fit in long).
bool rat_integer(const Rat& r, long* out = nullptr);

}  // namespace frobjet
