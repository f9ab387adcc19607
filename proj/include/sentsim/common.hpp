#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace sentsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };    // bad config / manifest / schema
struct GeometryError : Error { using Error::Error; };  // bad mesh geometry request
struct SolverError : Error { using Error::Error; };    // linear/local solve breakdown
struct StateError : Error { using Error::Error; };     // invariant violated at runtime
struct RangeError : Error { using Error::Error; };     // out-of-domain evaluation
struct FitError : Error { using Error::Error; };       // permeation fit failure
struct StepError : Error { using Error::Error; };      // time step failed below dt_min

/// printf-style warning to stderr, prefixed.
inline void warnf(const char* fmt, ...) {
  std::fprintf(stderr, "[sentsim] warning: ");
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fprintf(stderr, "\n");
}

}  // namespace sentsim
