#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hetlink {

// Malformed caller input: bad ids, shapes, ratios, file contents.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input is well-formed but the operation is undefined on it
// (empty edge set, complete graph, empty sample lists, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A configured budget or retry cap was exceeded.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or non-convergence during numeric work.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Applies the HETLINK_THREADS cap (if the env var is set) to the OpenMP
// runtime. Called once from every executable entry point.
void apply_thread_cap_from_env();

// FNV-1a over a byte range; used for data checksums in report metadata.
std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull);

}  // namespace hetlink
