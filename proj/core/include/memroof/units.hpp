#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace memroof {

// All units are decimal: 1 GB = 1e9 bytes, 1 GB/s = 1e9 bytes/s.
// Quantities in configuration text must carry an explicit unit suffix;
// bare numbers are rejected to avoid silent unit mistakes.

struct UnitError : std::runtime_error {
  explicit UnitError(const std::string& msg) : std::runtime_error(msg) {}
};

// "173gbps" -> 173e9 bytes/s. Suffixes: kbps, mbps, gbps, tbps.
double parse_bandwidth(std::string_view text);

// "100ns" -> 1e-7 s. Suffixes: ns, us, ms, s.
double parse_duration(std::string_view text);

// "96mb" -> 96000000. Suffixes: kb, mb, gb, tb. "unbounded" -> nullopt.
std::optional<std::uint64_t> parse_capacity(std::string_view text);

// "35tflops" -> 35e12 ops/s. Suffixes: kflops..pflops; a bare number is
// accepted here since flops have a single natural unit.
double parse_flops(std::string_view text);

std::string format_bandwidth(double bytes_per_s);
std::string format_duration(double seconds);
std::string format_capacity(const std::optional<std::uint64_t>& bytes);
std::string format_flops(double flops_per_s);

// Deterministic shortest-ish decimal rendering used in all text output.
std::string format_double(double v);

}  // namespace memroof
