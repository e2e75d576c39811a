#include "memroof/units.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace memroof {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Splits "<number><suffix>", trimming whitespace. Returns false when no
// numeric prefix is present.
bool split_value(std::string_view text, double& value, std::string& suffix) {
  std::string s = lower(text);
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          s.end());
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr == begin) return false;
  suffix.assign(ptr, end);
  return true;
}

}  // namespace

double parse_bandwidth(std::string_view text) {
  double v = 0;
  std::string suf;
  if (!split_value(text, v, suf) || v <= 0)
    throw UnitError("invalid bandwidth '" + std::string(text) + "'");
  if (suf == "kbps") return v * 1e3;
  if (suf == "mbps") return v * 1e6;
  if (suf == "gbps") return v * 1e9;
  if (suf == "tbps") return v * 1e12;
  throw UnitError("bandwidth '" + std::string(text) +
                  "' needs an explicit suffix (kbps|mbps|gbps|tbps)");
}

double parse_duration(std::string_view text) {
  double v = 0;
  std::string suf;
  if (!split_value(text, v, suf) || v < 0)
    throw UnitError("invalid duration '" + std::string(text) + "'");
  if (suf == "ns") return v * 1e-9;
  if (suf == "us") return v * 1e-6;
  if (suf == "ms") return v * 1e-3;
  if (suf == "s") return v;
  throw UnitError("duration '" + std::string(text) +
                  "' needs an explicit suffix (ns|us|ms|s)");
}

std::optional<std::uint64_t> parse_capacity(std::string_view text) {
  if (lower(text) == "unbounded") return std::nullopt;
  double v = 0;
  std::string suf;
  if (!split_value(text, v, suf) || v <= 0)
    throw UnitError("invalid capacity '" + std::string(text) + "'");
  double scale = 0;
  if (suf == "kb") scale = 1e3;
  else if (suf == "mb") scale = 1e6;
  else if (suf == "gb") scale = 1e9;
  else if (suf == "tb") scale = 1e12;
  else
    throw UnitError("capacity '" + std::string(text) +
                    "' needs an explicit suffix (kb|mb|gb|tb) or 'unbounded'");
  return static_cast<std::uint64_t>(std::llround(v * scale));
}

double parse_flops(std::string_view text) {
  double v = 0;
  std::string suf;
  if (!split_value(text, v, suf) || v <= 0)
    throw UnitError("invalid flops '" + std::string(text) + "'");
  if (suf.empty() || suf == "flops") return v;
  if (suf == "kflops") return v * 1e3;
  if (suf == "mflops") return v * 1e6;
  if (suf == "gflops") return v * 1e9;
  if (suf == "tflops") return v * 1e12;
  if (suf == "pflops") return v * 1e15;
  throw UnitError("unknown flops suffix in '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {
std::string scaled(double v, double unit, const char* suffix) {
  return format_double(v / unit) + suffix;
}
}  // namespace

std::string format_bandwidth(double b) {
  if (b >= 1e12) return scaled(b, 1e12, "tbps");
  if (b >= 1e9) return scaled(b, 1e9, "gbps");
  if (b >= 1e6) return scaled(b, 1e6, "mbps");
  return scaled(b, 1e3, "kbps");
}

std::string format_duration(double s) {
  if (s >= 1.0) return scaled(s, 1.0, "s");
  if (s >= 1e-3) return scaled(s, 1e-3, "ms");
  if (s >= 1e-6) return scaled(s, 1e-6, "us");
  return scaled(s, 1e-9, "ns");
}

std::string format_capacity(const std::optional<std::uint64_t>& bytes) {
  if (!bytes) return "unbounded";
  double b = static_cast<double>(*bytes);
  if (b >= 1e12) return scaled(b, 1e12, "tb");
  if (b >= 1e9) return scaled(b, 1e9, "gb");
  if (b >= 1e6) return scaled(b, 1e6, "mb");
  return scaled(b, 1e3, "kb");
}

std::string format_flops(double f) {
  if (f >= 1e15) return scaled(f, 1e15, "pflops");
  if (f >= 1e12) return scaled(f, 1e12, "tflops");
  if (f >= 1e9) return scaled(f, 1e9, "gflops");
  return format_double(f) + "flops";
}

}  // namespace memroof
