// Canonical JSON emission and small file helpers.
//
// Artifacts (models, benchmark instances, episode records, reports) must be
// byte-identical across runs and platforms, so all writing goes through a
// tiny canonical writer: fixed key order (caller-controlled), numbers with
// 17 significant digits (lossless for IEEE doubles), infinities as the
// strings "+inf" / "-inf". Reading uses nlohmann::json, which accepts the
// same text.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orgym/errors.hpp"
#include "orgym/rng.hpp"

namespace orgym {

using Json = nlohmann::json;

// Formats a finite double with 17 significant digits ("%.17g"). This is the
// one number format used in every emitted file; round-tripping through it
// reproduces the exact bit pattern.
inline std::string fmt_number(double v) {
  if (std::isnan(v)) throw InvalidModelError("NaN is not serializable");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

// Streaming writer for canonical JSON. The caller controls key order; the
// writer inserts separators and quoting. Compact output (no whitespace).
class JsonWriter {
 public:
  void begin_object() { sep(); out_ += '{'; fresh_ = true; }
  void end_object() { out_ += '}'; fresh_ = false; }
  void begin_array() { sep(); out_ += '['; fresh_ = true; }
  void end_array() { out_ += ']'; fresh_ = false; }

  void key(std::string_view k) {
    sep();
    out_ += '"';
    out_ += json_escape(k);
    out_ += "\":";
    fresh_ = true;  // next value follows the colon without a comma
  }

  void value(std::string_view s) { sep(); out_ += '"'; out_ += json_escape(s); out_ += '"'; fresh_ = false; }
  void value(const char* s) { value(std::string_view(s)); }
  void value(bool b) { sep(); out_ += b ? "true" : "false"; fresh_ = false; }
  void value(int v) { sep(); out_ += std::to_string(v); fresh_ = false; }
  void value(std::int64_t v) { sep(); out_ += std::to_string(v); fresh_ = false; }
  void value(std::uint64_t v) { sep(); out_ += std::to_string(v); fresh_ = false; }
  void value_null() { sep(); out_ += "null"; fresh_ = false; }

  // Doubles: finite values as 17-digit numbers, infinities as strings so the
  // document stays valid JSON.
  void value(double v) {
    sep();
    if (std::isinf(v)) {
      out_ += v > 0 ? "\"+inf\"" : "\"-inf\"";
    } else {
      out_ += fmt_number(v);
    }
    fresh_ = false;
  }

  // Embeds an already-serialized JSON fragment verbatim.
  void raw(std::string_view fragment) { sep(); out_ += fragment; fresh_ = false; }

  const std::string& str() const { return out_; }

 private:
  void sep() {
    if (!fresh_ && !out_.empty()) {
      const char last = out_.back();
      if (last != '{' && last != '[' && last != ':') out_ += ',';
    }
    fresh_ = false;
  }
  std::string out_;
  bool fresh_ = true;
};

// Parses a possibly-infinite bound value: a number, or "+inf"/"-inf"/"inf".
inline double parse_extended_number(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ParseError(std::string(what) + ": expected a number or \"+inf\"/\"-inf\"");
}

Json parse_json(std::string_view text, const char* what);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
std::vector<std::string> read_lines(const std::string& path);

// Content digest used by run manifests (hex, 16 chars).
inline std::string digest_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

}  // namespace orgym
