#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace bgsol {

// %.17g: enough digits to round-trip any double, locale-independent.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

/**
 Append-style JSON writer.  Fields keep insertion order and doubles are
 printed with 17 significant digits, so equal runs produce byte-identical
 artifacts.  No parsing, no DOM; outputs here are flat records.
 */
class JsonWriter {
 public:
  JsonWriter& begin_object() { return token("{", true); }
  JsonWriter& end_object() { return close("}"); }
  JsonWriter& begin_array() { return token("[", true); }
  JsonWriter& end_array() { return close("]"); }

  JsonWriter& key(const std::string& name) {
    separate();
    out_ += '"';
    out_ += json_escape(name);
    out_ += "\":";
    fresh_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(fmt_double(v)); }
  JsonWriter& value(std::int64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const std::string& v) { return raw('"' + json_escape(v) + '"'); }
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& null() { return raw("null"); }

  template <class T>
  JsonWriter& field(const std::string& name, const T& v) {
    key(name);
    return value(v);
  }
  JsonWriter& field_null(const std::string& name) {
    key(name);
    return null();
  }

  const std::string& str() const { return out_; }

 private:
  JsonWriter& raw(const std::string& text) {
    separate();
    out_ += text;
    fresh_ = false;
    return *this;
  }
  JsonWriter& token(const char* t, bool open) {
    separate();
    out_ += t;
    fresh_ = open;
    return *this;
  }
  JsonWriter& close(const char* t) {
    out_ += t;
    fresh_ = false;
    return *this;
  }
  void separate() {
    if (!fresh_ && !out_.empty()) {
      const char last = out_.back();
      if (last != '{' && last != '[' && last != ':') out_ += ',';
    }
    fresh_ = false;
  }

  std::string out_;
  bool fresh_ = true;
};

// Quotes a CSV field when it contains separators or quotes.
inline std::string csv_field(const std::string& s) {
  bool need = false;
  for (char c : s)
    if (c == ',' || c == '"' || c == '\n') need = true;
  if (!need) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

}  // namespace bgsol
