// Shared JSON helpers for the armlib/armdesign/armtask formats.
#ifndef ARMSYNTH_SRC_JSON_IO_HPP
#define ARMSYNTH_SRC_JSON_IO_HPP

#include <string>
#include <string_view>

#include <json.hpp>

#include "armsynth/collision.hpp"
#include "armsynth/error.hpp"
#include "armsynth/rigid_transform.hpp"

namespace armsynth::io {

using json = nlohmann::json;

/// Parses text, mapping syntax errors to ParseError("line N", ...).
json parse_text(std::string_view text);

/// Tracks a JSON pointer so errors can name the offending field.
class Field {
 public:
  Field(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const json& value() const { return *value_; }
  const std::string& path() const { return path_; }

  bool has(std::string_view key) const;
  Field operator[](std::string_view key) const;  // required member
  Field at(std::size_t i) const;
  std::size_t size() const;  // requires array

  std::string as_string() const;
  double as_number() const;
  std::size_t as_index() const;
  long long as_integer() const;
  bool as_bool() const;
  Vector3 as_vector3() const;
  Transform as_transform() const;
  CollisionPrimitive as_primitive() const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  const json* value_;
  std::string path_;
};

json to_json(const Vector3& v);
json to_json(const Eigen::Quaterniond& q);
json to_json(const Transform& t);
json to_json(const CollisionPrimitive& p);

/// Stable text form used by every file writer.
std::string dump(const json& j);

}  // namespace armsynth::io

#endif  // ARMSYNTH_SRC_JSON_IO_HPP
