#include "json_io.hpp"

#include <algorithm>
#include <cmath>

namespace armsynth::io {

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + end, '\n');
    throw ParseError("line " + std::to_string(line), e.what());
  }
}

void Field::fail(const std::string& what) const { throw ParseError(path_.empty() ? "/" : path_, what); }

bool Field::has(std::string_view key) const {
  return value_->is_object() && value_->contains(key);
}

Field Field::operator[](std::string_view key) const {
  if (!value_->is_object()) fail("expected an object");
  auto it = value_->find(key);
  if (it == value_->end()) fail("missing field '" + std::string(key) + "'");
  return Field(*it, path_ + "/" + std::string(key));
}

Field Field::at(std::size_t i) const {
  if (!value_->is_array()) fail("expected an array");
  if (i >= value_->size()) fail("index out of range");
  return Field((*value_)[i], path_ + "/" + std::to_string(i));
}

std::size_t Field::size() const {
  if (!value_->is_array()) fail("expected an array");
  return value_->size();
}

std::string Field::as_string() const {
  if (!value_->is_string()) fail("expected a string");
  return value_->get<std::string>();
}

double Field::as_number() const {
  if (!value_->is_number()) fail("expected a number");
  const double v = value_->get<double>();
  if (!std::isfinite(v)) fail("expected a finite number");
  return v;
}

std::size_t Field::as_index() const {
  if (!value_->is_number_unsigned() && !(value_->is_number_integer() && value_->get<long long>() >= 0))
    fail("expected a nonnegative integer");
  return value_->get<std::size_t>();
}

long long Field::as_integer() const {
  if (!value_->is_number_integer()) fail("expected an integer");
  return value_->get<long long>();
}

bool Field::as_bool() const {
  if (!value_->is_boolean()) fail("expected a boolean");
  return value_->get<bool>();
}

Vector3 Field::as_vector3() const {
  if (size() != 3) fail("expected 3 numbers");
  return Vector3(at(0).as_number(), at(1).as_number(), at(2).as_number());
}

Transform Field::as_transform() const {
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Vector3 t = Vector3::Zero();
  if (has("rotation")) {
    Field r = (*this)["rotation"];
    if (r.size() != 4) r.fail("expected quaternion [w,x,y,z]");
    q = Eigen::Quaterniond(r.at(0).as_number(), r.at(1).as_number(), r.at(2).as_number(),
                           r.at(3).as_number());
    if (std::abs(q.norm() - 1.0) > 1e-6) r.fail("non-unit quaternion");
  }
  if (has("translation")) t = (*this)["translation"].as_vector3();
  // Already-normalized input keeps its exact bits so files round-trip.
  if (std::abs(q.norm() - 1.0) > 1e-14) q.normalize();
  return Transform::FromUnitQuaternion(q, t);
}

CollisionPrimitive Field::as_primitive() const {
  const std::string shape = (*this)["shape"].as_string();
  auto positive = [](const Field& f) {
    const double v = f.as_number();
    if (!(v > 0)) f.fail("must be positive");
    return v;
  };
  if (shape == "sphere") {
    return Sphere<double>{(*this)["center"].as_vector3(), positive((*this)["radius"])};
  }
  if (shape == "capsule") {
    return Capsule<double>{(*this)["endpoint_a"].as_vector3(), (*this)["endpoint_b"].as_vector3(),
                           positive((*this)["radius"])};
  }
  if (shape == "box") {
    Box<double> b{(*this)["center"].as_vector3(), (*this)["half_extents"].as_vector3(),
                  Eigen::Quaterniond::Identity()};
    if ((b.half_extents.array() <= 0).any()) (*this)["half_extents"].fail("must be positive");
    if (has("orientation")) {
      Field r = (*this)["orientation"];
      if (r.size() != 4) r.fail("expected quaternion [w,x,y,z]");
      b.orientation = Eigen::Quaterniond(r.at(0).as_number(), r.at(1).as_number(),
                                         r.at(2).as_number(), r.at(3).as_number());
      if (std::abs(b.orientation.norm() - 1.0) > 1e-6) r.fail("non-unit quaternion");
      if (std::abs(b.orientation.norm() - 1.0) > 1e-14) b.orientation.normalize();
    }
    return b;
  }
  (*this)["shape"].fail("unknown shape '" + shape + "'");
}

json to_json(const Vector3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Eigen::Quaterniond& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

json to_json(const Transform& t) {
  return json{{"rotation", to_json(t.rotation())}, {"translation", to_json(t.translation())}};
}

json to_json(const CollisionPrimitive& p) {
  return std::visit(
      [](const auto& x) -> json {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, Sphere<double>>) {
          return json{{"shape", "sphere"}, {"center", to_json(x.center)}, {"radius", x.radius}};
        } else if constexpr (std::is_same_v<X, Capsule<double>>) {
          return json{{"shape", "capsule"},
                      {"endpoint_a", to_json(x.endpoint_a)},
                      {"endpoint_b", to_json(x.endpoint_b)},
                      {"radius", x.radius}};
        } else {
          return json{{"shape", "box"},
                      {"center", to_json(x.center)},
                      {"half_extents", to_json(x.half_extents)},
                      {"orientation", to_json(x.orientation)}};
        }
      },
      p);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace armsynth::io
