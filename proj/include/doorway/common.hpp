#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace doorway {

enum class Side { Left, Right };

constexpr Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
/// +1 for left (+Y in a forward-facing frame), -1 for right.
constexpr double lateralSign(Side s) { return s == Side::Left ? 1.0 : -1.0; }
constexpr std::size_t index(Side s) { return s == Side::Left ? 0 : 1; }

NLOHMANN_JSON_SERIALIZE_ENUM(Side, {{Side::Left, "Left"}, {Side::Right, "Right"}})

std::string_view toString(Side s);

enum class SwingDirection { Push, Pull };
NLOHMANN_JSON_SERIALIZE_ENUM(SwingDirection, {{SwingDirection::Push, "Push"}, {SwingDirection::Pull, "Pull"}})

enum class MechanismType { Knob, LeverHandle, PushBar, PullHandle };
NLOHMANN_JSON_SERIALIZE_ENUM(MechanismType, {{MechanismType::Knob, "Knob"},
                                             {MechanismType::LeverHandle, "LeverHandle"},
                                             {MechanismType::PushBar, "PushBar"},
                                             {MechanismType::PullHandle, "PullHandle"}})

template <typename T>
using PerSide = std::array<T, 2>;

/// Malformed input from a file or wire message.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses an enum-valued JSON string, throwing ParseError naming the field on an unknown value.
template <typename E>
E parseEnum(const nlohmann::json& j, std::string_view field) {
  const auto& v = j.at(std::string(field));
  if (!v.is_string()) throw ParseError(std::string(field) + " must be a string");
  E out{};
  nlohmann::json probe = v;
  // nlohmann maps unknown strings to the first enumerator; detect by re-serializing.
  out = probe.get<E>();
  if (nlohmann::json(out) != v) throw ParseError("unknown value '" + v.get<std::string>() + "' for " + std::string(field));
  return out;
}

}  // namespace doorway
