#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sovai {

/// The four sovereignty investment pillars. Declaration order is the
/// reporting and tie-breaking order everywhere in the library.
enum class PillarId : std::uint8_t { Data = 0, Compute = 1, Model = 2, Norms = 3 };

inline constexpr std::size_t kPillarCount = 4;

inline constexpr std::array<PillarId, kPillarCount> kAllPillars = {
    PillarId::Data, PillarId::Compute, PillarId::Model, PillarId::Norms};

constexpr std::size_t index(PillarId id) { return static_cast<std::size_t>(id); }

/// Lower-case key used in documents and JSON ("data", "compute", "model", "norms").
std::string_view pillarKey(PillarId id);

/// Display name ("Data", "Compute", ...).
std::string_view pillarName(PillarId id);

/// Accepts either the key or the display name.
std::optional<PillarId> parsePillar(std::string_view text);

/// Fixed-size map keyed by PillarId, iterated in PillarId order.
template <typename T>
struct PillarMap {
  std::array<T, kPillarCount> values{};

  constexpr T& operator[](PillarId id) { return values[index(id)]; }
  constexpr const T& operator[](PillarId id) const { return values[index(id)]; }

  auto begin() { return values.begin(); }
  auto end() { return values.end(); }
  auto begin() const { return values.begin(); }
  auto end() const { return values.end(); }

  friend bool operator==(const PillarMap&, const PillarMap&) = default;
};

}  // namespace sovai
