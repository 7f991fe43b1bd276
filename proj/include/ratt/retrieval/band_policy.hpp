#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace ratt {

enum class Band { broad, targeted, detailed };

std::string_view to_string(Band band);
Band band_from_string(std::string_view name);

/// Layers 1..l1 retrieve broadly, l1+1..l2 in a targeted way and everything
/// deeper in detail. The band only changes the instruction text handed to
/// query formation and correction; similarity scoring is the same in all bands.
struct BandPolicy {
  std::size_t l1 = 1;
  std::size_t l2 = 2;
  std::array<std::string, 3> instructions = default_instructions();

  const std::string& instruction(Band band) const {
    return instructions[static_cast<std::size_t>(band)];
  }

  /// Thirds of the iteration count: l1 = ceil(T/3), l2 = ceil(2T/3), with l2
  /// lifted to l1 + 1 when the two coincide (T = 1).
  static BandPolicy for_iterations(std::size_t total_iterations);
  static std::array<std::string, 3> default_instructions();

  /// Throws invalid_config unless 1 <= l1 < l2.
  void validate() const;

  friend bool operator==(const BandPolicy&, const BandPolicy&) = default;
};

struct BandSelection {
  Band band = Band::broad;
  std::string instruction;
};

/// Throws invalid_input unless 1 <= layer <= total_iterations.
BandSelection band_for_layer(const BandPolicy& policy, std::size_t layer,
                             std::size_t total_iterations);

}  // namespace ratt
