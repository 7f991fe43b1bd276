#include "ratt/retrieval/band_policy.hpp"

#include "ratt/core/error.hpp"

namespace ratt {

std::string_view to_string(Band band) {
  switch (band) {
    case Band::broad: return "broad";
    case Band::targeted: return "targeted";
    case Band::detailed: return "detailed";
  }
  return "broad";
}

Band band_from_string(std::string_view name) {
  if (name == "broad") return Band::broad;
  if (name == "targeted") return Band::targeted;
  if (name == "detailed") return Band::detailed;
  throw Error(ErrorKind::invalid_input, "unknown band '" + std::string(name) + "'");
}

std::array<std::string, 3> BandPolicy::default_instructions() {
  return {
      "Look for broad, high-level background: the basic concepts, definitions and context "
      "the reasoning relies on.",
      "Look for targeted information that deepens the specific line of reasoning taken so "
      "far and confirms or refutes its key claims.",
      "Look for detailed, specific facts that pinpoint and correct concrete errors and fill "
      "in missing details.",
  };
}

BandPolicy BandPolicy::for_iterations(std::size_t total_iterations) {
  const std::size_t t = std::max<std::size_t>(total_iterations, 1);
  BandPolicy p;
  p.l1 = (t + 2) / 3;
  p.l2 = (2 * t + 2) / 3;
  if (p.l2 <= p.l1) p.l2 = p.l1 + 1;
  return p;
}

void BandPolicy::validate() const {
  if (l1 < 1 || l2 <= l1) {
    throw Error(ErrorKind::invalid_config, "band boundaries must satisfy 1 <= l1 < l2 (got l1=" +
                                               std::to_string(l1) + ", l2=" +
                                               std::to_string(l2) + ")");
  }
}

BandSelection band_for_layer(const BandPolicy& policy, std::size_t layer,
                             std::size_t total_iterations) {
  if (layer < 1 || layer > total_iterations) {
    throw Error(ErrorKind::invalid_input, "layer " + std::to_string(layer) +
                                              " outside 1.." + std::to_string(total_iterations));
  }
  policy.validate();
  Band band = Band::detailed;
  if (layer <= policy.l1) band = Band::broad;
  else if (layer <= policy.l2) band = Band::targeted;
  return {band, policy.instruction(band)};
}

}  // namespace ratt
