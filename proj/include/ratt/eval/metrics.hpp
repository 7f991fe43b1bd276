#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ratt {

struct PassAtKInput {
  std::size_t n = 0;  // samples generated
  std::size_t c = 0;  // samples correct
  std::size_t k = 1;  // draw size

  /// Throws invalid_input unless c <= n and 1 <= k <= n.
  void validate() const;
};

/// Unbiased estimator 1 - C(n-c, k) / C(n, k), as a running product.
double pass_at_k(const PassAtKInput& input);
inline double pass_at_k(std::size_t n, std::size_t c, std::size_t k) {
  return pass_at_k(PassAtKInput{n, c, k});
}

/// Lowercased whitespace tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Sentence BLEU over clipped n-gram precisions 1..max_n, add-one smoothing
/// on zero precisions, brevity penalty against the closest reference length.
/// Empty candidate gives 0. Throws invalid_input with no references.
double bleu(std::string_view candidate, const std::vector<std::string>& references,
            std::size_t max_n = 4);

/// F1 of the longest common token subsequence; 0 when either side is empty.
double rouge_l(std::string_view candidate, std::string_view reference);

/// Best rouge_l over several references.
double rouge_l_max(std::string_view candidate, const std::vector<std::string>& references);

}  // namespace ratt
