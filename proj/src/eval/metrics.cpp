#include "ratt/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

#include "ratt/core/error.hpp"

namespace ratt {

void PassAtKInput::validate() const {
  if (c > n) throw Error(ErrorKind::invalid_input, "pass@k: c > n");
  if (k < 1) throw Error(ErrorKind::invalid_input, "pass@k: k must be at least 1");
  if (k > n) throw Error(ErrorKind::invalid_input, "pass@k: k > n");
}

double pass_at_k(const PassAtKInput& in) {
  in.validate();
  if (in.n - in.c < in.k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i=n-c+1}^{n} (1 - k/i)
  double miss = 1.0;
  for (std::size_t i = in.n - in.c + 1; i <= in.n; ++i) {
    miss *= 1.0 - static_cast<double>(in.k) / static_cast<double>(i);
  }
  return 1.0 - miss;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(u));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double bleu(std::string_view candidate, const std::vector<std::string>& references,
            std::size_t max_n) {
  if (references.empty()) throw Error(ErrorKind::invalid_input, "bleu needs at least one reference");
  if (max_n < 1) throw Error(ErrorKind::invalid_input, "bleu max_n must be at least 1");
  const auto cand = tokenize(candidate);
  if (cand.empty()) return 0.0;
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(tokenize(r));

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand_counts = ngram_counts(cand, n);
    std::map<Ngram, std::size_t> max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, cnt] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], cnt);
    }
    std::size_t clipped = 0, total = 0;
    for (const auto& [g, cnt] : cand_counts) {
      total += cnt;
      const auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(cnt, it->second);
    }
    double p = 0.0;
    if (clipped == 0) {
      p = 1.0 / static_cast<double>(total + 1);
    } else {
      p = static_cast<double>(clipped) / static_cast<double>(total);
    }
    log_sum += std::log(p);
  }

  const double c = static_cast<double>(cand.size());
  double r = 0.0;
  std::size_t best_diff = std::numeric_limits<std::size_t>::max();
  for (const auto& ref : refs) {
    const std::size_t diff = ref.size() > cand.size() ? ref.size() - cand.size() : cand.size() - ref.size();
    if (diff < best_diff || (diff == best_diff && static_cast<double>(ref.size()) < r)) {
      best_diff = diff;
      r = static_cast<double>(ref.size());
    }
  }
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return std::clamp(bp * std::exp(log_sum / static_cast<double>(max_n)), 0.0, 1.0);
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto a = tokenize(candidate);
  const auto b = tokenize(reference);
  if (a.empty() || b.empty()) return 0.0;
  const auto l = static_cast<double>(lcs_length(a, b));
  if (l == 0.0) return 0.0;
  const double p = l / static_cast<double>(a.size());
  const double r = l / static_cast<double>(b.size());
  return 2.0 * p * r / (p + r);
}

double rouge_l_max(std::string_view candidate, const std::vector<std::string>& references) {
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, rouge_l(candidate, r));
  return best;
}

}  // namespace ratt
