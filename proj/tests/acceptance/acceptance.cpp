// Acceptance checks. Prints one PASS, FAIL or SKIP line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ratt/app/cli.hpp"
#include "ratt/app/trace_io.hpp"
#include "ratt/baselines/baselines.hpp"
#include "ratt/eval/harness.hpp"
#include "ratt/eval/metrics.hpp"
#include "ratt/provider/http_provider.hpp"
#include "ratt/retrieval/index_io.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ratt;
using namespace ratt::testing;
using nlohmann::json;

namespace {

struct Skip {
  std::string reason;
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, [](const char*) -> const char* { return nullptr; });
  return {code, out.str(), err.str()};
}

std::string join(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) s += (s.empty() ? "" : " ") + a;
  return s;
}

// ---- 1 -----------------------------------------------------------------------------

struct GridCase {
  std::string method;
  std::vector<std::string> flags;
  ProviderScript script;
  std::size_t generate_calls;
  std::size_t embed_calls;
};

std::vector<GridCase> grid_cases() {
  std::vector<GridCase> cases;
  auto s = [](std::size_t v) { return std::to_string(v); };
  cases.push_back({"io", {}, io_script(), 1, 0});
  cases.push_back({"cot", {}, cot_script(), 2, 0});
  for (std::size_t m = 1; m <= 3; ++m) {
    std::vector<std::string> answers;
    for (std::size_t i = 0; i < m; ++i) answers.push_back(std::to_string(i % 2));
    cases.push_back({"cot_sc", {"--n-sc", s(m)}, cot_sc_script(answers), 2 * m, 0});
    for (std::size_t T = 1; T <= 3; ++T) {
      cases.push_back({"tot", {"--tot-b", s(m), "--tot-d", s(T)}, tot_script(m, T), tot_generate_calls(m, T), 0});
      for (std::size_t k : {0u, 2u}) {
        for (bool la : {false, true}) {
          const bool retrieval = k > 0;
          cases.push_back({"ratt",
                           {"--m", s(m), "--T", s(T), "--k", s(k), "--lookahead", la ? "1" : "0"},
                           ratt_script(m, T, retrieval, la, 4),
                           ratt_generate_calls(m, T, retrieval, la),
                           retrieval ? m * T : 0});
        }
      }
    }
  }
  for (std::size_t T = 1; T <= 3; ++T) {
    cases.push_back({"rat", {"--rat-steps", s(T), "--rat-k", "2"}, rat_script(T, true, 4), T + 2, T});
  }
  return cases;
}

void structural_determinism() {
  TempDir dir;
  const auto lib_path = dir.file("lib.idx");
  save_index(pattern_library(12, 4), lib_path);
  std::size_t n = 0;
  for (const auto& c : grid_cases()) {
    const auto tag = c.method + "-" + std::to_string(n++);
    const auto script = dir.file(tag + ".script.json");
    const auto trace = dir.file(tag + ".json");
    save_script(c.script, script);
    std::vector<std::string> args{"run", "--method", c.method, "--prompt", "Use 4 4 6 8 to make 24.",
                                  "--task-kind", "game24", "--library", lib_path, "--script", script,
                                  "--trace", trace, "--seed", "7"};
    args.insert(args.end(), c.flags.begin(), c.flags.end());
    const auto r = cli(args);
    expect(r.code == kExitOk, join(args) + " exited " + std::to_string(r.code) + ": " + r.err);
    const auto file = load_trace(trace);
    expect(file.trace.totals.generate_calls == c.generate_calls,
           join(args) + ": " + std::to_string(file.trace.totals.generate_calls) + " generate calls, expected " +
               std::to_string(c.generate_calls));
    expect(file.trace.totals.embed_calls == c.embed_calls, join(args) + ": embed call count");
    const auto replay = cli({"replay", trace});
    expect(replay.code == kExitOk && replay.out == "MATCH\n", join(args) + ": replay said " + replay.out);
  }
}

// ---- 2 -----------------------------------------------------------------------------

void retrieval_oracle() {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const Library lib = random_library(rng);
    std::vector<DocumentChunk> chunks;
    for (std::size_t i = 0; i < lib.size(); ++i) chunks.push_back(lib.chunk(i));
    const auto q = random_query(rng, lib.dimension());
    const std::size_t k = 1 + rng() % (lib.size() + 3);
    const auto got = retrieve_top_k(lib, q, k);
    const auto want = brute_force_top_k(chunks, q, k);
    expect(got.entries.size() == want.size(), "trial " + std::to_string(trial) + ": result size");
    for (std::size_t i = 0; i < want.size(); ++i) {
      const auto& g = got.entries[i];
      const auto& w = want[i];
      expect(g.doc_id == w.doc_id && g.chunk_index == w.chunk_index && g.score == w.score,
             "trial " + std::to_string(trial) + ": entry " + std::to_string(i) + " differs");
    }
  }
}

// ---- 3 -----------------------------------------------------------------------------

void cosine_properties() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t dim = 1 + rng() % 64;
    auto a = random_query(rng, dim);
    auto b = random_query(rng, dim);
    expect(std::abs(cosine_similarity(a, a) - 1.0) <= 1e-9, "self-similarity");
    const double ab = cosine_similarity(a, b);
    expect(ab == cosine_similarity(b, a), "symmetry");
    const double s = scale(rng);
    const Eigen::VectorXd as = a.cast<double>() * s;
    expect(std::abs(cosine_similarity(as, b) - ab) <= 1e-9, "positive scale invariance");
    const EmbeddingVector a2 = a * 4.0f;
    expect(std::abs(cosine_similarity(a2, b) - ab) <= 1e-9, "power-of-two scale invariance");
    expect(ab >= -1.0 && ab <= 1.0, "range");
  }
}

// ---- 4 -----------------------------------------------------------------------------

void game24_oracle() {
  std::vector<std::pair<Game24Instance, std::string>> solved;
  for (const auto& m : all_multisets()) {
    const auto instance = Game24Instance::from(m);
    const auto ours = solve24_oracle(instance);
    const auto theirs = enumerate24(m);
    expect(ours.has_value() == theirs.has_value(), "solvability disagrees on " + instance.str());
    if (ours) {
      expect(verify24(ours->str(), instance), "verify24 rejects " + ours->str());
      expect(verify24(*theirs, instance), "verify24 rejects " + *theirs);
      solved.emplace_back(instance, ours->str());
    }
  }
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto& [instance, text] = solved[rng() % solved.size()];
    std::string mutated = text;
    std::vector<std::size_t> digits;
    for (std::size_t j = 0; j < mutated.size(); ++j) {
      if (std::isdigit(static_cast<unsigned char>(mutated[j]))) digits.push_back(j);
    }
    const auto pos = digits[rng() % digits.size()];
    const char old = mutated[pos];
    while (mutated[pos] == old) mutated[pos] = static_cast<char>('1' + rng() % 9);
    expect(!verify24(mutated, instance), "verify24 accepts mutated " + mutated + " for " + instance.str());
  }
}

// ---- 5 -----------------------------------------------------------------------------

void pass_at_k_checks() {
  const std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> examples = {
      {10, 0, 1, 0.0}, {10, 10, 5, 1.0}, {10, 1, 1, 0.1}, {10, 3, 2, 1.0 - 21.0 / 45.0},
      {5, 3, 3, 1.0},  {200, 1, 100, 0.5}, {20, 5, 10, 1.0 - 3003.0 / 184756.0},
  };
  for (const auto& [n, c, k, v] : examples) {
    expect(std::abs(pass_at_k(n, c, k) - v) <= 1e-9, "example pass@k(" + std::to_string(n) + "," +
                                                         std::to_string(c) + "," + std::to_string(k) + ")");
  }
  // One million uniform k-subsets per (n, k); a draw hits for c when its
  // smallest element is below c, so every c is scored from the same draws.
  std::mt19937_64 rng(5);
  constexpr int draws = 1000000;
  for (int n = 1; n <= 12; ++n) {
    for (int k = 1; k <= n; ++k) {
      std::vector<int> idx(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), 0);
      std::vector<long> min_count(static_cast<std::size_t>(n), 0);
      for (int t = 0; t < draws; ++t) {
        int lowest = n;
        for (int i = 0; i < k; ++i) {
          const int j = i + static_cast<int>(rng() % static_cast<unsigned long long>(n - i));
          std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
          lowest = std::min(lowest, idx[static_cast<std::size_t>(i)]);
        }
        ++min_count[static_cast<std::size_t>(lowest)];
      }
      long hits = 0;
      for (int c = 0; c <= n; ++c) {
        const double exact = pass_at_k(static_cast<std::size_t>(n), static_cast<std::size_t>(c),
                                       static_cast<std::size_t>(k));
        const double mc = static_cast<double>(hits) / draws;
        expect(std::abs(mc - exact) <= 2e-3, "Monte Carlo n=" + std::to_string(n) + " c=" + std::to_string(c) +
                                                 " k=" + std::to_string(k) + ": " + std::to_string(mc) +
                                                 " vs " + std::to_string(exact));
        expect(std::abs(exact - pass_at_k_binomial(n, c, k)) <= 1e-9, "binomial mismatch");
        if (c < n) hits += min_count[static_cast<std::size_t>(c)];
      }
    }
  }
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t c = 0; c <= n; ++c) {
      for (std::size_t k = 1; k <= n; ++k) {
        const double v = pass_at_k(n, c, k);
        expect(v >= 0.0 && v <= 1.0, "range");
        if (k < n) expect(pass_at_k(n, c, k + 1) >= v, "monotone in k");
        if (c < n) expect(pass_at_k(n, c + 1, k) >= v, "monotone in c");
      }
    }
  }
}

// ---- 6 -----------------------------------------------------------------------------

void similarity_metrics() {
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-6; };
  expect(near(bleu("the cat sat", {"the cat sat"}), 1.0), "bleu identity");
  expect(near(bleu("the cat", {"the cat sat"}, 1), std::exp(1.0 - 3.0 / 2.0)), "bleu brevity penalty");
  expect(near(bleu("the the the", {"the cat"}, 1), 1.0 / 3.0), "bleu clipping");
  expect(bleu("", {"x"}) == 0.0, "bleu empty candidate");
  expect(near(rouge_l("a b c", "a c d"), 2.0 / 3.0), "rouge-l example");
  expect(near(rouge_l("a b c", "a b c"), 1.0), "rouge-l identity");
  expect(rouge_l("", "a") == 0.0, "rouge-l empty");
  expect(near(rouge_l_max("a b c", {"x", "a c d"}), 2.0 / 3.0), "rouge-l max");

  std::mt19937_64 rng(6);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
  auto sentence = [&] {
    std::string s;
    const auto len = rng() % 16;
    for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
    return s;
  };
  for (int i = 0; i < 10000; ++i) {
    const auto c = sentence();
    auto r = sentence();
    if (r.empty()) r = "a";
    const double b = bleu(c, {r});
    const double l = rouge_l(c, r);
    expect(b >= 0.0 && b <= 1.0 + 1e-12, "bleu out of range for '" + c + "' / '" + r + "'");
    expect(l >= 0.0 && l <= 1.0, "rouge-l out of range");
  }
}

// ---- 7 -----------------------------------------------------------------------------

void persistence() {
  TempDir dir;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const Library lib = random_library(rng);
    const auto path = dir.file("lib" + std::to_string(i) + ".idx");
    save_index(lib, path);
    const Library back = load_index(path);
    expect(back == lib, "library round trip");
    for (int j = 0; j < 10; ++j) {
      const auto q = random_query(rng, lib.dimension());
      const auto a = retrieve_top_k(lib, q, 5);
      const auto b = retrieve_top_k(back, q, 5);
      expect(a.entries == b.entries, "retrieval differs after reload");
    }
  }

  const auto lib = pattern_library(12, 4);
  ScriptedProvider p(ratt_script(3, 3, true, true, 4));
  RunConfig cfg;
  cfg.k = 2;
  cfg.lookahead_enabled = true;
  const auto trace = run_ratt({"Use 4 4 6 8 to make 24.", TaskKind::game24}, cfg, &lib, p);
  save_trace(dir.file("t.json"), trace, json::object());
  const auto file = load_trace(dir.file("t.json"));
  expect(file.trace.tree == trace.tree, "tree round trip");
  expect(trace_to_json(file.trace, file.app_config) == trace_to_json(trace, json::object()), "trace round trip");

  write(dir.file("docs/a.txt"), std::string(2500, 'a'));
  write(dir.file("docs/sub/b.txt"), "Twenty four from four fours: 4 * 4 + 4 + 4.");
  ProviderScript s;
  for (std::size_t i = 0; i < 16; ++i) s.embedding(pattern_vector(8, i));
  save_script(s, dir.file("embed.json"));
  const std::vector<std::string> args{"ingest", "--input", dir.file("docs"), "--output", dir.file("out.idx"),
                                      "--script", dir.file("embed.json"), "--batch-size", "2"};
  expect(cli(args).code == kExitOk, "first ingest");
  const auto first = read(dir.file("out.idx"));
  expect(cli(args).code == kExitOk, "second ingest");
  expect(read(dir.file("out.idx")) == first, "ingest reruns differ");
}

// ---- 8 -----------------------------------------------------------------------------

void scripted_benchmark() {
  TempDir dir;
  std::string dataset;
  ProviderScript oracle, wrong;
  std::size_t count = 0;
  for (const auto& m : all_multisets()) {
    if (count == 10) break;
    const auto instance = Game24Instance::from(m);
    const auto sol = solve24_oracle(instance);
    if (!sol) continue;
    ++count;
    dataset += std::to_string(m[0]) + "," + std::to_string(m[1]) + "," + std::to_string(m[2]) + "," +
               std::to_string(m[3]) + "\n";
    oracle.respond(CallTag::baseline, sol->str() + " = 24");
    wrong.respond(CallTag::baseline, "1 + 1 + 1 + 1");
  }
  write(dir.file("game24.csv"), dataset);
  save_script(oracle, dir.file("oracle.json"));
  // cot makes two calls per instance; its script answers wrongly.
  ProviderScript cot_wrong;
  for (std::size_t i = 0; i < count; ++i) {
    cot_wrong.respond(CallTag::baseline, steps_text(1)).respond(CallTag::final, "1 + 1 + 1 + 1");
  }
  save_script(cot_wrong, dir.file("wrong.json"));
  const auto r = cli({"eval", "--task", "game24", "--dataset", dir.file("game24.csv"), "--methods", "io,cot",
                      "--script", "io=" + dir.file("oracle.json"), "--script", "cot=" + dir.file("wrong.json"),
                      "--out-dir", dir.file("out")});
  std::cout << r.out;
  expect(r.code == kExitOk, "eval exited " + std::to_string(r.code) + ": " + r.err);
  std::istringstream lines(r.out);
  std::string line;
  bool oracle_row = false, wrong_row = false;
  while (std::getline(lines, line)) {
    if (line.rfind("io ", 0) == 0) oracle_row = line.find("100.0%") != std::string::npos;
    if (line.rfind("cot ", 0) == 0) wrong_row = line.find(" 0.0%") != std::string::npos;
  }
  expect(oracle_row, "always-oracle row does not read 100.0%");
  expect(wrong_row, "always-wrong row does not read 0.0%");
}

// ---- 9 -----------------------------------------------------------------------------

void live_smoke() {
  const char* key = std::getenv("RATT_API_KEY");
  const char* url = std::getenv("RATT_BASE_URL");
  if (!key || !*key || !url || !*url) throw Skip{"RATT_API_KEY and RATT_BASE_URL not set"};
  ProviderSettings settings;
  settings.base_url = url;
  settings.api_key = key;
  if (const char* m = std::getenv("RATT_GENERATION_MODEL")) settings.generation_model = m;
  if (const char* m = std::getenv("RATT_EMBEDDING_MODEL")) settings.embedding_model = m;
  HttpProvider provider(settings);
  std::vector<Document> docs = {
      {"rules.txt", "In the game of 24 each of the four numbers must be used exactly once. "
                    "Allowed operations are addition, subtraction, multiplication and division."},
      {"tricks.txt", "Useful factorizations of 24: 4 * 6, 3 * 8, 2 * 12. "
                     "Fractions can help, for example 8 / (3 - 8 / 3) = 24."},
      {"example.txt", "For 4 4 6 8 one solution is (4 + 8) * (6 - 4) = 24."},
  };
  const Library lib = build_index(std::move(docs), {}, provider);
  RunConfig cfg;
  cfg.m = 3;
  cfg.T = 3;
  cfg.k = 3;
  const auto instance = Game24Instance::from({4, 4, 6, 8});
  const auto trace = run_ratt(game24_prompt(instance), cfg, &lib, provider);
  expect(!trace.error, "run reported an error");
  std::size_t refined = 0;
  for (const auto& n : trace.tree.nodes()) {
    if (n.role != NodeRole::strategy) continue;
    expect(n.retrieval_ref.has_value(), "strategy node without a retrieval record");
    const auto& rec = trace.retrievals[*n.retrieval_ref];
    expect(!rec.skip_reason && !rec.entries.empty(), "strategy node without retrieved chunks");
    for (const auto& e : rec.entries) expect(e.doc_id == lib.doc_id(e.position), "provenance mismatch");
    refined += n.refined_text ? 1 : 0;
  }
  expect(refined == 9, "expected nine refined nodes");
  std::cout << "  live answer: " << trace.final_answer << "\n";
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "structural determinism and replay", 60, structural_determinism},
      {2, "retrieval oracle equivalence", 30, retrieval_oracle},
      {3, "cosine properties", 5, cosine_properties},
      {4, "game of 24 oracle", 120, game24_oracle},
      {5, "pass@k", 60, pass_at_k_checks},
      {6, "similarity metrics", 10, similarity_metrics},
      {7, "persistence round trips", 10, persistence},
      {8, "scripted benchmark", 10, scripted_benchmark},
      {9, "live smoke", 600, live_smoke},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string status = "PASS";
    std::string detail;
    try {
      c.body();
    } catch (const Skip& s) {
      status = "SKIP";
      detail = s.reason;
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (status == "PASS" && secs > c.limit_seconds) {
      status = "FAIL";
      detail = "took longer than " + std::to_string(static_cast<int>(c.limit_seconds)) + "s";
    }
    if (status == "FAIL") ++failures;
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.2fs", secs);
    std::cout << status << " " << c.id << " " << c.name << " (" << timing << ")";
    if (!detail.empty()) std::cout << ": " << detail;
    std::cout << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
