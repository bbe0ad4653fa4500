// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <string>

#include "cotrep/config.hpp"
#include "cotrep/control.hpp"
#include "cotrep/eval.hpp"
#include "cotrep/kernels/kernels.hpp"
#include "cotrep/localization.hpp"
#include "cotrep/model/toy_backend.hpp"
#include "cotrep/prompts.hpp"
#include "cotrep/reading.hpp"
#include "oracles.hpp"

using namespace cotrep;
namespace fs = std::filesystem;

namespace {

constexpr double kPcaCosine = 1 - 1e-6;
constexpr double kPlantedCosine = 0.95;
constexpr double kInjectionTol = 1e-5;
constexpr double kPropertyTol = 1e-9;

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    r.ok = false;
    r.detail += " [time limit " + std::to_string(limit_s) + " s exceeded]";
  }
  std::printf("%s  %-28s %8.3f s  %s\n", r.ok ? "PASS" : "FAIL", name.c_str(), secs, r.detail.c_str());
  std::fflush(stdout);
  failures += !r.ok;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Outcome pca_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> rows(2, 32), cols(1, 16);
  double worst = 1.0;
  for (int i = 0; i < 200; ++i) {
    const auto m = oracle::random_matrix(rng, rows(rng), cols(rng));
    const auto pc = first_principal_component(oracle::to_eigen(m));
    worst = std::min(worst, oracle::abs_cosine(oracle::top_covariance_eigenvector(m), pc.direction));
  }
  return {worst >= kPcaCosine, "200 matrices, min |cos| = " + fmt("%.12f", worst)};
}

Outcome planted_direction() {
  int hits = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = oracle::planted_pairs(1000 + seed, 64, 16, 1, 0.5, 0.05);
    const auto v = fit_reading_vector(differences(p.pairs));
    double cos = 0;
    for (std::size_t j = 0; j < 16; ++j) cos += v.per_layer[0][static_cast<Eigen::Index>(j)] * p.u[0][j];
    worst = std::min(worst, cos);
    hits += cos >= kPlantedCosine;
  }
  return {hits == 20, std::to_string(hits) + "/20 seeds, min cos = " + fmt("%.6f", worst)};
}

ReadingVector toy_reading_vector(ToyBackend& toy) {
  std::vector<StimulusPair> pairs;
  const auto t = PromptTemplate::zero_shot();
  const auto questions = generate_coin_flip(16, 5, load_names());
  for (const auto& q : questions) pairs.push_back(make_stimulus_pair(q.id, q.question, t));
  return build_reading_vector(pairs, toy, pairs.size());
}

std::vector<std::string> seeded_prompts() {
  const auto t = PromptTemplate::zero_shot();
  std::vector<std::string> out;
  for (const auto& r : generate_random_letter(20, 77, load_names())) out.push_back(build_eval_prompt(r.question, t));
  return out;
}

Outcome control_identity() {
  ToyBackend toy({});
  const auto v = toy_reading_vector(toy);
  ControlConfig cfg{default_layers(toy.descriptor()), 0.0, v.provenance.stimulus_hash};
  GenerationOptions opts;
  opts.max_new_tokens = 32;
  int identical = 0;
  for (const auto& p : seeded_prompts()) {
    const auto base = toy.generate(p, {}, opts);
    const auto ctrl = controlled_generate(p, v, cfg, toy, opts);
    identical += base.generated_tokens.ids == ctrl.generated_tokens.ids && base.activations == ctrl.activations;
  }
  return {identical == 20, std::to_string(identical) + "/20 prompts token-identical at alpha = 0"};
}

Outcome injection_exactness() {
  ToyBackend toy({});
  const auto v = toy_reading_vector(toy);
  ControlConfig cfg{default_layers(toy.descriptor()), 1.0, v.provenance.stimulus_hash};
  GenerationOptions opts;
  opts.max_new_tokens = 16;
  double worst = 0;
  std::size_t checks = 0;
  for (double alpha : {0.5, 1.0, 2.0}) {
    cfg.strength = alpha;
    const auto gen = controlled_generate(seeded_prompts()[0], v, cfg, toy, opts);
    for (std::size_t l : cfg.layers) {
      for (std::size_t t = 0; t < gen.activations.n_tokens(); ++t) {
        double post = 0, pre = 0;
        for (std::size_t j = 0; j < v.dim(); ++j) {
          const double vj = v.per_layer[l][static_cast<Eigen::Index>(j)];
          post += gen.activations.at(l, t)[j] * vj;
          pre += gen.pre_hook_activations.at(l, t)[j] * vj;
        }
        worst = std::max(worst, std::abs(post - pre - alpha));
        ++checks;
      }
    }
  }
  return {worst <= kInjectionTol, std::to_string(checks) + " (alpha, layer, position) checks, max error = " + fmt("%.3e", worst)};
}

Outcome localization_soundness() {
  const auto [acts, v] = oracle::anti_aligned_track(4);
  const std::vector<std::size_t> layers{0};
  static const std::regex kAnsiRed("\x1b\\[48;2;255;");
  std::string detail;
  bool ok = true;
  for (double delta : {0.0, 3.5}) {
    const auto track = score_tokens(acts, v, delta, layers);
    for (std::size_t i = 0; i < 10; ++i) {
      double dot = 0;
      for (std::size_t j = 0; j < acts.dim(); ++j) dot += acts.at(0, i)[j] * v.per_layer[0][static_cast<Eigen::Index>(j)];
      ok &= std::abs(track.raw[i] - (dot - delta)) < 1e-5;
      ok &= (track.clipped[i] < 0) == (i == 4);
    }
    const auto html = render_salience(track, SalienceFormat::kHtml);
    const auto ansi = render_salience(track, SalienceFormat::kAnsi);
    const auto html_red = oracle::count(html, "class=\"tok red\"");
    const auto ansi_red = static_cast<std::size_t>(std::distance(std::sregex_iterator(ansi.begin(), ansi.end(), kAnsiRed), std::sregex_iterator()));
    ok &= html_red == 1 && ansi_red == 1;
    ok &= html.find(std::string(kRedLegend)) != std::string::npos && ansi.find(std::string(kRedLegend)) != std::string::npos;
    detail += "delta=" + fmt("%.1f", delta) + ": html red=" + std::to_string(html_red) + ", ansi red=" + std::to_string(ansi_red) + "; ";
  }
  return {ok, detail + "only token 4 red"};
}

Outcome clip_normalize_properties() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 3.0);
  std::uniform_int_distribution<std::size_t> len(1, 40);
  std::size_t bad = 0;
  for (int c = 0; c < 1000; ++c) {
    std::vector<double> x(len(rng));
    for (auto& e : x) e = g(rng);
    if (c % 10 == 0) std::fill(x.begin(), x.end(), g(rng));  // constant track
    const auto clipped = clip_scores(x);
    bad += clip_scores(clipped) != clipped;
    const auto z = zscore(x);
    double mean = 0, var = 0;
    for (double e : x) mean += e / static_cast<double>(x.size());
    for (double e : x) var += (e - mean) * (e - mean) / static_cast<double>(x.size());
    if (std::sqrt(var) < kDefaults.zscore_epsilon) {
      bad += std::any_of(z.begin(), z.end(), [](double e) { return e != 0.0; });
    } else {
      const double shift = g(rng) * 10;
      auto shifted = x;
      for (auto& e : shifted) e += shift;
      const auto zs = zscore(shifted);
      for (std::size_t i = 0; i < z.size(); ++i) bad += std::abs(z[i] - zs[i]) > kPropertyTol * 1e3;
    }
    const auto cz = clip_scores(z);
    for (std::size_t i = 0; i < z.size(); ++i) bad += (cz[i] < 0) != (z[i] < 0);
  }
  return {bad == 0, "1000 cases (idempotence, translation, zero variance, red set), violations = " + std::to_string(bad)};
}

Outcome extraction_regression() {
  std::ifstream in(fs::path(COTREP_TEST_FIXTURES) / "extraction_cases.json");
  const auto j = nlohmann::json::parse(in);
  std::size_t pass = 0, total = 0;
  std::set<std::string> tasks;
  std::string first_miss;
  for (const auto& c : j["cases"]) {
    ++total;
    const Task t = parse_task(c["task"].get<std::string>());
    tasks.insert(c["task"].get<std::string>());
    const auto got = extract_answer(c["response"].get<std::string>(), t);
    std::optional<std::string> canon;
    if (got) canon = canonicalize(*got, task_info(t).format);
    const bool ok = c["expected"].is_null() ? !got.has_value() : canon == c["expected"].get<std::string>();
    pass += ok;
    if (!ok && first_miss.empty()) first_miss = c["response"].get<std::string>();
  }
  return {pass == total && total == 30 && tasks.size() == 7,
          std::to_string(pass) + "/" + std::to_string(total) + " exact, " + std::to_string(tasks.size()) + " templates" +
              (first_miss.empty() ? "" : "; first miss: " + first_miss)};
}

Outcome defaults_conformance() {
  bool ok = kDefaults.delta == 3.5 && kDefaults.max_new_tokens == 512 && kDefaults.decoding == Decoding::kGreedy &&
            kDefaults.control_layer_count == 10 && kDefaults.control_strength == 1.0;
  ok &= GenerationOptions{}.max_new_tokens == 512 && ScoreTrack{}.delta == 3.5;
  std::vector<std::size_t> last10;
  for (std::size_t l = 22; l < 32; ++l) last10.push_back(l);
  ok &= default_layers(32) == last10 && default_layers(2) == std::vector<std::size_t>{0, 1};
  const std::size_t zero[] = {128, 512, 256, 512, 512, 128, 128};
  const std::size_t few[] = {512, 256, 256, 256, 256, 512, 128};
  for (std::size_t i = 0; i < kAllTasks.size(); ++i) {
    ok &= default_n_read(kAllTasks[i], PromptMode::kZeroShot) == zero[i];
    ok &= default_n_read(kAllTasks[i], PromptMode::kFewShot) == few[i];
  }
  return {ok, "delta 3.5, 512 tokens, greedy, last ten layers, reading-set sizes per task and mode"};
}

Outcome dataset_loaders() {
  bool ok = true;
  std::string detail = "mini:";
  std::size_t full = 0;
  for (Task t : kAllTasks) {
    const auto id = std::string(to_string(t));
    const auto n = load_dataset(t, default_data_dir() / "fixtures" / (id + ".mini.jsonl")).size();
    ok &= n == 8;
    detail += " " + id + "=" + std::to_string(n);
    const auto path = default_data_dir() / "datasets" / (id + ".jsonl");
    if (fs::exists(path)) {
      const auto n_full = load_dataset(t, path).size();
      ok &= n_full == task_info(t).eval_count;
      detail += "(full " + std::to_string(n_full) + ")";
      ++full;
    }
  }
  detail += "; full files checked: " + std::to_string(full) + "/7";
  return {ok, detail};
}

}  // namespace

int main() {
  std::printf("kernel variant: %s\n", std::string(kernels::to_string(kernels::active().isa)).c_str());
  criterion("pca-oracle", 5.0, pca_oracle);
  criterion("planted-direction", 5.0, planted_direction);
  criterion("control-identity", 10.0, control_identity);
  criterion("injection-exactness", 10.0, injection_exactness);
  criterion("localization-soundness", 1.0, localization_soundness);
  criterion("clip-normalize-properties", 2.0, clip_normalize_properties);
  criterion("extraction-regression", 0.0, extraction_regression);
  criterion("defaults-conformance", 0.0, defaults_conformance);
  criterion("dataset-loaders", 0.0, dataset_loaders);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
