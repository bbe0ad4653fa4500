#include <algorithm>
#include <fstream>

#include "cotrep/error.hpp"
#include "cotrep/eval.hpp"

namespace cotrep {
namespace {

constexpr std::array<std::size_t, 3> kCoinOps = {2, 4, 7};

std::vector<std::string> pick_distinct(std::mt19937_64& engine, const std::vector<std::string>& pool,
                                       std::size_t k) {
  if (pool.size() < k) throw Error(ErrorKind::kInvalidConfig, "name list too short");
  std::vector<std::string> names = pool;
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(names[i], names[i + uniform_index(engine, names.size() - i)]);
  }
  names.resize(k);
  return names;
}

std::string ordinal(std::size_t k) {
  static const char* kWords[] = {"first", "second", "third", "fourth", "fifth", "sixth",
                                 "seventh", "eighth", "ninth", "tenth", "eleventh", "twelfth"};
  return k >= 1 && k <= 12 ? kWords[k - 1] : std::to_string(k) + "th";
}

}  // namespace

std::vector<std::string> load_names(const std::filesystem::path& data_dir) {
  const auto path = data_dir / "names.txt";
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') names.push_back(line);
  }
  return names;
}

std::vector<DatasetRecord> generate_coin_flip(std::size_t n, std::uint64_t seed,
                                              const std::vector<std::string>& names) {
  std::mt19937_64 engine(seed);
  std::vector<DatasetRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ops = kCoinOps[i % kCoinOps.size()];
    const auto people = pick_distinct(engine, names, ops);
    std::string q = "A coin is heads up.";
    std::size_t flips = 0;
    for (const auto& person : people) {
      if (uniform_index(engine, 2) == 1) {
        q += " " + person + " flips the coin.";
        ++flips;
      } else {
        q += " " + person + " does not flip the coin.";
      }
    }
    q += " Is the coin still heads up?";
    DatasetRecord r;
    r.id = "coin_flip-" + std::to_string(i);
    r.question = std::move(q);
    r.gold = flips % 2 == 0 ? "yes" : "no";
    r.task = Task::kCoinFlip;
    r.format = AnswerFormat::kYesNo;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DatasetRecord> generate_random_letter(std::size_t n, std::uint64_t seed,
                                                  const std::vector<std::string>& names) {
  std::mt19937_64 engine(seed);
  std::vector<DatasetRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t n_words = 2 + i % 3;
    const auto words = pick_distinct(engine, names, n_words);
    std::size_t shortest = words[0].size();
    for (const auto& w : words) shortest = std::min(shortest, w.size());
    const std::size_t position = 1 + uniform_index(engine, shortest);

    std::string joined;
    std::string gold;
    for (const auto& w : words) {
      if (!joined.empty()) joined += ' ';
      joined += w;
      gold += w[position - 1];
    }
    DatasetRecord r;
    r.id = "random_letter-" + std::to_string(i);
    r.question = "Take the " + ordinal(position) + " letters of the words in \"" + joined +
                 "\" and concatenate them.";
    r.gold = std::move(gold);
    r.task = Task::kRandomLetter;
    r.format = AnswerFormat::kLetters;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cotrep
