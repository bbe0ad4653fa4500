#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cotrep/control.hpp"
#include "cotrep/error.hpp"
#include "cotrep/eval.hpp"
#include "cotrep/model/toy_backend.hpp"
#include "oracles.hpp"

using namespace cotrep;
namespace fs = std::filesystem;

namespace {

fs::path mini(Task t) { return default_data_dir() / "fixtures" / (std::string(to_string(t)) + ".mini.jsonl"); }

ReadingVector toy_vector(std::size_t n_layers, std::size_t dim) {
  const auto p = oracle::planted_pairs(2, 16, dim, n_layers, 0.5, 0.05);
  return fit_reading_vector(differences(p.pairs));
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("task table matches the benchmark statistics") {
  const std::size_t counts[] = {1319, 300, 254, 2290, 1221, 2000, 300};
  for (std::size_t i = 0; i < kAllTasks.size(); ++i) CHECK(task_info(kAllTasks[i]).eval_count == counts[i]);
  CHECK(task_info(Task::kAqua).format == AnswerFormat::kMultipleChoice);
  CHECK(task_info(Task::kStrategyQa).format == AnswerFormat::kYesNo);
  CHECK(task_info(Task::kRandomLetter).format == AnswerFormat::kLetters);
  CHECK(parse_task("coin_flip") == Task::kCoinFlip);
  CHECK_THROWS_AS(parse_task("mmlu"), Error);
}

TEST_CASE("mini fixtures load with exact counts") {
  for (Task t : kAllTasks) {
    const auto records = load_dataset(t, mini(t));
    CHECK(records.size() == 8);
    for (const auto& r : records) {
      CHECK_FALSE(r.gold.empty());
      CHECK(r.format == task_info(t).format);
    }
  }
  const auto aqua = load_dataset(Task::kAqua, mini(Task::kAqua));
  CHECK(aqua[0].prompt_question().find("Answer Choices: (A)") != std::string::npos);
}

TEST_CASE("full dataset files load with the published counts when present") {
  for (Task t : kAllTasks) {
    const auto path = default_data_dir() / "datasets" / (std::string(to_string(t)) + ".jsonl");
    if (!fs::exists(path)) continue;
    CHECK(load_dataset(t, path).size() == task_info(t).eval_count);
  }
}

TEST_CASE("schema errors carry the line number") {
  std::istringstream in("{\"id\":\"a\",\"question\":\"q\",\"answer\":\"1\"}\n{\"id\":\"b\",\"question\":\"q\"}\n");
  try {
    parse_dataset(Task::kGsm8k, in, "mem");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSchemaError);
    CHECK(std::string(e.what()).find("mem:2") != std::string::npos);
  }
  std::istringstream bad_choice("{\"id\":\"a\",\"question\":\"q\",\"answer\":\"F\"}\n");
  CHECK_THROWS_AS(parse_dataset(Task::kAqua, bad_choice, "mem"), Error);
  std::istringstream not_json("{oops\n");
  CHECK_THROWS_AS(parse_dataset(Task::kGsm8k, not_json, "mem"), Error);
}

TEST_CASE("gold answers are normalized") {
  std::istringstream in(
      "{\"id\":\"a\",\"question\":\"q\",\"answer\":true}\n"
      "{\"id\":\"b\",\"question\":\"q\",\"answer\":\"No\"}\n");
  const auto r = parse_dataset(Task::kStrategyQa, in, "mem");
  CHECK(r[0].gold == "yes");
  CHECK(r[1].gold == "no");
  std::istringstream num("{\"id\":\"a\",\"question\":\"q\",\"answer\":\"1,000.0\"}\n");
  CHECK(parse_dataset(Task::kGsm8k, num, "mem")[0].gold == "1000");
}

TEST_CASE("generated coin flip and random letter data are consistent") {
  const auto names = load_names();
  CHECK(names.size() >= 50);
  const auto coins = generate_coin_flip(30, 4, names);
  REQUIRE(coins.size() == 30);
  for (const auto& r : coins) {
    const auto flips = oracle::count(r.question, " flips the coin.");
    const auto nots = oracle::count(r.question, " does not flip the coin.");
    CHECK(flips + nots == 2 + 2 * ((&r - coins.data()) % 3 == 1) + 5 * ((&r - coins.data()) % 3 == 2));
    CHECK(r.gold == (flips % 2 == 0 ? "yes" : "no"));
  }
  CHECK(generate_coin_flip(30, 4, names)[7].question == coins[7].question);

  const auto letters = generate_random_letter(20, 9, names);
  for (const auto& r : letters) {
    CHECK(r.gold.size() >= 2);
    CHECK(r.gold.size() <= 4);
    CHECK(r.question.find("\"") != std::string::npos);
  }
}

TEST_CASE("reading questions are a seeded shuffle prefix") {
  const auto recs = generate_coin_flip(40, 1, load_names());
  const auto a = select_reading_questions(recs, 10, 3), b = select_reading_questions(recs, 10, 3);
  const auto c = select_reading_questions(recs, 10, 4);
  REQUIRE(a.size() == 10);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a[i].id == b[i].id);
    ids.insert(a[i].id);
  }
  CHECK(ids.size() == 10);
  bool differs = false;
  for (std::size_t i = 0; i < 10; ++i) differs |= a[i].id != c[i].id;
  CHECK(differs);
  CHECK_THROWS_AS(select_reading_questions(recs, 41, 0), Error);
}

TEST_CASE("uniform_index stays in range") {
  std::mt19937_64 rng(0);
  std::vector<int> hist(3, 0);
  for (int i = 0; i < 3000; ++i) ++hist[uniform_index(rng, 3)];
  for (int h : hist) CHECK(h > 800);
}

TEST_CASE("extraction regression fixture") {
  std::ifstream in(fs::path(COTREP_TEST_FIXTURES) / "extraction_cases.json");
  const auto j = nlohmann::json::parse(in);
  REQUIRE(j["cases"].size() == 30);
  std::set<std::string> tasks;
  for (const auto& c : j["cases"]) {
    const Task t = parse_task(c["task"].get<std::string>());
    tasks.insert(c["task"].get<std::string>());
    const auto got = extract_answer(c["response"].get<std::string>(), t);
    CAPTURE(c["response"].get<std::string>());
    if (c["expected"].is_null()) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(*canonicalize(*got, task_info(t).format) == c["expected"].get<std::string>());
    }
  }
  CHECK(tasks.size() == 7);
}

TEST_CASE("answer parsing per format") {
  CHECK(parse_answer(" (b)", AnswerFormat::kMultipleChoice) == "B");
  CHECK(parse_answer(" 1,234.5 dollars", AnswerFormat::kNumber) == "1234.5");
  CHECK(parse_answer(" nothing here", AnswerFormat::kNumber) == std::nullopt);
  CHECK(parse_answer(" Yes, it is", AnswerFormat::kYesNo) == "yes");
  CHECK(parse_answer(" \"ab\".", AnswerFormat::kLetters) == "ab");
  CHECK(extract_answer("no clear statement", Task::kGsm8k) == std::nullopt);
}

TEST_CASE("extraction never throws on arbitrary bytes") {
  std::mt19937 rng(8);
  for (int i = 0; i < 300; ++i) {
    std::string s(rng() % 80, ' ');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    if (i % 3 == 0) s = "Therefore, the answer is" + s;
    for (Task t : kAllTasks) CHECK_NOTHROW(extract_answer(s, t));
  }
}

TEST_CASE("grading canonicalizes numbers and ignores case") {
  CHECK(grade("6", "6", AnswerFormat::kNumber));
  CHECK(grade("06.0", "6", AnswerFormat::kNumber));
  CHECK(grade("1,000", "1000", AnswerFormat::kNumber));
  CHECK_FALSE(grade("6.5", "6", AnswerFormat::kNumber));
  CHECK_FALSE(grade("yes", "No", AnswerFormat::kYesNo));
  CHECK(grade("B", "b", AnswerFormat::kMultipleChoice));
  CHECK(grade("NK", "nk", AnswerFormat::kLetters));
  for (auto [a, b] : {std::pair{"007", "7.00"}, {"3", "4"}, {"-0", "0"}}) {
    CHECK(grade(a, b, AnswerFormat::kNumber) ==
          grade(*canonicalize(a, AnswerFormat::kNumber), *canonicalize(b, AnswerFormat::kNumber), AnswerFormat::kNumber));
  }
}

TEST_CASE("reprompt extraction falls back to the backend") {
  ToyBackend toy({0, 2, 16, 257});
  const auto direct = extract_with_reprompt("p", "Therefore, the answer is abc", Task::kRandomLetter, toy, {});
  CHECK(direct.answer == "abc");
  CHECK_FALSE(direct.reprompted);
  const auto second = extract_with_reprompt("USER: q\nASSISTANT:", "hmm", Task::kGsm8k, toy, {});
  CHECK(second.reprompted);
}

TEST_CASE("alpha zero experiments have equal accuracies") {
  ToyBackend toy({0, 2, 16, 257});
  const auto v = toy_vector(2, 16);
  ControlConfig cfg{default_layers(2), 0.0, ""};
  ExperimentSpec spec;
  spec.task = Task::kCoinFlip;
  spec.options.max_new_tokens = 12;
  spec.jobs = 3;
  const auto records = load_dataset(Task::kCoinFlip, mini(Task::kCoinFlip));
  const auto report = run_experiment(spec, records, PromptTemplate::zero_shot(), toy, v, cfg);
  CHECK(report.n == 8);
  CHECK(report.per_item.size() == 8);
  CHECK(report.accuracy_baseline == report.accuracy_controlled);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(report.per_item[i].id == records[i].id);
    CHECK(report.per_item[i].pred_base == report.per_item[i].pred_ctrl);
  }
}

TEST_CASE("limits, progress and report schema") {
  ToyBackend toy({0, 2, 16, 257});
  const auto v = toy_vector(2, 16);
  ControlConfig cfg{default_layers(2), 4.0, ""};
  ExperimentSpec spec;
  spec.task = Task::kGsm8k;
  spec.n_limit = 3;
  spec.options.max_new_tokens = 8;
  const auto records = load_dataset(Task::kGsm8k, mini(Task::kGsm8k));
  std::size_t calls = 0;
  const auto report = run_experiment(spec, records, PromptTemplate::zero_shot(), toy, v, cfg,
                                     [&](const ExperimentReport& partial) { CHECK(partial.per_item.size() == ++calls); });
  CHECK(calls == 3);
  CHECK(report.per_item.size() == 3);
  double correct = 0;
  for (const auto& r : report.per_item) correct += r.correct_ctrl;
  CHECK(report.accuracy_controlled == correct / 3.0);

  const auto j = to_json(report);
  for (const char* key : {"task", "backend", "mode", "n", "accuracy_baseline", "accuracy_controlled", "per_item"})
    CHECK(j.contains(key));
  for (const char* key : {"id", "pred_base", "pred_ctrl", "correct_base", "correct_ctrl"}) CHECK(j["per_item"][0].contains(key));
  const auto back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.n == report.n);
  CHECK(back.per_item.size() == 3);
  auto bad = j;
  bad["n"] = 5;
  CHECK_THROWS_AS(report_from_json(bad), Error);
}

TEST_CASE("dataset writer round trips") {
  const auto recs = generate_random_letter(5, 2, load_names());
  const auto path = fs::temp_directory_path() / "cotrep_ds_test.jsonl";
  write_dataset(path, recs);
  const auto back = load_dataset(Task::kRandomLetter, path);
  REQUIRE(back.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back[i].question == recs[i].question);
    CHECK(back[i].gold == recs[i].gold);
  }
  fs::remove(path);
}

}

TEST_SUITE("eval") {

TEST_CASE("upstream layouts convert to the dataset schema") {
  auto convert = [](Task t, const std::string& text) {
    std::istringstream in(text);
    return import_upstream(t, in, "mem");
  };
  const auto gsm = convert(Task::kGsm8k,
                           "{\"question\": \"Ann has 3 pens and buys 4. How many?\", \"answer\": \"3 + 4 = <<3+4=7>>7\\n#### 7\"}\n"
                           "{\"question\": \"Big?\", \"answer\": \"so\\n#### 1,200\"}\n");
  REQUIRE(gsm.size() == 2);
  CHECK(gsm[0].gold == "7");
  CHECK(gsm[1].gold == "1200");
  CHECK(gsm[0].id == "gsm8k-0");

  const auto svamp = convert(Task::kSvamp, R"([{"ID": "chal-1", "Body": "Jack had 8 pens.", "Question": "How many now?", "Answer": 8.0}])");
  REQUIRE(svamp.size() == 1);
  CHECK(svamp[0].id == "chal-1");
  CHECK(svamp[0].question == "Jack had 8 pens. How many now?");
  CHECK(svamp[0].gold == "8");

  const auto aqua = convert(Task::kAqua, R"({"question": "Pick", "options": ["A)21", "B)22", "C)23", "D)24", "E)25"], "rationale": "r", "correct": "C"})");
  REQUIRE(aqua.size() == 1);
  CHECK(aqua[0].gold == "C");
  CHECK(aqua[0].choices == std::vector<std::string>{"21", "22", "23", "24", "25"});

  const auto sqa = convert(Task::kStrategyQa, R"({"examples": [{"input": "Is ice cold?", "target_scores": {"Yes": 1, "No": 0}}, {"input": "Is fire cold?", "target_scores": {"Yes": 0, "No": 1}}]})");
  REQUIRE(sqa.size() == 2);
  CHECK(sqa[0].gold == "yes");
  CHECK(sqa[1].gold == "no");
  CHECK(convert(Task::kStrategyQa, R"([{"qid": "q1", "question": "Is it?", "answer": false}])")[0].gold == "no");

  const auto csqa = convert(Task::kCsqa,
                            R"({"answerKey": "B", "id": "x1", "question": {"stem": "Where?", "choices": [{"label": "A", "text": "bank"}, {"label": "B", "text": "river"}]}})");
  REQUIRE(csqa.size() == 1);
  CHECK(csqa[0].id == "x1");
  CHECK(csqa[0].gold == "B");
  CHECK(csqa[0].prompt_question() == "Where?\nAnswer Choices: (A) bank (B) river");

  const auto coin = convert(Task::kCoinFlip, R"({"examples": [{"question": "A coin is heads up. Is it still heads up?", "answer": "yes"}]})");
  CHECK(coin.at(0).gold == "yes");

  CHECK_THROWS_AS(convert(Task::kGsm8k, "{\"question\": \"q\", \"answer\": \"no marker\"}\n"), Error);
  CHECK_THROWS_AS(convert(Task::kAqua, R"([{"question": "q", "options": ["A)1"], "correct": "Z"}])"), Error);
}

}
