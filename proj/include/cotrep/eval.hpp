#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "cotrep/control.hpp"
#include "cotrep/model/backend.hpp"
#include "cotrep/prompts.hpp"
#include "cotrep/reading.hpp"
#include "cotrep/task.hpp"

namespace cotrep {

// ---- datasets ----------------------------------------------------------
//
// JSONL, one object per line: {id, question, answer, choices?}. `choices`
// (multiple-choice tasks only) is rendered into the question as
// "Answer Choices: (A) ... (B) ...".

struct DatasetRecord {
  std::string id;
  std::string question;
  std::string gold;
  Task task = Task::kGsm8k;
  AnswerFormat format = AnswerFormat::kNumber;
  std::vector<std::string> choices;

  // Question text as shown to the model.
  std::string prompt_question() const;
};

// Throws SchemaError naming `source` and the 1-based line number.
std::vector<DatasetRecord> parse_dataset(Task task, std::istream& in, const std::string& source);
std::vector<DatasetRecord> load_dataset(Task task, const std::filesystem::path& path);

// Converts a benchmark file in its upstream release layout to records. Accepts
// GSM8K ("#### n" answers), SVAMP (Body/Question/Answer), AQuA (options and
// correct), StrategyQA (input/target_scores or qid/answer), CommonsenseQA
// (stem, labelled choices, answerKey), and {"examples": [{question, answer}]}
// collections for the symbolic tasks. Throws SchemaError naming the item.
std::vector<DatasetRecord> import_upstream(Task task, std::istream& in, const std::string& source);

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

// Seeded Fisher-Yates shuffle, then the first n.
std::vector<DatasetRecord> select_reading_questions(const std::vector<DatasetRecord>& records,
                                                    std::size_t n, std::uint64_t seed);

std::vector<StimulusPair> stimulus_pairs(const std::vector<DatasetRecord>& records,
                                         const PromptTemplate& t);

// Coin flip questions; operation counts cycle through 2, 4, 7.
std::vector<DatasetRecord> generate_coin_flip(std::size_t n, std::uint64_t seed,
                                              const std::vector<std::string>& names);

// Random letter concatenation over 2-4 names; letter position uniform over
// the shortest word's length.
std::vector<DatasetRecord> generate_random_letter(std::size_t n, std::uint64_t seed,
                                                  const std::vector<std::string>& names);

std::vector<std::string> load_names(const std::filesystem::path& data_dir = default_data_dir());

// Unbiased integer in [0, n) from a 64-bit engine, platform independent.
std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t n);

// ---- answer extraction and grading -----------------------------------

// Answer cleansing for text that follows the extraction template:
// number: first number, commas removed, trailing period dropped
// choice: first A-E letter, "(b)" -> "B"
// yes/no: first yes/no word, lowercased
// letters: first alphabetic run
std::optional<std::string> parse_answer(std::string_view text, AnswerFormat format);

// Stage one: parse what follows the last occurrence of the task's
// extraction template. nullopt means no answer found (never throws).
std::optional<std::string> extract_answer(std::string_view response, Task task);

struct Extraction {
  std::optional<std::string> answer;
  bool reprompted = false;
};

// Stage one, then (if the template is absent) stage two: re-prompt with
// prompt + response + template and parse the continuation.
Extraction extract_with_reprompt(std::string_view prompt, std::string_view response, Task task,
                                 Backend& backend, const Hook& hook);

// Number: decimal canonical form ("06.0" -> "6"); choice: uppercase letter;
// others: lowercase.
// Returns nullopt for a number that does not parse.
std::optional<std::string> canonicalize(std::string_view answer, AnswerFormat format);

bool grade(std::string_view pred, std::string_view gold, AnswerFormat format);

// ---- experiments -------------------------------------------------------

struct ItemResult {
  std::string id;
  std::optional<std::string> pred_base;
  std::optional<std::string> pred_ctrl;
  bool correct_base = false;
  bool correct_ctrl = false;
};

struct ExperimentReport {
  std::string task;
  std::string backend;
  std::string mode;
  std::size_t n = 0;
  double accuracy_baseline = 0.0;
  double accuracy_controlled = 0.0;
  double alpha = 0.0;
  std::vector<std::size_t> layers;
  std::vector<ItemResult> per_item;
};

struct ExperimentSpec {
  Task task = Task::kGsm8k;
  PromptMode mode = PromptMode::kZeroShot;
  std::size_t n_limit = 0;  // 0 = all records
  GenerationOptions options;
  std::size_t jobs = 1;
};

using ProgressFn = std::function<void(const ExperimentReport&)>;

// For each record: baseline and controlled generation under identical
// decoding, two-stage extraction, grading. `progress` sees the report after
// every finished item (items in input order).
ExperimentReport run_experiment(const ExperimentSpec& spec, const std::vector<DatasetRecord>& records,
                                const PromptTemplate& t, Backend& backend, const ReadingVector& v,
                                const ControlConfig& cfg, const ProgressFn& progress = {});

// Recomputes n and both accuracies from per_item.
void finalize(ExperimentReport& report);

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

}  // namespace cotrep
