#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "cotrep/reading.hpp"
#include "cotrep/task.hpp"

namespace cotrep {

inline constexpr std::string_view kZeroShotTrigger = "Let's think step by step.";

struct Exemplar {
  std::string question;
  std::string answer;  // full worked answer, ending in the final-answer sentence

  friend bool operator==(const Exemplar&, const Exemplar&) = default;
};

struct PromptTemplate {
  PromptMode mode = PromptMode::kZeroShot;
  std::string user_prefix = "USER: ";
  std::string assistant_prefix = "ASSISTANT:";
  std::string cot_trigger = std::string(kZeroShotTrigger);
  std::vector<Exemplar> exemplars;

  static PromptTemplate zero_shot();
  static PromptTemplate few_shot(std::vector<Exemplar> exemplars);

  // Throws InvalidConfig: zero-shot with exemplars or a different trigger,
  // few-shot without exemplars.
  void validate() const;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

// "USER: <question>\nASSISTANT:"
std::string negative_prompt(std::string_view question, const PromptTemplate& t);

// Zero-shot: the negative prompt followed by " <trigger>".
// Few-shot: the exemplar block ("Q: ...\nA: ..." joined by blank lines) and a
// blank line inserted right after the user prefix.
std::string positive_prompt(std::string_view question, const PromptTemplate& t);

// Throws EmptyQuestion.
StimulusPair make_stimulus_pair(std::string id, std::string_view question, const PromptTemplate& t);

// The positive form; used for evaluation runs.
std::string build_eval_prompt(std::string_view question, const PromptTemplate& t);

// Resolution order: $COTREP_DATA_DIR, then the source tree's data/ folder.
std::filesystem::path default_data_dir();

// Verbatim exemplars for `task` (gsm8k and svamp share one bank). Throws
// UnknownTask when the bank file is missing or IoError/SchemaError.
std::vector<Exemplar> load_exemplar_bank(Task task,
                                         const std::filesystem::path& data_dir = default_data_dir());

PromptTemplate template_for(Task task, PromptMode mode,
                            const std::filesystem::path& data_dir = default_data_dir());

// File form: {mode, cot_trigger, user_prefix, assistant_prefix, exemplars: [{q, a}]}
nlohmann::json to_json(const PromptTemplate& t);
PromptTemplate template_from_json(const nlohmann::json& j);

}  // namespace cotrep
