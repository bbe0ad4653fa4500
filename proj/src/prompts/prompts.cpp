#include "cotrep/prompts.hpp"

#include <cstdlib>
#include <fstream>

#include "cotrep/error.hpp"

#ifndef COTREP_SOURCE_DATA_DIR
#define COTREP_SOURCE_DATA_DIR "data"
#endif

namespace cotrep {
namespace {

std::string exemplar_block(const std::vector<Exemplar>& exemplars) {
  std::string block;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (i > 0) block += "\n\n";
    block += "Q: " + exemplars[i].question + "\nA: " + exemplars[i].answer;
  }
  return block;
}

void require_question(std::string_view question) {
  if (question.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorKind::kEmptyQuestion, "question is empty");
  }
}

}  // namespace

PromptTemplate PromptTemplate::zero_shot() { return PromptTemplate{}; }

PromptTemplate PromptTemplate::few_shot(std::vector<Exemplar> exemplars) {
  PromptTemplate t;
  t.mode = PromptMode::kFewShot;
  t.cot_trigger.clear();
  t.exemplars = std::move(exemplars);
  return t;
}

void PromptTemplate::validate() const {
  if (mode == PromptMode::kZeroShot) {
    if (!exemplars.empty()) throw Error(ErrorKind::kInvalidConfig, "zero-shot template has exemplars");
    if (cot_trigger != kZeroShotTrigger) {
      throw Error(ErrorKind::kInvalidConfig, "zero-shot trigger must be \"Let's think step by step.\"");
    }
  } else if (exemplars.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "few-shot template has no exemplars");
  }
}

std::string negative_prompt(std::string_view question, const PromptTemplate& t) {
  require_question(question);
  return t.user_prefix + std::string(question) + "\n" + t.assistant_prefix;
}

std::string positive_prompt(std::string_view question, const PromptTemplate& t) {
  t.validate();
  if (t.mode == PromptMode::kZeroShot) return negative_prompt(question, t) + " " + t.cot_trigger;
  require_question(question);
  return t.user_prefix + exemplar_block(t.exemplars) + "\n\n" + std::string(question) + "\n" +
         t.assistant_prefix;
}

StimulusPair make_stimulus_pair(std::string id, std::string_view question, const PromptTemplate& t) {
  return StimulusPair(std::move(id), negative_prompt(question, t), positive_prompt(question, t));
}

std::string build_eval_prompt(std::string_view question, const PromptTemplate& t) {
  return positive_prompt(question, t);
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("COTREP_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return COTREP_SOURCE_DATA_DIR;
}

std::vector<Exemplar> load_exemplar_bank(Task task, const std::filesystem::path& data_dir) {
  const auto path = data_dir / "exemplars" / (std::string(task_info(task).exemplar_bank) + ".json");
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kUnknownTask, "no exemplar bank at " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<Exemplar> out;
    for (const auto& e : j.at("exemplars")) {
      out.push_back({e.at("q").get<std::string>(), e.at("a").get<std::string>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaError, path.string() + ": " + e.what());
  }
}

PromptTemplate template_for(Task task, PromptMode mode, const std::filesystem::path& data_dir) {
  if (mode == PromptMode::kZeroShot) return PromptTemplate::zero_shot();
  return PromptTemplate::few_shot(load_exemplar_bank(task, data_dir));
}

nlohmann::json to_json(const PromptTemplate& t) {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : t.exemplars) ex.push_back({{"q", e.question}, {"a", e.answer}});
  return {{"mode", std::string(to_string(t.mode))},
          {"cot_trigger", t.cot_trigger},
          {"user_prefix", t.user_prefix},
          {"assistant_prefix", t.assistant_prefix},
          {"exemplars", std::move(ex)}};
}

PromptTemplate template_from_json(const nlohmann::json& j) {
  try {
    PromptTemplate t;
    t.mode = parse_mode(j.at("mode").get<std::string>());
    t.cot_trigger = j.at("cot_trigger").get<std::string>();
    t.user_prefix = j.value("user_prefix", t.user_prefix);
    t.assistant_prefix = j.value("assistant_prefix", t.assistant_prefix);
    for (const auto& e : j.value("exemplars", nlohmann::json::array())) {
      t.exemplars.push_back({e.at("q").get<std::string>(), e.at("a").get<std::string>()});
    }
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("template JSON: ") + e.what());
  }
}

}  // namespace cotrep
