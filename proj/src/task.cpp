#include "cotrep/task.hpp"

#include <algorithm>
#include <string>

#include "cotrep/error.hpp"

namespace cotrep {
namespace {

constexpr std::string_view kArabic = "Therefore, the answer (arabic numerals) is";
constexpr std::string_view kChoice = "Therefore, among A through E, the answer is";
constexpr std::string_view kYesNo = "Therefore, the answer (Yes or No) is";
constexpr std::string_view kPlain = "Therefore, the answer is";

// clang-format off
constexpr std::array<TaskInfo, 7> kTable = {{
    {Task::kGsm8k,        "gsm8k",         AnswerFormat::kNumber,         kArabic, "gsm8k",         1319, 128, 512},
    {Task::kSvamp,        "svamp",         AnswerFormat::kNumber,         kArabic, "gsm8k",          300, 512, 256},
    {Task::kAqua,         "aqua",          AnswerFormat::kMultipleChoice, kChoice, "aqua",           254, 256, 256},
    {Task::kStrategyQa,   "strategyqa",    AnswerFormat::kYesNo,          kYesNo,  "strategyqa",    2290, 512, 256},
    {Task::kCsqa,         "csqa",          AnswerFormat::kMultipleChoice, kChoice, "csqa",          1221, 512, 256},
    {Task::kCoinFlip,     "coin_flip",     AnswerFormat::kYesNo,          kYesNo,  "coin_flip",     2000, 128, 512},
    {Task::kRandomLetter, "random_letter", AnswerFormat::kLetters,        kPlain,  "random_letter",  300, 128, 128},
}};
// clang-format on

}  // namespace

const TaskInfo& task_info(Task task) {
  return kTable[static_cast<std::size_t>(task)];
}

Task parse_task(std::string_view id) {
  auto it = std::find_if(kTable.begin(), kTable.end(), [&](const TaskInfo& t) { return t.id == id; });
  if (it == kTable.end()) {
    throw Error(ErrorKind::kUnknownTask, "unknown task '" + std::string(id) + "'");
  }
  return it->task;
}

std::string_view to_string(Task task) { return task_info(task).id; }

std::string_view to_string(AnswerFormat format) {
  switch (format) {
    case AnswerFormat::kNumber: return "number";
    case AnswerFormat::kMultipleChoice: return "multiple_choice_A_E";
    case AnswerFormat::kYesNo: return "yes_no";
    case AnswerFormat::kLetters: return "letters";
  }
  return "?";
}

std::string_view to_string(PromptMode mode) {
  return mode == PromptMode::kZeroShot ? "zero_shot" : "few_shot";
}

PromptMode parse_mode(std::string_view text) {
  if (text == "zero" || text == "zero_shot") return PromptMode::kZeroShot;
  if (text == "few" || text == "few_shot") return PromptMode::kFewShot;
  throw Error(ErrorKind::kInvalidConfig, "mode must be zero or few, got '" + std::string(text) + "'");
}

std::size_t default_n_read(Task task, PromptMode mode) {
  const auto& info = task_info(task);
  return mode == PromptMode::kZeroShot ? info.n_read_zero_shot : info.n_read_few_shot;
}

}  // namespace cotrep
