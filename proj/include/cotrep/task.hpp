#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace cotrep {

enum class Task { kGsm8k, kSvamp, kAqua, kStrategyQa, kCsqa, kCoinFlip, kRandomLetter };

enum class AnswerFormat { kNumber, kMultipleChoice, kYesNo, kLetters };

enum class PromptMode { kZeroShot, kFewShot };

inline constexpr std::array<Task, 7> kAllTasks = {
    Task::kGsm8k,    Task::kSvamp,    Task::kAqua,        Task::kStrategyQa,
    Task::kCsqa,     Task::kCoinFlip, Task::kRandomLetter,
};

// Static facts about one benchmark task. One row per task in task.cpp.
struct TaskInfo {
  Task task;
  std::string_view id;
  AnswerFormat format;
  std::string_view extraction_template;
  std::string_view exemplar_bank;  // file stem under data/exemplars
  std::size_t eval_count;          // size of the full evaluation split
  std::size_t n_read_zero_shot;
  std::size_t n_read_few_shot;
};

const TaskInfo& task_info(Task task);

// Throws Error(kUnknownTask).
Task parse_task(std::string_view id);

std::string_view to_string(Task task);
std::string_view to_string(AnswerFormat format);
std::string_view to_string(PromptMode mode);

// Accepts "zero", "zero_shot", "few", "few_shot".
PromptMode parse_mode(std::string_view text);

std::size_t default_n_read(Task task, PromptMode mode);

}  // namespace cotrep
