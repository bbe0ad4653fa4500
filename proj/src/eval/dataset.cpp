#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cotrep/error.hpp"
#include "cotrep/eval.hpp"
#include "cotrep/model/rcad.hpp"

namespace cotrep {
namespace {

[[noreturn]] void schema_error(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kSchemaError, source + ":" + std::to_string(line) + ": " + what);
}

std::string scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  return {};
}

// Normalized gold answer, or an empty string if it does not fit the format.
std::string normalize_gold(const std::string& raw, AnswerFormat format) {
  switch (format) {
    case AnswerFormat::kNumber:
      return canonicalize(raw, format).value_or("");
    case AnswerFormat::kMultipleChoice: {
      std::string s = raw;
      s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '(' || c == ')' || c == ' '; }),
              s.end());
      if (s.size() == 1) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        if (c >= 'A' && c <= 'E') return std::string(1, c);
      }
      return {};
    }
    case AnswerFormat::kYesNo: {
      std::string s = raw;
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return (s == "yes" || s == "no") ? s : std::string();
    }
    case AnswerFormat::kLetters:
      return (!raw.empty() && std::all_of(raw.begin(), raw.end(), [](char c) {
               return std::isalpha(static_cast<unsigned char>(c));
             }))
                 ? raw
                 : std::string();
  }
  return {};
}

}  // namespace

std::string DatasetRecord::prompt_question() const {
  if (choices.empty()) return question;
  std::string out = question + "\nAnswer Choices:";
  for (std::size_t i = 0; i < choices.size(); ++i) {
    out += " (";
    out += static_cast<char>('A' + i);
    out += ") " + choices[i];
  }
  return out;
}

std::vector<DatasetRecord> parse_dataset(Task task, std::istream& in, const std::string& source) {
  const auto format = task_info(task).format;
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) schema_error(source, line_no, "not a JSON object");

    DatasetRecord r;
    r.task = task;
    r.format = format;
    if (!j.contains("id")) schema_error(source, line_no, "missing 'id'");
    r.id = scalar_to_string(j["id"]);
    if (r.id.empty()) schema_error(source, line_no, "'id' must be a string or number");
    if (!j.contains("question") || !j["question"].is_string() || j["question"].get<std::string>().empty()) {
      schema_error(source, line_no, "missing or empty 'question'");
    }
    r.question = j["question"].get<std::string>();
    if (!j.contains("answer")) schema_error(source, line_no, "missing 'answer'");
    const std::string raw = scalar_to_string(j["answer"]);
    r.gold = normalize_gold(raw, format);
    if (r.gold.empty()) {
      schema_error(source, line_no,
                   "answer '" + raw + "' does not fit format " + std::string(to_string(format)));
    }
    if (j.contains("choices")) {
      if (format != AnswerFormat::kMultipleChoice) {
        schema_error(source, line_no, "'choices' only allowed for multiple-choice tasks");
      }
      if (!j["choices"].is_array() || j["choices"].size() > 5) {
        schema_error(source, line_no, "'choices' must be an array of at most 5 strings");
      }
      for (const auto& c : j["choices"]) {
        if (!c.is_string()) schema_error(source, line_no, "choice is not a string");
        r.choices.push_back(c.get<std::string>());
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DatasetRecord> load_dataset(Task task, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open dataset " + path.string());
  return parse_dataset(task, in, path.string());
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    nlohmann::json j = {{"id", r.id}, {"question", r.question}, {"answer", r.gold}};
    if (!r.choices.empty()) j["choices"] = r.choices;
    out << j.dump() << '\n';
  }
  write_file_atomic(path, out.str());
}

std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine();
  while (x >= limit) x = engine();
  return x % n;
}

std::vector<DatasetRecord> select_reading_questions(const std::vector<DatasetRecord>& records,
                                                    std::size_t n, std::uint64_t seed) {
  if (n > records.size()) {
    throw Error(ErrorKind::kInvalidConfig, "reading set needs " + std::to_string(n) +
                                               " questions, source has " +
                                               std::to_string(records.size()));
  }
  std::vector<DatasetRecord> shuffled = records;
  std::mt19937_64 engine(seed);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[uniform_index(engine, i)]);
  }
  shuffled.resize(n);
  return shuffled;
}

std::vector<StimulusPair> stimulus_pairs(const std::vector<DatasetRecord>& records,
                                         const PromptTemplate& t) {
  std::vector<StimulusPair> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(make_stimulus_pair(r.id, r.prompt_question(), t));
  return out;
}

}  // namespace cotrep
