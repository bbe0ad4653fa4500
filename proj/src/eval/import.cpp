#include <sstream>

#include "cotrep/error.hpp"
#include "cotrep/eval.hpp"

namespace cotrep {
namespace {

using nlohmann::json;

[[noreturn]] void bad_item(const std::string& source, std::size_t index, const std::string& what) {
  throw Error(ErrorKind::kSchemaError, source + ": item " + std::to_string(index + 1) + ": " + what);
}

const json& field(const json& item, const char* key, const std::string& source, std::size_t index) {
  if (!item.is_object() || !item.contains(key)) bad_item(source, index, std::string("missing '") + key + "'");
  return item.at(key);
}

std::string text(const json& v, const char* key, const std::string& source, std::size_t index) {
  if (!v.is_string()) bad_item(source, index, std::string("'") + key + "' is not a string");
  return v.get<std::string>();
}

// Items from a JSON array, an object with an "examples" array, or JSON lines.
std::vector<json> read_items(std::istream& in, const std::string& source) {
  const std::string all{std::istreambuf_iterator<char>(in), {}};
  const auto whole = json::parse(all, nullptr, false);
  if (!whole.is_discarded()) {
    if (whole.is_array()) return whole.get<std::vector<json>>();
    if (whole.is_object() && whole.contains("examples") && whole["examples"].is_array()) {
      return whole["examples"].get<std::vector<json>>();
    }
    if (whole.is_object()) return {whole};
  }
  std::vector<json> items;
  std::istringstream lines(all);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorKind::kSchemaError, source + ":" + std::to_string(line_no) + ": not JSON");
    }
    items.push_back(std::move(j));
  }
  return items;
}

json convert(Task task, const json& item, const std::string& source, std::size_t index) {
  const std::string fallback_id = std::string(to_string(task)) + "-" + std::to_string(index);
  auto id_of = [&](const char* key) {
    if (item.is_object() && item.contains(key) && (item[key].is_string() || item[key].is_number())) {
      return item[key].is_string() ? item[key].get<std::string>() : item[key].dump();
    }
    return fallback_id;
  };

  switch (task) {
    case Task::kGsm8k: {
      // {"question", "answer": "<worked solution>\n#### 72"}
      const std::string answer = text(field(item, "answer", source, index), "answer", source, index);
      const auto mark = answer.rfind("####");
      if (mark == std::string::npos) bad_item(source, index, "answer has no '####' final line");
      std::string gold = answer.substr(mark + 4);
      gold.erase(0, gold.find_first_not_of(" \t"));
      return {{"id", id_of("id")},
              {"question", text(field(item, "question", source, index), "question", source, index)},
              {"answer", gold}};
    }
    case Task::kSvamp: {
      // {"ID", "Body", "Question", "Answer": number}
      if (item.contains("question")) break;
      std::string body = text(field(item, "Body", source, index), "Body", source, index);
      const std::string question = text(field(item, "Question", source, index), "Question", source, index);
      if (!body.empty() && body.back() != ' ') body += ' ';
      return {{"id", id_of("ID")}, {"question", body + question}, {"answer", field(item, "Answer", source, index)}};
    }
    case Task::kAqua: {
      // {"question", "options": ["A)21", ...], "correct": "A"}
      if (!item.contains("options")) break;
      json choices = json::array();
      for (const auto& opt : field(item, "options", source, index)) {
        std::string o = text(opt, "options", source, index);
        if (o.size() >= 2 && o[1] == ')') o.erase(0, 2);
        choices.push_back(o);
      }
      return {{"id", id_of("id")},
              {"question", text(field(item, "question", source, index), "question", source, index)},
              {"answer", field(item, "correct", source, index)},
              {"choices", choices}};
    }
    case Task::kStrategyQa: {
      // {"input", "target_scores": {"Yes": 1, "No": 0}} or {"qid", "question", "answer": bool}
      if (item.contains("input")) {
        const auto& scores = field(item, "target_scores", source, index);
        const bool yes = scores.value("Yes", 0) > scores.value("No", 0);
        return {{"id", id_of("qid")},
                {"question", text(item["input"], "input", source, index)},
                {"answer", yes ? "yes" : "no"}};
      }
      if (item.contains("qid")) {
        return {{"id", id_of("qid")},
                {"question", text(field(item, "question", source, index), "question", source, index)},
                {"answer", field(item, "answer", source, index)}};
      }
      break;
    }
    case Task::kCsqa: {
      // {"id", "question": {"stem", "choices": [{"label", "text"}]}, "answerKey"}
      if (!item.contains("question") || !item["question"].is_object()) break;
      const auto& q = item["question"];
      json choices = json::array();
      for (const auto& c : field(q, "choices", source, index)) choices.push_back(text(field(c, "text", source, index), "text", source, index));
      return {{"id", id_of("id")},
              {"question", text(field(q, "stem", source, index), "stem", source, index)},
              {"answer", field(item, "answerKey", source, index)},
              {"choices", choices}};
    }
    case Task::kCoinFlip:
    case Task::kRandomLetter:
      break;
  }
  // already close to the dataset schema: {id?, question, answer, choices?}
  json out = {{"id", id_of("id")},
              {"question", text(field(item, "question", source, index), "question", source, index)},
              {"answer", field(item, "answer", source, index)}};
  if (item.contains("choices")) out["choices"] = item["choices"];
  return out;
}

}  // namespace

std::vector<DatasetRecord> import_upstream(Task task, std::istream& in, const std::string& source) {
  const auto items = read_items(in, source);
  std::ostringstream lines;
  for (std::size_t i = 0; i < items.size(); ++i) lines << convert(task, items[i], source, i).dump() << '\n';
  std::istringstream converted(lines.str());
  return parse_dataset(task, converted, source + " (converted)");
}

}  // namespace cotrep
