#include <algorithm>
#include <cctype>
#include <regex>

#include "cotrep/eval.hpp"

namespace cotrep {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<std::string> first_match(const std::string& text, const std::regex& re, int group = 0) {
  std::smatch m;
  if (std::regex_search(text, m, re)) return m[group].str();
  return std::nullopt;
}

}  // namespace

std::optional<std::string> parse_answer(std::string_view text, AnswerFormat format) {
  const std::string s(text);
  switch (format) {
    case AnswerFormat::kNumber: {
      static const std::regex kThousands(R"((\d),(?=\d))");
      static const std::regex kNumber(R"(-?\d+(?:\.\d+)?)");
      const std::string plain = std::regex_replace(s, kThousands, "$1");
      return first_match(plain, kNumber);
    }
    case AnswerFormat::kMultipleChoice: {
      static const std::regex kParen(R"(\(\s*([A-Ea-e])\s*\))");
      static const std::regex kUpper(R"(\b([A-E])\b)");
      static const std::regex kLower(R"(\b([a-e])\b(?=\s*(?:[).:,]|$)))");
      for (const auto* re : {&kParen, &kUpper, &kLower}) {
        if (auto m = first_match(s, *re, 1)) {
          return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>((*m)[0]))));
        }
      }
      return std::nullopt;
    }
    case AnswerFormat::kYesNo: {
      static const std::regex kYesNo(R"(\b(yes|no)\b)", std::regex::icase);
      if (auto m = first_match(s, kYesNo, 1)) return lower(*m);
      return std::nullopt;
    }
    case AnswerFormat::kLetters: {
      static const std::regex kRun(R"([A-Za-z]+)");
      return first_match(s, kRun);
    }
  }
  return std::nullopt;
}

std::optional<std::string> extract_answer(std::string_view response, Task task) {
  const auto& info = task_info(task);
  const std::string hay = lower(response);
  std::string needle = lower(info.extraction_template);
  // the "Therefore, " lead-in is optional
  constexpr std::string_view kLead = "therefore, ";
  if (needle.starts_with(kLead)) needle.erase(0, kLead.size());
  const auto at = hay.rfind(needle);
  if (at == std::string::npos) return std::nullopt;
  return parse_answer(response.substr(at + needle.size()), info.format);
}

Extraction extract_with_reprompt(std::string_view prompt, std::string_view response, Task task,
                                 Backend& backend, const Hook& hook) {
  Extraction out;
  if (auto a = extract_answer(response, task)) {
    out.answer = std::move(a);
    return out;
  }
  const auto& info = task_info(task);
  std::string second(prompt);
  second += " ";
  second += response;
  second += "\n";
  second += info.extraction_template;
  GenerationOptions opts;
  opts.max_new_tokens = kDefaults.reprompt_max_tokens;
  const auto continuation = backend.generate(second, hook, opts);
  out.answer = parse_answer(continuation.generated_tokens.text, info.format);
  out.reprompted = true;
  return out;
}

std::optional<std::string> canonicalize(std::string_view answer, AnswerFormat format) {
  if (format == AnswerFormat::kMultipleChoice) {
    std::string up(answer);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return up;
  }
  if (format != AnswerFormat::kNumber) return lower(answer);

  std::string s(answer);
  s.erase(std::remove(s.begin(), s.end(), ','), s.end());
  static const std::regex kDecimal(R"(^\s*([+-]?)(\d*)(?:\.(\d*))?\.?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, kDecimal)) return std::nullopt;
  std::string whole = m[2].str();
  std::string frac = m[3].str();
  if (whole.empty() && frac.empty()) return std::nullopt;
  whole.erase(0, std::min(whole.find_first_not_of('0'), whole.size()));
  if (whole.empty()) whole = "0";
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = frac.empty() ? whole : whole + "." + frac;
  if (m[1].str() == "-" && out != "0") out = "-" + out;
  return out;
}

bool grade(std::string_view pred, std::string_view gold, AnswerFormat format) {
  const auto p = canonicalize(pred, format);
  const auto g = canonicalize(gold, format);
  return p && g && *p == *g;
}

}  // namespace cotrep
