#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "cotrep/error.hpp"
#include "cotrep/eval.hpp"

namespace cotrep {
namespace {

ItemResult evaluate_item(const DatasetRecord& record, const PromptTemplate& t, Backend& backend,
                         const Hook& hook, const GenerationOptions& options) {
  const std::string prompt = build_eval_prompt(record.prompt_question(), t);
  ItemResult item;
  item.id = record.id;

  const auto base = backend.generate(prompt, Hook{}, options);
  item.pred_base = extract_with_reprompt(prompt, base.generated_tokens.text, record.task, backend, Hook{}).answer;

  const auto ctrl = backend.generate(prompt, hook, options);
  item.pred_ctrl = extract_with_reprompt(prompt, ctrl.generated_tokens.text, record.task, backend, hook).answer;

  item.correct_base = item.pred_base && grade(*item.pred_base, record.gold, record.format);
  item.correct_ctrl = item.pred_ctrl && grade(*item.pred_ctrl, record.gold, record.format);
  return item;
}

}  // namespace

void finalize(ExperimentReport& report) {
  report.n = report.per_item.size();
  std::size_t base = 0;
  std::size_t ctrl = 0;
  for (const auto& item : report.per_item) {
    base += item.correct_base ? 1 : 0;
    ctrl += item.correct_ctrl ? 1 : 0;
  }
  const double n = static_cast<double>(report.n);
  report.accuracy_baseline = report.n ? static_cast<double>(base) / n : 0.0;
  report.accuracy_controlled = report.n ? static_cast<double>(ctrl) / n : 0.0;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const std::vector<DatasetRecord>& records,
                                const PromptTemplate& t, Backend& backend, const ReadingVector& v,
                                const ControlConfig& cfg, const ProgressFn& progress) {
  const auto& desc = backend.descriptor();
  if (!desc.supports_generation) {
    throw Error(ErrorKind::kGenerationUnsupported, desc.name + " cannot run experiments");
  }
  if (v.dim() != desc.dim || v.n_layers() != desc.n_layers) {
    throw Error(ErrorKind::kDimMismatch, "reading vector does not match backend");
  }
  const Hook hook = make_hook(v, cfg);

  const std::size_t n = spec.n_limit == 0 ? records.size() : std::min(spec.n_limit, records.size());
  std::vector<std::optional<ItemResult>> results(n);

  ExperimentReport report;
  report.task = std::string(to_string(spec.task));
  report.backend = desc.name;
  report.mode = std::string(to_string(spec.mode));
  report.alpha = cfg.strength;
  report.layers = cfg.layers;

  std::mutex mu;
  auto publish = [&](std::size_t index, ItemResult item) {
    std::lock_guard lock(mu);
    results[index] = std::move(item);
    if (!progress) return;
    ExperimentReport partial = report;
    for (const auto& r : results) {
      if (r) partial.per_item.push_back(*r);
    }
    finalize(partial);
    progress(partial);
  };

  const std::size_t jobs = std::clamp<std::size_t>(spec.jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      publish(i, evaluate_item(records[i], t, backend, hook, spec.options));
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, instance = backend.clone()] {
        try {
          for (std::size_t i = next++; i < n; i = next++) {
            publish(i, evaluate_item(records[i], t, *instance, hook, spec.options));
          }
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      });
    }
    for (auto& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (auto& r : results) report.per_item.push_back(std::move(*r));
  finalize(report);
  return report;
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json items = nlohmann::json::array();
  auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(); };
  for (const auto& it : report.per_item) {
    items.push_back({{"id", it.id},
                     {"pred_base", opt(it.pred_base)},
                     {"pred_ctrl", opt(it.pred_ctrl)},
                     {"correct_base", it.correct_base},
                     {"correct_ctrl", it.correct_ctrl}});
  }
  return {{"task", report.task},
          {"backend", report.backend},
          {"mode", report.mode},
          {"n", report.n},
          {"accuracy_baseline", report.accuracy_baseline},
          {"accuracy_controlled", report.accuracy_controlled},
          {"alpha", report.alpha},
          {"layers", report.layers},
          {"per_item", std::move(items)}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport r;
    r.task = j.at("task").get<std::string>();
    r.backend = j.at("backend").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    r.accuracy_baseline = j.at("accuracy_baseline").get<double>();
    r.accuracy_controlled = j.at("accuracy_controlled").get<double>();
    r.alpha = j.value("alpha", 0.0);
    r.layers = j.value("layers", std::vector<std::size_t>{});
    auto opt = [](const nlohmann::json& v) -> std::optional<std::string> {
      if (v.is_null()) return std::nullopt;
      return v.get<std::string>();
    };
    for (const auto& it : j.at("per_item")) {
      r.per_item.push_back({it.at("id").get<std::string>(), opt(it.at("pred_base")),
                            opt(it.at("pred_ctrl")), it.at("correct_base").get<bool>(),
                            it.at("correct_ctrl").get<bool>()});
    }
    if (r.n != r.per_item.size()) throw Error(ErrorKind::kSchemaError, "n does not match per_item");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaError, std::string("report JSON: ") + e.what());
  }
}

}  // namespace cotrep
