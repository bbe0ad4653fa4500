#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "cotrep/config.hpp"
#include "cotrep/control.hpp"
#include "cotrep/error.hpp"
#include "cotrep/eval.hpp"
#include "cotrep/kernels/kernels.hpp"
#include "cotrep/localization.hpp"
#include "cotrep/model/playback_backend.hpp"
#include "cotrep/model/rcad.hpp"
#include "cotrep/model/toy_backend.hpp"
#include "cotrep/prompts.hpp"
#include "cotrep/reading.hpp"

namespace cotrep::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// --config files: a JSON object whose top-level keys are global options and
// whose nested objects hold subcommand options, e.g.
//   {"seed": 3, "eval": {"task": "gsm8k", "alpha": 0.5}}
// Explicit command-line flags take precedence.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const json& obj, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct BackendArgs {
  std::string kind = "toy";
  std::string dump;
  std::uint64_t toy_seed = kDefaults.toy_seed;
  std::size_t toy_layers = kDefaults.toy_layers;
  std::size_t toy_dim = kDefaults.toy_dim;
  std::size_t toy_vocab = kDefaults.toy_vocab;
};

void add_backend_options(CLI::App* cmd, BackendArgs& b) {
  cmd->add_option("--backend", b.kind, "Model backend")->check(CLI::IsMember({"toy", "playback"}));
  cmd->add_option("--dump", b.dump, "RCAD v1 dump file (playback backend)");
  cmd->add_option("--toy-seed", b.toy_seed, "Toy backend weight seed");
  cmd->add_option("--toy-layers", b.toy_layers, "Toy backend layer count");
  cmd->add_option("--toy-dim", b.toy_dim, "Toy backend hidden size");
  cmd->add_option("--toy-vocab", b.toy_vocab, "Toy backend vocabulary size");
}

std::unique_ptr<Backend> make_backend(const BackendArgs& b) {
  if (b.kind == "playback") {
    if (b.dump.empty()) throw Error(ErrorKind::kInvalidConfig, "--backend playback needs --dump");
    return std::make_unique<PlaybackBackend>(fs::path(b.dump));
  }
  return std::make_unique<ToyBackend>(ToyConfig{b.toy_seed, b.toy_layers, b.toy_dim, b.toy_vocab});
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchemaError, path + ": " + e.what());
  }
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDegenerateInput:
      return kDegenerate;
    case ErrorKind::kBackendUnavailable:
    case ErrorKind::kGenerationUnsupported:
    case ErrorKind::kSampleNotFound:
    case ErrorKind::kDumpCorrupt:
    case ErrorKind::kTokenizationFailure:
      return kBackendFailure;
    default:
      return kUsage;
  }
}

ControlConfig control_config(const std::vector<std::size_t>& layers, double alpha,
                             const ReadingVector& v, const BackendDescriptor& desc) {
  ControlConfig cfg;
  cfg.layers = layers.empty() ? default_layers(desc) : layers;
  cfg.strength = alpha;
  cfg.vector_ref = v.provenance.stimulus_hash;
  return cfg;
}

// ---- read -------------------------------------------------------------

struct ReadArgs {
  std::string task;
  std::string mode = "zero";
  BackendArgs backend;
  std::size_t n_read = 0;
  std::string train;
  std::string out;
};

int cmd_read(const ReadArgs& a, std::uint64_t seed, std::ostream& out) {
  const Task task = parse_task(a.task);
  const PromptMode mode = parse_mode(a.mode);
  const std::size_t n_read = a.n_read ? a.n_read : default_n_read(task, mode);

  std::vector<DatasetRecord> source;
  std::string source_name;
  if (!a.train.empty()) {
    source = load_dataset(task, a.train);
    source_name = a.train;
  } else if (task == Task::kCoinFlip || task == Task::kRandomLetter) {
    // generated train-side questions; the seed offset keeps them apart from
    // a generated evaluation split with the same seed
    const auto names = load_names();
    source = task == Task::kCoinFlip ? generate_coin_flip(n_read, seed + 1, names)
                                     : generate_random_letter(n_read, seed + 1, names);
    source_name = "generated:" + std::string(to_string(task)) + "(seed=" + std::to_string(seed + 1) + ")";
  } else {
    throw Error(ErrorKind::kInvalidConfig,
                "task " + a.task + " needs --train <jsonl> with train-side questions");
  }

  const auto questions = select_reading_questions(source, n_read, seed);
  const auto pairs = stimulus_pairs(questions, template_for(task, mode));
  auto backend = make_backend(a.backend);
  ReadingVector v = build_reading_vector(pairs, *backend, n_read);
  v.provenance.seed = seed;
  v.provenance.task = std::string(to_string(task));
  v.provenance.mode = std::string(to_string(mode));
  v.provenance.source = source_name;

  write_file_atomic(a.out, to_json(v).dump(2) + "\n");
  out << "reading vector: " << v.n_layers() << " layers x " << v.dim() << " dims from " << n_read
      << " pairs -> " << a.out << "\n";
  for (std::size_t l = 0; l < v.n_layers(); ++l) {
    out << "layer " << l << ": explained variance " << std::fixed << std::setprecision(4)
        << v.explained_variance[l] << (v.flipped[l] ? " (sign flipped)" : "") << "\n";
  }
  out.unsetf(std::ios::floatfield);
  return kOk;
}

// ---- score ------------------------------------------------------------

struct ScoreArgs {
  std::string vector;
  BackendArgs backend;
  std::string task = "gsm8k";
  std::string mode = "zero";
  std::string query;
  std::string text;
  std::size_t rationale_start = 0;
  double delta = kDefaults.delta;
  std::vector<std::size_t> layers;
  std::string format = "ansi";
  std::size_t max_new_tokens = kDefaults.max_new_tokens;
  std::string id = "rationale";
  std::string out;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const ReadingVector v = reading_vector_from_json(read_json_file(a.vector));
  auto backend = make_backend(a.backend);
  const auto& desc = backend->descriptor();
  if (v.dim() != desc.dim || v.n_layers() != desc.n_layers) {
    throw Error(ErrorKind::kDimMismatch, "reading vector does not match backend " + desc.name);
  }

  ActivationTensor acts;
  std::vector<std::string> pieces;
  std::size_t rationale_start = 0;
  if (desc.supports_generation) {
    if (a.query.empty()) throw Error(ErrorKind::kInvalidConfig, "--query is required with a generating backend");
    const auto t = template_for(parse_task(a.task), parse_mode(a.mode));
    GenerationOptions opts;
    opts.max_new_tokens = a.max_new_tokens;
    auto gen = backend->generate(build_eval_prompt(a.query, t), Hook{}, opts);
    pieces = gen.prompt_tokens.pieces;
    pieces.insert(pieces.end(), gen.generated_tokens.pieces.begin(), gen.generated_tokens.pieces.end());
    rationale_start = gen.prompt_tokens.size();
    acts = std::move(gen.activations);
  } else {
    if (a.text.empty()) throw Error(ErrorKind::kInvalidConfig, "--text is required with playback");
    pieces = backend->tokenize(a.text).pieces;
    acts = backend->represent(a.text);
    rationale_start = a.rationale_start;
  }

  const auto layers = a.layers.empty() ? default_layers(desc) : a.layers;
  const ScoreTrack track = score_tokens(acts, v, a.delta, layers, pieces, rationale_start);

  std::string rendered;
  if (a.format == "json") {
    rendered = to_json(track, a.id).dump(2) + "\n";
  } else {
    rendered = render_salience(track, a.format == "html" ? SalienceFormat::kHtml : SalienceFormat::kAnsi);
  }
  if (a.out.empty()) {
    out << rendered;
  } else {
    write_file_atomic(a.out, rendered);
    out << "wrote " << a.format << " salience report -> " << a.out << "\n";
  }
  return kOk;
}

// ---- generate ---------------------------------------------------------

struct GenerateArgs {
  std::string vector;
  BackendArgs backend;
  std::string task = "gsm8k";
  std::string mode = "zero";
  std::string query;
  double alpha = kDefaults.control_strength;
  std::vector<std::size_t> layers;
  std::size_t max_new_tokens = kDefaults.max_new_tokens;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const ReadingVector v = reading_vector_from_json(read_json_file(a.vector));
  auto backend = make_backend(a.backend);
  const auto cfg = control_config(a.layers, a.alpha, v, backend->descriptor());
  const auto t = template_for(parse_task(a.task), parse_mode(a.mode));
  GenerationOptions opts;
  opts.max_new_tokens = a.max_new_tokens;
  const auto cmp = ab_compare(build_eval_prompt(a.query, t), v, cfg, *backend, opts);
  const json report = comparison_report(a.query, cmp, cfg);
  if (!a.out.empty()) write_file_atomic(a.out, report.dump(2) + "\n");
  out << "baseline:   " << cmp.baseline.generated_tokens.text << "\n"
      << "controlled: " << cmp.controlled.generated_tokens.text << "\n"
      << "differing positions: " << cmp.token_diff.size() << "\n";
  return kOk;
}

// ---- eval -------------------------------------------------------------

struct EvalArgs {
  std::string task;
  std::string mode = "zero";
  std::string vector;
  BackendArgs backend;
  std::string dataset;
  double alpha = kDefaults.control_strength;
  std::vector<std::size_t> layers;
  std::size_t limit = 0;
  std::size_t max_new_tokens = kDefaults.max_new_tokens;
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::size_t jobs, std::ostream& out) {
  const Task task = parse_task(a.task);
  const PromptMode mode = parse_mode(a.mode);
  const ReadingVector v = reading_vector_from_json(read_json_file(a.vector));
  auto backend = make_backend(a.backend);
  const auto cfg = control_config(a.layers, a.alpha, v, backend->descriptor());

  const fs::path dataset = a.dataset.empty()
                               ? default_data_dir() / "fixtures" / (std::string(to_string(task)) + ".mini.jsonl")
                               : fs::path(a.dataset);
  const auto records = load_dataset(task, dataset);

  ExperimentSpec spec;
  spec.task = task;
  spec.mode = mode;
  spec.n_limit = a.limit;
  spec.options.max_new_tokens = a.max_new_tokens;
  spec.jobs = jobs;
  ProgressFn flush;
  if (!a.out.empty()) {
    flush = [&](const ExperimentReport& partial) {
      write_file_atomic(a.out, to_json(partial).dump(2) + "\n");
    };
  }
  const auto report = run_experiment(spec, records, template_for(task, mode), *backend, v, cfg, flush);
  if (!a.out.empty()) write_file_atomic(a.out, to_json(report).dump(2) + "\n");
  out << "task " << report.task << " (" << report.mode << "), n=" << report.n << ", alpha=" << cfg.strength
      << "\n"
      << "accuracy baseline=" << std::fixed << std::setprecision(4) << report.accuracy_baseline
      << " controlled=" << report.accuracy_controlled << "\n";
  out.unsetf(std::ios::floatfield);
  return kOk;
}

// ---- inspect / gen-data / toy-dump -----------------------------------

int cmd_inspect(const std::string& dump, std::ostream& out) {
  const RcadFile file = read_rcad(dump);
  json summary = {{"model", file.model},
                  {"n_layers", file.n_layers},
                  {"dim", file.dim},
                  {"dtype", "f32le"},
                  {"n_samples", file.samples.size()},
                  {"extra", file.extra_header},
                  {"samples", json::array()}};
  for (const auto& s : file.samples) {
    summary["samples"].push_back({{"id", s.id}, {"n_tokens", s.activations.n_tokens()}, {"text", s.text}});
  }
  out << summary.dump(2) << "\n";
  return kOk;
}

struct GenDataArgs {
  std::string task;
  std::size_t n = 0;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& a, std::uint64_t seed, std::ostream& out) {
  const Task task = parse_task(a.task);
  const auto names = load_names();
  const std::size_t n = a.n ? a.n : task_info(task).eval_count;
  std::vector<DatasetRecord> records;
  if (task == Task::kCoinFlip) {
    records = generate_coin_flip(n, seed, names);
  } else if (task == Task::kRandomLetter) {
    records = generate_random_letter(n, seed, names);
  } else {
    throw Error(ErrorKind::kInvalidConfig, "gen-data supports coin_flip and random_letter only");
  }
  write_dataset(a.out, records);
  out << "wrote " << records.size() << " " << a.task << " records -> " << a.out << "\n";
  return kOk;
}

struct ImportArgs {
  std::string task;
  std::string in;
  std::string out;
};

int cmd_import(const ImportArgs& a, std::ostream& out) {
  const Task task = parse_task(a.task);
  std::ifstream in(a.in);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + a.in);
  const auto records = import_upstream(task, in, a.in);
  write_dataset(a.out, records);
  out << "imported " << records.size() << " " << a.task << " records -> " << a.out;
  if (records.size() != task_info(task).eval_count) {
    out << " (evaluation split size is " << task_info(task).eval_count << ")";
  }
  out << "\n";
  return kOk;
}

struct ToyDumpArgs {
  BackendArgs backend;
  std::string prompts;
  std::string out;
};

int cmd_toy_dump(const ToyDumpArgs& a, std::ostream& out) {
  ToyBackend toy({a.backend.toy_seed, a.backend.toy_layers, a.backend.toy_dim, a.backend.toy_vocab});
  RcadFile file;
  file.model = toy.descriptor().name;
  file.n_layers = toy.descriptor().n_layers;
  file.dim = toy.descriptor().dim;
  file.extra_header["layer_convention"] = "block_outputs";
  std::ifstream in(a.prompts);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + a.prompts);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("text")) {
      throw Error(ErrorKind::kSchemaError, a.prompts + ":" + std::to_string(line_no) + ": expected {id, text}");
    }
    RcadSample s;
    s.id = j["id"].get<std::string>();
    s.text = j["text"].get<std::string>();
    s.token_pieces = toy.tokenize(s.text).pieces;
    s.activations = toy.represent(s.text);
    file.samples.push_back(std::move(s));
  }
  write_rcad(a.out, file);
  out << "wrote " << file.samples.size() << " samples -> " << a.out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reading vectors, reasoning-error localization and representation control for CoT"};
  app.name(args.empty() ? "cotrep" : args[0]);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON experiment manifest; explicit flags win");

  std::uint64_t seed = kDefaults.seed;
  std::size_t jobs = 1;
  app.add_option("--seed", seed, "Seed for stimulus sampling and data generation");
  app.add_option("--jobs", jobs, "Parallel backend instances for eval")->check(CLI::PositiveNumber);
  app.add_flag_callback("--isa", [&] { out << kernels::to_string(kernels::active().isa) << "\n"; },
                        "Print the selected SIMD kernel variant");

  const std::string n_read_help =
      "Reading-set size; 0 = per-task default (zero/few: gsm8k 128/512, svamp 512/256, aqua 256/256, "
      "strategyqa 512/256, csqa 512/256, coin_flip 128/512, random_letter 128/128)";
  const std::string layers_help = "Layer indices; empty = last " +
                                  std::to_string(kDefaults.control_layer_count) + " layers";

  ReadArgs read;
  auto* read_cmd = app.add_subcommand("read", "Build a per-layer reading vector from stimulus pairs");
  read_cmd->add_option("--task", read.task, "Task id")->required();
  read_cmd->add_option("--mode", read.mode, "Prompt mode")->check(CLI::IsMember({"zero", "few", "zero_shot", "few_shot"}));
  add_backend_options(read_cmd, read.backend);
  read_cmd->add_option("--n-read", read.n_read, n_read_help);
  read_cmd->add_option("--train", read.train, "Train-side JSONL to draw stimulus questions from");
  read_cmd->add_option("--out", read.out, "Output reading-vector JSON")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score and render a rationale against a reading vector");
  score_cmd->add_option("--vector", score.vector, "Reading-vector JSON")->required();
  add_backend_options(score_cmd, score.backend);
  score_cmd->add_option("--task", score.task, "Task id (prompt template)");
  score_cmd->add_option("--mode", score.mode, "Prompt mode");
  score_cmd->add_option("--query", score.query, "Question to answer (generating backends)");
  score_cmd->add_option("--text", score.text, "Recorded sample text (playback)");
  score_cmd->add_option("--rationale-start", score.rationale_start, "First rendered token (playback)");
  score_cmd->add_option("--delta", score.delta, "Score threshold subtracted before normalization");
  score_cmd->add_option("--layer", score.layers, layers_help);
  score_cmd->add_option("--format", score.format, "Output format")->check(CLI::IsMember({"ansi", "html", "json"}));
  score_cmd->add_option("--max-new-tokens", score.max_new_tokens, "Generation budget");
  score_cmd->add_option("--id", score.id, "Report id (json format)");
  score_cmd->add_option("--out", score.out, "Output file; stdout when empty");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Baseline vs controlled generation for one query");
  gen_cmd->add_option("--vector", gen.vector, "Reading-vector JSON")->required();
  add_backend_options(gen_cmd, gen.backend);
  gen_cmd->add_option("--task", gen.task, "Task id (prompt template)");
  gen_cmd->add_option("--mode", gen.mode, "Prompt mode");
  gen_cmd->add_option("--query", gen.query, "Question")->required();
  gen_cmd->add_option("--alpha", gen.alpha, "Control strength");
  gen_cmd->add_option("--layers", gen.layers, layers_help);
  gen_cmd->add_option("--max-new-tokens", gen.max_new_tokens, "Generation budget");
  gen_cmd->add_option("--out", gen.out, "Comparison report JSON");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy with and without control on a dataset");
  eval_cmd->add_option("--task", ev.task, "Task id")->required();
  eval_cmd->add_option("--mode", ev.mode, "Prompt mode");
  eval_cmd->add_option("--vector", ev.vector, "Reading-vector JSON")->required();
  add_backend_options(eval_cmd, ev.backend);
  eval_cmd->add_option("--dataset", ev.dataset, "JSONL dataset; empty = bundled mini fixture");
  eval_cmd->add_option("--alpha", ev.alpha, "Control strength");
  eval_cmd->add_option("--layers", ev.layers, layers_help);
  eval_cmd->add_option("--limit", ev.limit, "Evaluate at most this many items; 0 = all");
  eval_cmd->add_option("--max-new-tokens", ev.max_new_tokens, "Generation budget");
  eval_cmd->add_option("--out", ev.out, "Report JSON (flushed after every item)");

  std::string inspect_dump;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize an RCAD v1 dump");
  inspect_cmd->add_option("dump", inspect_dump, "Dump file")->required();

  GenDataArgs gd;
  auto* gd_cmd = app.add_subcommand("gen-data", "Generate a coin_flip or random_letter dataset");
  gd_cmd->add_option("--task", gd.task, "coin_flip or random_letter")->required();
  gd_cmd->add_option("--n", gd.n, "Record count; 0 = full evaluation size");
  gd_cmd->add_option("--out", gd.out, "Output JSONL")->required();

  ImportArgs im;
  auto* im_cmd = app.add_subcommand("import", "Convert an upstream benchmark file to the dataset JSONL schema");
  im_cmd->add_option("--task", im.task, "Task id")->required();
  im_cmd->add_option("--in", im.in, "Upstream file (JSON, JSON lines or {examples: [...]})")->required();
  im_cmd->add_option("--out", im.out, "Output JSONL")->required();

  ToyDumpArgs td;
  auto* td_cmd = app.add_subcommand("toy-dump", "Record toy-backend activations into an RCAD v1 dump");
  add_backend_options(td_cmd, td.backend);
  td_cmd->add_option("--prompts", td.prompts, "JSONL of {id, text}")->required();
  td_cmd->add_option("--out", td.out, "Output dump")->required();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*read_cmd) return cmd_read(read, seed, out);
    if (*score_cmd) return cmd_score(score, out);
    if (*gen_cmd) return cmd_generate(gen, out);
    if (*eval_cmd) return cmd_eval(ev, jobs, out);
    if (*inspect_cmd) return cmd_inspect(inspect_dump, out);
    if (*gd_cmd) return cmd_gen_data(gd, seed, out);
    if (*im_cmd) return cmd_import(im, out);
    if (*td_cmd) return cmd_toy_dump(td, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBackendFailure;
  }
  return kUsage;
}

}  // namespace cotrep::cli
