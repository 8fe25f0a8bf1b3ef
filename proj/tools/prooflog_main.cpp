#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "prooflog/eval.hpp"
#include "prooflog/parser.hpp"
#include "prooflog/proof.hpp"
#include "prooflog/unify.hpp"

using namespace prooflog;

namespace {

struct EngineFlags {
  std::string strategy = "ids";
  int max_depth = 20;
  int max_solutions = 20;
  long long step_budget = 1'000'000;
  bool occurs_check = false;

  void attach(CLI::App& app) {
    app.add_option("--strategy", strategy, "Search strategy")
        ->check(CLI::IsMember({"dfs", "ids"}))
        ->capture_default_str();
    app.add_option("--max-depth", max_depth, "Depth ceiling for IDS")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--max-solutions", max_solutions,
                   "Reasoning paths per query")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--step-budget", step_budget, "Resolution step budget")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--occurs-check", occurs_check,
                 "Enable the occurs check during unification");
  }

  SearchConfig config() const {
    SearchConfig cfg;
    cfg.strategy = strategy == "dfs" ? Strategy::dfs : Strategy::ids;
    cfg.max_depth = max_depth;
    cfg.max_solutions = max_solutions;
    cfg.step_budget = step_budget;
    cfg.occurs_check = occurs_check;
    return cfg;
  }
};

std::optional<std::string> read_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void print_diagnostics(const std::vector<ParseDiagnostic>& diagnostics,
                       const std::string& origin) {
  for (const auto& d : diagnostics) {
    std::cerr << origin << ":" << d.line << ":" << d.column << ": "
              << (d.kind == ParseDiagnostic::Kind::error ? "error" : "warning")
              << ": " << d.message << "\n";
  }
}

std::optional<ParseResult> load_program(const std::string& file) {
  const auto text = read_file(file);
  if (!text) {
    std::cerr << "cannot read program file: " << file << "\n";
    return std::nullopt;
  }
  ParseResult parsed = parse_source({*text, file});
  print_diagnostics(parsed.diagnostics, file);
  if (!parsed.ok()) return std::nullopt;
  return parsed;
}

nlohmann::ordered_json solution_to_json(const Solution& s) {
  nlohmann::ordered_json j;
  j["bindings"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : s.answer_bindings.bindings()) {
    std::string name = key.name;
    if (key.index != 0) name += "_" + std::to_string(key.index);
    j["bindings"][name] = canonical_render(value);
  }
  j["depth_found"] = s.depth_found;
  j["steps_used"] = s.steps_used;
  j["proof"] = nlohmann::ordered_json::parse(proof_to_json(s.proof));
  return j;
}

int run_solve(const std::string& program_file, const std::string& query_text,
              const EngineFlags& flags, const std::string& dag_labeling,
              bool pretty) {
  const auto parsed = load_program(program_file);
  if (!parsed) return 1;

  std::vector<Goal> query;
  if (!query_text.empty()) {
    QueryParseResult q = parse_query(query_text);
    print_diagnostics(q.diagnostics, "<query>");
    if (!q.ok()) return 1;
    query = std::move(q.goals);
  } else if (!parsed->queries.empty()) {
    query = parsed->queries.front();
  } else {
    std::cerr << "no query: pass --query or put a '?- ...' line in the "
                 "program\n";
    return 1;
  }

  const SolveResult result = solve(parsed->kb, query, flags.config());
  nlohmann::ordered_json j;
  j["status"] = result.budget_exhausted ? "budget_exhausted"
               : result.depth_capped    ? "depth_capped"
                                        : "ok";
  j["steps_used"] = result.steps_used;
  j["solutions"] = nlohmann::ordered_json::array();
  for (const Solution& s : result.solutions) {
    j["solutions"].push_back(solution_to_json(s));
  }
  if (!dag_labeling.empty() && !result.solutions.empty()) {
    const auto labeling = labeling_from(dag_labeling);
    if (!labeling) {
      std::cerr << "unknown labeling: " << dag_labeling << "\n";
      return 1;
    }
    try {
      const ProofGraph g =
          tree_to_dag(result.solutions.front().proof, *labeling);
      j["first_proof_dag"] =
          nlohmann::ordered_json::parse(graph_to_json(g));
    } catch (const MissingProvenanceError& e) {
      j["first_proof_dag_error"] = e.what();
    }
  }
  if (!result.diagnostics.empty()) j["diagnostics"] = result.diagnostics;
  std::cout << j.dump(pretty ? 2 : -1) << "\n";
  return 0;
}

int run_check(const std::string& program_file, const std::string& proof_file,
              const EngineFlags& flags) {
  const auto parsed = load_program(program_file);
  if (!parsed) return 2;
  const auto proof_text = read_file(proof_file);
  if (!proof_text) {
    std::cerr << "cannot read proof file: " << proof_file << "\n";
    return 2;
  }
  ProofTree proof;
  try {
    proof = proof_from_json(*proof_text);
  } catch (const ProofFormatError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const CheckOutcome outcome = check_proof(parsed->kb, proof, flags.config());
  if (outcome.accepted) {
    std::cout << "accept\n";
    return 0;
  }
  std::cout << "reject: " << outcome.reason << "\n";
  return 1;
}

void print_summary(const std::string& report_dir) {
  if (const auto text = read_file(report_dir + "/summary.txt")) {
    std::cout << *text;
  }
}

int run_eval_command(const std::string& dataset_file,
                     const std::string& format_name,
                     const std::string& programs_dir,
                     const std::string& service_config_file,
                     const std::string& template_file, int shots,
                     const std::string& report_dir,
                     const std::string& labeling_name, int workers,
                     const EngineFlags& flags) {
  const auto format = dataset_format_from(format_name);
  if (!format) {
    std::cerr << "unknown format: " << format_name << "\n";
    return 1;
  }
  DatasetLoadResult data;
  try {
    data = load_dataset(dataset_file, *format);
  } catch (const DatasetLoadError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  for (const auto& d : data.diagnostics) std::cerr << d << "\n";

  ProgramSource source = OfflinePrograms{programs_dir};
  if (!service_config_file.empty()) {
    try {
      ServicePrograms service;
      service.service = load_service_config(service_config_file);
      service.prompt = load_template(template_file);
      service.shots = shots;
      source = std::move(service);
    } catch (const TemplateError& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
  } else if (programs_dir.empty()) {
    std::cerr << "pass --programs-dir or --service-config\n";
    return 1;
  }

  EvalConfig cfg;
  cfg.engine = flags.config();
  cfg.workers = workers;
  if (!labeling_name.empty()) {
    const auto labeling = labeling_from(labeling_name);
    if (!labeling) {
      std::cerr << "unknown labeling: " << labeling_name << "\n";
      return 1;
    }
    cfg.labeling = *labeling;
  }

  const MetricsReport report = run_eval(data.records, *format, source, cfg);
  emit_report(report, report_dir);
  print_summary(report_dir);
  return 0;
}

int run_score(const std::string& dataset_file, const std::string& format_name,
              const std::string& predictions_file,
              const std::string& report_dir) {
  const auto format = dataset_format_from(format_name);
  if (!format) {
    std::cerr << "unknown format: " << format_name << "\n";
    return 1;
  }
  try {
    const DatasetLoadResult data = load_dataset(dataset_file, *format);
    for (const auto& d : data.diagnostics) std::cerr << d << "\n";
    const std::vector<Prediction> predictions =
        load_predictions(predictions_file);
    EvalConfig cfg;
    const MetricsReport report =
        score_predictions(data.records, *format, predictions, cfg);
    emit_report(report, report_dir);
    print_summary(report_dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prolog-subset inference engine with machine-checkable proof "
               "logs and an evaluation harness"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd =
      app.add_subcommand("solve", "Run one program + query, dump proofs");
  std::string program_file;
  std::string query_text;
  std::string dag_labeling;
  bool pretty = false;
  EngineFlags solve_flags;
  solve_cmd->add_option("--program", program_file, "Program file")
      ->required();
  solve_cmd->add_option("--query", query_text,
                        "Query text (default: the program's ?- line)");
  solve_cmd->add_option("--dag", dag_labeling,
                        "Also dump the first proof as a DAG "
                        "(by_provenance|by_render)");
  solve_cmd->add_flag("--pretty", pretty, "Indent the JSON output");
  solve_flags.attach(*solve_cmd);

  // eval
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a dataset end to end");
  std::string dataset_file;
  std::string format_name;
  std::string programs_dir;
  std::string service_config_file;
  std::string template_file;
  std::string report_dir = "report";
  std::string labeling_name;
  int shots = 0;
  int workers = 1;
  EngineFlags eval_flags;
  eval_cmd->add_option("--dataset", dataset_file, "Dataset JSONL file")
      ->required();
  eval_cmd->add_option("--format", format_name,
                       "proofwriter|prontoqa|gsm8k_proofs")
      ->required();
  eval_cmd->add_option("--programs-dir", programs_dir,
                       "Directory of pre-generated <id>.pl programs");
  eval_cmd->add_option("--service-config", service_config_file,
                       "Completion service config JSON");
  eval_cmd->add_option("--template", template_file,
                       "Prompt template JSON (service mode)");
  eval_cmd->add_option("--shots", shots,
                       "Demonstrations per prompt (0 = format default)");
  eval_cmd->add_option("--report-dir", report_dir, "Report output directory")
      ->capture_default_str();
  eval_cmd->add_option("--labeling", labeling_name,
                       "Override proof-graph labeling");
  eval_cmd->add_option("--workers", workers, "Instance-parallel workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_flags.attach(*eval_cmd);

  // score
  auto* score_cmd = app.add_subcommand(
      "score", "Score pre-computed predictions against a dataset");
  std::string score_dataset;
  std::string score_format;
  std::string predictions_file;
  std::string score_report_dir = "report";
  score_cmd->add_option("--dataset", score_dataset, "Dataset JSONL file")
      ->required();
  score_cmd->add_option("--format", score_format,
                        "proofwriter|prontoqa|gsm8k_proofs")
      ->required();
  score_cmd->add_option("--predictions", predictions_file,
                        "Predictions JSONL file")
      ->required();
  score_cmd->add_option("--report-dir", score_report_dir,
                        "Report output directory")
      ->capture_default_str();

  // check
  auto* check_cmd = app.add_subcommand(
      "check", "Replay a proof file against a program");
  std::string check_program;
  std::string check_proof_file;
  EngineFlags check_flags;
  check_cmd->add_option("--program", check_program, "Program file")
      ->required();
  check_cmd->add_option("--proof", check_proof_file, "Proof JSON file")
      ->required();
  check_flags.attach(*check_cmd);

  CLI11_PARSE(app, argc, argv);

  if (solve_cmd->parsed()) {
    return run_solve(program_file, query_text, solve_flags, dag_labeling,
                     pretty);
  }
  if (eval_cmd->parsed()) {
    return run_eval_command(dataset_file, format_name, programs_dir,
                            service_config_file, template_file, shots,
                            report_dir, labeling_name, workers, eval_flags);
  }
  if (score_cmd->parsed()) {
    return run_score(score_dataset, score_format, predictions_file,
                     score_report_dir);
  }
  if (check_cmd->parsed()) {
    return run_check(check_program, check_proof_file, check_flags);
  }
  return 1;
}
