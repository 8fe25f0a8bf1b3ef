#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "prooflog/codegen.hpp"
#include "prooflog/engine.hpp"
#include "prooflog/ged.hpp"
#include "prooflog/proof_graph.hpp"

namespace prooflog {

enum class DatasetFormat { proofwriter, prontoqa, gsm8k_proofs };

std::optional<DatasetFormat> dataset_format_from(std::string_view name);
const char* dataset_format_name(DatasetFormat format);

/// Default few-shot budget per format: 2 demonstrations for the logical
/// datasets, 5 for arithmetic.
int default_shots(DatasetFormat format);
/// Logical gold proofs are aligned by statement identifiers; arithmetic ones
/// by rendered node text.
Labeling default_labeling(DatasetFormat format);

struct ContextStatement {
  std::string id;
  std::string text;
};

/// Logical datasets carry a three-way label; arithmetic golds are integers
/// (held exactly as rationals with denominator 1).
using GoldAnswer = std::variant<AnswerLabel, Rational>;

struct EvalRecord {
  std::string instance_id;
  std::vector<ContextStatement> context_statements;
  std::string question_text;
  GoldAnswer gold_answer;
  std::vector<ProofGraph> gold_proofs;  // possibly several valid proofs
  std::optional<int> depth;
  std::size_t n_statements = 0;  // equals context_statements.size()
};

struct DatasetLoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetLoadResult {
  std::vector<EvalRecord> records;  // deterministic file order
  std::vector<std::string> diagnostics;  // per-record rejections, warnings
};

/// Line-delimited JSON records; malformed records are rejected with
/// instance-level diagnostics, never a global failure. Throws
/// DatasetLoadError only when the file is unreadable.
DatasetLoadResult load_dataset(const std::filesystem::path& file,
                               DatasetFormat format);

struct KindMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Label equality for logical answers; for arithmetic, the prediction is
/// correct iff it equals the gold integer exactly (denominator 1). Throws
/// KindMismatchError when the kinds differ.
bool score_answer(const GoldAnswer& pred, const GoldAnswer& gold);

struct EmptyGoldsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Max proof_similarity over the provided gold proofs.
Rational best_gold_similarity(const ProofGraph& pred,
                              const std::vector<ProofGraph>& golds,
                              bool answer_correct,
                              const EditCosts& costs = {},
                              const GedBudget& budget = {});

int best_gold_exact_match(const ProofGraph& pred,
                          const std::vector<ProofGraph>& golds,
                          bool answer_correct);

/// Disjoint reasons an instance scored incorrect.
enum class InstanceFlag { none, wrong_answer, generation_failure,
                          engine_failure };
const char* instance_flag_name(InstanceFlag flag);

struct InstanceResult {
  std::string instance_id;
  std::string answer;  // "True"/"False"/"Unknown", an integer, or ""
  bool label_correct = false;
  Rational similarity;  // zero rule applied
  int exact_match = 0;
  InstanceFlag flag = InstanceFlag::none;
  bool inconsistent_kb = false;
  std::string program_text;
  ProofGraph predicted_graph;
  std::optional<int> depth;
  std::size_t n_statements = 0;
  std::vector<std::string> diagnostics;
};

struct MetricTuple {
  std::size_t n = 0;
  Rational answer_accuracy;
  Rational similarity_all;
  Rational similarity_correct;
  Rational proof_accuracy_all;
  Rational proof_accuracy_correct;
};

struct MetricsReport {
  std::size_t n = 0;
  Rational answer_accuracy;
  Rational proof_similarity_all;
  Rational proof_similarity_correct;
  std::optional<Rational> proof_accuracy_all;
  std::optional<Rational> proof_accuracy_correct;
  Rational generation_failure_rate;
  std::map<std::string, MetricTuple> breakdowns;
  std::vector<InstanceResult> per_instance;
};

struct OfflinePrograms {
  std::filesystem::path dir;  // one <instance_id>.pl per instance
};

struct ServicePrograms {
  ServiceConfig service;
  PromptTemplate prompt;
  int shots = 0;  // 0 = per-format default
};

using ProgramSource = std::variant<OfflinePrograms, ServicePrograms>;

struct EvalConfig {
  SearchConfig engine;
  EditCosts costs;
  GedBudget ged_budget;
  std::optional<Labeling> labeling;  // default chosen per format
  int workers = 1;
};

/// Per instance: obtain the program, run the engine (classification for
/// logical formats, first-solution Answer binding for arithmetic), convert
/// the first proof, score against the gold proofs, aggregate. Per-instance
/// failures downgrade that instance; offline runs are byte-reproducible.
MetricsReport run_eval(const std::vector<EvalRecord>& records,
                       DatasetFormat format, const ProgramSource& programs,
                       const EvalConfig& cfg);

struct Prediction {
  std::string instance_id;
  std::optional<GoldAnswer> answer;
  std::optional<ProofGraph> proof;
};

/// Scores externally produced predictions against the dataset (the `score`
/// subcommand path). Records without a prediction count as generation
/// failures.
MetricsReport score_predictions(const std::vector<EvalRecord>& records,
                                DatasetFormat format,
                                const std::vector<Prediction>& predictions,
                                const EvalConfig& cfg);

std::vector<Prediction> load_predictions(const std::filesystem::path& file);

/// Writes summary.txt (human table), summary.json, instances.jsonl, and one
/// instances/<id>.json per record; stable field order throughout.
void emit_report(const MetricsReport& report,
                 const std::filesystem::path& out_dir);

}  // namespace prooflog
