#include "prooflog/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "graph_json.hpp"
#include "prooflog/parser.hpp"
#include "prooflog/unify.hpp"

namespace prooflog {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kAnswerVariable = "Answer";

std::string gold_answer_text(const GoldAnswer& answer) {
  if (const auto* label = std::get_if<AnswerLabel>(&answer)) {
    return std::string(answer_label_name(*label));
  }
  return render_rational(std::get<Rational>(answer));
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace

std::optional<DatasetFormat> dataset_format_from(std::string_view name) {
  if (name == "proofwriter") return DatasetFormat::proofwriter;
  if (name == "prontoqa") return DatasetFormat::prontoqa;
  if (name == "gsm8k_proofs" || name == "gsm8k") {
    return DatasetFormat::gsm8k_proofs;
  }
  return std::nullopt;
}

const char* dataset_format_name(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::proofwriter: return "proofwriter";
    case DatasetFormat::prontoqa: return "prontoqa";
    case DatasetFormat::gsm8k_proofs: return "gsm8k_proofs";
  }
  return "?";
}

int default_shots(DatasetFormat format) {
  return format == DatasetFormat::gsm8k_proofs ? 5 : 2;
}

Labeling default_labeling(DatasetFormat format) {
  return format == DatasetFormat::gsm8k_proofs ? Labeling::by_render
                                               : Labeling::by_provenance;
}

const char* instance_flag_name(InstanceFlag flag) {
  switch (flag) {
    case InstanceFlag::none: return "none";
    case InstanceFlag::wrong_answer: return "wrong_answer";
    case InstanceFlag::generation_failure: return "generation_failure";
    case InstanceFlag::engine_failure: return "engine_failure";
  }
  return "?";
}

namespace {

EvalRecord record_from_json(const json& j, DatasetFormat format) {
  EvalRecord record;
  record.instance_id = j.at("id").get<std::string>();
  if (record.instance_id.empty()) {
    throw std::runtime_error("empty instance id");
  }
  for (const auto& s : j.value("context", json::array())) {
    record.context_statements.push_back(
        {s.at("id").get<std::string>(), s.value("text", std::string{})});
  }
  record.n_statements = record.context_statements.size();
  record.question_text = j.value("question", std::string{});

  const auto& answer = j.at("answer");
  if (format == DatasetFormat::gsm8k_proofs) {
    if (!answer.is_number_integer()) {
      throw std::runtime_error("arithmetic gold answer must be an integer");
    }
    record.gold_answer = Rational(BigInt(answer.get<long long>()));
  } else {
    if (!answer.is_string()) {
      throw std::runtime_error("logical gold answer must be a label string");
    }
    const auto label = answer_label_from(answer.get<std::string>());
    if (!label) {
      throw std::runtime_error("unknown answer label: " +
                               answer.get<std::string>());
    }
    if (format == DatasetFormat::prontoqa && *label == AnswerLabel::unknown) {
      throw std::runtime_error("prontoqa answers are True or False");
    }
    record.gold_answer = *label;
  }

  for (const auto& g : j.value("gold_proofs", json::array())) {
    record.gold_proofs.push_back(detail::graph_from_json_value(g));
  }
  if (j.contains("depth") && !j.at("depth").is_null()) {
    record.depth = j.at("depth").get<int>();
  }
  return record;
}

}  // namespace

DatasetLoadResult load_dataset(const std::filesystem::path& file,
                               DatasetFormat format) {
  std::ifstream in(file);
  if (!in) throw DatasetLoadError("cannot read dataset: " + file.string());
  DatasetLoadResult result;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.records.push_back(record_from_json(json::parse(line), format));
    } catch (const std::exception& e) {
      result.diagnostics.push_back("line " + std::to_string(line_number) +
                                   ": record rejected: " + e.what());
    }
  }
  if (result.records.empty()) {
    result.diagnostics.push_back("dataset contains no usable records: " +
                                 file.string());
  }
  return result;
}

bool score_answer(const GoldAnswer& pred, const GoldAnswer& gold) {
  if (pred.index() != gold.index()) {
    throw KindMismatchError(
        "prediction and gold answer are of different kinds");
  }
  if (const auto* label = std::get_if<AnswerLabel>(&pred)) {
    return *label == std::get<AnswerLabel>(gold);
  }
  const Rational& value = std::get<Rational>(pred);
  const Rational& target = std::get<Rational>(gold);
  return is_integer(target) && value == target;
}

Rational best_gold_similarity(const ProofGraph& pred,
                              const std::vector<ProofGraph>& golds,
                              bool answer_correct, const EditCosts& costs,
                              const GedBudget& budget) {
  if (golds.empty()) throw EmptyGoldsError("no gold proofs to compare with");
  Rational best(0);
  for (const ProofGraph& gold : golds) {
    best = std::max(best,
                    proof_similarity(pred, gold, answer_correct, costs,
                                     budget));
  }
  return best;
}

int best_gold_exact_match(const ProofGraph& pred,
                          const std::vector<ProofGraph>& golds,
                          bool answer_correct) {
  if (golds.empty()) throw EmptyGoldsError("no gold proofs to compare with");
  for (const ProofGraph& gold : golds) {
    if (proof_exact_match(pred, gold, answer_correct)) return 1;
  }
  return 0;
}

namespace {

// Unknown instances legitimately have no proof; both sides empty compare as
// a perfect match under Eq.-style similarity.
const std::vector<ProofGraph>& effective_golds(
    const EvalRecord& record, std::vector<ProofGraph>& scratch) {
  if (!record.gold_proofs.empty()) return record.gold_proofs;
  scratch.assign(1, ProofGraph{});
  return scratch;
}

void score_instance_proof(const EvalRecord& record, const EvalConfig& cfg,
                          bool correct, InstanceResult& out) {
  std::vector<ProofGraph> scratch;
  const auto& golds = effective_golds(record, scratch);
  out.similarity = best_gold_similarity(out.predicted_graph, golds, correct,
                                        cfg.costs, cfg.ged_budget);
  out.exact_match = best_gold_exact_match(out.predicted_graph, golds, correct);
}

InstanceResult evaluate_instance(const EvalRecord& record,
                                 DatasetFormat format,
                                 const GenerationResult& generation,
                                 const EvalConfig& cfg) {
  InstanceResult out;
  out.instance_id = record.instance_id;
  out.depth = record.depth;
  out.n_statements = record.n_statements;
  out.similarity = Rational(0);

  const auto give_up = [&](InstanceFlag flag, std::string why) {
    out.flag = flag;
    out.diagnostics.push_back(std::move(why));
    score_instance_proof(record, cfg, /*correct=*/false, out);
    return out;
  };

  if (generation.status != GenStatus::ok || !generation.extracted_program) {
    for (const auto& d : generation.diagnostics) {
      if (d.kind == ParseDiagnostic::Kind::error) {
        out.diagnostics.push_back("parse: " + std::to_string(d.line) + ":" +
                                  std::to_string(d.column) + ": " + d.message);
      }
    }
    return give_up(InstanceFlag::generation_failure,
                   std::string("program acquisition failed: ") +
                       gen_status_name(generation.status));
  }
  out.program_text = generation.extracted_program->text;

  const ParseResult parsed = parse_source(*generation.extracted_program);
  if (!parsed.ok()) {
    return give_up(InstanceFlag::generation_failure, "program does not parse");
  }
  if (parsed.queries.empty()) {
    return give_up(InstanceFlag::generation_failure,
                   "program contains no ?- query");
  }
  const KnowledgeBase& kb = parsed.kb;
  const std::vector<Goal>& query = parsed.queries.front();
  const Labeling labeling = cfg.labeling.value_or(default_labeling(format));

  bool correct = false;
  ProofTree proof;
  if (format == DatasetFormat::gsm8k_proofs) {
    const SolveResult solved = solve(kb, query, cfg.engine);
    for (const auto& d : solved.diagnostics) out.diagnostics.push_back(d);
    if (solved.solutions.empty()) {
      if (solved.budget_exhausted) {
        return give_up(InstanceFlag::engine_failure, "step budget exhausted");
      }
      out.flag = InstanceFlag::wrong_answer;
      out.diagnostics.push_back("no solution for the query");
      score_instance_proof(record, cfg, false, out);
      return out;
    }
    const Solution& first = solved.solutions.front();
    const auto binding = first.answer_bindings.lookup({kAnswerVariable, 0});
    if (!binding || !binding->is_number()) {
      return give_up(InstanceFlag::generation_failure,
                     "query does not bind the Answer variable to a number");
    }
    out.answer = render_rational(binding->number_value());
    correct = score_answer(binding->number_value(), record.gold_answer);
    proof = first.proof;
  } else {
    if (query.size() != 1 || query.front().kind != Goal::Kind::call) {
      return give_up(InstanceFlag::generation_failure,
                     "query is not a single classifiable literal");
    }
    const Classification cls =
        classify_answer(kb, query.front().term, cfg.engine);
    for (const auto& d : cls.diagnostics) out.diagnostics.push_back(d);
    out.inconsistent_kb = cls.inconsistent;
    if (cls.label == AnswerLabel::unknown && cls.budget_exhausted) {
      return give_up(InstanceFlag::engine_failure,
                     "step budget exhausted before classification settled");
    }
    out.answer = std::string(answer_label_name(cls.label));
    correct = score_answer(cls.label, record.gold_answer);
    proof = cls.proof;
  }

  if (proof) {
    try {
      out.predicted_graph = tree_to_dag(proof, labeling);
    } catch (const MissingProvenanceError& e) {
      out.predicted_graph = ProofGraph{};
      out.diagnostics.push_back(e.what());
    }
  }
  out.label_correct = correct;
  if (!correct) out.flag = InstanceFlag::wrong_answer;
  score_instance_proof(record, cfg, correct, out);
  return out;
}

Rational ratio(const Rational& numerator_value, std::size_t denominator) {
  if (denominator == 0) return Rational(0);
  return numerator_value / Rational(denominator);
}

MetricTuple aggregate_bucket(const std::vector<InstanceResult>& results,
                             const std::vector<std::size_t>& indices) {
  MetricTuple tuple;
  tuple.n = indices.size();
  std::size_t correct = 0;
  Rational similarity_sum(0);
  Rational similarity_correct_sum(0);
  std::size_t exact_sum = 0;
  std::size_t exact_correct_sum = 0;
  for (const std::size_t i : indices) {
    const InstanceResult& r = results[i];
    similarity_sum += r.similarity;
    exact_sum += static_cast<std::size_t>(r.exact_match);
    if (r.label_correct) {
      ++correct;
      similarity_correct_sum += r.similarity;
      exact_correct_sum += static_cast<std::size_t>(r.exact_match);
    }
  }
  tuple.answer_accuracy = ratio(Rational(correct), tuple.n);
  tuple.similarity_all = ratio(similarity_sum, tuple.n);
  tuple.similarity_correct = ratio(similarity_correct_sum, correct);
  tuple.proof_accuracy_all = ratio(Rational(exact_sum), tuple.n);
  tuple.proof_accuracy_correct = ratio(Rational(exact_correct_sum), correct);
  return tuple;
}

std::string depth_bucket(const std::optional<int>& depth) {
  if (!depth) return "depth=na";
  if (*depth <= 0) return "depth=0";
  if (*depth <= 1) return "depth<=1";
  if (*depth <= 2) return "depth<=2";
  if (*depth <= 3) return "depth<=3";
  if (*depth <= 5) return "depth<=5";
  return "depth>5";
}

std::string statements_bucket(std::size_t n) {
  return n <= 20 ? "statements<=20" : "statements>20";
}

MetricsReport aggregate(std::vector<InstanceResult> results) {
  MetricsReport report;
  report.n = results.size();
  std::vector<std::size_t> all(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) all[i] = i;
  const MetricTuple whole = aggregate_bucket(results, all);
  report.answer_accuracy = whole.answer_accuracy;
  report.proof_similarity_all = whole.similarity_all;
  report.proof_similarity_correct = whole.similarity_correct;
  report.proof_accuracy_all = whole.proof_accuracy_all;
  report.proof_accuracy_correct = whole.proof_accuracy_correct;

  std::size_t generation_failures = 0;
  for (const auto& r : results) {
    if (r.flag == InstanceFlag::generation_failure) ++generation_failures;
  }
  report.generation_failure_rate =
      ratio(Rational(generation_failures), report.n);

  std::map<std::string, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < results.size(); ++i) {
    buckets[depth_bucket(results[i].depth)].push_back(i);
    buckets[statements_bucket(results[i].n_statements)].push_back(i);
  }
  for (const auto& [label, indices] : buckets) {
    report.breakdowns.emplace(label, aggregate_bucket(results, indices));
  }

  // The zero rule makes answer accuracy an upper bound for the proof
  // metrics; violating it would mean the scorer itself is broken.
  if (report.proof_similarity_all > report.answer_accuracy ||
      (report.proof_accuracy_all &&
       *report.proof_accuracy_all > report.answer_accuracy)) {
    throw std::logic_error(
        "zero-ruled proof metrics exceed answer accuracy");
  }

  report.per_instance = std::move(results);
  return report;
}

}  // namespace

MetricsReport run_eval(const std::vector<EvalRecord>& records,
                       DatasetFormat format, const ProgramSource& programs,
                       const EvalConfig& cfg) {
  std::vector<InstanceResult> results(records.size());
  std::atomic<std::size_t> cursor{0};

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= records.size()) return;
      const EvalRecord& record = records[i];
      GenerationResult generation;
      if (const auto* offline = std::get_if<OfflinePrograms>(&programs)) {
        generation = load_offline(offline->dir, record.instance_id);
      } else {
        const auto& service = std::get<ServicePrograms>(programs);
        PromptTemplate tmpl = service.prompt;
        const int shots =
            service.shots > 0 ? service.shots : default_shots(format);
        if (static_cast<int>(tmpl.demonstrations.size()) > shots) {
          tmpl.demonstrations.resize(static_cast<std::size_t>(shots));
        }
        std::string problem;
        for (const auto& statement : record.context_statements) {
          problem += statement.text;
          problem += '\n';
        }
        problem += record.question_text;
        try {
          const std::string prompt = build_prompt(tmpl, problem);
          generation = generate_program(service.service, prompt,
                                        service.service.retries,
                                        tmpl.stop_markers);
        } catch (const TemplateError& e) {
          generation.status = GenStatus::service_error;
          generation.raw_text = e.what();
        }
      }
      results[i] = evaluate_instance(record, format, generation, cfg);
    }
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1 || records.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& thread : pool) thread.join();
  }
  return aggregate(std::move(results));
}

MetricsReport score_predictions(const std::vector<EvalRecord>& records,
                                DatasetFormat format,
                                const std::vector<Prediction>& predictions,
                                const EvalConfig& cfg) {
  (void)format;
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) by_id[p.instance_id] = &p;

  std::vector<InstanceResult> results;
  results.reserve(records.size());
  for (const EvalRecord& record : records) {
    InstanceResult out;
    out.instance_id = record.instance_id;
    out.depth = record.depth;
    out.n_statements = record.n_statements;
    out.similarity = Rational(0);

    const auto it = by_id.find(record.instance_id);
    bool correct = false;
    if (it == by_id.end() || !it->second->answer) {
      out.flag = InstanceFlag::generation_failure;
      out.diagnostics.push_back("no prediction for this instance");
    } else {
      const Prediction& prediction = *it->second;
      out.answer = gold_answer_text(*prediction.answer);
      try {
        correct = score_answer(*prediction.answer, record.gold_answer);
      } catch (const KindMismatchError& e) {
        out.diagnostics.push_back(e.what());
        correct = false;
      }
      out.label_correct = correct;
      if (!correct) out.flag = InstanceFlag::wrong_answer;
      if (prediction.proof) out.predicted_graph = *prediction.proof;
    }
    score_instance_proof(record, cfg, correct, out);
    results.push_back(std::move(out));
  }
  return aggregate(std::move(results));
}

std::vector<Prediction> load_predictions(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetLoadError("cannot read predictions: " + file.string());
  std::vector<Prediction> predictions;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    Prediction p;
    p.instance_id = j.at("instance_id").get<std::string>();
    if (j.contains("answer") && !j.at("answer").is_null()) {
      const auto& answer = j.at("answer");
      if (answer.is_number_integer()) {
        p.answer = GoldAnswer(Rational(BigInt(answer.get<long long>())));
      } else if (answer.is_string() && !answer.get<std::string>().empty()) {
        const std::string text = answer.get<std::string>();
        if (const auto label = answer_label_from(text)) {
          p.answer = GoldAnswer(*label);
        } else if (const auto value = parse_rational(text)) {
          p.answer = GoldAnswer(*value);
        } else {
          throw DatasetLoadError("bad answer for " + p.instance_id);
        }
      }
    }
    if (j.contains("proof") && !j.at("proof").is_null()) {
      p.proof = detail::graph_from_json_value(j.at("proof"));
    }
    predictions.push_back(std::move(p));
  }
  return predictions;
}

namespace {

std::string sanitize_filename(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (const char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "_" : out;
}

ordered_json metric_value(const Rational& r) {
  ordered_json j;
  j["value"] = to_double(r);
  j["exact"] = render_rational(r);
  return j;
}

ordered_json tuple_to_json(const MetricTuple& tuple) {
  ordered_json j;
  j["n"] = tuple.n;
  j["answer_accuracy"] = metric_value(tuple.answer_accuracy);
  j["similarity_all"] = metric_value(tuple.similarity_all);
  j["similarity_correct"] = metric_value(tuple.similarity_correct);
  j["proof_accuracy_all"] = metric_value(tuple.proof_accuracy_all);
  j["proof_accuracy_correct"] = metric_value(tuple.proof_accuracy_correct);
  return j;
}

std::string percent(const Rational& r) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f%%", to_double(r) * 100.0);
  return buffer;
}

ordered_json instance_line(const InstanceResult& r) {
  ordered_json j;
  j["instance_id"] = r.instance_id;
  j["answer"] = r.answer;
  j["label_correct"] = r.label_correct;
  j["similarity"] = metric_value(r.similarity);
  j["exact_match"] = r.exact_match;
  j["flag"] = instance_flag_name(r.flag);
  if (r.inconsistent_kb) j["inconsistent_kb"] = true;
  // Carrying the predicted graph makes an eval dump directly scorable.
  j["proof"] = detail::graph_to_json_value(r.predicted_graph);
  return j;
}

}  // namespace

void emit_report(const MetricsReport& report,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "instances");

  {
    std::ofstream txt(out_dir / "summary.txt");
    txt << "instances                 " << report.n << "\n";
    txt << "answer accuracy           " << percent(report.answer_accuracy)
        << "\n";
    txt << "proof similarity (all)    "
        << percent(report.proof_similarity_all) << "\n";
    txt << "proof similarity (correct) "
        << percent(report.proof_similarity_correct) << "\n";
    if (report.proof_accuracy_all) {
      txt << "proof accuracy (all)      "
          << percent(*report.proof_accuracy_all) << "\n";
    }
    if (report.proof_accuracy_correct) {
      txt << "proof accuracy (correct)  "
          << percent(*report.proof_accuracy_correct) << "\n";
    }
    txt << "generation failure rate   "
        << percent(report.generation_failure_rate) << "\n";
    txt << "\nbreakdowns\n";
    for (const auto& [label, tuple] : report.breakdowns) {
      txt << "  " << label << "  n=" << tuple.n
          << "  acc=" << percent(tuple.answer_accuracy)
          << "  sim(all)=" << percent(tuple.similarity_all)
          << "  sim(correct)=" << percent(tuple.similarity_correct) << "\n";
    }
  }

  {
    ordered_json j;
    j["instances"] = report.n;
    j["answer_accuracy"] = metric_value(report.answer_accuracy);
    j["proof_similarity_all"] = metric_value(report.proof_similarity_all);
    j["proof_similarity_correct"] =
        metric_value(report.proof_similarity_correct);
    if (report.proof_accuracy_all) {
      j["proof_accuracy_all"] = metric_value(*report.proof_accuracy_all);
    }
    if (report.proof_accuracy_correct) {
      j["proof_accuracy_correct"] =
          metric_value(*report.proof_accuracy_correct);
    }
    j["generation_failure_rate"] =
        metric_value(report.generation_failure_rate);
    j["breakdowns"] = ordered_json::object();
    for (const auto& [label, tuple] : report.breakdowns) {
      j["breakdowns"][label] = tuple_to_json(tuple);
    }
    std::ofstream out(out_dir / "summary.json");
    out << j.dump(2) << "\n";
  }

  {
    std::ofstream out(out_dir / "instances.jsonl");
    for (const auto& r : report.per_instance) {
      out << instance_line(r).dump() << "\n";
    }
  }

  for (const auto& r : report.per_instance) {
    ordered_json j = instance_line(r);
    j["program"] = r.program_text;
    j["proof_graph"] = detail::graph_to_json_value(r.predicted_graph);
    j["diagnostics"] = r.diagnostics;
    std::ofstream out(out_dir / "instances" /
                      (sanitize_filename(r.instance_id) + ".json"));
    out << j.dump(2) << "\n";
  }
}

}  // namespace prooflog
