#include <doctest.h>

#include <json.hpp>

#include "prooflog/eval.hpp"
#include "support/temp_dir.hpp"

using namespace prooflog;
using nlohmann::json;

namespace {

// A small logical benchmark: instance k proves q(a) from p_k(a) via one
// rule; every third instance has gold answer Unknown (statement about b).
struct LogicalFixture {
  testgen::TempDir dir;
  std::filesystem::path dataset;
  std::filesystem::path programs;

  explicit LogicalFixture(int n_instances = 6) {
    std::string lines;
    for (int k = 0; k < n_instances; ++k) {
      const std::string id = "inst-" + std::to_string(k);
      const bool unknown = k % 3 == 2;
      json record;
      record["id"] = id;
      record["context"] = json::array(
          {{{"id", "t1"}, {"text", "p" + std::to_string(k) + "(a)."}},
           {{"id", "r1"}, {"text", "anything that is p is q."}}});
      record["question"] = unknown ? "q(b)?" : "q(a)?";
      record["answer"] = unknown ? "Unknown" : "True";
      record["depth"] = k % 4;
      if (!unknown) {
        record["gold_proofs"] = json::array(
            {{{"nodes", json::array({{{"id", 0}, {"label", "t1"}},
                                     {{"id", 1}, {"label", "r1"}}})},
              {"edges", json::array({json::array({0, 1})})}}});
      } else {
        record["gold_proofs"] = json::array();
      }
      lines += record.dump() + "\n";

      const std::string program =
          "% id: t1\np" + std::to_string(k) + "(a).\n" +
          "% id: r1\nq(X) :- p" + std::to_string(k) + "(X).\n" +
          "?- q(" + std::string(unknown ? "b" : "a") + ").\n";
      dir.write("programs/" + id + ".pl", program);
    }
    dataset = dir.write("dataset.jsonl", lines);
    programs = dir.path / "programs";
  }
};

EvalConfig default_config() {
  EvalConfig cfg;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TEST_CASE("load_dataset parses well-formed records and rejects bad ones") {
  testgen::TempDir dir;
  const std::string good =
      R"({"id":"a","context":[{"id":"t1","text":"x"}],"question":"?","answer":"True","gold_proofs":[]})";
  const std::string missing_answer =
      R"({"id":"b","context":[],"question":"?","gold_proofs":[]})";
  const std::string bad_label =
      R"({"id":"c","context":[],"question":"?","answer":"Maybe"})";
  const auto file = dir.write(
      "d.jsonl", good + "\n" + missing_answer + "\n" + bad_label + "\n" +
                     good.substr(0, 20) + "\n");
  const DatasetLoadResult r =
      load_dataset(file, DatasetFormat::proofwriter);
  CHECK(r.records.size() == 1);
  CHECK(r.diagnostics.size() == 3);
  CHECK(r.records[0].n_statements == 1);

  const auto empty = dir.write("empty.jsonl", "");
  const DatasetLoadResult e = load_dataset(empty, DatasetFormat::proofwriter);
  CHECK(e.records.empty());
  CHECK_FALSE(e.diagnostics.empty());  // warning, not a failure

  CHECK_THROWS_AS(load_dataset(dir.path / "absent.jsonl",
                               DatasetFormat::proofwriter),
                  DatasetLoadError);
}

TEST_CASE("prontoqa rejects Unknown labels; gsm8k requires integers") {
  testgen::TempDir dir;
  const auto puq = dir.write(
      "p.jsonl",
      R"({"id":"a","context":[],"question":"?","answer":"Unknown"})" "\n");
  CHECK(load_dataset(puq, DatasetFormat::prontoqa).records.empty());
  CHECK(load_dataset(puq, DatasetFormat::proofwriter).records.size() == 1);

  const auto gsm = dir.write(
      "g.jsonl",
      R"({"id":"a","context":[],"question":"?","answer":27})" "\n"
      R"({"id":"b","context":[],"question":"?","answer":"True"})" "\n");
  const DatasetLoadResult r = load_dataset(gsm, DatasetFormat::gsm8k_proofs);
  CHECK(r.records.size() == 1);
  CHECK(std::get<Rational>(r.records[0].gold_answer) == Rational(27));
}

TEST_CASE("score_answer applies exact label and integer rules") {
  CHECK(score_answer(GoldAnswer(AnswerLabel::true_),
                     GoldAnswer(AnswerLabel::true_)));
  CHECK_FALSE(score_answer(GoldAnswer(AnswerLabel::unknown),
                           GoldAnswer(AnswerLabel::false_)));
  CHECK(score_answer(GoldAnswer(Rational(27)), GoldAnswer(Rational(27))));
  CHECK_FALSE(
      score_answer(GoldAnswer(Rational(27, 2)), GoldAnswer(Rational(13))));
  CHECK_FALSE(
      score_answer(GoldAnswer(Rational(27, 2)), GoldAnswer(Rational(27, 2))));
  CHECK_THROWS_AS(score_answer(GoldAnswer(AnswerLabel::true_),
                               GoldAnswer(Rational(1))),
                  KindMismatchError);
}

TEST_CASE("best_gold_similarity maximizes over the gold proofs") {
  ProofGraph a;
  a.nodes = {{0, "t1", ""}, {1, "r1", ""}};
  a.edges = {{0, 1}};
  ProofGraph b;
  b.nodes = {{0, "x", ""}};
  CHECK(best_gold_similarity(a, {b, a}, true) == Rational(1));
  CHECK(best_gold_similarity(a, {b, a}, false) == Rational(0));
  CHECK(best_gold_similarity(a, {b}, true) ==
        proof_similarity(a, b, true));
  CHECK_THROWS_AS(best_gold_similarity(a, {}, true), EmptyGoldsError);
  CHECK(best_gold_exact_match(a, {b, a}, true) == 1);
  CHECK(best_gold_exact_match(a, {b}, true) == 0);
}

TEST_CASE("gold programs and gold proofs are a fixed point of run_eval") {
  LogicalFixture fx;
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);
  REQUIRE(data.records.size() == 6);
  const MetricsReport report =
      run_eval(data.records, DatasetFormat::proofwriter,
               OfflinePrograms{fx.programs}, default_config());
  CHECK(report.answer_accuracy == Rational(1));
  CHECK(report.proof_similarity_all == Rational(1));
  CHECK(report.proof_similarity_correct == Rational(1));
  REQUIRE(report.proof_accuracy_all.has_value());
  CHECK(*report.proof_accuracy_all == Rational(1));
  CHECK(report.generation_failure_rate == Rational(0));
  for (const auto& r : report.per_instance) {
    CHECK(r.flag == InstanceFlag::none);
  }
}

TEST_CASE("one broken program out of six degrades accuracy proportionally") {
  LogicalFixture fx;
  fx.dir.write("programs/inst-0.pl", "syntactically (( broken\n");
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);
  const MetricsReport report =
      run_eval(data.records, DatasetFormat::proofwriter,
               OfflinePrograms{fx.programs}, default_config());
  CHECK(report.answer_accuracy == Rational(5, 6));
  CHECK(report.generation_failure_rate == Rational(1, 6));
  CHECK(report.per_instance[0].flag == InstanceFlag::generation_failure);
  // The zero rule shrinks only the "all" average.
  CHECK(report.proof_similarity_correct >= report.proof_similarity_all);
  CHECK(report.proof_similarity_correct == Rational(1));
}

TEST_CASE("an arithmetic instance solves to the exact integer") {
  testgen::TempDir dir;
  json record;
  record["id"] = "wage-1";
  record["context"] = json::array(
      {{{"id", "s1"}, {"text", "Tina makes $18.00 an hour."}},
       {{"id", "s2"}, {"text", "Overtime pays time and a half."}}});
  record["question"] = "What is Tina's overtime wage?";
  record["answer"] = 27;
  record["gold_proofs"] = json::array(
      {{{"nodes",
         json::array({{{"id", 0}, {"label", "overtime_wage(27)"}},
                      {{"id", 1}, {"label", "wage(18)"}},
                      {{"id", 2}, {"label", "27 is 1.5 * 18"}}})},
        {"edges", json::array({json::array({1, 0}), json::array({2, 0})})}}});
  const auto dataset = dir.write("d.jsonl", record.dump() + "\n");
  dir.write("programs/wage-1.pl",
            "% id: s1\nwage(18.00).\n% id: s2\n"
            "overtime_wage(W) :- wage(W1), W is 1.5 * W1.\n"
            "?- overtime_wage(Answer).\n");
  const DatasetLoadResult data =
      load_dataset(dataset, DatasetFormat::gsm8k_proofs);
  REQUIRE(data.records.size() == 1);
  const MetricsReport report =
      run_eval(data.records, DatasetFormat::gsm8k_proofs,
               OfflinePrograms{dir.path / "programs"}, default_config());
  CHECK(report.answer_accuracy == Rational(1));
  CHECK(report.per_instance[0].answer == "27");
  CHECK(report.proof_similarity_all == Rational(1));
  REQUIRE(report.proof_accuracy_all.has_value());
  CHECK(*report.proof_accuracy_all == Rational(1));
}

TEST_CASE("buckets partition the instance set") {
  LogicalFixture fx;
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);
  const MetricsReport report =
      run_eval(data.records, DatasetFormat::proofwriter,
               OfflinePrograms{fx.programs}, default_config());
  std::size_t depth_total = 0;
  std::size_t statement_total = 0;
  for (const auto& [label, tuple] : report.breakdowns) {
    if (label.rfind("depth", 0) == 0) depth_total += tuple.n;
    if (label.rfind("statements", 0) == 0) statement_total += tuple.n;
  }
  CHECK(depth_total == report.n);
  CHECK(statement_total == report.n);
}

TEST_CASE("flag accounting is disjoint and covers every incorrect instance") {
  LogicalFixture fx;
  fx.dir.write("programs/inst-1.pl", "broken((\n");
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);
  const MetricsReport report =
      run_eval(data.records, DatasetFormat::proofwriter,
               OfflinePrograms{fx.programs}, default_config());
  std::size_t incorrect = 0;
  std::size_t flagged = 0;
  for (const auto& r : report.per_instance) {
    if (!r.label_correct) ++incorrect;
    if (r.flag != InstanceFlag::none) ++flagged;
    CHECK((r.flag == InstanceFlag::none) == r.label_correct);
  }
  CHECK(incorrect == flagged);
}

TEST_CASE("workers > 1 produce the same report as a single worker") {
  LogicalFixture fx;
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);
  EvalConfig parallel = default_config();
  parallel.workers = 4;
  const MetricsReport a =
      run_eval(data.records, DatasetFormat::proofwriter,
               OfflinePrograms{fx.programs}, default_config());
  const MetricsReport b =
      run_eval(data.records, DatasetFormat::proofwriter,
               OfflinePrograms{fx.programs}, parallel);
  testgen::TempDir out;
  emit_report(a, out.path / "one");
  emit_report(b, out.path / "many");
  CHECK(testgen::read_file(out.path / "one" / "summary.json") ==
        testgen::read_file(out.path / "many" / "summary.json"));
  CHECK(testgen::read_file(out.path / "one" / "instances.jsonl") ==
        testgen::read_file(out.path / "many" / "instances.jsonl"));
}

TEST_CASE("two offline runs emit byte-identical reports") {
  LogicalFixture fx;
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);
  testgen::TempDir out;
  for (const char* run : {"run1", "run2"}) {
    const MetricsReport report =
        run_eval(data.records, DatasetFormat::proofwriter,
                 OfflinePrograms{fx.programs}, default_config());
    emit_report(report, out.path / run);
  }
  for (const char* name :
       {"summary.txt", "summary.json", "instances.jsonl"}) {
    CHECK(testgen::read_file(out.path / "run1" / name) ==
          testgen::read_file(out.path / "run2" / name));
  }
  // Per-instance file count equals the record count.
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(
           out.path / "run1" / "instances")) {
    (void)entry;
    ++files;
  }
  CHECK(files == data.records.size());
}

TEST_CASE("empty reports render with zero counts") {
  const MetricsReport report = score_predictions(
      {}, DatasetFormat::proofwriter, {}, default_config());
  testgen::TempDir out;
  emit_report(report, out.path / "r");
  const std::string summary = testgen::read_file(out.path / "r" / "summary.txt");
  CHECK(summary.find("instances                 0") != std::string::npos);
}

TEST_CASE("score_predictions upholds the upper-bound relation under "
          "corruption") {
  LogicalFixture fx(9);
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);

  std::vector<Prediction> predictions;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    Prediction p;
    p.instance_id = data.records[i].instance_id;
    switch (i % 4) {
      case 0:  // correct answer, gold proof
        p.answer = data.records[i].gold_answer;
        if (!data.records[i].gold_proofs.empty()) {
          p.proof = data.records[i].gold_proofs.front();
        }
        break;
      case 1:  // correct answer, corrupted proof
        p.answer = data.records[i].gold_answer;
        p.proof = ProofGraph{};
        p.proof->nodes = {{0, "bogus", ""}};
        break;
      case 2:  // wrong answer, gold proof (zero rule must fire)
        p.answer = GoldAnswer(AnswerLabel::false_);
        if (!data.records[i].gold_proofs.empty()) {
          p.proof = data.records[i].gold_proofs.front();
        }
        break;
      default:  // no prediction at all
        break;
    }
    predictions.push_back(std::move(p));
  }
  const MetricsReport report = score_predictions(
      data.records, DatasetFormat::proofwriter, predictions, default_config());
  CHECK(report.proof_similarity_all <= report.answer_accuracy);
  REQUIRE(report.proof_accuracy_all.has_value());
  CHECK(*report.proof_accuracy_all <= report.answer_accuracy);
  CHECK(report.answer_accuracy < Rational(1));
  CHECK(report.generation_failure_rate > Rational(0));
}

TEST_CASE("an eval dump feeds back into score with identical metrics") {
  LogicalFixture fx;
  fx.dir.write("programs/inst-4.pl", "broken((\n");
  const DatasetLoadResult data =
      load_dataset(fx.dataset, DatasetFormat::proofwriter);
  const MetricsReport evaluated =
      run_eval(data.records, DatasetFormat::proofwriter,
               OfflinePrograms{fx.programs}, default_config());
  testgen::TempDir out;
  emit_report(evaluated, out.path / "r");
  const std::vector<Prediction> predictions =
      load_predictions(out.path / "r" / "instances.jsonl");
  const MetricsReport rescored = score_predictions(
      data.records, DatasetFormat::proofwriter, predictions, default_config());
  CHECK(rescored.answer_accuracy == evaluated.answer_accuracy);
  CHECK(rescored.proof_similarity_all == evaluated.proof_similarity_all);
  CHECK(*rescored.proof_accuracy_all == *evaluated.proof_accuracy_all);
}
