#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "prooflog/codegen.hpp"

using namespace prooflog;

namespace {

PromptTemplate demo_template(int demos = 2) {
  PromptTemplate tmpl;
  tmpl.header = "Translate each problem into a logic program.";
  tmpl.stop_markers = {"Problem:"};
  if (demos >= 1) {
    tmpl.demonstrations.push_back(
        {"Fiona is green. Is Fiona green?",
         "% id: t1\ngreen(fiona).\n?- green(fiona).\n"});
  }
  if (demos >= 2) {
    tmpl.demonstrations.push_back(
        {"Tina makes $18.00 an hour. What is her overtime wage?",
         "% id: s1\nwage(18.00).\n% id: s2\n"
         "overtime_wage(W) :- wage(W1), W is 1.5 * W1.\n"
         "?- overtime_wage(Answer).\n"});
  }
  return tmpl;
}

std::size_t count_occurrences(const std::string& haystack,
                              const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t at = haystack.find(needle); at != std::string::npos;
       at = haystack.find(needle, at + needle.size())) {
    ++count;
  }
  return count;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("prooflog_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static std::atomic<int>& counter() {
    static std::atomic<int> n{0};
    return n;
  }
};

// Minimal completion service for exercising the client end to end.
class FakeService {
 public:
  explicit FakeService(std::function<std::string(int)> completion_for_call)
      : completion_(std::move(completion_for_call)) {
    server_.Post("/v1/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   last_body = req.body;
                   if (auto it = req.headers.find("Authorization");
                       it != req.headers.end()) {
                     last_auth = it->second;
                   }
                   const int call = calls_.fetch_add(1);
                   res.set_content("{\"completion\": " +
                                       nlohmann::json(completion_(call)).dump() +
                                       "}",
                                   "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  ServiceConfig config() const {
    ServiceConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
    cfg.model = "test-model";
    cfg.timeout_seconds = 5;
    return cfg;
  }

  int calls() const { return calls_.load(); }

  std::string last_body;
  std::string last_auth;

 private:
  std::function<std::string(int)> completion_;
  httplib::Server server_;
  std::thread thread_;
  std::atomic<int> calls_{0};
  int port_ = 0;
};

}  // namespace

TEST_CASE("build_prompt emits the documented block structure") {
  const PromptTemplate tmpl = demo_template(1);
  const std::string prompt = build_prompt(tmpl, "Is Bob quiet?");
  CHECK(count_occurrences(prompt, "Problem:\n") == 2);
  CHECK(count_occurrences(prompt, "```") == 3);  // one closed + one open block
  CHECK(prompt.rfind("Program:\n```\n") == prompt.size() - 13);
  CHECK(prompt.find(tmpl.header) == 0);

  // Demonstration order is preserved.
  const PromptTemplate two = demo_template(2);
  const std::string both = build_prompt(two, "target");
  CHECK(both.find("green(fiona)") < both.find("overtime_wage"));

  // Byte determinism.
  CHECK(build_prompt(two, "target") == both);

  CHECK_THROWS_AS(build_prompt(PromptTemplate{}, "x"), TemplateError);
}

TEST_CASE("template loading validates demonstrations eagerly") {
  const std::string good = R"({
    "header": "h",
    "stop_markers": ["Problem:"],
    "demonstrations": [
      {"problem_text": "p", "program_text": "a.\n?- a."}
    ]
  })";
  CHECK(template_from_json(good).demonstrations.size() == 1);

  const std::string bad = R"({
    "demonstrations": [
      {"problem_text": "p", "program_text": "a(( broken"}
    ]
  })";
  CHECK_THROWS_AS(template_from_json(bad), TemplateError);
}

TEST_CASE("extraction takes the first code block") {
  // Continuation of the prompt's open block.
  CHECK(extract_program_block("green(fiona).\n```\ntrailing prose", {}) ==
        "green(fiona).\n");
  // A fresh fenced block.
  CHECK(extract_program_block("\n```prolog\np(a).\n```\nmore", {}) ==
        "p(a).\n");
  // Stop-marker bounded.
  CHECK(extract_program_block("p(a).\nProblem: next one",
                              {"Problem:"}) == "p(a).\n");
  // No block at all.
  CHECK_FALSE(extract_program_block("no code here", {}).has_value());
}

TEST_CASE("generate_program succeeds against a live loopback service") {
  FakeService service([](int) {
    return std::string("% id: t1\ngreen(fiona).\n?- green(fiona).\n```\n");
  });
  setenv("PROOFLOG_TEST_KEY", "secret-token", 1);
  ServiceConfig cfg = service.config();
  cfg.api_key_env = "PROOFLOG_TEST_KEY";
  const std::string prompt = build_prompt(demo_template(), "Is Fiona green?");
  const GenerationResult result =
      generate_program(cfg, prompt, 2, {"Problem:"});
  REQUIRE(result.status == GenStatus::ok);
  REQUIRE(result.extracted_program.has_value());
  CHECK(result.extracted_program->text.find("green(fiona).") !=
        std::string::npos);
  CHECK(result.attempts == 1);
  CHECK(service.last_auth == "Bearer secret-token");
  // The request carries the configured knobs.
  const auto body = nlohmann::json::parse(service.last_body);
  CHECK(body.at("model") == "test-model");
  CHECK(body.at("temperature") == 0.0);
  CHECK(body.at("prompt") == prompt);
}

TEST_CASE("parse failures retry with the identical prompt") {
  FakeService service([](int call) {
    if (call == 0) return std::string("syntactically (( broken\n```\n");
    return std::string("p(a).\n?- p(a).\n```\n");
  });
  const GenerationResult result =
      generate_program(service.config(), "prompt", 2, {});
  CHECK(result.status == GenStatus::ok);
  CHECK(result.attempts == 2);
  CHECK(service.calls() == 2);
}

TEST_CASE("prose completions end as extraction_failed") {
  FakeService service([](int) { return std::string("I cannot help."); });
  const GenerationResult result =
      generate_program(service.config(), "prompt", 1, {});
  CHECK(result.status == GenStatus::extraction_failed);
  CHECK(result.attempts == 2);
}

TEST_CASE("an unreachable service reports service_error after retries") {
  ServiceConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";  // nothing listens there
  cfg.timeout_seconds = 1;
  const GenerationResult result = generate_program(cfg, "prompt", 2, {});
  CHECK(result.status == GenStatus::service_error);
  CHECK(result.attempts == 3);
}

TEST_CASE("load_offline mirrors the generation contract") {
  TempDir dir;
  {
    std::ofstream out(dir.path / "inst-1.pl");
    out << "% id: t1\ngreen(fiona).\n?- green(fiona).\n";
  }
  {
    std::ofstream out(dir.path / "inst-2.pl");
    out << "broken((.\n";
  }
  const GenerationResult ok = load_offline(dir.path, "inst-1");
  CHECK(ok.status == GenStatus::ok);
  REQUIRE(ok.extracted_program.has_value());
  CHECK(ok.extracted_program->origin.find("inst-1.pl") != std::string::npos);

  const GenerationResult missing = load_offline(dir.path, "inst-404");
  CHECK(missing.status == GenStatus::service_error);

  const GenerationResult broken = load_offline(dir.path, "inst-2");
  CHECK(broken.status == GenStatus::parse_failed);
  CHECK_FALSE(broken.diagnostics.empty());
}
