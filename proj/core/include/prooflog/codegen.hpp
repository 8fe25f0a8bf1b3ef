#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prooflog/parser.hpp"

namespace prooflog {

struct Demonstration {
  std::string problem_text;
  std::string program_text;
};

struct TemplateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Few-shot prompt material: problem/program demonstration pairs plus an
/// optional header and stop markers. Every demonstration program must parse;
/// loading fails fast otherwise.
struct PromptTemplate {
  std::vector<Demonstration> demonstrations;
  std::string header;
  std::vector<std::string> stop_markers;
};

PromptTemplate template_from_json(const std::string& text);
PromptTemplate load_template(const std::filesystem::path& file);

/// Deterministic concatenation: header, each demonstration as a
/// problem-then-program block, then the target problem with an open program
/// block. Throws TemplateError when no demonstration is present.
std::string build_prompt(const PromptTemplate& tmpl,
                         const std::string& problem_text);

enum class GenStatus { ok, extraction_failed, parse_failed, service_error };
const char* gen_status_name(GenStatus status);

struct GenerationResult {
  std::string raw_text;  // last completion received (or error note)
  std::optional<SourceProgram> extracted_program;
  GenStatus status = GenStatus::service_error;
  int attempts = 0;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Completion-service endpoint. The bearer token is read from the
/// environment variable named by api_key_env; the config file never holds
/// credentials.
struct ServiceConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::string path = "/v1/completions";
  std::string model;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string api_key_env;
  int retries = 2;
  int timeout_seconds = 60;
};

ServiceConfig service_config_from_json(const std::string& text);
ServiceConfig load_service_config(const std::filesystem::path& file);

/// First code block wins: a complete ```-fenced block if present, else the
/// prefix before a closing fence (the prompt leaves a block open), else the
/// prefix before the first stop marker. nullopt when none of these apply.
std::optional<std::string> extract_program_block(
    const std::string& completion,
    const std::vector<std::string>& stop_markers);

/// Single-turn completion request. Retries with the identical prompt (the
/// service may be sampling); every failure mode lands in status, nothing
/// escapes as an exception.
GenerationResult generate_program(const ServiceConfig& service,
                                  const std::string& prompt, int retries,
                                  const std::vector<std::string>&
                                      stop_markers = {});

/// Offline stand-in for generate_program: reads <dir>/<instance_id>.pl.
GenerationResult load_offline(const std::filesystem::path& dir,
                              const std::string& instance_id);

}  // namespace prooflog
