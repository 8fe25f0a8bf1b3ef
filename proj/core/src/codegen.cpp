#include "prooflog/codegen.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace prooflog {

namespace {

std::optional<std::string> read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void validate_demonstrations(const PromptTemplate& tmpl) {
  for (std::size_t i = 0; i < tmpl.demonstrations.size(); ++i) {
    const auto& demo = tmpl.demonstrations[i];
    const ParseResult parsed = parse_source(
        {demo.program_text, "demonstration " + std::to_string(i)});
    if (!parsed.ok()) {
      std::string detail;
      for (const auto& d : parsed.diagnostics) {
        if (d.kind == ParseDiagnostic::Kind::error) {
          detail = d.message;
          break;
        }
      }
      throw TemplateError("demonstration " + std::to_string(i) +
                          " does not parse: " + detail);
    }
  }
}

}  // namespace

PromptTemplate template_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("invalid template JSON: ") + e.what());
  }
  PromptTemplate tmpl;
  tmpl.header = j.value("header", std::string{});
  for (const auto& marker : j.value("stop_markers", nlohmann::json::array())) {
    tmpl.stop_markers.push_back(marker.get<std::string>());
  }
  if (!j.contains("demonstrations") || !j.at("demonstrations").is_array()) {
    throw TemplateError("template needs a demonstrations array");
  }
  for (const auto& d : j.at("demonstrations")) {
    Demonstration demo;
    demo.problem_text = d.at("problem_text").get<std::string>();
    demo.program_text = d.at("program_text").get<std::string>();
    tmpl.demonstrations.push_back(std::move(demo));
  }
  validate_demonstrations(tmpl);
  return tmpl;
}

PromptTemplate load_template(const std::filesystem::path& file) {
  const auto text = read_file(file);
  if (!text) throw TemplateError("cannot read template file: " + file.string());
  return template_from_json(*text);
}

std::string build_prompt(const PromptTemplate& tmpl,
                         const std::string& problem_text) {
  if (tmpl.demonstrations.empty()) {
    throw TemplateError("prompt template has no demonstrations");
  }
  std::string prompt;
  if (!tmpl.header.empty()) {
    prompt += tmpl.header;
    prompt += "\n\n";
  }
  for (const auto& demo : tmpl.demonstrations) {
    prompt += "Problem:\n";
    prompt += demo.problem_text;
    prompt += "\nProgram:\n```\n";
    prompt += demo.program_text;
    if (prompt.back() != '\n') prompt += '\n';
    prompt += "```\n\n";
  }
  prompt += "Problem:\n";
  prompt += problem_text;
  prompt += "\nProgram:\n```\n";
  return prompt;
}

const char* gen_status_name(GenStatus status) {
  switch (status) {
    case GenStatus::ok: return "ok";
    case GenStatus::extraction_failed: return "extraction_failed";
    case GenStatus::parse_failed: return "parse_failed";
    case GenStatus::service_error: return "service_error";
  }
  return "?";
}

ServiceConfig service_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TemplateError(std::string("invalid service config JSON: ") +
                        e.what());
  }
  ServiceConfig cfg;
  cfg.base_url = j.at("base_url").get<std::string>();
  cfg.path = j.value("path", cfg.path);
  cfg.model = j.value("model", std::string{});
  cfg.temperature = j.value("temperature", 0.0);
  cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
  cfg.api_key_env = j.value("api_key_env", std::string{});
  cfg.retries = j.value("retries", cfg.retries);
  cfg.timeout_seconds = j.value("timeout_seconds", cfg.timeout_seconds);
  return cfg;
}

ServiceConfig load_service_config(const std::filesystem::path& file) {
  const auto text = read_file(file);
  if (!text) {
    throw TemplateError("cannot read service config: " + file.string());
  }
  return service_config_from_json(*text);
}

std::optional<std::string> extract_program_block(
    const std::string& completion,
    const std::vector<std::string>& stop_markers) {
  const std::string fence = "```";
  const std::size_t first = completion.find(fence);
  if (first != std::string::npos) {
    // The prompt leaves a program block open, so non-blank text before the
    // first fence is that block's body; otherwise the fence starts a fresh
    // block and its body runs to the closing fence.
    const std::string prefix = completion.substr(0, first);
    if (prefix.find_first_not_of(" \t\r\n") != std::string::npos) {
      return prefix;
    }
    std::size_t body = completion.find('\n', first);
    if (body == std::string::npos) return std::nullopt;
    ++body;
    const std::size_t close = completion.find(fence, body);
    if (close == std::string::npos) return std::nullopt;
    return completion.substr(body, close - body);
  }
  for (const auto& marker : stop_markers) {
    if (marker.empty()) continue;
    const std::size_t at = completion.find(marker);
    if (at != std::string::npos) return completion.substr(0, at);
  }
  return std::nullopt;
}

namespace {

GenerationResult finish_parse(GenerationResult result, std::string program,
                              const std::string& origin) {
  SourceProgram source{std::move(program), origin};
  const ParseResult parsed = parse_source(source);
  result.diagnostics = parsed.diagnostics;
  if (!parsed.ok()) {
    result.status = GenStatus::parse_failed;
    return result;
  }
  result.extracted_program = std::move(source);
  result.status = GenStatus::ok;
  return result;
}

}  // namespace

GenerationResult generate_program(const ServiceConfig& service,
                                  const std::string& prompt, int retries,
                                  const std::vector<std::string>&
                                      stop_markers) {
  GenerationResult result;
  const int total_attempts = retries < 0 ? 1 : retries + 1;

  httplib::Client client(service.base_url);
  client.set_connection_timeout(service.timeout_seconds, 0);
  client.set_read_timeout(service.timeout_seconds, 0);
  httplib::Headers headers;
  if (!service.api_key_env.empty()) {
    if (const char* key = std::getenv(service.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  nlohmann::ordered_json request;
  request["model"] = service.model;
  request["prompt"] = prompt;
  request["temperature"] = service.temperature;
  request["max_tokens"] = service.max_tokens;
  request["stop"] = stop_markers;
  const std::string body = request.dump();

  for (int attempt = 0; attempt < total_attempts; ++attempt) {
    result.attempts = attempt + 1;
    const httplib::Result response =
        client.Post(service.path, headers, body, "application/json");
    if (!response || response->status != 200) {
      result.status = GenStatus::service_error;
      result.raw_text = response
                            ? "service returned status " +
                                  std::to_string(response->status)
                            : "service unreachable";
      continue;
    }
    std::string completion;
    try {
      const nlohmann::json j = nlohmann::json::parse(response->body);
      if (j.contains("completion")) {
        completion = j.at("completion").get<std::string>();
      } else if (j.contains("text")) {
        completion = j.at("text").get<std::string>();
      } else if (j.contains("choices") && !j.at("choices").empty()) {
        const auto& choice = j.at("choices").at(0);
        completion = choice.contains("text")
                         ? choice.at("text").get<std::string>()
                         : choice.at("message").at("content")
                               .get<std::string>();
      } else {
        throw std::runtime_error("no completion field");
      }
    } catch (const std::exception&) {
      result.status = GenStatus::service_error;
      result.raw_text = response->body;
      continue;
    }
    result.raw_text = completion;
    const auto block = extract_program_block(completion, stop_markers);
    if (!block) {
      result.status = GenStatus::extraction_failed;
      continue;
    }
    GenerationResult parsed =
        finish_parse(std::move(result), *block, "generated");
    if (parsed.status == GenStatus::ok) return parsed;
    result = std::move(parsed);
    result.extracted_program.reset();
  }
  return result;
}

GenerationResult load_offline(const std::filesystem::path& dir,
                              const std::string& instance_id) {
  GenerationResult result;
  result.attempts = 1;
  const std::filesystem::path file = dir / (instance_id + ".pl");
  const auto text = read_file(file);
  if (!text) {
    result.status = GenStatus::service_error;
    result.raw_text = "missing program file: " + file.string();
    return result;
  }
  result.raw_text = *text;
  return finish_parse(std::move(result), *text, file.string());
}

}  // namespace prooflog
