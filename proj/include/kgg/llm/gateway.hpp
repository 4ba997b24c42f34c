#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgg/error.hpp"

namespace kgg::llm {

class GatewayError : public Error {
 public:
  explicit GatewayError(const std::string& what) : Error("GatewayError", what) {}
};

class TimeoutError : public Error {
 public:
  explicit TimeoutError(const std::string& what) : Error("Timeout", what) {}
};

class MissingFixture : public Error {
 public:
  MissingFixture(const std::string& template_name, const std::string& key)
      : Error("MissingFixture", "no fixture " + template_name + "/" + key + ".json"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// ---- prompts ----------------------------------------------------------------

struct RenderedPrompt {
  std::string system;
  std::string user;
};

// `{name}` placeholders in the user pattern are substituted at render time.
struct PromptTemplate {
  std::string name;
  std::string system;
  std::string user_pattern;

  // Throws Error("TemplateError") if a placeholder has no value.
  RenderedPrompt render(const std::map<std::string, std::string>& vars) const;
};

// Built-in templates. The annotation template pins the `[surface]($nK)` /
// `[surface]($rK, $nI, $nJ)` grammar the parser accepts.
const PromptTemplate& scope_check_template();
const PromptTemplate& annotate_template();
const PromptTemplate& chat_template();

// ---- transport --------------------------------------------------------------

struct EndpointConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model = "gpt-4";
  std::string api_key;
  int timeout_seconds = 60;
};

struct ChatRequest {
  RenderedPrompt prompt;
  bool stream = true;
};

using ChunkSink = std::function<void(std::string_view)>;

// One completion call. Throws GatewayError or TimeoutError.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual void complete(const ChatRequest& request, const ChunkSink& sink) = 0;
};

// Chat-completions JSON over HTTP, streamed as server-sent events.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(EndpointConfig config) : config_(std::move(config)) {}
  void complete(const ChatRequest& request, const ChunkSink& sink) override;

 private:
  EndpointConfig config_;
};

// Incremental decoder for a chat-completions SSE body. Feed raw bytes; each
// `data:` payload's delta content is forwarded to the sink.
class SseDeltaDecoder {
 public:
  explicit SseDeltaDecoder(ChunkSink sink) : sink_(std::move(sink)) {}
  void feed(std::string_view bytes);
  bool done() const { return done_; }

 private:
  void handle_line(const std::string& line);

  ChunkSink sink_;
  std::string buffer_;
  bool done_ = false;
};

// ---- fixtures ---------------------------------------------------------------

struct TranscriptFixture {
  std::string key;
  std::string template_name;
  std::string prompt;  // normalized prompt the key was computed from
  std::vector<std::string> chunks;
};

// CRLF -> LF, trailing whitespace stripped per line, outer blank lines trimmed.
std::string normalize_prompt(const RenderedPrompt& prompt);
std::string fixture_key(const std::string& template_name, const RenderedPrompt& prompt);

std::filesystem::path fixture_path(const std::filesystem::path& dir, const std::string& template_name,
                                   const std::string& key);
std::optional<TranscriptFixture> load_fixture(const std::filesystem::path& dir, const std::string& template_name,
                                              const std::string& key);
// Write-temp-then-rename.
void save_fixture(const std::filesystem::path& dir, const TranscriptFixture& fixture);

// ---- gateway ----------------------------------------------------------------

enum class GatewayMode { kLive, kReplay, kRecord };

std::string_view to_string(GatewayMode mode);
GatewayMode gateway_mode_from_string(std::string_view s);

struct GatewayConfig {
  GatewayMode mode = GatewayMode::kReplay;
  std::filesystem::path fixture_dir;
  EndpointConfig endpoint;
};

struct ScopeVerdict {
  bool in_scope = false;
  std::optional<std::string> diagnostic;  // set when the reply could not be parsed
};

// What the model is told about the graph when deciding scope and annotating.
struct KgSummary {
  std::vector<std::string> types;
  std::string blurb;

  std::string types_line() const;
};

class Gateway {
 public:
  // Live and Record modes use `transport` (an HttpChatTransport is created
  // from the endpoint config when null). Replay never touches it.
  explicit Gateway(GatewayConfig config, std::shared_ptr<ChatTransport> transport = nullptr);

  ScopeVerdict check_scope(const std::string& question, const KgSummary& kg);
  void annotated_answer(const std::string& question, const std::string& history_summary, const KgSummary& kg,
                        const ChunkSink& sink);
  void chat_answer(const std::string& question, const std::string& history_summary, const ChunkSink& sink);

  // Renders `tmpl` and runs it in the configured mode.
  void run(const PromptTemplate& tmpl, const std::map<std::string, std::string>& vars, const ChunkSink& sink);

  const GatewayConfig& config() const { return config_; }

 private:
  void live(const ChatRequest& request, const ChunkSink& sink);

  GatewayConfig config_;
  std::shared_ptr<ChatTransport> transport_;
};

}  // namespace kgg::llm
