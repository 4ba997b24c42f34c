// Regenerates the recorded LLM transcripts and session logs under data/ from
// a scripted conversation. The scripted transport stands in for the model;
// everything else runs through the real service in Record mode.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <unistd.h>

#include "kgg/service/service.hpp"
#include "kgg/session/serialize.hpp"
#include "kgg/session/store.hpp"

using nlohmann::json;
using namespace kgg;

namespace {

struct ScriptedTurn {
  std::string scope;
  std::string answer;
};

class ScriptedTransport : public llm::ChatTransport {
 public:
  explicit ScriptedTransport(std::size_t chunk_bytes) : chunk_bytes_(chunk_bytes) {}

  void add(const std::string& question, ScriptedTurn turn) { turns_[question] = std::move(turn); }

  void complete(const llm::ChatRequest& request, const llm::ChunkSink& sink) override {
    const std::string& user = request.prompt.user;
    const auto q = user.rfind("Question: ");
    if (q == std::string::npos) throw llm::GatewayError("prompt has no question");
    const std::string question = user.substr(q + 10);
    const auto it = turns_.find(question);
    if (it == turns_.end()) throw llm::GatewayError("script has no turn for: " + question);
    if (user.rfind("Knowledge graph:", 0) == 0) {
      sink(it->second.scope);
      return;
    }
    const std::string& a = it->second.answer;
    for (std::size_t i = 0; i < a.size(); i += chunk_bytes_) sink(std::string_view(a).substr(i, chunk_bytes_));
  }

 private:
  std::size_t chunk_bytes_;
  std::map<std::string, ScriptedTurn> turns_;
};

recommend::GoalItem item_from(const json& j) { return j.get<recommend::GoalItem>(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Record LLM transcript fixtures from a scripted conversation"};
  std::string script_path, kg_path, embeddings_path, fixtures_dir, sessions_dir;
  std::size_t chunk_bytes = 11;
  app.add_option("--script", script_path)->required()->check(CLI::ExistingFile);
  app.add_option("--kg", kg_path)->required()->check(CLI::ExistingFile);
  app.add_option("--embeddings", embeddings_path)->required()->check(CLI::ExistingFile);
  app.add_option("--fixtures", fixtures_dir, "output transcript directory")->required();
  app.add_option("--sessions", sessions_dir, "output directory for session event logs")->required();
  app.add_option("--chunk-bytes", chunk_bytes)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    json script;
    {
      std::ifstream in(script_path);
      script = json::parse(in);
    }
    for (const char* t : {"scope_check", "annotate", "chat"}) std::filesystem::remove_all(std::filesystem::path(fixtures_dir) / t);
    const auto work = std::filesystem::temp_directory_path() / ("kgg-author-" + std::to_string(::getpid()));
    std::filesystem::remove_all(work);

    service::ServiceConfig cfg;
    cfg.kg_path = kg_path;
    cfg.embeddings.fixture_path = embeddings_path;
    cfg.gateway.mode = llm::GatewayMode::kRecord;
    cfg.gateway.fixture_dir = fixtures_dir;
    cfg.store_dir = work;

    auto transport = std::make_shared<ScriptedTransport>(chunk_bytes);
    std::int64_t tick = 0;
    auto clock = [&tick] { return 1700000000000 + 250 * tick++; };
    auto svc = service::Service::from_config(cfg, transport, clock);

    std::filesystem::create_directories(sessions_dir);
    for (const auto& s : script.at("sessions")) {
      const std::string id = s.at("id").get<std::string>();
      tick = 0;
      svc->create_session(id);
      for (const auto& turn : s.at("turns")) {
        if (turn.contains("dismiss")) {
          svc->dismiss(id, recommend::recommendation_id(item_from(turn["dismiss"])));
          continue;
        }
        service::MessageRequest msg;
        if (turn.contains("recommendation")) {
          const auto item = item_from(turn["recommendation"]);
          msg.recommendation_id = recommend::recommendation_id(item);
          transport->add(recommend::to_question(item, svc->graph()),
                         {turn.value("scope", "yes"), turn.at("answer").get<std::string>()});
        } else {
          msg.text = turn.at("question").get<std::string>();
          transport->add(msg.text, {turn.value("scope", "yes"), turn.at("answer").get<std::string>()});
        }
        bool failed = false;
        svc->handle_message(id, msg, [&](const service::StreamEvent& e) {
          if (e.type == "error") {
            failed = true;
            std::cerr << id << ": " << e.data.dump() << '\n';
          }
        });
        if (failed) return 1;
      }
      std::filesystem::copy_file(work / session::log_key(id), std::filesystem::path(sessions_dir) / (id + ".log"),
                                 std::filesystem::copy_options::overwrite_existing);
      std::cout << id << ": " << svc->state(id).steps.size() << " steps\n";
    }
    std::filesystem::remove_all(work);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
