// kgg: command-line front end for the exploration service.
#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "kgg/service/http_server.hpp"
#include "kgg/service/service.hpp"
#include "kgg/session/serialize.hpp"

using nlohmann::json;
using namespace kgg;

namespace {

struct Flags {
  std::string config;
  std::string kg;
  std::string embeddings;
  std::string fixtures;
  std::string store;
  std::string mode;
  std::optional<double> theta_n;
  std::optional<double> theta_r;
  std::string host;
  std::optional<int> port;
};

// Precedence: environment > flags > config file > defaults.
service::ServiceConfig resolve_config(const Flags& f) {
  service::ServiceConfig cfg = f.config.empty() ? service::ServiceConfig{} : service::load_config(f.config);
  if (!f.kg.empty()) cfg.kg_path = f.kg;
  if (!f.embeddings.empty()) {
    cfg.embeddings.provider = "fixture";
    cfg.embeddings.fixture_path = f.embeddings;
  }
  if (!f.fixtures.empty()) cfg.gateway.fixture_dir = f.fixtures;
  if (!f.store.empty()) cfg.store_dir = f.store;
  if (!f.mode.empty()) cfg.gateway.mode = llm::gateway_mode_from_string(f.mode);
  if (f.theta_n) cfg.matcher.theta_n = *f.theta_n;
  if (f.theta_r) cfg.matcher.theta_r = *f.theta_r;
  if (!f.host.empty()) cfg.host = f.host;
  if (f.port) cfg.port = *f.port;
  service::apply_env(cfg, service::getenv_lookup);
  return cfg;
}

void print(const json& j) { std::cout << j.dump() << '\n'; }

int fail(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  return 1;
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded, guided exploration of an LLM's answers against a biomedical knowledge graph"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "JSON config file");
  app.add_option("--kg", flags.kg, "knowledge graph (JSON Lines)");
  app.add_option("--embeddings", flags.embeddings, "fixture embedding table");
  app.add_option("--fixtures", flags.fixtures, "LLM transcript fixture directory");
  app.add_option("--store", flags.store, "session directory");
  app.add_option("--mode", flags.mode, "LLM gateway mode")->check(CLI::IsMember({"live", "replay", "record"}));
  app.add_option("--theta-n", flags.theta_n, "entity match threshold")->check(CLI::Range(0.0, 1.0));
  app.add_option("--theta-r", flags.theta_r, "relation equivalence threshold")->check(CLI::Range(0.0, 1.0));

  auto* load_kg = app.add_subcommand("load-kg", "validate a knowledge graph and print its statistics");

  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  serve->add_option("--host", flags.host, "listen address");
  serve->add_option("--port", flags.port, "listen port");

  std::string session_id;
  std::string text;
  std::string rec_id;
  auto* ask = app.add_subcommand("ask", "run one turn and print the event stream as JSON Lines");
  ask->add_option("--session", session_id, "session id (created if missing)")->required();
  ask->add_option("--text", text, "question");
  ask->add_option("--recommendation", rec_id, "recommendation id to follow");

  std::string triple;
  auto* verify = app.add_subcommand("verify", "ground one triple given as 'subject|relation|object'");
  verify->add_option("--triple", triple, "subject|relation|object")->required();

  std::size_t k = 3;
  auto* recommend_cmd = app.add_subcommand("recommend", "print the top recommendations of a session");
  recommend_cmd->add_option("--session", session_id, "session id")->required();
  recommend_cmd->add_option("-k", k, "how many")->check(CLI::PositiveNumber);

  std::string log_path;
  auto* replay_cmd = app.add_subcommand("replay", "rebuild a session from its event log and print the state");
  replay_cmd->add_option("--log", log_path, "event log (JSON Lines)")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--session", session_id, "session id to assign")->default_val("replay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", {{"code", "UsageError"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }

  try {
    service::ServiceConfig cfg = resolve_config(flags);

    if (load_kg->parsed()) {
      if (cfg.kg_path.empty()) return fail("ConfigError", "no knowledge graph path configured");
      const auto g = kg::load_graph(cfg.kg_path);
      print({{"nodes", g.node_count()}, {"edges", g.edge_count()}, {"types", g.node_types()}});
      return 0;
    }

    if (replay_cmd->parsed()) {
      if (cfg.kg_path.empty()) return fail("ConfigError", "no knowledge graph path configured");
      const auto g = kg::load_graph(cfg.kg_path);
      const auto state = session::replay(session_id, session::read_event_log(log_path), g);
      std::cout << session::serialize_state(state) << '\n';
      return 0;
    }

    if (verify->parsed()) {
      const auto first = triple.find('|');
      const auto second = first == std::string::npos ? first : triple.find('|', first + 1);
      if (second == std::string::npos || triple.find('|', second + 1) != std::string::npos) {
        return fail("InvalidRequest", "triple must be 'subject|relation|object'");
      }
      cfg.matcher.validate();
      if (cfg.kg_path.empty() || cfg.embeddings.fixture_path.empty()) {
        if (cfg.embeddings.provider == "fixture") return fail("ConfigError", "verify needs --kg and --embeddings");
      }
      auto graph = std::make_shared<kg::KnowledgeGraph>(kg::load_graph(cfg.kg_path));
      std::shared_ptr<ground::EmbeddingProvider> provider;
      if (cfg.embeddings.provider == "fixture") {
        provider = ground::FixtureProvider::from_file(cfg.embeddings.fixture_path);
      } else {
        provider = std::make_shared<ground::RemoteProvider>(cfg.embeddings.remote);
      }
      ground::EmbeddingCache cache(provider);
      const auto index = ground::NodeIndex::build(*graph, cache);
      annotate::Triple t{triple.substr(0, first), triple.substr(first + 1, second - first - 1),
                         triple.substr(second + 1), "$n1", "$r1", "$n2"};
      print(ground::ground_triples({t}, *graph, index, cfg.matcher, cache).front());
      return 0;
    }

    auto svc = service::Service::from_config(cfg);
    for (const auto& w : svc->warnings()) std::cerr << json{{"warning", w}}.dump() << '\n';

    if (ask->parsed()) {
      try {
        svc->state(session_id);
      } catch (const session::UnknownSession&) {
        svc->create_session(session_id);
      }
      service::MessageRequest msg{text, rec_id.empty() ? std::nullopt : std::optional<std::string>(rec_id)};
      bool failed = false;
      svc->handle_message(session_id, msg, [&](const service::StreamEvent& e) {
        if (e.type == "error") failed = true;
        print({{"event", e.type}, {"data", e.data}});
      });
      return failed ? 1 : 0;
    }

    if (recommend_cmd->parsed()) {
      json items = json::array();
      for (const auto& r : svc->recommendations(session_id, k)) items.push_back(r);
      print({{"items", items}, {"progress", svc->progress(session_id)}});
      return 0;
    }

    if (serve->parsed()) {
      service::HttpServer server(*svc);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << json{{"listening", cfg.host + ":" + std::to_string(cfg.port)}}.dump() << '\n';
      if (!server.listen(cfg.host, cfg.port)) return fail("ListenFailed", "cannot listen on " + cfg.host);
      return 0;
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("Internal", e.what());
  }
  return 0;
}
