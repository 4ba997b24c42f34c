#include <httplib.h>

#include "json.hpp"
#include "kgg/http_util.hpp"
#include "kgg/llm/gateway.hpp"

namespace kgg::llm {

void SseDeltaDecoder::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::size_t pos;
  while (!done_ && (pos = buffer_.find('\n')) != std::string::npos) {
    std::string line = buffer_.substr(0, pos);
    buffer_.erase(0, pos + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    handle_line(line);
  }
}

void SseDeltaDecoder::handle_line(const std::string& line) {
  if (line.rfind("data:", 0) != 0) return;
  std::string payload = line.substr(5);
  if (!payload.empty() && payload.front() == ' ') payload.erase(0, 1);
  if (payload == "[DONE]") {
    done_ = true;
    return;
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError(std::string("malformed stream payload: ") + e.what());
  }
  if (doc.contains("error")) throw GatewayError("provider error: " + doc["error"].dump());
  const auto& choices = doc.value("choices", nlohmann::json::array());
  if (choices.empty()) return;
  const auto& delta = choices[0].value("delta", nlohmann::json::object());
  if (delta.contains("content") && delta["content"].is_string()) {
    const auto content = delta["content"].get<std::string>();
    if (!content.empty()) sink_(content);
  }
}

void HttpChatTransport::complete(const ChatRequest& request, const ChunkSink& sink) {
  const SplitUrl url = split_url(config_.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);

  nlohmann::json body{{"model", config_.model},
                      {"stream", request.stream},
                      {"messages",
                       {{{"role", "system"}, {"content", request.prompt.system}},
                        {{"role", "user"}, {"content", request.prompt.user}}}}};

  httplib::Request req;
  req.method = "POST";
  req.path = url.path_prefix + "/chat/completions";
  req.headers.emplace("Authorization", "Bearer " + config_.api_key);
  req.headers.emplace("Content-Type", "application/json");
  req.headers.emplace("Accept", request.stream ? "text/event-stream" : "application/json");
  req.body = body.dump();

  SseDeltaDecoder decoder(sink);
  std::string plain;
  std::string error_body;
  int status = 0;
  req.response_handler = [&](const httplib::Response& res) {
    status = res.status;
    return true;
  };
  req.content_receiver = [&](const char* data, size_t len, uint64_t, uint64_t) {
    if (status != 200) {
      error_body.append(data, len);
    } else if (request.stream) {
      decoder.feed(std::string_view(data, len));
    } else {
      plain.append(data, len);
    }
    return true;
  };

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  if (!client.send(req, res, err)) {
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw TimeoutError("chat completion timed out: " + httplib::to_string(err));
    }
    throw GatewayError("chat completion failed: " + httplib::to_string(err));
  }
  if (status != 200) {
    throw GatewayError("chat completion returned HTTP " + std::to_string(status) + ": " + error_body);
  }
  if (!request.stream) {
    try {
      const auto doc = nlohmann::json::parse(plain);
      sink(doc.at("choices").at(0).at("message").at("content").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError(std::string("malformed completion: ") + e.what());
    }
  }
}

}  // namespace kgg::llm
