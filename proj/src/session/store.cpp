#include "kgg/session/store.hpp"

#include <fstream>
#include <sstream>

#include "kgg/session/serialize.hpp"

namespace kgg::session {

namespace {

std::vector<SessionEvent> parse_log(const std::string& text) {
  std::vector<SessionEvent> events;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(deserialize_event(line));
    } catch (const Error& e) {
      throw CorruptRecord("event log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return events;
}

}  // namespace

FileStore::FileStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec || !std::filesystem::is_directory(root_)) {
    throw StoreUnavailable("cannot use session directory " + root_.string());
  }
}

std::filesystem::path FileStore::path_for(const std::string& key) const {
  if (key.empty() || key.find('/') != std::string::npos || key.find("..") != std::string::npos) {
    throw StoreUnavailable("invalid store key " + key);
  }
  return root_ / key;
}

std::optional<std::string> FileStore::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void FileStore::put(const std::string& key, const std::string& value) {
  std::lock_guard lock(mutex_);
  const auto path = path_for(key);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreUnavailable("cannot write " + tmp);
    out << value;
    if (!out.flush()) throw StoreUnavailable("cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreUnavailable("cannot replace " + path.string() + ": " + ec.message());
}

void FileStore::append(const std::string& key, const std::string& value) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_for(key), std::ios::binary | std::ios::app);
  if (!out) throw StoreUnavailable("cannot append to " + key);
  out << value;
  if (!out.flush()) throw StoreUnavailable("cannot append to " + key);
}

bool FileStore::exists(const std::string& key) const {
  std::lock_guard lock(mutex_);
  return std::filesystem::exists(path_for(key));
}

std::string snapshot_key(const std::string& id) { return id + ".snapshot.json"; }
std::string log_key(const std::string& id) { return id + ".events.jsonl"; }

bool SessionStore::valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

bool SessionStore::exists(const std::string& id) const {
  return valid_id(id) && (kv_->exists(log_key(id)) || kv_->exists(snapshot_key(id)));
}

void SessionStore::create(const SessionState& state) {
  if (!valid_id(state.id)) throw Error("InvalidSessionId", "invalid session id " + state.id);
  if (exists(state.id)) throw Error("SessionExists", "session " + state.id + " already exists");
  kv_->put(log_key(state.id), "");
  save(state);
}

void SessionStore::append_event(const std::string& id, const SessionEvent& event) {
  kv_->append(log_key(id), serialize_event(event) + "\n");
}

void SessionStore::save(const SessionState& state) { kv_->put(snapshot_key(state.id), serialize_state(state)); }

std::vector<SessionEvent> SessionStore::load_events(const std::string& id) const {
  if (!valid_id(id)) throw UnknownSession(id);
  auto text = kv_->get(log_key(id));
  if (!text) throw UnknownSession(id);
  return parse_log(*text);
}

LoadResult SessionStore::load(const std::string& id, const kg::KnowledgeGraph& graph) const {
  if (!exists(id)) throw UnknownSession(id);
  LoadResult result;
  const auto log_text = kv_->get(log_key(id));
  std::optional<std::string> log_error;
  if (log_text) {
    try {
      result.events = parse_log(*log_text);
    } catch (const CorruptRecord& e) {
      log_error = e.what();
    }
  } else {
    log_error = "event log missing";
  }

  const auto snapshot_text = kv_->get(snapshot_key(id));
  std::optional<std::string> snapshot_error;
  if (snapshot_text) {
    try {
      result.state = deserialize_state(*snapshot_text);
      if (result.state.id != id) snapshot_error = "snapshot belongs to session " + result.state.id;
    } catch (const Error& e) {
      snapshot_error = e.what();
    }
  } else {
    snapshot_error = "snapshot missing";
  }

  const std::uint64_t log_last = result.events.empty() ? 0 : result.events.back().sequence;
  if (!snapshot_error && (log_error || result.state.last_sequence == log_last)) {
    if (log_error) result.warnings.push_back("event log unreadable, using snapshot: " + *log_error);
    return result;
  }
  if (log_error) {
    throw CorruptRecord("session " + id + ": snapshot (" + snapshot_error.value_or("ok") + ") and log (" +
                        *log_error + ") both unusable");
  }
  if (snapshot_error) {
    result.warnings.push_back("snapshot unusable, rebuilt from event log: " + *snapshot_error);
  } else {
    result.warnings.push_back("snapshot stale (sequence " + std::to_string(result.state.last_sequence) +
                              " < " + std::to_string(log_last) + "), rebuilt from event log");
  }
  try {
    result.state = replay(id, result.events, graph);
  } catch (const Error& e) {
    throw CorruptRecord("session " + id + ": replay failed: " + e.what());
  }
  return result;
}

std::vector<SessionEvent> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open event log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str());
}

}  // namespace kgg::session
