#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kgg/error.hpp"
#include "kgg/kg/graph.hpp"
#include "kgg/session/session.hpp"

namespace kgg::session {

class StoreUnavailable : public Error {
 public:
  explicit StoreUnavailable(const std::string& what) : Error("StoreUnavailable", what) {}
};

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& id) : Error("UnknownSession", "unknown session " + id) {}
};

class CorruptRecord : public Error {
 public:
  explicit CorruptRecord(const std::string& what) : Error("CorruptRecord", what) {}
};

// Minimal key-value contract the session layer needs.
class KeyValueStore {
 public:
  virtual ~KeyValueStore() = default;
  virtual std::optional<std::string> get(const std::string& key) const = 0;
  // Replaces the value atomically.
  virtual void put(const std::string& key, const std::string& value) = 0;
  virtual void append(const std::string& key, const std::string& value) = 0;
  virtual bool exists(const std::string& key) const = 0;
};

// One file per key under `root`. Keys must be plain file names.
class FileStore : public KeyValueStore {
 public:
  explicit FileStore(std::filesystem::path root);

  std::optional<std::string> get(const std::string& key) const override;
  void put(const std::string& key, const std::string& value) override;
  void append(const std::string& key, const std::string& value) override;
  bool exists(const std::string& key) const override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

struct LoadResult {
  SessionState state;
  std::vector<SessionEvent> events;
  std::vector<std::string> warnings;
};

// Snapshot + JSON Lines event log per session, on top of a KeyValueStore.
class SessionStore {
 public:
  explicit SessionStore(std::shared_ptr<KeyValueStore> kv) : kv_(std::move(kv)) {}

  static bool valid_id(const std::string& id);

  bool exists(const std::string& id) const;
  // Starts an empty log and snapshot. Throws Error("SessionExists") if present.
  void create(const SessionState& state);
  void append_event(const std::string& id, const SessionEvent& event);
  void save(const SessionState& state);
  std::vector<SessionEvent> load_events(const std::string& id) const;

  // Uses the snapshot when it is readable and current; otherwise rebuilds the
  // state by replaying the log and reports why in `warnings`.
  LoadResult load(const std::string& id, const kg::KnowledgeGraph& graph) const;

 private:
  std::shared_ptr<KeyValueStore> kv_;
};

std::string snapshot_key(const std::string& id);
std::string log_key(const std::string& id);

// Reads a standalone JSON Lines event log file.
std::vector<SessionEvent> read_event_log(const std::filesystem::path& path);

}  // namespace kgg::session
