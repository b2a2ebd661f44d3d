#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <boost/lockfree/spsc_queue.hpp>
#include <nlohmann/json.hpp>

#include "doorway/model/parameters.hpp"

namespace doorway {

enum class LogLevel { Debug, Info, Warn, Error };
NLOHMANN_JSON_SERIALIZE_ENUM(LogLevel, {{LogLevel::Debug, "debug"},
                                        {LogLevel::Info, "info"},
                                        {LogLevel::Warn, "warn"},
                                        {LogLevel::Error, "error"}})

struct LogRecord {
  std::int64_t tick = 0;
  LogLevel level = LogLevel::Info;
  std::optional<std::int64_t> nodeId;
  std::string message;
  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};
void to_json(nlohmann::json& j, const LogRecord& r);
void from_json(const nlohmann::json& j, LogRecord& r);

/// Line-delimited JSON event log. append() is called from the tick thread
/// and never waits on the writer; records go through a bounded single
/// producer / single consumer queue drained by a background thread. When the
/// queue is full the record is counted as dropped instead of blocking.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path, std::size_t capacity = 1 << 14);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  bool append(LogRecord record);
  /// Blocks until every appended record is on disk. Tick thread only.
  void flush();

  std::uint64_t appended() const { return appended_.load(); }
  std::uint64_t written() const { return written_.load(); }
  std::uint64_t dropped() const { return dropped_.load(); }

 private:
  void run();

  std::ofstream out_;
  boost::lockfree::spsc_queue<LogRecord*> queue_;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> appended_{0};
  std::atomic<std::uint64_t> written_{0};
  std::atomic<std::uint64_t> dropped_{0};
  std::thread writer_;
};

struct ProgressSample {
  double time = 0.0;
  double progress = 0.0;
  Phase phase = Phase::Approach;
  std::string events;  ///< ';'-joined tokens recorded during this tick
};

/// Per-tick traversal progress with the events of each tick attached.
class RunMetrics {
 public:
  void record(double time, double progress, Phase phase);
  /// Attaches an event token to the most recent sample.
  void addEvent(const std::string& token);

  const std::vector<ProgressSample>& samples() const { return samples_; }
  double totalDuration() const { return samples_.empty() ? 0.0 : samples_.back().time; }
  std::size_t countEvents(const std::string& token) const;

  /// Header `time_s,progress_m,phase,event`, one row per tick.
  void writeCsv(std::ostream& os) const;
  void writeCsv(const std::filesystem::path& path) const;

 private:
  std::vector<ProgressSample> samples_;
};

std::string phaseName(Phase p);

}  // namespace doorway
