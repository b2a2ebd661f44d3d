#include "doorway/telemetry/telemetry.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace doorway {

void to_json(nlohmann::json& j, const LogRecord& r) {
  j = {{"tick", r.tick}, {"level", r.level}, {"nodeId", nullptr}, {"message", r.message}};
  if (r.nodeId) j["nodeId"] = *r.nodeId;
}

void from_json(const nlohmann::json& j, LogRecord& r) {
  r.tick = j.at("tick").get<std::int64_t>();
  r.level = parseEnum<LogLevel>(j, "level");
  r.nodeId = j.at("nodeId").is_null() ? std::nullopt : std::optional(j.at("nodeId").get<std::int64_t>());
  r.message = j.at("message").get<std::string>();
}

EventLog::EventLog(std::filesystem::path path, std::size_t capacity) : out_(path), queue_(capacity) {
  if (!out_) throw std::runtime_error("cannot open event log " + path.string());
  writer_ = std::thread([this] { run(); });
}

EventLog::~EventLog() {
  stop_.store(true);
  writer_.join();
  LogRecord* r = nullptr;
  while (queue_.pop(r)) delete r;
}

bool EventLog::append(LogRecord record) {
  auto* r = new LogRecord(std::move(record));
  if (!queue_.push(r)) {
    delete r;
    dropped_.fetch_add(1);
    return false;
  }
  appended_.fetch_add(1);
  return true;
}

void EventLog::flush() {
  while (written_.load() < appended_.load()) std::this_thread::sleep_for(std::chrono::microseconds(200));
}

void EventLog::run() {
  for (;;) {
    const bool stopping = stop_.load();
    LogRecord* r = nullptr;
    bool any = false;
    while (queue_.pop(r)) {
      out_ << nlohmann::json(*r).dump() << '\n';
      delete r;
      any = true;
      written_.fetch_add(1);
    }
    if (any) out_.flush();
    if (stopping) break;
    if (!any) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
}

std::string phaseName(Phase p) { return nlohmann::json(p).get<std::string>(); }

void RunMetrics::record(double time, double progress, Phase phase) {
  if (!samples_.empty() && time <= samples_.back().time) throw std::logic_error("metrics time must increase");
  samples_.push_back({time, progress, phase, {}});
}

void RunMetrics::addEvent(const std::string& token) {
  if (samples_.empty()) throw std::logic_error("no sample to attach an event to");
  auto& e = samples_.back().events;
  if (!e.empty()) e += ';';
  e += token;
}

std::size_t RunMetrics::countEvents(const std::string& token) const {
  std::size_t n = 0;
  for (const auto& s : samples_) {
    std::size_t pos = 0;
    while (pos <= s.events.size()) {
      const std::size_t end = std::min(s.events.find(';', pos), s.events.size());
      if (s.events.compare(pos, end - pos, token) == 0 && end > pos) ++n;
      pos = end + 1;
    }
  }
  return n;
}

void RunMetrics::writeCsv(std::ostream& os) const {
  os << "time_s,progress_m,phase,event\n";
  char buf[64];
  for (const auto& s : samples_) {
    // Fixed precision keeps files byte-identical across runs.
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", s.time, s.progress);
    os << buf << phaseName(s.phase) << ',' << s.events << '\n';
  }
}

void RunMetrics::writeCsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics " + path.string());
  writeCsv(out);
  if (!out) throw std::runtime_error("write failed for metrics " + path.string());
}

}  // namespace doorway
