#pragma once

#include <functional>
#include <string>
#include <vector>

namespace corpusmix::log {

using Sink = std::function<void(const std::string&)>;

// Replaces the warning sink (stderr by default). Passing an empty function
// restores the default. Returns the previous sink.
Sink set_warning_sink(Sink sink);

void warn(const std::string& message);

// Captures warnings for the lifetime of the object; used by tests and by the
// CLI when warnings are recorded into reports.
class ScopedCapture {
 public:
  ScopedCapture();
  ~ScopedCapture();
  ScopedCapture(const ScopedCapture&) = delete;
  ScopedCapture& operator=(const ScopedCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  std::vector<std::string> messages_;
  Sink previous_;
};

}  // namespace corpusmix::log
