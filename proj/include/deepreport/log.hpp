#pragma once
// Minimal leveled logger. The sink is swappable so tests can capture
// warnings emitted by degradation paths.

#include <functional>
#include <string>
#include <vector>

namespace deepreport::logging {

enum class Level { debug, info, warn, error };

using Sink = std::function<void(Level, const std::string&)>;

void set_sink(Sink sink);  // nullptr restores the stderr default
void set_min_level(Level level);

void emit(Level level, const std::string& message);

inline void debug(const std::string& m) { emit(Level::debug, m); }
inline void info(const std::string& m) { emit(Level::info, m); }
inline void warn(const std::string& m) { emit(Level::warn, m); }
inline void error(const std::string& m) { emit(Level::error, m); }

// RAII capture of log lines at or above `level`; restores the previous sink.
class Capture {
public:
    explicit Capture(Level level = Level::warn);
    ~Capture();
    const std::vector<std::string>& lines() const { return lines_; }
    bool contains(const std::string& needle) const;

private:
    std::vector<std::string> lines_;
    Sink previous_;
};

}  // namespace deepreport::logging
