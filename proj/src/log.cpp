#include "deepreport/log.hpp"

#include <cstdio>
#include <mutex>
#include <vector>

namespace deepreport::logging {

namespace {

std::mutex g_mutex;
Sink g_sink;
Level g_min_level = Level::info;

const char* level_tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
    }
    return "?";
}

}  // namespace

void set_sink(Sink sink) {
    std::lock_guard<std::mutex> lock(g_mutex);
    g_sink = std::move(sink);
}

void set_min_level(Level level) {
    std::lock_guard<std::mutex> lock(g_mutex);
    g_min_level = level;
}

void emit(Level level, const std::string& message) {
    std::lock_guard<std::mutex> lock(g_mutex);
    if (static_cast<int>(level) < static_cast<int>(g_min_level)) return;
    if (g_sink) {
        g_sink(level, message);
        return;
    }
    std::fprintf(stderr, "[%s] %s\n", level_tag(level), message.c_str());
}

Capture::Capture(Level level) {
    std::lock_guard<std::mutex> lock(g_mutex);
    previous_ = g_sink;
    auto* lines = &lines_;
    Level min = level;
    g_sink = [lines, min](Level l, const std::string& m) {
        if (static_cast<int>(l) >= static_cast<int>(min)) lines->push_back(m);
    };
}

Capture::~Capture() {
    std::lock_guard<std::mutex> lock(g_mutex);
    g_sink = previous_;
}

bool Capture::contains(const std::string& needle) const {
    for (const auto& line : lines_) {
        if (line.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace deepreport::logging
