#pragma once

#include <functional>
#include <string_view>

namespace dsaee::log {

// Receives non-fatal warnings (clamped batch sizes, non-converged fits,
// skipped evaluations). The default sink writes to stderr.
using Sink = std::function<void(std::string_view message)>;

// Replaces the process-wide sink; an empty function restores the default.
void set_sink(Sink sink);

void warn(std::string_view message);

}  // namespace dsaee::log
