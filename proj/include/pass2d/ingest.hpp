#ifndef PASS2D_INGEST_HPP
#define PASS2D_INGEST_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "pass2d/model.hpp"

namespace p2d {

// Event log (.p2dl): one JSON record per line. Line 1 is the header
// {"format_version":"1","source":...,"frame":"left"|"right"}; every other
// line is one pass event. Key order is normative and matches the writer.
// Floats are rendered with 9 significant digits, shortest form.

enum class Frame { Left, Right };

struct LogHeader {
    std::string format_version = "1";
    std::string source;
    Frame frame = Frame::Left;
};

struct EventLog {
    LogHeader header;
    std::vector<PassEvent> events;
};

// Point-reflects one event into the other attacking frame (pos -> -pos,
// vel -> -vel, body -> body + 180). Involutive.
PassEvent mirror_event(const PassEvent& e);

// Parses and validates a log. Right-frame sources are mirrored into the
// canonical +x attacking frame, so the returned header is always Left.
// Throws ParseError with a 1-based line number on the first failure.
EventLog parse_event_log(std::istream& in);
EventLog parse_event_log_file(const std::string& path);

// Deterministic writer; returns the byte count written.
std::size_t write_event_log(const EventLog& log, std::ostream& out);
std::size_t write_event_log_file(const EventLog& log, const std::string& path);

} // namespace p2d

#endif
