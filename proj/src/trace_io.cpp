#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "edgecache/environment.hpp"
#include "edgecache/errors.hpp"

namespace edgecache {
namespace {

constexpr const char* kTraceHeader = "trial,time,file_id,interarrival";

template <typename T>
T parse_field(std::string_view text, std::size_t row, const char* name) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(row, std::string("bad ") + name + " field '" +
                              std::string(text) + "'");
  }
  return value;
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const RequestEvent> events) {
  out << kTraceHeader << '\n';
  std::ostringstream line;
  line.precision(17);
  for (const RequestEvent& e : events) {
    line.str("");
    line << e.trial << ',' << e.time << ',' << (e.file + 1) << ',' << e.interarrival;
    out << line.str() << '\n';
  }
}

std::vector<RequestEvent> read_trace_csv(std::istream& in) {
  std::vector<RequestEvent> events;
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ParseError(row, "unexpected header '" + line + "'");

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view view(line);
    std::string_view fields[4];
    std::size_t count = 0;
    while (count < 4) {
      const auto comma = view.find(',');
      fields[count++] = view.substr(0, comma);
      if (comma == std::string_view::npos) {
        view = {};
        break;
      }
      view.remove_prefix(comma + 1);
      if (count == 4) throw ParseError(row, "too many fields");
    }
    if (count != 4) throw ParseError(row, "expected 4 fields");

    RequestEvent e;
    e.trial = parse_field<long>(fields[0], row, "trial");
    e.time = parse_field<double>(fields[1], row, "time");
    e.file = parse_field<int>(fields[2], row, "file_id") - 1;
    e.interarrival = parse_field<double>(fields[3], row, "interarrival");
    if (e.file < 0) throw ParseError(row, "file_id must be >= 1");
    if (!(e.interarrival > 0.0)) throw ParseError(row, "interarrival must be positive");
    if (!events.empty() && !(e.time > events.back().time)) {
      throw ParseError(row, "arrival times must increase");
    }
    events.push_back(e);
  }
  return events;
}

}  // namespace edgecache
