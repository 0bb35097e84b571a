#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "hpcwb/partest/runner.hpp"

namespace hpcwb::partest {

/// One line per case, failure messages indented beneath, then the counts.
inline std::string render_text(const SuiteResult& res) {
  std::ostringstream os;
  os << "plan " << to_string(res.plan.strategy) << ": " << res.outcomes.size() << " cases\n";
  for (const auto& o : res.outcomes) {
    os << std::left << std::setw(8) << to_string(o.verdict) << o.name << "  (" << std::fixed << std::setprecision(3)
       << o.duration_seconds << " s)\n";
    if (o.verdict != Verdict::pass)
      for (const auto& m : o.messages) os << "        " << m << '\n';
  }
  const auto& s = res.summary;
  os << "summary: " << s.pass << " passed, " << s.fail << " failed, " << s.error << " errors, " << s.skipped
     << " skipped\n";
  return os.str();
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // control characters other than tab/newline are not allowed in XML 1.0
        if (static_cast<unsigned char>(c) < 0x20 && c != '\n' && c != '\t' && c != '\r')
          out += ' ';
        else
          out += c;
    }
  }
  return out;
}

}  // namespace detail

/// JUnit-style XML: one testsuite for the plan, one testcase per case. Failed
/// and erroring cases carry their per-rank messages.
inline std::string render_junit(const SuiteResult& res, std::string_view suite_name = "hpcwb") {
  using detail::xml_escape;
  double total_time = 0.0;
  for (const auto& o : res.outcomes) total_time += o.duration_seconds;
  const auto& s = res.summary;
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<testsuites tests=\"" << s.total() << "\" failures=\"" << s.fail << "\" errors=\"" << s.error
     << "\" skipped=\"" << s.skipped << "\" time=\"" << total_time << "\">\n";
  os << "  <testsuite name=\"" << xml_escape(suite_name) << "." << to_string(res.plan.strategy) << "\" tests=\""
     << s.total() << "\" failures=\"" << s.fail << "\" errors=\"" << s.error << "\" skipped=\"" << s.skipped
     << "\" time=\"" << total_time << "\">\n";
  for (const auto& o : res.outcomes) {
    os << "    <testcase classname=\"" << xml_escape(suite_name) << "\" name=\"" << xml_escape(o.name) << "\" time=\""
       << o.duration_seconds << "\"";
    if (o.verdict == Verdict::pass) {
      os << "/>\n";
      continue;
    }
    os << ">\n";
    std::string body;
    for (const auto& m : o.messages) body += m + "\n";
    const std::string first = o.messages.empty() ? std::string(to_string(o.verdict)) : o.messages.front();
    const char* tag = o.verdict == Verdict::fail ? "failure" : o.verdict == Verdict::error ? "error" : "skipped";
    os << "      <" << tag << " message=\"" << xml_escape(first) << "\">" << xml_escape(body) << "</" << tag << ">\n";
    if (o.verdict != Verdict::skipped) {
      os << "      <system-out>";
      for (const auto& r : o.per_rank) {
        os << xml_escape("rank " + std::to_string(r.rank) + ": " + std::string(to_string(r.verdict))) << '\n';
        for (const auto& m : r.messages) os << "  " << xml_escape(m) << '\n';
      }
      os << "</system-out>\n";
    }
    os << "    </testcase>\n";
  }
  os << "  </testsuite>\n</testsuites>\n";
  return os.str();
}

}  // namespace hpcwb::partest
