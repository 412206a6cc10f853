#include "fairaudit/report.hpp"

#include <cmath>

#include "fairaudit/csv.hpp"
#include "fairaudit/version.hpp"

namespace fairaudit {

ordered_json json_real(double v) {
  if (!std::isfinite(v)) return nullptr;
  // Round through the fixed 6-decimal text form so JSON and CSV agree.
  return std::stod(format_fixed6(v));
}

ordered_json make_envelope(const ordered_json& config) {
  ordered_json doc;
  doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  doc["config"] = config;
  return doc;
}

void write_json_report(const std::string& path, const ordered_json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace fairaudit
