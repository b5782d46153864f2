#include "gradcalc/report.hpp"

#include <sstream>

#include "json.hpp"

namespace gradcalc {

std::string status_name(ReportStatus s) {
    switch (s) {
        case ReportStatus::pass: return "pass";
        case ReportStatus::fail: return "fail";
        case ReportStatus::inconclusive: return "inconclusive";
        case ReportStatus::error: return "error";
    }
    return "error";
}

std::string emit_report(const CheckReport& r, ReportFormat fmt) {
    if (fmt == ReportFormat::structured) {
        nlohmann::ordered_json j;
        j["command"] = r.command;
        j["status"] = status_name(r.status);
        j["witnesses"] = r.witnesses;
        j["timing_ms"] = r.timing_ms;
        j["seed"] = r.seed;
        return j.dump();
    }
    std::ostringstream os;
    os << r.command << ": " << status_name(r.status) << " [seed " << r.seed << "]";
    for (const auto& w : r.witnesses) os << "\n  " << w;
    return os.str();
}

int exit_code_for(const std::vector<CheckReport>& reports) {
    bool fail = false, inconclusive = false;
    for (const auto& r : reports) {
        if (r.status == ReportStatus::error) return 1;
        fail = fail || r.status == ReportStatus::fail;
        inconclusive = inconclusive || r.status == ReportStatus::inconclusive;
    }
    if (fail) return 2;
    if (inconclusive) return 3;
    return 0;
}

} // namespace gradcalc
