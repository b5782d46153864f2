#include "gradcalc/certificate.hpp"

namespace gradcalc {

bool ExactnessCertificate::ok() const {
    if (status != CertStatus::certified) return false;
    for (const auto& w : witnesses)
        if (!w.ok) return false;
    return !witnesses.empty();
}

std::string ExactnessCertificate::to_string() const {
    std::string out = "sequence: " + sequence + "\n";
    out += "status: ";
    out += status == CertStatus::certified ? "certified" : "inconclusive";
    out += "\n";
    if (!note.empty()) out += "note: " + note + "\n";
    for (const auto& w : witnesses) {
        out += w.name + ": ";
        out += w.ok ? "verified" : "FAILED";
        if (!w.detail.empty()) out += " (" + w.detail + ")";
        out += "\n";
    }
    return out;
}

} // namespace gradcalc
