#pragma once

#include <string>
#include <vector>

namespace gradcalc {

// One verified (or failed) witness of an exactness claim, with a printable
// account of what was computed.
struct WitnessCheck {
    std::string name;
    bool ok = false;
    std::string detail;
};

enum class CertStatus { certified, inconclusive };

// Constructive record for a short exact sequence claim: the injectivity,
// kernel and surjectivity witnesses are all produced by explicit computation
// and re-running the producing routine re-verifies them. An inconclusive
// certificate means a precondition or a bounded search failed, not that the
// sequence is refuted; the note says which.
struct ExactnessCertificate {
    std::string sequence;
    CertStatus status = CertStatus::inconclusive;
    std::string note;
    std::vector<WitnessCheck> witnesses;

    bool ok() const;
    std::string to_string() const;
};

} // namespace gradcalc
