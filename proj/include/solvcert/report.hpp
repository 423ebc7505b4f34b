#pragma once

// JSON and CSV serialisation of computed results.

#include <ostream>
#include <string>

#include "json.hpp"
#include "solvcert/boundary.hpp"
#include "solvcert/cert.hpp"
#include "solvcert/screen.hpp"

namespace solvcert {

/// 12 significant digits; "inf" / "nan" spelled out.
std::string csv_number(double x);

nlohmann::json to_json(const CVector& v);
nlohmann::json to_json(const CertificateReport& r);
nlohmann::json to_json(const GainReport& g);
/// Counters plus per-point classification.
nlohmann::json to_json(const ScreenResult& r);
nlohmann::json to_json(const CoalescenceScan& s);
nlohmann::json to_json(const TimingTable& t);
nlohmann::json to_json(const BoundaryTrace& t);

/// One row per ray: theta,certified_radius,true_radius,covering_ratio.
/// Missing values are left empty.
void write_csv(std::ostream& os, const BoundaryTrace& t);

}  // namespace solvcert
