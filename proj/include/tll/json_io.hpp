#pragma once

// JSON (de)serialization for the library types plus CSV output for sampled
// fields.  Schemas are documented in docs/formats.md.  All writers are
// deterministic: object keys are emitted in sorted order and numbers use the
// shortest round-trip representation, so identical inputs produce
// byte-identical reports.

#include <iosfwd>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "tll/config.hpp"
#include "tll/contact_s3.hpp"
#include "tll/jet.hpp"
#include "tll/laurent.hpp"
#include "tll/log_trace.hpp"
#include "tll/phase_kernel.hpp"
#include "tll/projector.hpp"

namespace tll {

using Json = nlohmann::json;

// --- config ------------------------------------------------------------------
Json to_json(const Config& c);
Config config_from_json(const Json& j, Config base = Config{});

// --- core algebra types --------------------------------------------------------
Json to_json(const Jet& jet);
Jet jet_from_json(const Json& j);

Json to_json(const LaurentSymbol& s);
LaurentSymbol laurent_from_json(const Json& j);

Json to_json(const PhaseKernel& k);
PhaseKernel kernel_from_json(const Json& j);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json to_json(const SymbolOnC& s);
SymbolOnC symbol_from_json(const Json& j);

Json to_json(const EpsilonExpansion& e);
Json to_json(const HolonomicSingularity& s);

// --- contact geometry ---------------------------------------------------------
// Descriptor forms: {"family":"standard"}, {"family":"standard_opposite"},
// {"family":"lambda_n","n":3}, {"family":"scaled","base":{...},"kappa":2.0},
// {"family":"samples","phi":[...],"a":[...],"b":[...]}.
Json contact_descriptor(const ContactFormS3& form);
ContactFormS3 contact_from_json(const Json& j);

Json to_json(const HopfReport& r);
Json to_json(const LinkingReport& r);
Json to_json(const PhaseReport& r);
Json to_json(const IdempotenceReport& r);
Json to_json(const InvarianceReport& r);
Json to_json(const VanishingChainReport& r);
Json to_json(const PeriodicDensityReport& r);
Json to_json(const HomotopyReport& r);

// --- sampled fields -------------------------------------------------------------
// CSV with header "phi,theta1,theta2,value", one row per quadrature node.
void write_field_csv(std::ostream& out, const S3Quadrature& q, const GridField& field);
GridField read_field_csv(std::istream& in, const S3Quadrature& q);

// --- report envelope -------------------------------------------------------------
// Wraps a payload as {"config": ..., "kind": ..., "report": ...} so every
// emitted report carries its provenance, then dumps with 2-space indentation
// and a trailing newline.
std::string dump_report(const std::string& kind, const Json& payload, const Config& c);

}  // namespace tll
