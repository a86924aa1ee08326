#pragma once

#include <json.hpp>

#include "stabrace/analyzer.hpp"
#include "stabrace/parser.hpp"
#include "stabrace/reporter.hpp"
#include "stabrace/validate.hpp"
#include "stabrace/witness.hpp"

namespace stabrace::io {

using nlohmann::json;

json loc_json(Loc l);
json to_json(const TwoThreadConfig& cfg);
json to_json(const WitnessTrace& w);
json to_json(const RaceReport& r, bool with_witness);
json to_json(const MethodName& m, const AbstractState& s);
json to_json(const ParseError& e);
json to_json(const std::vector<Violation>& vs);

/// Dotted rendering back to an expression: `arg1.f.g`.
Expr expr_from_string(const std::string& s);
/// Inverse of to_json(RaceReport) on the report fields; origins and the
/// witness are not restored.
RaceReport report_from_json(const json& j);

}  // namespace stabrace::io
