#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "capflow/captheory.hpp"
#include "capflow/chain.hpp"
#include "capflow/flows.hpp"
#include "capflow/landscape.hpp"
#include "capflow/metastable.hpp"
#include "capflow/recurrence.hpp"

namespace capflow {

using Json = nlohmann::json;

/// printf "%.17g": enough digits to round-trip every double.
std::string format_double(double value);

/// Throws IoError naming the path when the file cannot be read, and
/// InvalidArgument when it is not valid JSON.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Throws InvalidArgument unless `object` is a JSON object whose keys are
/// all in `allowed`.
void check_keys(const Json& object, std::initializer_list<std::string_view> allowed, std::string_view what);

/// {"n": int, "rates": [[from, to, rate], ...], "labels": [...]}; labels optional.
RateChain chain_from_json(const Json& doc);
Json chain_to_json(const RateChain& chain);

/// {"d", "n", "epsilon", "V": "expr", "a": ["expr", ...], "c": [...] | null, "kappa": number | null}.
/// "a" defaults to "1" on every axis; "c" and "kappa" may be omitted.
Landscape landscape_from_json(const Json& doc);
Json landscape_to_json(const Landscape& ls);

/// "0,3,7" -> {0, 3, 7} within {0, ..., n-1}.
StateSet parse_state_list(std::string_view text, std::size_t n);
std::vector<double> parse_double_list(std::string_view text);
std::vector<long> parse_long_list(std::string_view text);

/// A JSON array of n numbers.
Function function_from_json(const Json& doc, std::size_t n);
/// A JSON array of [x, y, value] triples, value being the flow from x to y.
/// Edges not listed carry zero flow; listing a non-edge is a SupportMismatch.
EdgeFlow flow_from_json(const Json& doc, const EdgeDecomposition& decomp);
Json flow_to_json(const EdgeFlow& flow, const EdgeDecomposition& decomp);

Json to_json(const CapacityReport& report);
CapacityReport capacity_report_from_json(const Json& doc);

Json to_json(const Certificate& cert);
Certificate certificate_from_json(const Json& doc);

Json to_json(const ReducedChain& reduced);
ReducedChain reduced_chain_from_json(const Json& doc);

Json to_json(const WellPartition& wells);
Json to_json(const FddReport& report);
Json to_json(const ExponentialityReport& report);
Json to_json(const DiagnosticsReport& report);
Json to_json(const SampleSummary& summary);
Json to_json(const Environment& env);
Environment environment_from_json(const Json& doc);
Json to_json(std::span<const RecurrenceBand> bands);

/// epsilon,exact,predicted,ratio
std::string kramers_csv(const KramersSweep& sweep);
/// N,replica,cap,cap_times_logN,certificate
std::string recurrence_csv(std::span<const RecurrenceRow> rows);
/// time,state; the last row repeats the final state at the horizon.
std::string path_csv(const SamplePath& path);
/// well,bin_lower,bin_upper,count over the completed sojourns of the trace
/// processes, `bins` equal bins per well between 0 and the longest sojourn.
std::string sojourn_histogram_csv(std::span<const TracePath> paths, std::size_t wells, std::size_t bins = 20);

}  // namespace capflow
