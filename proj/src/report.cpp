#include "capflow/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

namespace capflow {

namespace {

[[noreturn]] void schema_error(std::string_view what, const std::string& message) {
  fail(ErrorKind::InvalidArgument, std::string(what) + ": " + message);
}

const Json& member(const Json& doc, const char* key, std::string_view what) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    schema_error(what, std::string("missing key \"") + key + "\"");
  }
  return *it;
}

double number(const Json& value, std::string_view what) {
  if (!value.is_number()) {
    schema_error(what, "expected a number, found " + value.dump());
  }
  return value.get<double>();
}

std::size_t index_value(const Json& value, std::string_view what) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    schema_error(what, "expected a nonnegative integer, found " + value.dump());
  }
  return value.get<std::size_t>();
}

std::string expression(const Json& value, std::string_view what) {
  if (!value.is_string()) {
    schema_error(what, "expected an expression string, found " + value.dump());
  }
  return value.get<std::string>();
}

std::vector<double> number_array(const Json& value, std::string_view what) {
  if (!value.is_array()) {
    schema_error(what, "expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    out.push_back(number(v, what));
  }
  return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json ks_json(const KsResult& ks) {
  return {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"count", ks.count}};
}

template <class T>
std::vector<T> parse_list(std::string_view text, std::string_view what) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') {
      item.remove_prefix(1);
    }
    while (!item.empty() && item.back() == ' ') {
      item.remove_suffix(1);
    }
    T value{};
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc{} || end != item.data() + item.size()) {
      fail(ErrorKind::InvalidArgument, "invalid " + std::string(what) + " '" + std::string(item) + "' in list '" +
                                           std::string(text) + "'");
    }
    out.push_back(value);
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::IoError, "cannot open '" + path + "' for reading");
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::InvalidArgument, "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    fail(ErrorKind::IoError, "failed writing '" + path + "'");
  }
}

void check_keys(const Json& object, std::initializer_list<std::string_view> allowed, std::string_view what) {
  if (!object.is_object()) {
    schema_error(what, "expected a JSON object");
  }
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(what, "unknown key \"" + key + "\"");
    }
  }
}

RateChain chain_from_json(const Json& doc) {
  constexpr std::string_view what = "chain";
  check_keys(doc, {"n", "rates", "labels"}, what);
  const std::size_t n = index_value(member(doc, "n", what), what);
  const Json& rates = member(doc, "rates", what);
  if (!rates.is_array()) {
    schema_error(what, "\"rates\" must be an array of [from, to, rate]");
  }
  std::vector<RateEntry> entries;
  entries.reserve(rates.size());
  for (const auto& r : rates) {
    if (!r.is_array() || r.size() != 3) {
      schema_error(what, "rate entry " + r.dump() + " is not [from, to, rate]");
    }
    entries.push_back({index_value(r[0], what), index_value(r[1], what), number(r[2], what)});
  }
  std::vector<std::string> labels;
  if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) {
      schema_error(what, "\"labels\" must be an array of strings");
    }
    for (const auto& l : *it) {
      if (!l.is_string()) {
        schema_error(what, "label " + l.dump() + " is not a string");
      }
      labels.push_back(l.get<std::string>());
    }
  }
  return build_chain(n, entries, std::move(labels));
}

Json chain_to_json(const RateChain& chain) {
  Json rates = Json::array();
  for (const auto& e : chain.entries()) {
    rates.push_back({e.from, e.to, e.rate});
  }
  Json doc = {{"n", chain.size()}, {"rates", std::move(rates)}};
  if (!chain.labels().empty()) {
    doc["labels"] = chain.labels();
  }
  return doc;
}

Landscape landscape_from_json(const Json& doc) {
  constexpr std::string_view what = "landscape";
  check_keys(doc, {"d", "n", "epsilon", "V", "a", "c", "kappa"}, what);
  const std::size_t d = index_value(member(doc, "d", what), what);
  const std::size_t n = index_value(member(doc, "n", what), what);
  const double epsilon = number(member(doc, "epsilon", what), what);
  const std::string V = expression(member(doc, "V", what), what);

  auto expressions = [&](const char* key) {
    std::vector<std::string> out;
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
      return out;
    }
    if (!it->is_array()) {
      schema_error(what, std::string("\"") + key + "\" must be an array of expression strings or null");
    }
    for (const auto& e : *it) {
      out.push_back(expression(e, what));
    }
    return out;
  };
  std::vector<std::string> a = expressions("a");
  if (a.empty() && (!doc.contains("a") || doc["a"].is_null())) {
    a.assign(d, "1");
  }
  const std::vector<std::string> c = expressions("c");
  std::optional<double> kappa;
  if (auto it = doc.find("kappa"); it != doc.end() && !it->is_null()) {
    kappa = number(*it, what);
  }
  return make_landscape(d, n, epsilon, V, a, c, kappa);
}

Json landscape_to_json(const Landscape& ls) {
  Json a = Json::array();
  for (const auto& f : ls.a) {
    a.push_back(f.source());
  }
  Json c = nullptr;
  if (ls.has_drift()) {
    c = Json::array();
    for (const auto& f : ls.c) {
      c.push_back(f.source());
    }
  }
  return {{"d", ls.d},         {"n", ls.n}, {"epsilon", ls.epsilon}, {"V", ls.V.source()},
          {"a", std::move(a)}, {"c", c},    {"kappa", optional_number(ls.kappa)}};
}

StateSet parse_state_list(std::string_view text, std::size_t n) {
  auto values = parse_list<std::size_t>(text, "state");
  for (auto x : values) {
    if (x >= n) {
      fail(ErrorKind::InvalidArgument,
           "state " + std::to_string(x) + " is out of range for a chain with " + std::to_string(n) + " states");
    }
  }
  return StateSet(n, std::move(values));
}

std::vector<double> parse_double_list(std::string_view text) { return parse_list<double>(text, "number"); }

std::vector<long> parse_long_list(std::string_view text) { return parse_list<long>(text, "integer"); }

Function function_from_json(const Json& doc, std::size_t n) {
  Function f = number_array(doc, "function");
  if (f.size() != n) {
    fail(ErrorKind::InvalidArgument,
         "function has " + std::to_string(f.size()) + " values, the chain has " + std::to_string(n) + " states");
  }
  return f;
}

EdgeFlow flow_from_json(const Json& doc, const EdgeDecomposition& decomp) {
  constexpr std::string_view what = "flow";
  if (!doc.is_array()) {
    schema_error(what, "expected an array of [x, y, value]");
  }
  EdgeFlow flow = zero_flow(decomp);
  for (const auto& t : doc) {
    if (!t.is_array() || t.size() != 3) {
      schema_error(what, "entry " + t.dump() + " is not [x, y, value]");
    }
    const auto x = index_value(t[0], what);
    const auto y = index_value(t[1], what);
    const double v = number(t[2], what);
    auto e = decomp.find_edge(x, y);
    if (!e) {
      fail(ErrorKind::SupportMismatch, "flow entry on (" + std::to_string(x) + ", " + std::to_string(y) +
                                           ") which is not an edge of the chain");
    }
    flow.values[*e] += decomp.edges()[*e].x == x ? v : -v;
  }
  return flow;
}

Json flow_to_json(const EdgeFlow& flow, const EdgeDecomposition& decomp) {
  Json out = Json::array();
  const auto& edges = decomp.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out.push_back({edges[e].x, edges[e].y, flow.values[e]});
  }
  return out;
}

Json to_json(const CapacityReport& report) {
  return {{"cap", report.cap},
          {"cap_star", report.cap_star},
          {"cap_sym", report.cap_sym},
          {"cap_hitting", report.cap_hitting},
          {"sector_C0", optional_number(report.sector_C0)}};
}

CapacityReport capacity_report_from_json(const Json& doc) {
  constexpr std::string_view what = "capacity report";
  check_keys(doc, {"cap", "cap_star", "cap_sym", "cap_hitting", "sector_C0"}, what);
  CapacityReport r;
  r.cap = number(member(doc, "cap", what), what);
  r.cap_star = number(member(doc, "cap_star", what), what);
  r.cap_sym = number(member(doc, "cap_sym", what), what);
  r.cap_hitting = number(member(doc, "cap_hitting", what), what);
  if (const Json& c0 = member(doc, "sector_C0", what); !c0.is_null()) {
    r.sector_C0 = number(c0, what);
    r.sector_bound_ok = r.cap <= *r.sector_C0 * r.cap_sym * (1.0 + 1e-9);
  }
  return r;
}

Json to_json(const Certificate& cert) {
  return {{"kind", std::string(to_string(cert.kind))},
          {"value", cert.value},
          {"cap_exact", optional_number(cert.cap_exact)},
          {"feasible", cert.feasibility.feasible && cert.boundary_ok},
          {"div_residual", cert.feasibility.div_residual},
          {"flux", cert.feasibility.flux}};
}

Certificate certificate_from_json(const Json& doc) {
  constexpr std::string_view what = "certificate";
  check_keys(doc, {"kind", "value", "cap_exact", "feasible", "div_residual", "flux"}, what);
  Certificate c;
  const Json& kind = member(doc, "kind", what);
  if (kind == "dirichlet-upper") {
    c.kind = CertificateKind::DirichletUpper;
  } else if (kind == "thomson-reciprocal") {
    c.kind = CertificateKind::ThomsonReciprocal;
  } else {
    schema_error(what, "unknown kind " + kind.dump());
  }
  c.value = number(member(doc, "value", what), what);
  if (const Json& cap = member(doc, "cap_exact", what); !cap.is_null()) {
    c.cap_exact = number(cap, what);
  }
  const Json& feasible = member(doc, "feasible", what);
  if (!feasible.is_boolean()) {
    schema_error(what, "\"feasible\" must be a boolean");
  }
  c.feasibility.feasible = feasible.get<bool>();
  c.boundary_ok = c.feasibility.feasible;
  c.feasibility.div_residual = number(member(doc, "div_residual", what), what);
  c.feasibility.flux = number(member(doc, "flux", what), what);
  c.feasibility.gamma = c.kind == CertificateKind::DirichletUpper ? 0.0 : 1.0;
  return c;
}

Json to_json(const ReducedChain& reduced) {
  return {{"labels", reduced.size()}, {"lambda", reduced.lambda}, {"r", reduced.r}, {"theta", reduced.theta}};
}

ReducedChain reduced_chain_from_json(const Json& doc) {
  constexpr std::string_view what = "reduced chain";
  check_keys(doc, {"labels", "lambda", "r", "theta"}, what);
  ReducedChain out;
  const std::size_t n = index_value(member(doc, "labels", what), what);
  out.lambda = number_array(member(doc, "lambda", what), what);
  const Json& r = member(doc, "r", what);
  if (!r.is_array() || r.size() != n || out.lambda.size() != n) {
    schema_error(what, "\"lambda\" and \"r\" must have one entry per label");
  }
  for (const auto& row : r) {
    out.r.push_back(number_array(row, what));
    if (out.r.back().size() != n) {
      schema_error(what, "\"r\" must be a square matrix");
    }
  }
  out.theta = number(member(doc, "theta", what), what);
  return out;
}

Json to_json(const WellPartition& wells) {
  Json list = Json::array();
  for (std::size_t j = 0; j < wells.size(); ++j) {
    list.push_back({{"label", j + 1}, {"minimum", wells.minima[j]}, {"states", wells.wells[j].members()}});
  }
  return {{"kappa", wells.kappa}, {"wells", std::move(list)}, {"delta_size", wells.delta.size()}};
}

Json to_json(const FddReport& report) {
  Json entries = Json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"times", e.times},
                       {"tv_trace", e.tv_trace},
                       {"tv_projected", e.tv_projected},
                       {"mc_noise", e.mc_noise},
                       {"radius95", e.radius95}});
  }
  return {{"samples", report.samples}, {"start_label", report.start_label}, {"entries", std::move(entries)}};
}

Json to_json(const ExponentialityReport& report) {
  Json per_well = Json::array();
  for (const auto& ks : report.per_well) {
    per_well.push_back(ks_json(ks));
  }
  return {{"cutoff", report.cutoff}, {"pooled", ks_json(report.pooled)}, {"per_well", std::move(per_well)}};
}

Json to_json(const DiagnosticsReport& report) {
  Json wells = Json::array();
  for (const auto& w : report.wells) {
    wells.push_back({{"instant_jump", w.instant_jump},
                     {"instant_jump_stderr", w.instant_jump_stderr},
                     {"worst_start", w.worst_start},
                     {"visit_ratio", optional_number(w.visit_ratio)}});
  }
  return {{"r_small", report.r_small}, {"samples_per_start", report.samples_per_start}, {"wells", std::move(wells)}};
}

Json to_json(const SampleSummary& summary) {
  return {{"mean", summary.mean}, {"std_error", summary.std_error}, {"count", summary.count}};
}

Json to_json(const Environment& env) {
  return {{"seed", env.seed}, {"extent", env.extent}, {"X", env.X}, {"Y", env.Y}};
}

Environment environment_from_json(const Json& doc) {
  constexpr std::string_view what = "environment";
  check_keys(doc, {"seed", "extent", "X", "Y"}, what);
  Environment env;
  env.seed = member(doc, "seed", what).get<std::uint64_t>();
  env.extent = static_cast<long>(index_value(member(doc, "extent", what), what));
  const auto width = static_cast<std::size_t>(2 * env.extent + 1);
  for (auto [key, target] : {std::pair{"X", &env.X}, std::pair{"Y", &env.Y}}) {
    const Json& signs = member(doc, key, what);
    if (!signs.is_array() || signs.size() != width) {
      schema_error(what, std::string("\"") + key + "\" must hold 2 extent + 1 signs");
    }
    for (const auto& s : signs) {
      if (s != 1 && s != -1) {
        schema_error(what, "signs must be +1 or -1, found " + s.dump());
      }
      target->push_back(s.get<int>());
    }
  }
  return env;
}

Json to_json(std::span<const RecurrenceBand> bands) {
  Json out = Json::array();
  for (const auto& b : bands) {
    out.push_back({{"N", b.N},
                   {"mean", b.cap_times_logN.mean},
                   {"std_error", b.cap_times_logN.std_error},
                   {"count", b.cap_times_logN.count},
                   {"lower95", b.lower95},
                   {"upper95", b.upper95}});
  }
  return out;
}

std::string kramers_csv(const KramersSweep& sweep) {
  std::string out = "epsilon,exact,predicted,ratio\n";
  for (const auto& row : sweep.rows) {
    out += format_double(row.epsilon) + ',' + format_double(row.exact) + ',' + format_double(row.predicted) + ',' +
           format_double(row.ratio) + '\n';
  }
  return out;
}

std::string recurrence_csv(std::span<const RecurrenceRow> rows) {
  std::string out = "N,replica,cap,cap_times_logN,certificate\n";
  for (const auto& row : rows) {
    out += std::to_string(row.N) + ',' + std::to_string(row.replica) + ',' + format_double(row.cap) + ',' +
           format_double(row.cap_times_logN) + ',' + format_double(row.certificate) + '\n';
  }
  return out;
}

std::string path_csv(const SamplePath& path) {
  std::string out = "time,state\n";
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    out += format_double(path.times[k]) + ',' + std::to_string(path.states[k]) + '\n';
  }
  if (!path.states.empty()) {
    out += format_double(path.horizon) + ',' + std::to_string(path.states.back()) + '\n';
  }
  return out;
}

std::string sojourn_histogram_csv(std::span<const TracePath> paths, std::size_t wells, std::size_t bins) {
  require(bins >= 1, ErrorKind::InvalidArgument, "need at least one histogram bin");
  std::vector<std::vector<double>> sojourns(wells);
  for (const auto& p : paths) {
    for (std::size_t k = 0; k + 1 < p.trace_times.size(); ++k) {
      const int label = p.trace_labels[k];
      if (label >= 1 && static_cast<std::size_t>(label) <= wells) {
        sojourns[static_cast<std::size_t>(label - 1)].push_back(p.trace_times[k + 1] - p.trace_times[k]);
      }
    }
  }
  std::string out = "well,bin_lower,bin_upper,count\n";
  for (std::size_t j = 0; j < wells; ++j) {
    const auto& s = sojourns[j];
    const double top = s.empty() ? 1.0 : *std::max_element(s.begin(), s.end());
    const double width = top / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double t : s) {
      counts[std::min(bins - 1, static_cast<std::size_t>(t / width))]++;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      out += std::to_string(j + 1) + ',' + format_double(width * static_cast<double>(b)) + ',' +
             format_double(width * static_cast<double>(b + 1)) + ',' + std::to_string(counts[b]) + '\n';
    }
  }
  return out;
}

}  // namespace capflow
