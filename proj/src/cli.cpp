#include "capflow/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <vector>

#include "CLI11.hpp"

#include "capflow/captheory.hpp"
#include "capflow/flows.hpp"
#include "capflow/landscape.hpp"
#include "capflow/metastable.hpp"
#include "capflow/parallel.hpp"
#include "capflow/recurrence.hpp"
#include "capflow/report.hpp"

namespace capflow {

namespace {

// CAPFLOW_LOG: unset, "0" or "quiet" = silent; "1" or "info"; "2" or "debug".
int log_level() {
  const char* env = std::getenv("CAPFLOW_LOG");
  if (env == nullptr) {
    return 0;
  }
  const std::string v(env);
  if (v == "debug" || v == "2") {
    return 2;
  }
  if (v == "info" || v == "1") {
    return 1;
  }
  return 0;
}

struct Options {
  std::string chain;
  std::string landscape;
  std::string a;
  std::string b;
  std::string ns;
  std::string epsilons;
  std::string times = "1";
  std::string kind;
  std::string walk = "symmetric";
  std::string function;
  std::string flow;
  std::string out;
  std::string bands;
  std::string environments;
  std::string sojourns;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double tol = 1e-9;
  std::optional<std::size_t> x0;
  double horizon = 0.0;
  double r_small = 0.05;
  std::optional<double> cutoff;
  std::optional<double> theta;
  std::size_t samples_per_start = 200;
  bool sector = false;
};

class Context {
 public:
  Context(const Options& opt, std::ostream& out, std::ostream& err) : opt_(opt), out_(out), err_(err) {}

  void log(int level, const std::string& message) const {
    if (level_ >= level) {
      err_ << "capflow: " << message << '\n';
    }
  }

  // Fails before any computation when the output directory does not exist.
  void check_output_path(const std::string& path) const {
    if (path.empty()) {
      return;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
      fail(ErrorKind::IoError, "output directory '" + parent.string() + "' for '" + path + "' does not exist");
    }
  }

  void emit(const std::string& content) const {
    if (opt_.out.empty()) {
      out_ << content;
    } else {
      write_text_file(opt_.out, content);
      log(1, "wrote " + opt_.out);
    }
  }

  void emit(const Json& doc) const { emit(doc.dump(2) + '\n'); }

  [[nodiscard]] unsigned threads() const { return resolve_threads(opt_.threads); }

 private:
  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  int level_ = log_level();
};

void run_capacity(const Options& opt, const Context& ctx) {
  const RateChain chain = chain_from_json(read_json_file(opt.chain));
  const StateSet A = parse_state_list(opt.a, chain.size());
  const StateSet B = parse_state_list(opt.b, chain.size());
  validate_pair(chain.size(), A, B);
  ctx.log(1, "chain with " + std::to_string(chain.size()) + " states");
  const EdgeDecomposition decomp = edge_decomposition(chain, stationary_measure(chain));
  std::optional<double> C0;
  if (opt.sector) {
    C0 = sector_constant(decomp);
  }
  ctx.emit(to_json(capacity(chain, decomp, A, B, C0)));
}

void run_certify(const Options& opt, const Context& ctx) {
  const RateChain chain = chain_from_json(read_json_file(opt.chain));
  const StateSet A = parse_state_list(opt.a, chain.size());
  const StateSet B = parse_state_list(opt.b, chain.size());
  validate_pair(chain.size(), A, B);
  require(opt.kind == "dirichlet" || opt.kind == "thomson", ErrorKind::InvalidArgument,
          "--kind must be 'dirichlet' or 'thomson', got '" + opt.kind + "'");
  require(opt.function.empty() == opt.flow.empty(), ErrorKind::InvalidArgument,
          "--function and --flow must be given together");
  const bool dirichlet = opt.kind == "dirichlet";

  std::optional<Json> function_doc;
  std::optional<Json> flow_doc;
  if (!opt.function.empty()) {
    function_doc = read_json_file(opt.function);
    flow_doc = read_json_file(opt.flow);
  }
  const EdgeDecomposition decomp = edge_decomposition(chain, stationary_measure(chain));
  Function f;
  EdgeFlow phi;
  if (function_doc) {
    f = function_from_json(*function_doc, chain.size());
    phi = flow_from_json(*flow_doc, decomp);
  } else {
    ctx.log(1, "no candidate given, certifying the optimal pair");
    OptimalPairs pairs = optimal_pairs(chain, decomp, A, B);
    f = dirichlet ? std::move(pairs.dirichlet_f) : std::move(pairs.thomson_f);
    phi = dirichlet ? std::move(pairs.dirichlet_phi) : std::move(pairs.thomson_phi);
  }
  Certificate cert = dirichlet ? dirichlet_certificate(decomp, A, B, f, phi, opt.tol)
                               : thomson_certificate(decomp, A, B, f, phi, opt.tol);
  cert.cap_exact = capacity_value(chain, decomp, A, B);
  ctx.emit(to_json(cert));
}

void run_kramers(const Options& opt, const Context& ctx) {
  const Landscape ls = landscape_from_json(read_json_file(opt.landscape));
  const std::vector<double> eps = opt.epsilons.empty() ? std::vector<double>{ls.epsilon}
                                                       : parse_double_list(opt.epsilons);
  const KramersSweep sweep = kramers_sweep(ls, eps, ctx.threads());
  std::ostringstream msg;
  msg << "barrier " << format_double(sweep.Lambda) << ", target well of " << sweep.target_size << " states";
  ctx.log(1, msg.str());
  ctx.emit(kramers_csv(sweep));
}

std::vector<std::vector<double>> parse_time_vectors(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto semi = std::min(text.find(';', start), text.size());
    out.push_back(parse_double_list(std::string_view(text).substr(start, semi - start)));
    start = semi + 1;
  }
  return out;
}

void run_metastable(const Options& opt, const Context& ctx) {
  ctx.check_output_path(opt.sojourns);
  const Landscape ls = landscape_from_json(read_json_file(opt.landscape));
  const auto time_vectors = parse_time_vectors(opt.times);
  const double horizon = opt.horizon > 0.0 ? opt.horizon : 4.0;
  const double cutoff = opt.cutoff.value_or(horizon / 2.0);
  const std::size_t replicas = opt.replicas > 0 ? opt.replicas : 1000;
  for (const auto& tv : time_vectors) {
    for (double t : tv) {
      require(t >= 0.0 && t <= horizon, ErrorKind::InvalidArgument, "--times must lie in [0, horizon]");
    }
  }

  const Discretization disc = discretize(ls);
  const EdgeDecomposition decomp = edge_decomposition(disc.chain, disc.mu);
  const WellPartition wells = build_wells(ls, disc.chain);
  ctx.log(1, std::to_string(wells.size()) + " wells, " + std::to_string(wells.delta.size()) + " states in Delta");
  const ReducedChain reduced = reduced_chain(disc.chain, decomp, wells, opt.theta, ctx.threads());

  const std::size_t x0 = opt.x0.value_or(wells.minima.front());
  require(x0 < disc.chain.size(), ErrorKind::InvalidArgument, "--x0 is out of range");
  require(wells.label[x0] != 0, ErrorKind::InvalidArgument, "--x0 must lie in a well");
  const auto paths =
      simulate_traces(disc.chain, wells, reduced.theta, x0, horizon, replicas, opt.seed, ctx.threads());
  ctx.log(1, "simulated " + std::to_string(paths.size()) + " trace paths");

  Json doc;
  doc["landscape"] = landscape_to_json(ls);
  doc["wells"] = to_json(wells);
  doc["reduced"] = to_json(reduced);
  doc["fdd"] = to_json(fdd_compare(paths, reduced, time_vectors, wells.label[x0]));
  doc["exponentiality"] = to_json(sojourn_exponentiality(paths, reduced, horizon, cutoff));
  doc["delta_occupation"] = to_json(delta_occupation(paths));
  doc["diagnostics"] = to_json(diagnostics(disc.chain, decomp, wells, reduced.theta, opt.r_small, opt.seed,
                                           opt.samples_per_start, {}, ctx.threads()));
  if (!opt.sojourns.empty()) {
    write_text_file(opt.sojourns, sojourn_histogram_csv(paths, wells.size()));
  }
  ctx.emit(doc);
}

void run_recurrence(const Options& opt, const Context& ctx) {
  ctx.check_output_path(opt.bands);
  ctx.check_output_path(opt.environments);
  const WalkKind kind = parse_walk_kind(opt.walk);
  const std::vector<long> Ns = parse_long_list(opt.ns);
  const std::size_t replicas = opt.replicas > 0 ? opt.replicas : 20;
  const auto rows = recurrence_sweep(kind, Ns, replicas, opt.seed, ctx.threads());
  if (!opt.bands.empty()) {
    write_text_file(opt.bands, to_json(recurrence_bands(rows)).dump(2) + '\n');
  }
  if (!opt.environments.empty() && kind == WalkKind::Environment) {
    Json envs = Json::array();
    for (std::size_t r = 0; r < replicas; ++r) {
      envs.push_back(to_json(make_environment(opt.seed + r, Ns.back())));
    }
    write_text_file(opt.environments, envs.dump(2) + '\n');
  }
  ctx.emit(recurrence_csv(rows));
}

void run_simulate(const Options& opt, const Context& ctx) {
  const RateChain chain = chain_from_json(read_json_file(opt.chain));
  require(opt.x0 && *opt.x0 < chain.size(), ErrorKind::InvalidArgument, "--x0 must be a state of the chain");
  require(opt.horizon > 0.0, ErrorKind::InvalidArgument, "--horizon must be positive");
  ctx.emit(path_csv(simulate(chain, *opt.x0, opt.horizon, opt.seed)));
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Capacities, variational certificates and metastability of finite Markov chains", "capflow"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Write the report here instead of standard output");
    sub->add_option("--threads", opt.threads, "Worker threads, 0 = all hardware threads")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Base seed")->capture_default_str();
  };
  auto chain_pair = [&](CLI::App* sub) {
    sub->add_option("--chain", opt.chain, "Chain file (JSON)")->required();
    sub->add_option("--a", opt.a, "Set A, comma-separated states")->required();
    sub->add_option("--b", opt.b, "Set B, comma-separated states")->required();
  };

  auto* capacity_cmd = app.add_subcommand("capacity", "Capacity report of a pair of sets");
  chain_pair(capacity_cmd);
  capacity_cmd->add_flag("--sector", opt.sector, "Also compute the sector constant C0");
  common(capacity_cmd);

  auto* certify_cmd = app.add_subcommand("certify", "Evaluate a Dirichlet or Thomson certificate");
  chain_pair(certify_cmd);
  opt.kind = "dirichlet";
  certify_cmd->add_option("--kind", opt.kind, "dirichlet or thomson")->capture_default_str();
  certify_cmd->add_option("--function", opt.function, "Test function (JSON array); default: the optimal pair");
  certify_cmd->add_option("--flow", opt.flow, "Test flow (JSON array of [x, y, value])");
  certify_cmd->add_option("--tol", opt.tol, "Feasibility tolerance")->capture_default_str();
  common(certify_cmd);

  auto* kramers_cmd = app.add_subcommand("kramers", "Exact versus Eyring-Kramers transition times");
  kramers_cmd->add_option("--landscape", opt.landscape, "Landscape config (JSON)")->required();
  kramers_cmd->add_option("--epsilons", opt.epsilons, "Comma-separated temperatures");
  common(kramers_cmd);

  auto* meta_cmd = app.add_subcommand("metastable", "Reduced chain, diagnostics and FDD comparison");
  meta_cmd->add_option("--landscape", opt.landscape, "Landscape config (JSON)")->required();
  meta_cmd->add_option("--replicas", opt.replicas, "Trace paths (default 1000)");
  meta_cmd->add_option("--x0", opt.x0, "Start state (default: minimum of well 1)");
  meta_cmd->add_option("--horizon", opt.horizon, "Trace horizon in units of theta (default 4)");
  meta_cmd->add_option("--times", opt.times, "Time vectors: comma-separated times, ';' between vectors")
      ->capture_default_str();
  meta_cmd->add_option("--cutoff", opt.cutoff, "Sojourn cutoff (default horizon / 2)");
  meta_cmd->add_option("--theta", opt.theta, "Time scale (default from the capacities)");
  meta_cmd->add_option("--r-small", opt.r_small, "Window for the instant-jump diagnostic")->capture_default_str();
  meta_cmd->add_option("--samples-per-start", opt.samples_per_start, "Diagnostic paths per start")
      ->capture_default_str();
  meta_cmd->add_option("--sojourns", opt.sojourns, "Write sojourn histograms (CSV) here");
  common(meta_cmd);

  auto* rec_cmd = app.add_subcommand("recurrence", "Escape capacities of 2D walks");
  rec_cmd->add_option("--kind", opt.walk, "symmetric or environment")->capture_default_str();
  rec_cmd->add_option("--ns", opt.ns, "Comma-separated box radii")->required();
  rec_cmd->add_option("--replicas", opt.replicas, "Environments (default 20)");
  rec_cmd->add_option("--bands", opt.bands, "Write confidence bands (JSON) here");
  rec_cmd->add_option("--environments", opt.environments, "Write the environments (JSON) here");
  common(rec_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Sample one path of a chain");
  sim_cmd->add_option("--chain", opt.chain, "Chain file (JSON)")->required();
  sim_cmd->add_option("--x0", opt.x0, "Start state")->required();
  sim_cmd->add_option("--horizon", opt.horizon, "Time horizon")->required();
  common(sim_cmd);

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("capflow");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) {
    argv.push_back(s.data());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << to_string(ErrorKind::InvalidArgument) << ": " << e.what() << '\n';
    return 1;
  }

  const Context ctx(opt, out, err);
  try {
    ctx.check_output_path(opt.out);
    if (capacity_cmd->parsed()) {
      run_capacity(opt, ctx);
    } else if (certify_cmd->parsed()) {
      run_certify(opt, ctx);
    } else if (kramers_cmd->parsed()) {
      run_kramers(opt, ctx);
    } else if (meta_cmd->parsed()) {
      run_metastable(opt, ctx);
    } else if (rec_cmd->parsed()) {
      run_recurrence(opt, ctx);
    } else {
      run_simulate(opt, ctx);
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::SolverFailure ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << to_string(ErrorKind::SolverFailure) << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace capflow
