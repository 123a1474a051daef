// Command-line driver: gap sweeps, comparison certificates, particle-system
// gap tables, return-probability runs and the acceptance suite, with
// reproducible seeds and CSV/JSON output.
//
// Exit codes: 0 success, 2 invalid configuration, 3 computation error,
// 4 acceptance failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stablewalk/stablewalk.hpp"

namespace sw = stablewalk;

namespace {

constexpr const char* kToolVersion = "stablewalk 0.1.0";

// Wall-clock timings and the config echo go to a side manifest so that the
// result files stay byte-identical across runs of the same config and seed.
struct RunManifest {
  std::string config;
  std::uint64_t seed = sw::kDefaultSeed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& out_path) const {
    if (out_path.empty()) return;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream os(out_path + ".manifest.json");
    if (!os) return;
    os << "{\n"
       << "  \"tool\": \"" << kToolVersion << "\",\n"
       << "  \"config\": \"" << sw::detail::json_escape(config) << "\",\n"
       << "  \"config_hash\": \"" << sw::hex64(sw::fnv1a64(config)) << "\",\n"
       << "  \"seed\": " << seed << ",\n"
       << "  \"seconds\": " << sw::format_double(secs) << "\n"
       << "}\n";
  }
};

struct RateSpec {
  std::string kind = "power";
  double alpha = 1.0;
  std::string table_path;
  std::string tail = "undeclared";  // zero | power:<coeff> | undeclared
  std::int64_t anchor_count = 70000;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--rate", kind, "rate kind: power | q0 | lacunary | table")
        ->check(CLI::IsMember({"power", "q0", "lacunary", "table"}));
    cmd->add_option("--alpha", alpha, "stability index in (0,2)");
    cmd->add_option("--table", table_path, "two-column rate table file (z p)");
    cmd->add_option("--tail", tail, "table tail rule: zero | power:<coeff> | undeclared");
    cmd->add_option("--anchors", anchor_count, "lacunary anchor count (z_l = l^2)");
  }

  sw::TransitionRate build() const {
    if (kind == "power") return sw::TransitionRate::power_law(alpha);
    if (kind == "q0") return sw::TransitionRate::q_zero(alpha);
    if (kind == "lacunary") return sw::TransitionRate::lacunary_squares(alpha, anchor_count);
    if (table_path.empty())
      throw sw::parameter_error("table rate needs --table FILE");
    std::ifstream in(table_path);
    if (!in) throw sw::parse_error("cannot open rate table: " + table_path);
    sw::TableTail rule = sw::TableTail::undeclared;
    double coeff = 0.0;
    if (tail == "zero") {
      rule = sw::TableTail::zero;
    } else if (tail.rfind("power:", 0) == 0) {
      rule = sw::TableTail::power_law;
      coeff = std::stod(tail.substr(6));
    } else if (tail != "undeclared") {
      throw sw::parameter_error("unknown tail rule: " + tail);
    }
    return sw::TransitionRate::load_table(in, alpha, rule, coeff);
  }

  std::string echo() const {
    std::ostringstream os;
    os << "rate=" << kind << " alpha=" << sw::format_double(alpha);
    if (!table_path.empty()) os << " table=" << table_path << " tail=" << tail;
    return os.str();
  }
};

std::vector<int> parse_range(const std::string& text) {
  auto to_int = [&text](const std::string& tok) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw sw::parameter_error("bad range token in '" + text + "'");
      return v;
    } catch (const std::exception&) {
      throw sw::parameter_error("cannot parse range '" + text + "' (expected a..b)");
    }
  };
  const auto dots = text.find("..");
  std::vector<int> out;
  if (dots == std::string::npos) {
    out.push_back(to_int(text));
    return out;
  }
  const int lo = to_int(text.substr(0, dots));
  const int hi = to_int(text.substr(dots + 2));
  if (hi < lo) throw sw::parameter_error("empty range: " + text);
  for (int v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

struct OutputSink {
  std::string path;
  std::string format = "csv";

  void add_options(CLI::App* cmd) {
    cmd->add_option("--out", path, "output file (stdout when omitted)");
    cmd->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  }

  void write(const sw::Table& table, const sw::ManifestHeader& header) const {
    if (path.empty()) {
      emit(std::cout, table, header);
      return;
    }
    std::ofstream os(path);
    if (!os) throw sw::parse_error("cannot open output file: " + path);
    emit(os, table, header);
  }

private:
  void emit(std::ostream& os, const sw::Table& t, const sw::ManifestHeader& h) const {
    if (format == "json")
      sw::write_json(os, t, h);
    else
      sw::write_csv(os, t, h);
  }
};

sw::ManifestHeader make_header(const std::string& config_echo, std::uint64_t seed) {
  return {{"tool", kToolVersion},
          {"config", config_echo},
          {"config_hash", sw::hex64(sw::fnv1a64(config_echo))},
          {"seed", std::to_string(seed)}};
}

int run_gap_sweep(const RateSpec& rate, const std::string& n_range, const OutputSink& sink,
                  const std::string& method) {
  const auto ns = parse_range(n_range);
  sw::GapOptions opt;
  if (method == "dense") opt.method = sw::GapMethod::dense;
  if (method == "iterative") opt.method = sw::GapMethod::iterative;
  const auto p = rate.build();
  const auto sweep = sw::gap_scaling_sweep(p, ns, opt);
  sw::Table t;
  t.columns = {"n", "states", "gap", "gap_times_scale", "method", "residual"};
  for (const auto& row : sweep.rows) {
    if (!row.error.empty()) continue;
    t.add_row({row.n, row.states, row.gap, row.gap_times_scale, row.method, row.residual});
  }
  const std::string echo = "gap-sweep " + rate.echo() + " n=" + n_range + " method=" + method;
  RunManifest manifest{echo, sw::kDefaultSeed};
  auto header = make_header(echo, sw::kDefaultSeed);
  header.emplace_back("slope", sw::format_double(sweep.slope));
  header.emplace_back("scaled_min", sw::format_double(sweep.scaled_min));
  header.emplace_back("scaled_max", sw::format_double(sweep.scaled_max));
  for (const auto& row : sweep.rows)
    if (!row.error.empty())
      header.emplace_back("failed_n_" + std::to_string(row.n), row.error);
  sink.write(t, header);
  manifest.write(sink.path);
  std::cerr << "slope " << sweep.slope << " over " << sweep.rows.size() << " boxes, "
            << sweep.failures << " failures\n";
  return sweep.failures == 0 ? 0 : 3;
}

int run_multiscale(double K, double alpha, std::optional<double> b, const OutputSink& sink) {
  const auto params = b ? sw::compute_constants(*b, alpha, K) : sw::select_b(K, alpha);
  sw::Table t;
  t.columns = {"b", "a", "gamma1", "gamma2", "l1", "l2", "k0", "theta", "feasible"};
  t.add_row({params.b, params.a, params.gamma1, params.gamma2, params.l1, params.l2, params.k0,
             params.theta, params.theta < 1.0 ? "yes" : "no"});
  const std::string echo = "multiscale K=" + sw::format_double(K) +
                           " alpha=" + sw::format_double(alpha) +
                           (b ? " b=" + sw::format_double(*b) : " b=auto");
  RunManifest manifest{echo, sw::kDefaultSeed};
  sink.write(t, make_header(echo, sw::kDefaultSeed));
  manifest.write(sink.path);
  return 0;
}

int run_compare(const RateSpec& rate, double K, std::int64_t n_max, const OutputSink& sink) {
  const auto p = rate.build();
  auto params = sw::select_b(K, rate.alpha);
  sw::burn_in_index(params, p, params.horizon());
  const auto cert = sw::certificate_kappa(params, p);

  std::vector<sw::NamedPhi> family;
  family.push_back({"1", sw::SubpolynomialFunction::from_function(
                             [](std::size_t) { return 1.0; }, std::size_t(n_max), 0.5)});
  family.push_back({"x", sw::SubpolynomialFunction::from_function(
                             [](std::size_t x) { return double(x); }, std::size_t(n_max), 1.0)});
  family.push_back({"x^2", sw::SubpolynomialFunction::from_function(
                               [](std::size_t x) { return double(x) * double(x); },
                               std::size_t(n_max), 2.0)});
  const auto rep = sw::verify_comparison(p, rate.alpha, family, n_max, cert.kappa);

  sw::Table t;
  t.columns = {"phi", "sup_ratio", "argmax_n", "kappa", "within_kappa"};
  for (const auto& pr : rep.per_phi)
    t.add_row({pr.name, pr.sup_ratio, pr.argmax_n, cert.kappa,
               pr.sup_ratio <= cert.kappa ? "yes" : "no"});
  const std::string echo = "compare " + rate.echo() + " K=" + sw::format_double(K) +
                           " n_max=" + std::to_string(n_max);
  RunManifest manifest{echo, sw::kDefaultSeed};
  auto header = make_header(echo, sw::kDefaultSeed);
  header.emplace_back("b", sw::format_double(params.b));
  header.emplace_back("theta", sw::format_double(params.theta));
  header.emplace_back("m", std::to_string(params.m));
  header.emplace_back("kappa", sw::format_double(cert.kappa));
  header.emplace_back("c1", sw::format_double(cert.c1));
  header.emplace_back("rescale", sw::format_double(cert.rescale));
  header.emplace_back("verified_up_to", std::to_string(cert.verified_up_to));
  sink.write(t, header);
  manifest.write(sink.path);
  std::cerr << "kappa " << cert.kappa << ", family sup " << rep.family_sup << ", within kappa: "
            << (rep.within_kappa ? "yes" : "no") << "\n";
  return 0;
}

int run_exclusion(const RateSpec& rate, const std::string& n_range, const std::string& ell_range,
                  const OutputSink& sink) {
  const auto p = rate.build();
  sw::Table t;
  t.columns = {"n", "ell", "states", "gap", "normalized_gap", "method", "residual"};
  for (int n : parse_range(n_range))
    for (int ell : parse_range(ell_range)) {
      if (ell < 0 || ell > 2 * n + 1) continue;
      const auto e = sw::enumerate_exclusion(n, ell);
      if (e.count < 2) continue;
      const auto rep = sw::spectral_gap(sw::build_exclusion_generator(p, e));
      t.add_row({n, ell, e.count, rep.gap,
                 rep.gap * std::pow(double(2 * n + 1), rate.alpha), rep.method, rep.residual});
    }
  const std::string echo = "exclusion " + rate.echo() + " n=" + n_range + " ell=" + ell_range;
  RunManifest manifest{echo, sw::kDefaultSeed};
  sink.write(t, make_header(echo, sw::kDefaultSeed));
  manifest.write(sink.path);
  return 0;
}

int run_zero_range(const RateSpec& rate, const std::string& g_kind, const std::string& n_range,
                   const std::string& ell_range, const OutputSink& sink) {
  const auto p = rate.build();
  sw::InteractionRate g = g_kind == "indicator" ? sw::InteractionRate::indicator()
                                                : sw::InteractionRate::linear();
  const auto rep = sw::theorem3_check(p, g, parse_range(n_range), parse_range(ell_range));
  sw::Table t;
  t.columns = {"n", "ell", "states", "gap", "normalized_gap", "method", "residual"};
  for (const auto& row : rep.rows)
    t.add_row({row.n, row.ell, row.states, row.gap, row.normalized_gap, row.method, row.residual});
  const std::string echo =
      "zero-range " + rate.echo() + " g=" + g_kind + " n=" + n_range + " ell=" + ell_range;
  RunManifest manifest{echo, sw::kDefaultSeed};
  auto header = make_header(echo, sw::kDefaultSeed);
  header.emplace_back("case", rep.classification.case_i ? "i" : "ii");
  header.emplace_back("normalized_min", sw::format_double(rep.normalized_min));
  sink.write(t, header);
  manifest.write(sink.path);
  return 0;
}

int run_return_prob(const RateSpec& rate, double t_min, double t_max, std::size_t t_points,
                    std::int64_t l_box, std::size_t samples, std::uint64_t seed,
                    double leak_budget, const OutputSink& sink) {
  if (!(t_min > 0.0) || t_max < t_min || t_points < 2)
    throw sw::parameter_error("return-prob: need 0 < t-min <= t-max and t-points >= 2");
  const auto p = rate.build();
  std::vector<double> times(t_points);
  for (std::size_t i = 0; i < t_points; ++i)
    times[i] = t_min * std::pow(t_max / t_min, double(i) / double(t_points - 1));
  sw::EvolveOptions eo;
  eo.leak_budget = leak_budget;
  const auto states = sw::evolve_semigroup(p, times, l_box, eo);
  const auto mc = sw::mc_return_probability(p, times, samples, seed);
  sw::Table t;
  t.columns = {"t", "exact_value", "mc_value", "mc_stderr", "leaked_mass"};
  for (std::size_t i = 0; i < times.size(); ++i)
    t.add_row({times[i], states[i].at(0), mc[i].estimate, mc[i].std_error,
               states[i].leaked_mass});
  const std::string echo = "return-prob " + rate.echo() + " t=" + sw::format_double(t_min) +
                           ".." + sw::format_double(t_max) + "x" + std::to_string(t_points) +
                           " L=" + std::to_string(l_box) + " samples=" + std::to_string(samples);
  RunManifest manifest{echo, seed};
  auto header = make_header(echo, seed);
  // decay fit over the asymptotic part of the grid (t >= 10 rate units)
  const double fit_lo = std::max(10.0, t_min);
  if (t_max > fit_lo) {
    std::vector<double> exact;
    for (const auto& st : states) exact.push_back(st.at(0));
    std::size_t inside = 0;
    for (double tv : times)
      if (tv >= fit_lo) ++inside;
    if (inside >= 3) {
      const auto fit = sw::decay_exponent_fit(times, exact, fit_lo, t_max);
      header.emplace_back("fit_slope", sw::format_double(fit.slope));
      header.emplace_back("fit_window", sw::format_double(fit_lo) + ".." + sw::format_double(t_max));
    }
  }
  sink.write(t, header);
  manifest.write(sink.path);
  return 0;
}

int run_verify_all(std::uint64_t seed) {
  sw::AcceptanceConfig cfg;
  cfg.seed = seed;
  const auto results = sw::run_acceptance(cfg);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  ("
              << sw::format_double(r.seconds) << " s)\n";
    for (const auto& line : r.detail) std::cout << "      " << line << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "all criteria passed" : "ACCEPTANCE FAILURES PRESENT") << "\n";
  return all ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral gaps and return probabilities of heavy-tailed random walks"};
  app.require_subcommand(1);

  RateSpec rate;
  OutputSink sink;
  std::string n_range = "4..64", ell_range = "1..4", method = "auto", g_kind = "linear";
  double K = 2.0;
  std::optional<double> b_fixed;
  std::int64_t n_max = 10000, l_box = 2048;
  double t_min = 10.0, t_max = 100.0, leak_budget = 1e-6;
  std::size_t t_points = 8, samples = 100000;
  std::uint64_t seed = sw::kDefaultSeed;

  auto* sweep = app.add_subcommand("gap-sweep", "walk gap over a range of boxes");
  rate.add_options(sweep);
  sink.add_options(sweep);
  sweep->add_option("--n", n_range, "box range a..b (inclusive)");
  sweep->add_option("--method", method, "auto | dense | iterative")
      ->check(CLI::IsMember({"auto", "dense", "iterative"}));

  auto* multi = app.add_subcommand("multiscale", "comparison-principle constants");
  sink.add_options(multi);
  multi->add_option("--K", K, "subpolynomiality constant");
  multi->add_option("--alpha", rate.alpha, "stability index in (0,2)");
  double b_value = 0.0;
  auto* bopt = multi->add_option("--b", b_value, "fixed scale ratio (default: dyadic search)");

  auto* comp = app.add_subcommand("compare", "certificate kappa and empirical ratios");
  rate.add_options(comp);
  sink.add_options(comp);
  comp->add_option("--K", K, "subpolynomiality constant");
  comp->add_option("--n-max", n_max, "empirical ratio horizon");

  auto* exc = app.add_subcommand("exclusion", "exclusion-process gap table");
  rate.add_options(exc);
  sink.add_options(exc);
  exc->add_option("--n", n_range, "box range a..b");
  exc->add_option("--ell", ell_range, "particle-number range a..b");

  auto* zr = app.add_subcommand("zero-range", "zero-range-process gap table");
  rate.add_options(zr);
  sink.add_options(zr);
  zr->add_option("--n", n_range, "box range a..b");
  zr->add_option("--ell", ell_range, "particle-number range a..b");
  zr->add_option("--g", g_kind, "interaction: linear | indicator")
      ->check(CLI::IsMember({"linear", "indicator"}));

  auto* ret = app.add_subcommand("return-prob", "exact and Monte Carlo return probability");
  rate.add_options(ret);
  sink.add_options(ret);
  ret->add_option("--t-min", t_min, "first observation time");
  ret->add_option("--t-max", t_max, "last observation time");
  ret->add_option("--t-points", t_points, "geometric grid size");
  auto* lbox_opt =
      ret->add_option("--L-box", l_box, "truncation box radius (default 2048, 8192 for alpha < 1)");
  ret->add_option("--samples", samples, "Monte Carlo trajectories");
  ret->add_option("--seed", seed, "master seed");
  ret->add_option("--leak-budget", leak_budget, "maximum tolerated leaked mass");

  auto* ver = app.add_subcommand("verify-all", "run the acceptance suite");
  ver->add_option("--seed", seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sweep->parsed()) return run_gap_sweep(rate, n_range, sink, method);
    if (multi->parsed())
      return run_multiscale(K, rate.alpha, bopt->count() ? std::optional<double>(b_value) : b_fixed,
                            sink);
    if (comp->parsed()) return run_compare(rate, K, n_max, sink);
    if (exc->parsed()) return run_exclusion(rate, n_range, ell_range, sink);
    if (zr->parsed()) return run_zero_range(rate, g_kind, n_range, ell_range, sink);
    if (ret->parsed()) {
      if (lbox_opt->count() == 0 && rate.alpha < 1.0) l_box = 8192;  // heavier tails leak faster
      return run_return_prob(rate, t_min, t_max, t_points, l_box, samples, seed, leak_budget,
                             sink);
    }
    if (ver->parsed()) return run_verify_all(seed);
  } catch (const sw::parameter_error& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const sw::parse_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const sw::error& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
