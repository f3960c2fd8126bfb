#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "io.hpp"
#include "zncount/counting.hpp"
#include "zncount/errors.hpp"
#include "zncount/examples.hpp"
#include "zncount/random.hpp"
#include "zncount/spectrum.hpp"
#include "zncount/transfer.hpp"

namespace zncount::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Options {
  std::string input;
  std::string out;
  std::string csv;
  std::string coeffs = "1,1,-2";
  std::int64_t k = 5;
  double eps = 0.1;
  int d = 3;
  std::string mode = "relaxed";
  std::string method;
  std::uint64_t seed = 0;
  std::string overrides;
  std::string plan_out;
  std::string plan_in;

  // examples
  std::string kind;
  std::int64_t modulus = 0;
  std::int64_t size = 0;
  int fold = 6;
  double delta = 0.1;
  int power = 8;
  double alpha = 0.4;
  int star_power = 8;

  // bench
  std::vector<std::int64_t> sizes = {64, 256, 1024};
  int trials = 3;
};

Json make_report(const std::string& command, Json inputs) {
  Json r;
  r["command"] = command;
  r["inputs"] = std::move(inputs);
  r["results"] = Json::object();
  r["timings_ms"] = Json::object();
  return r;
}

void emit(const Json& report, const Options& o, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (!o.out.empty()) write_text(o.out, text);
  out << text;
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const Options& o, std::ostream& out) {
  const auto t0 = Clock::now();
  const CyclicFunction f = load_function(o.input);
  const HypothesisMode mode = parse_hypothesis_mode(o.mode);
  const SortedSpectrum s = sort_spectrum(f);
  const HypothesisReport h = check_hypothesis(f, s, o.d, o.eps, o.k, mode);

  Json rep = make_report("spectrum", {{"input", o.input}, {"k", o.k}, {"eps", o.eps},
                                      {"d", o.d}, {"mode", o.mode}});
  rep["results"]["hypothesis"] = hypothesis_to_json(h);
  Json top = Json::array();
  for (std::int64_t j = 0; j < std::min<std::int64_t>(o.k, s.modulus); ++j) {
    const auto& e = s.entries[static_cast<std::size_t>(j)];
    top.push_back({{"rank", j + 1},
                   {"frequency", e.frequency},
                   {"re", e.coefficient.real()},
                   {"im", e.coefficient.imag()},
                   {"magnitude", std::abs(e.coefficient)}});
  }
  rep["results"]["top"] = std::move(top);
  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv << "rank,frequency,re,im,magnitude\n";
    for (std::size_t j = 0; j < s.entries.size(); ++j) {
      const auto& e = s.entries[j];
      csv << j + 1 << ',' << e.frequency << ',' << num(e.coefficient.real()) << ','
          << num(e.coefficient.imag()) << ',' << num(std::abs(e.coefficient)) << '\n';
    }
    write_text(o.csv, csv.str());
    rep["results"]["csv"] = o.csv;
  }
  rep["timings_ms"]["total"] = ms_since(t0);
  emit(rep, o, out);
  return h.passed ? kExitOk : kExitSemantic;
}

int cmd_count(const Options& o, std::ostream& out) {
  const CyclicFunction f = load_function(o.input);
  const EquationForm eq = EquationForm::parse(o.coeffs);
  const std::string method = o.method.empty() ? "both" : o.method;
  Json rep = make_report("count", {{"input", o.input}, {"coeffs", eq.to_string()}, {"method", method}});
  int code = kExitOk;
  if (method == "brute" || method == "both") {
    const auto t0 = Clock::now();
    rep["results"]["brute"] = count_bruteforce(f, eq);
    rep["timings_ms"]["brute"] = ms_since(t0);
  }
  if (method == "fourier" || method == "both") {
    const auto t0 = Clock::now();
    rep["results"]["fourier"] = count_fourier(f, eq);
    rep["timings_ms"]["fourier"] = ms_since(t0);
  }
  if (method == "both") {
    const double b = rep["results"]["brute"].get<double>();
    const double fo = rep["results"]["fourier"].get<double>();
    const double rel = std::abs(b - fo) / std::max(1.0, std::abs(b));
    rep["results"]["rel_diff"] = rel;
    rep["results"]["agree"] = rel <= 1e-6;
    if (rel > 1e-6) code = kExitSemantic;
  }
  emit(rep, o, out);
  return code;
}

int cmd_certify(const Options& o, std::ostream& out) {
  const auto t0 = Clock::now();
  const CyclicFunction f = load_function(o.input);
  const EquationForm eq = EquationForm::parse(o.coeffs);
  const HypothesisMode mode = parse_hypothesis_mode(o.mode);
  const CountMethod method = o.method == "brute" ? CountMethod::brute : CountMethod::fourier;
  const Certificate c = certify(f, eq, o.eps, o.k, mode, method);
  Json rep = make_report("certify", {{"input", o.input}, {"coeffs", eq.to_string()}, {"k", o.k},
                                     {"eps", o.eps}, {"mode", o.mode}, {"method", to_string(method)}});
  rep["results"]["hypothesis"] = hypothesis_to_json(c.hypothesis);
  rep["results"]["count"] = c.count;
  rep["results"]["lower_bound"] = c.lower_bound;
  rep["results"]["satisfied"] = c.satisfied;
  rep["results"]["hypothesis_failed"] = c.hypothesis_failed;
  rep["timings_ms"]["total"] = ms_since(t0);
  emit(rep, o, out);
  return c.satisfied && !c.hypothesis_failed ? kExitOk : kExitSemantic;
}

int cmd_transfer(const Options& o, std::ostream& out) {
  const auto t0 = Clock::now();
  const CyclicFunction f = load_function(o.input);
  Json inputs = {{"input", o.input}, {"k", o.k}, {"eps", o.eps}, {"overrides", o.overrides}};
  if (!o.plan_in.empty()) inputs["plan_in"] = o.plan_in;
  Json rep;

  try {
    if (!o.plan_in.empty()) {
      Json pj;
      try {
        pj = Json::parse(read_text(o.plan_in));
      } catch (const Json::parse_error& e) {
        throw InputError(o.plan_in + ": invalid JSON: " + e.what());
      }
      TransferPlan plan = plan_from_json(pj);
      inputs["coeffs"] = plan.eq.to_string();
      rep = make_report("transfer", inputs);
      const auto mismatches = verify_plan(f, plan);
      if (!mismatches.empty()) {
        rep["results"]["plan_mismatches"] = mismatches;
        rep["timings_ms"]["total"] = ms_since(t0);
        emit(rep, o, out);
        return kExitSemantic;
      }
      const ChainReport chain = execute_plan(f, plan);
      rep["results"]["plan"] = plan_to_json(plan);
      rep["results"]["chain"] = chain_to_json(chain);
      rep["timings_ms"]["total"] = ms_since(t0);
      emit(rep, o, out);
      return chain.all_passed() ? kExitOk : kExitSemantic;
    }

    const EquationForm eq = EquationForm::parse(o.coeffs);
    inputs["coeffs"] = eq.to_string();
    rep = make_report("transfer", inputs);
    const TransferOverrides ov = TransferOverrides::parse(o.overrides);
    if (!is_prime(f.modulus())) {
      throw std::invalid_argument("transfer: modulus " + std::to_string(f.modulus()) + " is not prime");
    }
    const ChainResult res = run_chain(f, eq, o.eps, o.k, ov);
    rep["results"]["plan"] = plan_to_json(res.plan);
    rep["results"]["chain"] = chain_to_json(res.report);
    if (!o.plan_out.empty()) write_text(o.plan_out, plan_to_json(res.plan).dump(2) + "\n");
    rep["timings_ms"]["total"] = ms_since(t0);
    emit(rep, o, out);
    return res.report.all_passed() ? kExitOk : kExitSemantic;
  } catch (const StageError& e) {
    if (rep.is_null()) rep = make_report("transfer", inputs);
    rep["results"]["error"] = {{"stage", e.stage()}, {"kind", e.kind()}, {"message", e.what()}};
    rep["timings_ms"]["total"] = ms_since(t0);
    emit(rep, o, out);
    return kExitSemantic;
  }
}

Json function_summary(const CyclicFunction& f) {
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (const Complex& z : f.values()) {
    lo = std::min(lo, z.real());
    hi = std::max(hi, z.real());
    sum += z.real();
  }
  return {{"modulus", f.modulus()}, {"theta", sum / static_cast<double>(f.modulus())},
          {"min", lo}, {"max", hi}};
}

int cmd_examples(const Options& o, std::ostream& out) {
  const auto t0 = Clock::now();
  if (o.modulus < 2) throw std::invalid_argument("examples: --modulus must be >= 2");
  Json inputs = {{"kind", o.kind}, {"modulus", o.modulus}, {"seed", o.seed}};
  Json results;
  CyclicFunction f = CyclicFunction::zeros(1);
  if (o.kind == "sumset") {
    const std::int64_t size =
        o.size > 0 ? o.size : static_cast<std::int64_t>(std::ceil(0.8 * static_cast<double>(o.modulus)));
    if (size > o.modulus) throw std::invalid_argument("examples: --size exceeds --modulus");
    Rng rng(o.seed);
    const auto S = random_subset(o.modulus, size, rng);
    f = sumset_density(o.modulus, S, o.fold);
    inputs["size"] = size;
    inputs["fold"] = o.fold;
  } else if (o.kind == "gpy") {
    const GpyData g = gpy_data(o.modulus, o.delta);
    f = g.f;
    inputs["delta"] = o.delta;
    results["truncation"] = g.truncation;
    results["max_tau"] = g.max_tau;
  } else if (o.kind == "smoothed") {
    SmoothedParams p;
    p.power = o.power;
    p.alpha = o.alpha;
    p.star_power = o.star_power;
    const SmoothedPseudoprime sp = smoothed_pseudoprime(o.modulus, o.delta, p);
    f = sp.f3;
    inputs["delta"] = o.delta;
    inputs["power"] = o.power;
    inputs["alpha"] = o.alpha;
    inputs["star_power"] = o.star_power;
    results["agreement_range"] = {sp.agree_lo, sp.agree_hi};
    results["g_agreement_error"] = sp.g_agreement_error;
    results["star_support"] = {sp.star_lo, sp.star_hi};
    results["star_inside_agreement"] = sp.star_inside_agreement;
    results["f2_agreement_error"] = sp.f2_agreement_error;
    results["positivity_violations"] = sp.positivity_violations;
    results["f3_mass"] = sp.f3_mass;
    Json sweep = Json::array();
    for (const auto& r : sp.sweep) sweep.push_back({{"relative_threshold", r.relative_threshold}, {"count", r.count}});
    results["large_coefficients"] = std::move(sweep);
    Json tails = Json::array();
    for (const auto& [k, ratio] : sp.tail_ratios) tails.push_back({{"k", k}, {"tail_over_sigma_sq", ratio}});
    results["tail_ratios"] = std::move(tails);
    results["warnings"] = sp.warnings;
  } else if (o.kind == "smooth") {
    f = smooth_density(o.modulus, o.seed);
  } else {
    throw std::invalid_argument("examples: unknown kind '" + o.kind + "'");
  }
  write_text(o.out, function_to_json(f));
  results["function"] = function_summary(f);
  results["written"] = o.out;
  Json rep = make_report("examples", inputs);
  rep["results"] = std::move(results);
  rep["timings_ms"]["total"] = ms_since(t0);
  // The function file goes to --out; the report only to stdout.
  out << rep.dump(2) << "\n";
  return kExitOk;
}

// Per-call time in ms: repeats fn until at least 5 ms elapse, min over trials.
double time_call(int trials, const std::function<void()>& fn) {
  double best = HUGE_VAL;
  for (int t = 0; t < trials; ++t) {
    int reps = 0;
    const auto t0 = Clock::now();
    double elapsed = 0.0;
    do {
      fn();
      ++reps;
      elapsed = ms_since(t0);
    } while (elapsed < 5.0);
    best = std::min(best, elapsed / reps);
  }
  return best;
}

int cmd_bench(const Options& o, std::ostream& out) {
  if (o.trials < 1) throw std::invalid_argument("bench: --trials must be >= 1");
  if (o.sizes.empty()) throw std::invalid_argument("bench: --sizes is empty");
  for (std::int64_t n : o.sizes) {
    if (n < 8) throw std::invalid_argument("bench: sizes must be >= 8, got " + std::to_string(n));
  }
  if (o.d < 3) throw std::invalid_argument("bench: --d must be >= 3");
  std::vector<std::int64_t> coeffs(static_cast<std::size_t>(o.d), 1);
  coeffs.back() = -(o.d - 1);
  const EquationForm eq(coeffs);

  Json rep = make_report("bench", {{"sizes", o.sizes}, {"d", o.d}, {"trials", o.trials},
                                   {"seed", o.seed}, {"coeffs", eq.to_string()}});
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "N,brute_time,fourier_time,ratio\n";
  Rng rng(o.seed);
  for (std::int64_t n : o.sizes) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform();
    const CyclicFunction f = CyclicFunction::from_real(v);
    const double brute = count_bruteforce(f, eq);
    const double fourier = count_fourier(f, eq, DftMethod::bluestein);
    const double rel = std::abs(brute - fourier) / std::max(1.0, std::abs(brute));
    if (rel > 1e-6) {
      throw NumericalInconsistency("bench: brute " + num(brute) + " and fourier " + num(fourier) +
                                   " disagree at N=" + std::to_string(n));
    }
    volatile double sink = 0.0;
    const double tb = time_call(o.trials, [&] { sink = count_bruteforce(f, eq); });
    const double tf = time_call(o.trials, [&] { sink = count_fourier(f, eq, DftMethod::bluestein); });
    (void)sink;
    rows.push_back({{"N", n}, {"brute", brute}, {"fourier", fourier}, {"rel_diff", rel},
                    {"brute_ms", tb}, {"fourier_ms", tf}, {"ratio", tf / tb}});
    csv << n << ',' << num(tb) << ',' << num(tf) << ',' << num(tf / tb) << '\n';
  }
  rep["results"]["rows"] = std::move(rows);
  if (!o.csv.empty()) {
    write_text(o.csv, csv.str());
    rep["results"]["csv"] = o.csv;
  }
  emit(rep, o, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted solution counts for invariant linear equations over Z_N", "zncount"};
  app.require_subcommand(1);
  Options o;

  auto add_input = [&](CLI::App* s) {
    s->add_option("--input", o.input, "function file (JSON or CSV)")->required();
    s->add_option("--out", o.out, "also write the report here");
  };
  auto add_hyp = [&](CLI::App* s) {
    s->add_option("--k", o.k, "rank k")->capture_default_str();
    s->add_option("--eps", o.eps, "epsilon")->capture_default_str();
    s->add_option("--mode", o.mode, "strict|relaxed")
        ->check(CLI::IsMember({"strict", "relaxed"}))
        ->capture_default_str();
  };

  auto* spectrum = app.add_subcommand("spectrum", "sorted spectrum and hypothesis check");
  add_input(spectrum);
  add_hyp(spectrum);
  spectrum->add_option("--d", o.d, "equation length d")->capture_default_str();
  spectrum->add_option("--csv", o.csv, "write rank,frequency,re,im,magnitude rows");

  auto* count = app.add_subcommand("count", "solution count by brute force and/or Fourier");
  add_input(count);
  count->add_option("--coeffs", o.coeffs, "a1,...,ad")->required();
  count->add_option("--method", o.method, "brute|fourier|both")
      ->check(CLI::IsMember({"brute", "fourier", "both"}));

  auto* cert = app.add_subcommand("certify", "lower-bound certificate");
  add_input(cert);
  add_hyp(cert);
  cert->add_option("--coeffs", o.coeffs, "a1,...,ad")->required();
  cert->add_option("--method", o.method, "brute|fourier")->check(CLI::IsMember({"brute", "fourier"}));

  auto* transfer = app.add_subcommand("transfer", "run the Z_N -> Z_M transfer chain");
  add_input(transfer);
  transfer->add_option("--coeffs", o.coeffs, "a1,...,ad")->capture_default_str();
  transfer->add_option("--k", o.k, "rank k")->capture_default_str();
  transfer->add_option("--eps", o.eps, "epsilon")->capture_default_str();
  transfer->add_option("--overrides", o.overrides, "i_scale=...,x_scale=...");
  transfer->add_option("--plan-out", o.plan_out, "write the plan JSON here");
  transfer->add_option("--plan-in", o.plan_in, "re-verify and execute a saved plan");

  auto* examples = app.add_subcommand("examples", "generate a density function file");
  examples->add_option("kind", o.kind, "sumset|gpy|smoothed|smooth")
      ->required()
      ->check(CLI::IsMember({"sumset", "gpy", "smoothed", "smooth"}));
  examples->add_option("--modulus", o.modulus, "N")->required();
  examples->add_option("--out", o.out, "function file to write")->required();
  examples->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  examples->add_option("--size", o.size, "|S| for sumset (default ceil(0.8 N))");
  examples->add_option("--fold", o.fold, "t for sumset")->capture_default_str();
  examples->add_option("--delta", o.delta, "truncation exponent")->capture_default_str();
  examples->add_option("--power", o.power, "window kernel power P")->capture_default_str();
  examples->add_option("--alpha", o.alpha, "window width exponent")->capture_default_str();
  examples->add_option("--star-power", o.star_power, "w* kernel power")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "time brute force against Fourier counting");
  bench->add_option("--sizes", o.sizes, "comma-separated N values")->delimiter(',')->capture_default_str();
  bench->add_option("--d", o.d, "equation length")->capture_default_str();
  bench->add_option("--trials", o.trials, "timing trials")->capture_default_str();
  bench->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  bench->add_option("--csv", o.csv, "write N,brute_time,fourier_time,ratio rows");
  bench->add_option("--out", o.out, "also write the report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(o, out);
    if (count->parsed()) return cmd_count(o, out);
    if (cert->parsed()) return cmd_certify(o, out);
    if (transfer->parsed()) return cmd_transfer(o, out);
    if (examples->parsed()) return cmd_examples(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error (" << error_kind(e) << "): " << e.what() << "\n";
    return kExitSemantic;
  }
  return kExitInput;
}

}  // namespace zncount::cli
