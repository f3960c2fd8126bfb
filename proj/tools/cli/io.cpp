#include "io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace zncount::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

CyclicFunction parse_json_function(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(source + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw InputError(source + ": expected an object with modulus and values");
  if (!j.contains("modulus") || !j["modulus"].is_number_integer()) {
    throw InputError(source + ": field 'modulus' must be an integer");
  }
  if (!j.contains("values") || !j["values"].is_array()) {
    throw InputError(source + ": field 'values' must be an array");
  }
  const auto n = j["modulus"].get<std::int64_t>();
  const auto& values = j["values"];
  if (n < 1) throw InputError(source + ": 'modulus' must be positive");
  if (static_cast<std::int64_t>(values.size()) != n) {
    throw InputError(source + ": 'values' has " + std::to_string(values.size()) +
                     " entries but modulus is " + std::to_string(n));
  }
  std::vector<double> v;
  v.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i].is_number()) {
      throw InputError(source + ": values[" + std::to_string(i) + "] is not a number");
    }
    v.push_back(values[i].get<double>());
  }
  return CyclicFunction::from_real(v);
}

CyclicFunction parse_csv_function(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::int64_t, double>> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    const std::string where = source + ":" + std::to_string(lineno);
    if (comma == std::string::npos) throw InputError(where + ": expected 'index,value'");
    const std::string a = trim(t.substr(0, comma));
    const std::string b = trim(t.substr(comma + 1));
    if (rows.empty() && a == "index") continue;
    std::size_t pa = 0, pb = 0;
    std::int64_t idx = 0;
    double val = 0.0;
    try {
      idx = std::stoll(a, &pa);
      val = std::stod(b, &pb);
    } catch (const std::exception&) {
      throw InputError(where + ": cannot parse '" + t + "'");
    }
    if (pa != a.size() || pb != b.size()) throw InputError(where + ": cannot parse '" + t + "'");
    if (idx != static_cast<std::int64_t>(rows.size())) {
      throw InputError(where + ": expected index " + std::to_string(rows.size()) + ", got " +
                       std::to_string(idx));
    }
    rows.emplace_back(idx, val);
  }
  if (rows.empty()) throw InputError(source + ": no data rows");
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.second);
  return CyclicFunction::from_real(v);
}

}  // namespace

CyclicFunction parse_function(const std::string& text, const std::string& source) {
  const auto first = text.find_first_not_of(" \t\r\n");
  CyclicFunction f = first != std::string::npos && text[first] == '{'
                         ? parse_json_function(text, source)
                         : parse_csv_function(text, source);
  const auto values = f.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i].real();
    if (!std::isfinite(x) || x < -kDensityTolerance || x > 1.0 + kDensityTolerance) {
      throw InputError(source + ": value at index " + std::to_string(i) + " is outside [0, 1]");
    }
  }
  return f;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CyclicFunction load_function(const std::string& path) { return parse_function(read_text(path), path); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

std::string function_to_json(const CyclicFunction& f) {
  Json j;
  j["modulus"] = f.modulus();
  Json values = Json::array();
  for (const Complex& z : f.values()) values.push_back(z.real());
  j["values"] = std::move(values);
  return j.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Plans and reports
// ---------------------------------------------------------------------------

Json plan_to_json(const TransferPlan& p) {
  Json j;
  j["N"] = p.N;
  j["k"] = p.k;
  j["epsilon"] = p.epsilon;
  j["coeffs"] = std::vector<std::int64_t>(p.eq.coeffs().begin(), p.eq.coeffs().end());
  j["overrides"] = {{"i_scale", p.overrides.i_scale}, {"x_scale", p.overrides.x_scale}};
  j["log_base"] = "e";
  j["L"] = p.L;
  j["I_half"] = p.I_half;
  j["x_band"] = p.x_band;
  j["separation_numer"] = p.separation_numer;
  j["J"] = {p.J_lo, p.J_hi};
  j["m2"] = p.m2;
  j["q"] = p.q;
  j["separation_bad_fraction"] = p.separation_bad_fraction;
  j["top_frequencies"] = p.top_frequencies;
  j["b_set"] = p.b_set;
  j["m1"] = p.m1;
  j["M"] = p.M;
  j["V_size"] = p.m2;
  j["W_size"] = p.m1;
  j["Xc"] = p.Xc;
  j["X_size"] = p.X_size();
  j["u_g"] = p.u_g;
  j["u_h"] = p.u_h;
  return j;
}

namespace {

template <class T>
T field(const Json& j, const char* name) {
  if (!j.contains(name)) throw InputError(std::string("plan: missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception&) {
    throw InputError(std::string("plan: field '") + name + "' has the wrong type");
  }
}

}  // namespace

TransferPlan plan_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("plan: expected a JSON object");
  const auto& ov = j.contains("overrides") ? j["overrides"] : Json::object();
  TransferOverrides overrides;
  if (ov.contains("i_scale")) overrides.i_scale = ov["i_scale"].get<double>();
  if (ov.contains("x_scale")) overrides.x_scale = ov["x_scale"].get<double>();
  TransferPlan p(field<std::int64_t>(j, "N"), field<std::int64_t>(j, "k"),
                 field<double>(j, "epsilon"),
                 EquationForm(field<std::vector<std::int64_t>>(j, "coeffs")), overrides);
  const auto J = field<std::vector<std::int64_t>>(j, "J");
  if (J.size() != 2) throw InputError("plan: field 'J' must be [lo, hi]");
  // Derived constants are taken from the file so that verify_plan can
  // compare them with freshly recomputed values.
  p.L = field<std::int64_t>(j, "L");
  p.I_half = field<std::int64_t>(j, "I_half");
  p.x_band = field<double>(j, "x_band");
  p.separation_numer = field<double>(j, "separation_numer");
  p.J_lo = J[0];
  p.J_hi = J[1];
  p.m2 = field<std::int64_t>(j, "m2");
  p.q = field<std::int64_t>(j, "q");
  p.separation_bad_fraction = field<double>(j, "separation_bad_fraction");
  p.top_frequencies = field<std::vector<std::int64_t>>(j, "top_frequencies");
  p.b_set = field<std::vector<std::int64_t>>(j, "b_set");
  p.m1 = field<std::int64_t>(j, "m1");
  p.M = field<std::int64_t>(j, "M");
  p.Xc = field<std::vector<std::int64_t>>(j, "Xc");
  p.u_g = field<std::int64_t>(j, "u_g");
  p.u_h = field<std::int64_t>(j, "u_h");
  if (p.M != p.m1 * p.m2) throw InputError("plan: M != m1 * m2");
  for (std::int64_t a : p.Xc) {
    if (a < 0 || a >= p.M) throw InputError("plan: Xc entry outside [0, M)");
  }
  return p;
}

Json hypothesis_to_json(const HypothesisReport& r) {
  Json j;
  j["modulus"] = r.modulus;
  j["mode"] = to_string(r.mode);
  j["k"] = r.k;
  j["epsilon"] = r.epsilon;
  j["d"] = r.d;
  j["theta"] = r.theta;
  j["sigma_sq"] = r.sigma_sq;
  j["tail"] = r.tail_energy;
  j["tail_threshold"] = r.tail_threshold;
  // k_lower_strict itself overflows double for small eps; only its log is emitted.
  j["k_lower_strict_log10"] = std::isfinite(r.k_lower_strict_log10) ? Json(r.k_lower_strict_log10) : Json(nullptr);
  j["k_upper"] = r.k_upper;
  j["theta_positive"] = r.theta_positive;
  j["tail_ok"] = r.tail_ok;
  j["k_at_most_upper"] = r.k_at_most_upper;
  j["k_at_least_lower"] = r.k_at_least_lower;
  j["passed"] = r.passed;
  j["warnings"] = r.warnings;
  return j;
}

Json chain_to_json(const ChainReport& r) {
  Json j;
  j["count_f"] = r.count_f;
  j["count_g"] = r.count_g;
  j["count_g_fourier"] = r.count_g_fourier;
  j["count_h"] = r.count_h;
  j["count_h_direct"] = r.count_h_direct;
  j["h_floor"] = r.h_floor;
  j["g_mass"] = r.g_mass;
  j["h_mass"] = r.h_mass;
  j["sigma_value"] = r.sigma_value;
  j["sigma_average"] = r.sigma_average;
  j["sigma_total"] = r.sigma_total;
  j["sigma_identity_rhs"] = r.sigma_identity_rhs;
  j["sigma_identity_rel_error"] = r.sigma_identity_rel_error;
  j["separation_bad_fraction"] = r.separation_bad_fraction;
  j["separation_limit"] = r.separation_limit;
  j["Xc_size"] = r.Xc_size;
  j["Xc_limit"] = r.Xc_limit;
  j["Xc_limit_unscaled"] = r.Xc_limit_paper;
  j["g_leak"] = r.g_leak;
  j["g_averaging_bound"] = r.g_averaging_bound;
  j["g_mass_bound"] = r.g_mass_bound;
  j["window_mass_rel_error"] = r.window_mass_rel_error;
  j["h_hat_off_V"] = r.h_hat_off_V;
  j["h_hat_formula_rel_error"] = r.h_hat_formula_rel_error;
  j["h_w_invariance"] = r.h_w_invariance;
  j["count_h_rel_error"] = r.count_h_rel_error;
  j["tuple_form"] = {{"v_tuples", r.tuple_form.v_tuples},
                     {"b_tuples", r.tuple_form.b_tuples},
                     {"holds", r.tuple_form.holds}};
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}});
  j["checks"] = std::move(checks);
  j["all_passed"] = r.all_passed();
  j["hypothesis"] = hypothesis_to_json(r.hypothesis);
  return j;
}

}  // namespace zncount::cli
