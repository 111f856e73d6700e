#include "spikelab/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spikelab/errors.hpp"

namespace spikelab {

using nlohmann::json;

namespace {

NonlinearitySpec nonlinearity_from(const json& j) {
  NonlinearitySpec nl;
  std::string kind = j.value("kind", "pure_power");
  if (kind == "pure_power")
    nl.kind = NonlinearitySpec::Kind::pure_power;
  else if (kind == "sum_of_powers")
    nl.kind = NonlinearitySpec::Kind::sum_of_powers;
  else
    throw ConfigError("nonlinearity: unknown kind '" + kind + "'");
  nl.exponents = j.value("exponents", std::vector<double>{3.0});
  nl.coefficients = j.value("coefficients", std::vector<double>(nl.exponents.size(), 1.0));
  double qmin = nl.exponents.empty() ? 3.0 : *std::min_element(nl.exponents.begin(), nl.exponents.end());
  double qmax = nl.exponents.empty() ? 3.0 : *std::max_element(nl.exponents.begin(), nl.exponents.end());
  nl.mu = j.value("mu", std::min(3.0, 0.5 * (qmin + 3.0)));
  nl.p = j.value("p", qmax);
  return nl;
}

PotentialSpec potential_from(const json& j) {
  PotentialSpec pot;
  std::string kind = j.value("kind", "gaussian_saddle");
  if (kind == "gaussian_saddle")
    pot.kind = PotentialSpec::Kind::gaussian_saddle;
  else if (kind == "gaussian_max")
    pot.kind = PotentialSpec::Kind::gaussian_max;
  else if (kind == "custom_polynomial_bump")
    pot.kind = PotentialSpec::Kind::custom_polynomial_bump;
  else
    throw ConfigError("potential: unknown kind '" + kind + "'");
  pot.dim = j.value("N", 2);
  pot.beta = j.value("beta", 0.3);
  if (j.contains("monomials")) {
    for (const auto& m : j.at("monomials")) {
      PotentialSpec::Monomial mono;
      mono.coefficient = m.at("coefficient").get<double>();
      mono.powers = m.at("powers").get<std::vector<int>>();
      pot.monomials.push_back(std::move(mono));
    }
  }
  return pot;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  RunConfig cfg;
  try {
    if (j.contains("nonlinearity")) cfg.nonlinearity = nonlinearity_from(j.at("nonlinearity"));
    if (j.contains("truncation")) {
      const auto& t = j.at("truncation");
      cfg.truncation.a = t.value("a", 0.0);
      if (t.contains("radii")) {
        auto r = t.at("radii").get<std::vector<double>>();
        if (r.size() != 5) throw ConfigError("truncation: radii must list R0..R4");
        std::copy(r.begin(), r.end(), cfg.truncation.radii.begin());
      }
    }
    if (j.contains("potential")) {
      cfg.potential = potential_from(j.at("potential"));
      const auto& pj = j.at("potential");
      if (pj.contains("E_basis"))
        cfg.user_E = pj.at("E_basis").get<std::vector<std::vector<double>>>();
      if (pj.contains("radius_candidates"))
        cfg.radius_candidates = pj.at("radius_candidates").get<std::vector<double>>();
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      cfg.grid.n = g.value("n", 256);
      cfg.grid.h_target = g.value("h_target", 0.0);
      cfg.grid.L_margin = g.value("L_margin", 8.0);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      cfg.solver.tol = s.value("tol", 1e-10);
      cfg.solver.max_iter = s.value("max_iter", 60);
      cfg.solver.ground_state_tol = s.value("ground_state_tol", 1e-6);
    }
    if (j.contains("sweep")) cfg.eps_list = j.at("sweep").value("eps_list", cfg.eps_list);
    if (j.contains("output")) {
      const auto& o = j.at("output");
      cfg.output.dir = o.value("dir", "out");
      cfg.output.formats = o.value("formats", cfg.output.formats);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text(int indent) const {
  json j;
  j["nonlinearity"] = {
      {"kind", nonlinearity.kind == NonlinearitySpec::Kind::pure_power
                   ? "pure_power" : "sum_of_powers"},
      {"exponents", nonlinearity.exponents},
      {"coefficients", nonlinearity.coefficients},
      {"mu", nonlinearity.mu},
      {"p", nonlinearity.p}};
  j["truncation"] = {
      {"a", truncation.a},
      {"radii", std::vector<double>(truncation.radii.begin(), truncation.radii.end())}};
  json pj;
  switch (potential.kind) {
    case PotentialSpec::Kind::gaussian_saddle: pj["kind"] = "gaussian_saddle"; break;
    case PotentialSpec::Kind::gaussian_max: pj["kind"] = "gaussian_max"; break;
    case PotentialSpec::Kind::custom_polynomial_bump:
      pj["kind"] = "custom_polynomial_bump";
      break;
  }
  pj["N"] = potential.dim;
  pj["beta"] = potential.beta;
  if (!potential.monomials.empty()) {
    json ms = json::array();
    for (const auto& m : potential.monomials)
      ms.push_back({{"coefficient", m.coefficient}, {"powers", m.powers}});
    pj["monomials"] = ms;
  }
  if (!user_E.empty()) pj["E_basis"] = user_E;
  pj["radius_candidates"] = radius_candidates;
  j["potential"] = pj;
  j["grid"] = {{"n", grid.n}, {"h_target", grid.h_target}, {"L_margin", grid.L_margin}};
  j["solver"] = {{"tol", solver.tol},
                 {"max_iter", solver.max_iter},
                 {"ground_state_tol", solver.ground_state_tol}};
  j["sweep"] = {{"eps_list", eps_list}};
  j["output"] = {{"dir", output.dir}, {"formats", output.formats}};
  return j.dump(indent);
}

std::string RunConfig::hash() const {
  std::string text = to_json_text(0);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TruncationParams RunConfig::resolved_truncation() const {
  TruncationParams t = truncation;
  t.alpha1 = potential.alpha1();
  return t;
}

void RunConfig::validate() const {
  potential.validate();
  nonlinearity.validate(potential.dim);
  double a1 = potential.alpha1();
  if (!(a1 > 0.0)) {
    std::ostringstream os;
    os << "potential: certified lower bound alpha1 = " << a1
       << " is not positive; beta is too large";
    throw ConfigError(os.str());
  }
  resolved_truncation().validate(nonlinearity.mu);
  if (grid.n < 16 && grid.h_target <= 0.0)
    throw ConfigError("grid: n must be at least 16");
  if (grid.L_margin <= 0.0) throw ConfigError("grid: L_margin must be positive");
  if (!(solver.tol > 0.0) || solver.max_iter < 1)
    throw ConfigError("solver: tol must be positive and max_iter >= 1");
  if (eps_list.empty()) throw ConfigError("sweep: eps_list must be nonempty");
  for (double e : eps_list)
    if (!(e > 0.0)) throw ConfigError("sweep: every eps must be positive");
  for (double r : radius_candidates)
    if (!(r > 0.0)) throw ConfigError("potential: radius candidates must be positive");
  for (const auto& v : user_E)
    if (static_cast<int>(v.size()) != potential.dim)
      throw ConfigError("potential: E_basis vectors must have N entries");
}

}  // namespace spikelab
