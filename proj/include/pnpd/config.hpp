#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "io.hpp"
#include "regularizers.hpp"
#include "solvers.hpp"

namespace pnpd {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// enum names

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::NPD: return "NPD";
    case Algorithm::NPDIT: return "NPDIT";
    case Algorithm::PNPD: return "PNPD";
    case Algorithm::PNPD_NE: return "PNPD_NE";
  }
  return "?";
}

inline std::string_view to_string(GammaRule g) { return g == GammaRule::NONE ? "NONE" : "FISTA_T"; }

inline std::string_view to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::CONSTANT: return "CONSTANT";
    case SchedulerKind::DECAY_085: return "DECAY_085";
    case SchedulerKind::SQRT_INCREASE: return "SQRT_INCREASE";
    case SchedulerKind::BOOTSTRAP: return "BOOTSTRAP";
  }
  return "?";
}

namespace detail {

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& all, const char* what) {
  for (E e : all)
    if (to_string(e) == s) return e;
  throw config_error(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

inline bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw config_error("expected a boolean, got '" + std::string(s) + "'");
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline Algorithm parse_algorithm(std::string_view s) {
  return detail::parse_enum(s, std::array{Algorithm::NPD, Algorithm::NPDIT, Algorithm::PNPD, Algorithm::PNPD_NE},
                            "algorithm");
}
inline GammaRule parse_gamma_rule(std::string_view s) {
  return detail::parse_enum(s, std::array{GammaRule::NONE, GammaRule::FISTA_T}, "gamma_rule");
}
inline SchedulerKind parse_scheduler_kind(std::string_view s) {
  return detail::parse_enum(s,
                            std::array{SchedulerKind::CONSTANT, SchedulerKind::DECAY_085,
                                       SchedulerKind::SQRT_INCREASE, SchedulerKind::BOOTSTRAP},
                            "scheduler kind");
}
inline RegKind parse_reg_kind(std::string_view s) {
  return detail::parse_enum(s, std::array{RegKind::TV_ISO, RegKind::L1}, "regularizer kind");
}

// ---------------------------------------------------------------------------
// presets

/*
 * ISTA / FISTA: PNPD with P = I and exact L1 prox (no and FISTA_T extrapolation).
 * ITTA: PNPD_NE with alpha = 1, P = A^T A + nu I and exact L1 prox.
 * *_PAPER: alpha = 1, nu = 0.1, k_max = 3 (NPD: k_max = 1).
 * PNPD_BT: bootstrap scheduler nu0 = 1e-2, n_bt = 20 with lambda rescaling.
 */
inline SolverConfig make_preset(std::string_view name) {
  SolverConfig c;
  c.alpha = 1.0;
  c.beta = 0.99 / 8.0;
  c.gamma_rule = GammaRule::FISTA_T;
  c.scheduler = Scheduler{};
  c.scheduler.kind = SchedulerKind::CONSTANT;
  c.scheduler.nu_const = 0.1;
  if (name == "ISTA" || name == "FISTA") {
    c.algorithm = Algorithm::PNPD;
    c.poly = Polynomial();
    c.gamma_rule = name == "ISTA" ? GammaRule::NONE : GammaRule::FISTA_T;
    c.exact_prox = true;
    c.k_max = 1;
  } else if (name == "ITTA") {
    c.algorithm = Algorithm::PNPD_NE;
    c.gamma_rule = GammaRule::NONE;
    c.exact_prox = true;
    c.k_max = 1;
  } else if (name == "NPD_PAPER") {
    c.algorithm = Algorithm::NPD;
    c.k_max = 1;
  } else if (name == "NPDIT_PAPER") {
    c.algorithm = Algorithm::NPDIT;
    c.k_max = 3;
    c.beta = 0.99 * c.scheduler.nu_const / 8.0;  // informational: recomputed per step
  } else if (name == "PNPD_PAPER") {
    c.algorithm = Algorithm::PNPD;
    c.k_max = 3;
  } else if (name == "PNPD_NE") {
    c.algorithm = Algorithm::PNPD_NE;
    c.gamma_rule = GammaRule::NONE;
    c.k_max = 3;
  } else if (name == "PNPD_BT") {
    c.algorithm = Algorithm::PNPD;
    c.k_max = 3;
    c.scheduler.kind = SchedulerKind::BOOTSTRAP;
    c.scheduler.nu0 = 1e-2;
    c.scheduler.n_bt = 20;
    c.rescale_lambda = true;
  } else {
    throw config_error("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

inline constexpr std::array<std::string_view, 8> kPresetNames = {
    "ISTA", "FISTA", "ITTA", "NPD_PAPER", "NPDIT_PAPER", "PNPD_PAPER", "PNPD_NE", "PNPD_BT"};

// ---------------------------------------------------------------------------
// config file

/// Everything a run needs beyond the problem data.
struct RunConfig {
  SolverConfig solver;
  Regularizer reg{RegKind::TV_ISO, 2e-4};
};

inline std::vector<double> parse_coeffs(std::string_view s) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(parse_double(detail::trim(part)));
  return out;
}

/*
 * [solver]      preset algorithm alpha beta k_max gamma_rule epsilon delta_bt
 *               L_init rescale_lambda exact_prox max_iter poly
 * [scheduler]   kind nu nu_inf nu0 n_bt
 * [regularizer] kind lambda
 *
 * `preset` (if present) seeds the solver before the other keys apply.
 * `poly` is a comma-separated coefficient list c0,c1,...
 */
inline RunConfig parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw config_error(std::string("config: ") + e.what());
  }

  static const std::vector<std::pair<std::string, std::vector<std::string>>> schema = {
      {"solver",
       {"preset", "algorithm", "alpha", "beta", "k_max", "gamma_rule", "epsilon", "delta_bt", "L_init",
        "rescale_lambda", "exact_prox", "max_iter", "poly"}},
      {"scheduler", {"kind", "nu", "nu_inf", "nu0", "n_bt"}},
      {"regularizer", {"kind", "lambda"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = std::find_if(schema.begin(), schema.end(), [&](const auto& s) { return s.first == section; });
    if (it == schema.end()) throw config_error("config: unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw config_error("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw config_error("config: unknown key '" + key + "' in [" + section + "]");
    }
  }

  RunConfig rc;
  auto get = [&](const char* path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return std::string(detail::trim(*v));
    return std::nullopt;
  };

  try {
    if (auto v = get("solver.preset")) rc.solver = make_preset(*v);
    SolverConfig& c = rc.solver;
    if (auto v = get("solver.algorithm")) c.algorithm = parse_algorithm(*v);
    if (auto v = get("solver.alpha")) c.alpha = parse_double(*v);
    if (auto v = get("solver.beta")) c.beta = parse_double(*v);
    if (auto v = get("solver.k_max")) c.k_max = parse_uint(*v);
    if (auto v = get("solver.gamma_rule")) c.gamma_rule = parse_gamma_rule(*v);
    if (auto v = get("solver.epsilon")) c.epsilon = parse_double(*v);
    if (auto v = get("solver.delta_bt")) c.delta_bt = parse_double(*v);
    if (auto v = get("solver.L_init")) c.L_init = parse_double(*v);
    if (auto v = get("solver.rescale_lambda")) c.rescale_lambda = detail::parse_bool(*v);
    if (auto v = get("solver.exact_prox")) c.exact_prox = detail::parse_bool(*v);
    if (auto v = get("solver.max_iter")) c.max_iter = parse_uint(*v);
    if (auto v = get("solver.poly")) c.poly = Polynomial(parse_coeffs(*v));

    if (auto v = get("scheduler.kind")) c.scheduler.kind = parse_scheduler_kind(*v);
    if (auto v = get("scheduler.nu")) c.scheduler.nu_const = parse_double(*v);
    if (auto v = get("scheduler.nu_inf")) c.scheduler.nu_inf = parse_double(*v);
    if (auto v = get("scheduler.nu0")) c.scheduler.nu0 = parse_double(*v);
    if (auto v = get("scheduler.n_bt")) c.scheduler.n_bt = parse_uint(*v);

    RegKind kind = rc.reg.kind;
    double lambda = rc.reg.lambda;
    if (auto v = get("regularizer.kind")) kind = parse_reg_kind(*v);
    if (auto v = get("regularizer.lambda")) lambda = parse_double(*v);
    rc.reg = Regularizer(kind, lambda);
    c.validate();
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  return rc;
}

/// Serializes every field, so parse_config(write_config(rc)) reproduces rc.
inline std::string write_config(const RunConfig& rc) {
  const SolverConfig& c = rc.solver;
  std::ostringstream o;
  o << "[solver]\n";
  o << "algorithm = " << to_string(c.algorithm) << '\n';
  o << "alpha = " << format_double(c.alpha) << '\n';
  o << "beta = " << format_double(c.beta) << '\n';
  o << "k_max = " << c.k_max << '\n';
  o << "gamma_rule = " << to_string(c.gamma_rule) << '\n';
  o << "epsilon = " << format_double(c.epsilon) << '\n';
  o << "delta_bt = " << format_double(c.delta_bt) << '\n';
  o << "L_init = " << format_double(c.L_init) << '\n';
  o << "rescale_lambda = " << (c.rescale_lambda ? "true" : "false") << '\n';
  o << "exact_prox = " << (c.exact_prox ? "true" : "false") << '\n';
  o << "max_iter = " << c.max_iter << '\n';
  if (c.poly) {
    o << "poly = ";
    for (std::size_t i = 0; i < c.poly->coeffs().size(); ++i)
      o << (i ? "," : "") << format_double(c.poly->coeffs()[i]);
    o << '\n';
  }
  o << "\n[scheduler]\n";
  o << "kind = " << to_string(c.scheduler.kind) << '\n';
  o << "nu = " << format_double(c.scheduler.nu_const) << '\n';
  o << "nu_inf = " << format_double(c.scheduler.nu_inf) << '\n';
  o << "nu0 = " << format_double(c.scheduler.nu0) << '\n';
  o << "n_bt = " << c.scheduler.n_bt << '\n';
  o << "\n[regularizer]\n";
  o << "kind = " << to_string(rc.reg.kind) << '\n';
  o << "lambda = " << format_double(rc.reg.lambda) << '\n';
  return o.str();
}

}  // namespace pnpd
